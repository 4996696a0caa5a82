use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite entry at index {0}")]
    NonFinite(usize),

    #[error("energy domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operation not supported: {0}")]
    Unsupported(String),

    #[error("newton iteration did not converge in {iterations} iterations (best residual {best_residual:e})")]
    MaxIterationsExceeded { iterations: usize, best_residual: f64 },

    #[error("singular jacobian (pivot {pivot:e} below threshold {threshold:e})")]
    SingularJacobian { pivot: f64, threshold: f64 },

    #[error("step {index} failed: {source}")]
    Step { index: usize, source: Box<Error> },

    #[error("reference solution did not converge (last difference {0:e})")]
    ReferenceNotConverged(f64),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
