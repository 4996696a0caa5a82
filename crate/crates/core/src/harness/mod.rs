//! Experiment driver behind the `dfdg` command line tool: convergence, energy
//! drift, evaluation counts, inexactness and work-precision studies, plus the
//! terrain demo. Every command produces CSV text with the configuration echoed
//! as `#` comment lines.

mod commands;
mod config;

pub use commands::{
    cmd_converge, cmd_counts, cmd_energy_drift, cmd_inexactness, cmd_integrate, cmd_terrain, cmd_work_precision,
    fit_slope, inexactness_h_grid, ConvergeReport, ConvergeRow, CountRow, DriftReport, InexactnessRow, TerrainReport,
    WorkRow, FIT_THRESHOLD,
};
pub use config::{ExperimentConfig, CONFIG_KEYS, DEFAULT_SYNTH_SEED};

use crate::error::Result;

/// Named CSV document produced by a command.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvFile {
    /// Suffix added to the output path; `None` for the primary file.
    pub suffix: Option<&'static str>,
    pub content: String,
}

/// What a command hands back to the caller.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub files: Vec<CsvFile>,
    /// Human-readable summary lines.
    pub summary: Vec<String>,
    /// `Some(reason)` when a checked property did not hold.
    pub failure: Option<String>,
}

impl CommandOutput {
    pub fn primary(&self) -> &str {
        &self.files[0].content
    }
}

pub(crate) fn csv_document(echo: &str, header: &[String], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let body = w.into_inner().map_err(|e| crate::error::Error::Io(e.to_string()))?;
    let mut out = echo.to_string();
    out.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
    Ok(out)
}

/// Shortest text that parses back to the same `f64`.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}
