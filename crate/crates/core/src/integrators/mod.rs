//! Time stepping: discrete gradient methods with constant `S`, the fourth-order
//! correction `S₄` (exact or finite-difference), Newton solvers, and classic RK4
//! as a derivative-based comparator.

mod newton;
mod rk4;
mod s4;
mod trajectory;

use std::fmt;
use std::str::FromStr;

use crate::discrete_gradient::DgKind;
use crate::error::{Error, Result};
use crate::finite_diff::{self, FDConfig};

pub use newton::{
    exact_residual_jacobian, initial_guess, newton_iteration, newton_solve, newton_solve_from, residual,
    residual_jacobian, IterationOutcome,
};
pub use rk4::{reference_solution, rk4_step, rk4_step_counted};
pub use s4::{q_matrix, s4, s4_ad, s4_generic, s4_tau, s4_tau_evals};
pub use trajectory::{integrate, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MethodKind {
    IaDf,
    SiaDf,
    Sia4Df,
    IaAd,
    SiaAd,
    Sia4Ad,
    Rk4,
}

impl MethodKind {
    pub const ALL: [MethodKind; 7] = [
        MethodKind::IaDf,
        MethodKind::SiaDf,
        MethodKind::Sia4Df,
        MethodKind::IaAd,
        MethodKind::SiaAd,
        MethodKind::Sia4Ad,
        MethodKind::Rk4,
    ];

    pub fn label(self) -> &'static str {
        match self {
            MethodKind::IaDf => "IA_DF",
            MethodKind::SiaDf => "SIA_DF",
            MethodKind::Sia4Df => "SIA4_DF",
            MethodKind::IaAd => "IA_AD",
            MethodKind::SiaAd => "SIA_AD",
            MethodKind::Sia4Ad => "SIA4_AD",
            MethodKind::Rk4 => "RK4",
        }
    }

    /// Discrete gradient used by the method; `None` for RK4.
    pub fn dg_kind(self) -> Option<DgKind> {
        match self {
            MethodKind::IaDf | MethodKind::IaAd => Some(DgKind::Ia),
            MethodKind::SiaDf | MethodKind::SiaAd | MethodKind::Sia4Df | MethodKind::Sia4Ad => Some(DgKind::Sia),
            MethodKind::Rk4 => None,
        }
    }

    /// True when no analytic or dual-number derivative of `H` is used.
    pub fn is_derivative_free(self) -> bool {
        matches!(self, MethodKind::IaDf | MethodKind::SiaDf | MethodKind::Sia4Df)
    }

    pub fn is_fourth_order_dgm(self) -> bool {
        matches!(self, MethodKind::Sia4Df | MethodKind::Sia4Ad)
    }

    pub fn order(self) -> u32 {
        match self {
            MethodKind::IaDf | MethodKind::IaAd => 1,
            MethodKind::SiaDf | MethodKind::SiaAd => 2,
            MethodKind::Sia4Df | MethodKind::Sia4Ad | MethodKind::Rk4 => 4,
        }
    }

    /// Plain energy evaluations consumed by one Newton iteration (residual,
    /// Jacobian and update) of a derivative-free method.
    pub fn evals_per_iteration(self, n: usize) -> Option<u64> {
        let m = n as u64;
        match self {
            MethodKind::IaDf => Some(2 * m * m + 4 * m),
            MethodKind::SiaDf => Some(4 * m * m + 8 * m),
            MethodKind::Sia4Df => Some(13 * m * m + 3 * m + 1),
            _ => None,
        }
    }

    /// Plain energy evaluations of one residual, i.e. the final convergence check.
    pub fn evals_per_residual(self, n: usize) -> Option<u64> {
        let dg = self.dg_kind()?.evals_per_call(n);
        match self {
            MethodKind::IaDf | MethodKind::SiaDf => Some(dg),
            MethodKind::Sia4Df => Some(dg + s4_tau_evals(n)),
            _ => None,
        }
    }

    /// Component-wise sum behind [`Self::evals_per_iteration`].
    pub fn evals_breakdown(self, n: usize) -> Option<(u64, u64, u64)> {
        let dg = self.dg_kind()?.evals_per_call(n);
        match self {
            MethodKind::IaDf => Some((dg, finite_diff::d2_ia_evals(n), 0)),
            MethodKind::SiaDf => Some((dg, finite_diff::d2_sia_evals(n, true), 0)),
            MethodKind::Sia4Df => Some((dg, finite_diff::d2_sia_evals(n, true), s4_tau_evals(n))),
            _ => None,
        }
    }
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for MethodKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s.trim().to_ascii_uppercase().replace('-', "_");
        MethodKind::ALL
            .into_iter()
            .find(|m| m.label() == norm)
            .ok_or_else(|| Error::Config(format!("unknown method '{s}'")))
    }
}

/// What a step does when `max_iter` updates leave `‖F‖ > tol`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MaxIterPolicy {
    /// Return [`Error::MaxIterationsExceeded`].
    #[default]
    Fail,
    /// Stop and keep the iterate with the smallest residual seen; the step is
    /// marked as not converged.
    AcceptBest,
}

impl FromStr for MaxIterPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "fail" => Ok(MaxIterPolicy::Fail),
            "accept" | "accept-best" => Ok(MaxIterPolicy::AcceptBest),
            _ => Err(Error::Config(format!("unknown max-iteration policy '{s}'"))),
        }
    }
}

impl fmt::Display for MaxIterPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MaxIterPolicy::Fail => "fail",
            MaxIterPolicy::AcceptBest => "accept",
        })
    }
}

/// Newton settings. Defaults: `tol = 10⁻¹¹`, at most 20 iterations, fail
/// when that does not suffice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub fd: FDConfig,
    pub on_max_iter: MaxIterPolicy,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig { tol: 1e-11, max_iter: 20, seed: 0, fd: FDConfig::default(), on_max_iter: MaxIterPolicy::Fail }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tol must be > 0, got {}", self.tol)));
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidParameter("max_iter must be >= 1".into()));
        }
        self.fd.validate()
    }
}

/// Outcome of one implicit step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub xnext: crate::systems::StateVector,
    /// Newton updates performed.
    pub iterations: usize,
    /// Residual norm at `xnext`.
    pub residual: f64,
    /// Energy evaluations used, plain and dual.
    pub evals: u64,
    /// False when the step stopped at `max_iter` under [`MaxIterPolicy::AcceptBest`].
    pub converged: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_labels_round_trip() {
        for m in MethodKind::ALL {
            assert_eq!(m.label().parse::<MethodKind>().unwrap(), m);
        }
        assert_eq!("sia4-df".parse::<MethodKind>().unwrap(), MethodKind::Sia4Df);
        assert!("euler".parse::<MethodKind>().is_err());
    }

    #[test]
    fn per_iteration_counts() {
        assert_eq!(MethodKind::IaDf.evals_per_iteration(4), Some(48));
        assert_eq!(MethodKind::SiaDf.evals_per_iteration(4), Some(96));
        assert_eq!(MethodKind::Sia4Df.evals_per_iteration(4), Some(221));
        assert_eq!(MethodKind::IaDf.evals_per_iteration(2), Some(16));
        assert_eq!(MethodKind::SiaDf.evals_per_iteration(2), Some(32));
        assert_eq!(MethodKind::Sia4Df.evals_per_iteration(2), Some(59));
        for n in [2usize, 4, 6] {
            for m in [MethodKind::IaDf, MethodKind::SiaDf, MethodKind::Sia4Df] {
                let (a, b, c) = m.evals_breakdown(n).unwrap();
                assert_eq!(a + b + c, m.evals_per_iteration(n).unwrap());
            }
        }
    }

    #[test]
    fn config_validation() {
        assert!(NewtonConfig::default().validate().is_ok());
        assert!(NewtonConfig { tol: 0.0, ..Default::default() }.validate().is_err());
        assert!(NewtonConfig { max_iter: 0, ..Default::default() }.validate().is_err());
    }
}
