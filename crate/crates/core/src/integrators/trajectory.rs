use super::newton::{initial_guess, newton_solve_from};
use super::rk4::rk4_step_counted;
use super::{MethodKind, NewtonConfig};
use crate::error::{Error, Result};
use crate::systems::{check_dim, eval_energy, EvalCounter, Hamiltonian, StateVector};

/// A fixed-step run: `states[k] ≈ x(times[k])`, `k = 0..=N`.
///
/// Per-step vectors are indexed by state; entry 0 belongs to the initial state
/// and holds zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub method: MethodKind,
    pub h: f64,
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub iterations: Vec<usize>,
    pub residuals: Vec<f64>,
    /// Cumulative energy evaluations (plain and dual) after each step.
    pub evals_cum: Vec<u64>,
    pub energies: Vec<f64>,
    /// False for steps accepted at the iteration cap.
    pub converged: Vec<bool>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn steps(&self) -> usize {
        self.states.len().saturating_sub(1)
    }

    pub fn last(&self) -> &StateVector {
        self.states.last().expect("trajectory holds the initial state")
    }

    /// `max |H(xₙ) − H(x₀)|`.
    pub fn max_energy_drift(&self) -> f64 {
        let e0 = self.energies[0];
        self.energies.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max)
    }

    /// Steps accepted without reaching the Newton tolerance.
    pub fn unconverged_steps(&self) -> usize {
        self.converged.iter().filter(|c| !**c).count()
    }

    pub fn total_evals(&self) -> u64 {
        self.evals_cum.last().copied().unwrap_or(0)
    }
}

/// Runs `n_steps` steps of `method` with step `h` from `x0`.
pub fn integrate<H: Hamiltonian + ?Sized>(
    system: &H,
    method: MethodKind,
    x0: &[f64],
    h: f64,
    n_steps: usize,
    cfg: &NewtonConfig,
) -> Result<Trajectory> {
    check_dim(system, x0.len())?;
    if n_steps == 0 {
        return Err(Error::InvalidParameter("number of steps must be >= 1".into()));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!("time step must be > 0, got {h}")));
    }
    cfg.validate()?;
    let x0 = StateVector::new(x0.to_vec())?;
    let mut scratch = EvalCounter::new();
    let e0 = eval_energy(system, &x0[..], &mut scratch)?;

    let mut traj = Trajectory {
        method,
        h,
        times: Vec::with_capacity(n_steps + 1),
        states: Vec::with_capacity(n_steps + 1),
        iterations: Vec::with_capacity(n_steps + 1),
        residuals: Vec::with_capacity(n_steps + 1),
        evals_cum: Vec::with_capacity(n_steps + 1),
        energies: Vec::with_capacity(n_steps + 1),
        converged: Vec::with_capacity(n_steps + 1),
    };
    traj.times.push(0.0);
    traj.states.push(x0);
    traj.iterations.push(0);
    traj.residuals.push(0.0);
    traj.evals_cum.push(0);
    traj.energies.push(e0);
    traj.converged.push(true);

    let mut counter = EvalCounter::new();
    for k in 0..n_steps {
        let wrap = |e: Error| Error::Step { index: k, source: Box::new(e) };
        let x = &traj.states[k];
        let (next, iters, res, ok) = if method == MethodKind::Rk4 {
            (rk4_step_counted(system, x, h, &mut counter).map_err(wrap)?, 0, 0.0, true)
        } else {
            let prev = if k == 0 { None } else { Some(&traj.states[k - 1][..]) };
            let guess = initial_guess(k, x, prev, h, cfg.seed).map_err(wrap)?;
            let r = newton_solve_from(system, method, x, &guess, h, cfg, &mut counter).map_err(wrap)?;
            (r.xnext, r.iterations, r.residual, r.converged)
        };
        let e = eval_energy(system, &next[..], &mut scratch).map_err(wrap)?;
        traj.times.push((k + 1) as f64 * h);
        traj.states.push(next);
        traj.iterations.push(iters);
        traj.residuals.push(res);
        traj.evals_cum.push(counter.total());
        traj.energies.push(e);
        traj.converged.push(ok);
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{make_harmonic, make_lennard_jones};

    #[test]
    fn harmonic_sia_conserves_energy() {
        let sys = make_harmonic(2).unwrap();
        let t = integrate(&sys, MethodKind::SiaDf, &[1.0, 0.0], 0.1, 1000, &NewtonConfig::default()).unwrap();
        assert_eq!(t.len(), 1001);
        assert!(t.max_energy_drift() <= 1e-10, "drift {}", t.max_energy_drift());
        assert!((t.times[1000] - 100.0).abs() < 1e-9);
    }

    #[test]
    fn lennard_jones_sia4_df_runs() {
        let lj = make_lennard_jones();
        let t = integrate(&lj, MethodKind::Sia4Df, &[1.21, 0.34], 0.01, 100, &NewtonConfig::default()).unwrap();
        assert_eq!(t.steps(), 100);
        assert!(t.iterations.iter().all(|&i| i <= 20));
        assert!(t.evals_cum.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn zero_steps_rejected() {
        let sys = make_harmonic(2).unwrap();
        assert!(integrate(&sys, MethodKind::SiaDf, &[1.0, 0.0], 0.1, 0, &NewtonConfig::default()).is_err());
    }

    #[test]
    fn step_failures_carry_index() {
        let lj = make_lennard_jones();
        let cfg = NewtonConfig { max_iter: 1, ..Default::default() };
        match integrate(&lj, MethodKind::SiaDf, &[1.21, 0.34], 0.05, 5, &cfg) {
            Err(Error::Step { index, .. }) => assert_eq!(index, 0),
            other => panic!("expected step error, got {other:?}"),
        }
    }

    #[test]
    fn rk4_trajectory() {
        let sys = make_harmonic(2).unwrap();
        let t = integrate(&sys, MethodKind::Rk4, &[1.0, 0.0], 0.01, 100, &NewtonConfig::default()).unwrap();
        assert!((t.last()[0] - 1f64.cos()).abs() < 1e-9);
        assert_eq!(t.total_evals(), 0);
    }
}
