use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::s4::{s4_ad, s4_tau};
use super::{MaxIterPolicy, MethodKind, NewtonConfig, StepResult};
use crate::autodiff::{d2_dg_ad, Dual};
use crate::discrete_gradient::{dg_generic, DgKind};
use crate::error::{Error, Result};
use crate::finite_diff::fd_d2;
use crate::linalg::{lu_solve, norm2, Mat};
use crate::scalar::{lift, Scalar};
use crate::systems::{check_dim, EvalCounter, Hamiltonian, StateVector};

fn dg_of(method: MethodKind) -> Result<DgKind> {
    method.dg_kind().ok_or_else(|| Error::Unsupported(format!("{method} is not a discrete gradient method")))
}

/// `F(x̂) = x̂ − x − h·S̄·∇̄H(x, x̂)` together with the `S̄` it used.
///
/// `S̄` is `S` for the IA/SIA methods, `S₄^τ` for SIA4_DF and the exact `S₄`
/// for SIA4_AD.
pub fn residual<H: Hamiltonian + ?Sized>(
    system: &H,
    method: MethodKind,
    x: &[f64],
    xhat: &[f64],
    h: f64,
    cfg: &NewtonConfig,
    counter: &mut EvalCounter,
) -> Result<(Vec<f64>, Mat<f64>)> {
    let kind = dg_of(method)?;
    let g = dg_generic(kind, system, x, xhat, cfg.fd.tau1, counter)?;
    let sbar = match method {
        MethodKind::Sia4Df => s4_tau(system, x, xhat, h, &cfg.fd, counter)?.into_matrix(),
        MethodKind::Sia4Ad => s4_ad(system, x, xhat, h)?,
        _ => system.structure().matrix().clone(),
    };
    let f = combine(&sbar, x, xhat, &g, h);
    Ok((f, sbar))
}

fn combine<T: Scalar>(sbar: &Mat<T>, x: &[T], xhat: &[T], g: &[T], h: f64) -> Vec<T> {
    let sg = sbar.matvec(g);
    (0..x.len()).map(|i| xhat[i] - x[i] - sg[i] * h).collect()
}

/// Residual of a dual-number method evaluated in any scalar type.
fn residual_ad<T: Scalar, H: Hamiltonian + ?Sized>(
    system: &H,
    method: MethodKind,
    x: &[T],
    xhat: &[T],
    h: f64,
    tau1: f64,
    counter: &mut EvalCounter,
) -> Result<Vec<T>> {
    let kind = dg_of(method)?;
    let g = dg_generic(kind, system, x, xhat, tau1, counter)?;
    let sbar = match method {
        MethodKind::Sia4Ad | MethodKind::Sia4Df => s4_ad(system, x, xhat, h)?,
        _ => {
            let s = system.structure();
            Mat::from_fn(s.rows(), s.cols(), |i, j| T::cst(s[(i, j)]))
        }
    };
    Ok(combine(&sbar, x, xhat, &g, h))
}

/// Newton Jacobian for `method` at `x̂`, given the `S̄` of the same iterate.
///
/// * IA_DF / SIA_DF: `I − hS·D₂^τ∇̄H`
/// * SIA4_DF: `I − hS₄^τ·D₂^τ∇̄_SIA H` (the derivative of `S₄` is dropped)
/// * IA_AD / SIA_AD: `I − hS·D₂∇̄H` with dual numbers
/// * SIA4_AD: the exact Jacobian of `F`, including `∂S₄/∂x̂`, column by column
///   in dual arithmetic
#[allow(clippy::too_many_arguments)]
pub fn residual_jacobian<H: Hamiltonian + ?Sized>(
    system: &H,
    method: MethodKind,
    x: &[f64],
    xhat: &[f64],
    h: f64,
    sbar: &Mat<f64>,
    cfg: &NewtonConfig,
    counter: &mut EvalCounter,
) -> Result<Mat<f64>> {
    let kind = dg_of(method)?;
    let n = x.len();
    let d2 = match method {
        MethodKind::IaDf | MethodKind::SiaDf | MethodKind::Sia4Df => {
            fd_d2(kind, system, x, xhat, cfg.fd.tau1, counter)?
        }
        MethodKind::IaAd | MethodKind::SiaAd => d2_dg_ad(kind, system, x, xhat)?,
        MethodKind::Sia4Ad => return exact_jacobian(system, method, x, xhat, h, cfg.fd.tau1, counter),
        MethodKind::Rk4 => unreachable!("rejected by dg_of"),
    };
    Ok(Mat::identity(n).sub(&sbar.matmul(&d2).scale(h)))
}

fn exact_jacobian<H: Hamiltonian + ?Sized>(
    system: &H,
    method: MethodKind,
    x: &[f64],
    xhat: &[f64],
    h: f64,
    tau1: f64,
    counter: &mut EvalCounter,
) -> Result<Mat<f64>> {
    let n = x.len();
    let xd: Vec<Dual> = lift(x);
    let mut jac = Mat::zeros(n, n);
    for j in 0..n {
        let xh: Vec<Dual> =
            xhat.iter().enumerate().map(|(k, &v)| Dual::new(v, if k == j { 1.0 } else { 0.0 })).collect();
        let f = residual_ad(system, method, &xd, &xh, h, tau1, counter)?;
        for i in 0..n {
            jac[(i, j)] = f[i].deriv;
        }
    }
    Ok(jac)
}

/// Exact `F′(x̂)` of the fourth-order scheme (or of any dual-number method),
/// independent of the Jacobian approximation used by the solver.
pub fn exact_residual_jacobian<H: Hamiltonian + ?Sized>(
    system: &H,
    method: MethodKind,
    x: &[f64],
    xhat: &[f64],
    h: f64,
    tau1: f64,
) -> Result<Mat<f64>> {
    exact_jacobian(system, method, x, xhat, h, tau1, &mut EvalCounter::new())
}

/// Result of a single Newton update.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationOutcome {
    /// Residual norm at the iterate the update started from.
    pub residual: f64,
    pub next: Vec<f64>,
}

/// One Newton update `x̂ ← x̂ − F′(x̂)⁻¹F(x̂)`: residual, Jacobian and linear solve.
pub fn newton_iteration<H: Hamiltonian + ?Sized>(
    system: &H,
    method: MethodKind,
    x: &[f64],
    xhat: &[f64],
    h: f64,
    cfg: &NewtonConfig,
    counter: &mut EvalCounter,
) -> Result<IterationOutcome> {
    let (f, sbar) = residual(system, method, x, xhat, h, cfg, counter)?;
    let jac = residual_jacobian(system, method, x, xhat, h, &sbar, cfg, counter)?;
    let delta = lu_solve(&jac, &f)?;
    let next = xhat.iter().zip(&delta).map(|(a, d)| a - d).collect();
    Ok(IterationOutcome { residual: norm2(&f), next })
}

/// Solves one implicit step starting from `guess`.
///
/// Iterates until `‖F‖₂ ≤ tol`; gives up with
/// [`Error::MaxIterationsExceeded`] once `max_iter` updates have not sufficed.
pub fn newton_solve_from<H: Hamiltonian + ?Sized>(
    system: &H,
    method: MethodKind,
    x: &[f64],
    guess: &[f64],
    h: f64,
    cfg: &NewtonConfig,
    counter: &mut EvalCounter,
) -> Result<StepResult> {
    check_dim(system, x.len())?;
    check_dim(system, guess.len())?;
    if h == 0.0 {
        return Err(Error::InvalidParameter("time step must be nonzero".into()));
    }
    cfg.validate()?;
    let start = counter.total();
    let mut xhat = guess.to_vec();
    let mut best: Option<(f64, Vec<f64>, usize)> = None;
    for it in 0..=cfg.max_iter {
        let (f, sbar) = residual(system, method, x, &xhat, h, cfg, counter)?;
        let r = norm2(&f);
        if !r.is_finite() {
            return Err(Error::Domain(format!("non-finite residual at iteration {it}")));
        }
        if r <= cfg.tol {
            return Ok(StepResult {
                xnext: StateVector::new(xhat)?,
                iterations: it,
                residual: r,
                evals: counter.total() - start,
                converged: true,
            });
        }
        if best.as_ref().is_none_or(|b| r < b.0) {
            best = Some((r, xhat.clone(), it));
        }
        if it == cfg.max_iter {
            break;
        }
        let jac = residual_jacobian(system, method, x, &xhat, h, &sbar, cfg, counter)?;
        let delta = lu_solve(&jac, &f)?;
        for (a, d) in xhat.iter_mut().zip(&delta) {
            *a -= d;
        }
    }
    let (best_residual, best_x, _) = best.expect("at least one residual evaluated");
    match cfg.on_max_iter {
        MaxIterPolicy::Fail => Err(Error::MaxIterationsExceeded { iterations: cfg.max_iter, best_residual }),
        MaxIterPolicy::AcceptBest => Ok(StepResult {
            xnext: StateVector::new(best_x)?,
            iterations: cfg.max_iter,
            residual: best_residual,
            evals: counter.total() - start,
            converged: false,
        }),
    }
}

/// Solves one implicit step from the first-step initialization `x + hδ`.
pub fn newton_solve<H: Hamiltonian + ?Sized>(
    system: &H,
    method: MethodKind,
    x: &[f64],
    h: f64,
    cfg: &NewtonConfig,
    counter: &mut EvalCounter,
) -> Result<StepResult> {
    let guess = initial_guess(0, x, None, h, cfg.seed)?;
    newton_solve_from(system, method, x, &guess, h, cfg, counter)
}

/// Starting iterate for step `step_index`: `xₙ + hδ` with `δ ~ N(0, I)` on the
/// first step, linear extrapolation `2xₙ − xₙ₋₁` afterwards.
pub fn initial_guess(step_index: usize, x_n: &[f64], x_prev: Option<&[f64]>, h: f64, seed: u64) -> Result<StateVector> {
    match (step_index, x_prev) {
        (0, None) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let guess = x_n
                .iter()
                .map(|&v| {
                    let d: f64 = StandardNormal.sample(&mut rng);
                    v + h * d
                })
                .collect();
            StateVector::new(guess)
        }
        (k, Some(prev)) if k > 0 => {
            if prev.len() != x_n.len() {
                return Err(Error::DimensionMismatch { expected: x_n.len(), got: prev.len() });
            }
            StateVector::new(x_n.iter().zip(prev).map(|(a, b)| 2.0 * a - b).collect())
        }
        _ => Err(Error::InvalidParameter("previous state must be given exactly when step_index > 0".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{make_double_pendulum, make_harmonic};

    #[test]
    fn harmonic_sia_step_is_cayley_transform() {
        let sys = make_harmonic(2).unwrap();
        let mut c = EvalCounter::new();
        let r = newton_solve(&sys, MethodKind::SiaDf, &[1.0, 0.0], 0.2, &NewtonConfig::default(), &mut c).unwrap();
        let expected = [0.99 / 1.01, -0.2 / 1.01];
        assert!((r.xnext[0] - expected[0]).abs() < 1e-11);
        assert!((r.xnext[1] - expected[1]).abs() < 1e-11);
        let norm2sq = r.xnext[0].powi(2) + r.xnext[1].powi(2);
        assert!((norm2sq - 1.0).abs() < 1e-11);
    }

    #[test]
    fn initial_guess_rules() {
        let g0 = initial_guess(0, &[1.0, 2.0], None, 0.1, 5).unwrap();
        let g0b = initial_guess(0, &[1.0, 2.0], None, 0.1, 5).unwrap();
        assert_eq!(g0, g0b);
        assert!(g0[0] != 1.0 && g0[1] != 2.0);
        let g = initial_guess(3, &[2.0, 2.0], Some(&[1.0, 1.0]), 0.1, 5).unwrap();
        assert_eq!(*g, [3.0, 3.0]);
        let g = initial_guess(3, &[2.0, 2.0], Some(&[2.0, 2.0]), 0.1, 5).unwrap();
        assert_eq!(*g, [2.0, 2.0]);
        assert!(initial_guess(0, &[1.0], Some(&[1.0]), 0.1, 0).is_err());
        assert!(initial_guess(1, &[1.0], None, 0.1, 0).is_err());
    }

    #[test]
    fn sia4_df_converges_within_cap() {
        let dp = make_double_pendulum();
        let mut c = EvalCounter::new();
        let r = newton_solve(&dp, MethodKind::Sia4Df, &[0.1, 0.2, 0.25, -0.3], 0.05, &NewtonConfig::default(), &mut c)
            .unwrap();
        assert!(r.iterations <= 20);
        assert!(r.residual <= 1e-11);
    }

    #[test]
    fn step_conserves_energy_for_every_dgm() {
        let dp = make_double_pendulum();
        let x = [0.1, 0.2, 0.25, -0.3];
        let h0 = dp.energy(&x).unwrap();
        for m in MethodKind::ALL.into_iter().filter(|m| m.dg_kind().is_some()) {
            let mut c = EvalCounter::new();
            let r = newton_solve(&dp, m, &x, 0.05, &NewtonConfig::default(), &mut c).unwrap();
            let drift = (dp.energy(&r.xnext).unwrap() - h0).abs();
            assert!(drift < 1e-11 * 10.0, "{m}: {drift:e}");
        }
    }

    #[test]
    fn rejects_zero_step_and_rk4() {
        let sys = make_harmonic(2).unwrap();
        let mut c = EvalCounter::new();
        let cfg = NewtonConfig::default();
        assert!(newton_solve(&sys, MethodKind::SiaDf, &[1.0, 0.0], 0.0, &cfg, &mut c).is_err());
        assert!(matches!(
            newton_solve(&sys, MethodKind::Rk4, &[1.0, 0.0], 0.1, &cfg, &mut c),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn max_iterations_error_carries_best_residual() {
        let sys = make_double_pendulum();
        let mut c = EvalCounter::new();
        let cfg = NewtonConfig { max_iter: 1, tol: 1e-300, ..Default::default() };
        match newton_solve(&sys, MethodKind::SiaDf, &[0.1, 0.2, 0.25, -0.3], 0.05, &cfg, &mut c) {
            Err(Error::MaxIterationsExceeded { iterations, best_residual }) => {
                assert_eq!(iterations, 1);
                assert!(best_residual.is_finite());
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
