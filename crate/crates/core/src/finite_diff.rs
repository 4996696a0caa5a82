//! Derivative-free surrogates: the finite-difference Hessian, the midpoint-rule
//! Jacobian of the (symmetrized) Itoh–Abe discrete gradient in its second
//! argument, and step sizes matched to the evaluation precision.

use crate::discrete_gradient::{is_degenerate, shifted_point, DgKind};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::systems::{check_dim, eval_energy, EvalCounter, Hamiltonian};

/// Finite-difference steps and the assumed evaluation precision `ε̄`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FDConfig {
    /// Step for first derivatives (discrete-gradient Jacobian).
    pub tau1: f64,
    /// Step for the Hessian.
    pub tau2: f64,
    pub eps_bar: f64,
}

impl Default for FDConfig {
    /// `τ₁ = 10⁻⁵`, `τ₂ = 10⁻⁴` for double precision (`ε̄ = 10⁻¹⁵`).
    fn default() -> Self {
        FDConfig { tau1: 1e-5, tau2: 1e-4, eps_bar: 1e-15 }
    }
}

impl FDConfig {
    /// Steps minimizing the leading truncation-plus-noise error for `eps_bar`.
    pub fn from_precision(eps_bar: f64) -> Result<Self> {
        let (tau1, tau2) = optimal_steps(eps_bar)?;
        Ok(FDConfig { tau1, tau2, eps_bar })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau1 > 0.0 && self.tau1.is_finite()) || !(self.tau2 > 0.0 && self.tau2.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "finite difference steps must be positive, got tau1={} tau2={}",
                self.tau1, self.tau2
            )));
        }
        if !(self.eps_bar >= 0.0) {
            return Err(Error::InvalidParameter(format!("eps_bar must be >= 0, got {}", self.eps_bar)));
        }
        Ok(())
    }
}

/// `(ε̄^{1/3}, ε̄^{1/4})`: the minimizers of `τ² + ε̄/τ` and `τ² + ε̄/τ²`.
pub fn optimal_steps(eps_bar: f64) -> Result<(f64, f64)> {
    if !(eps_bar > 0.0) || !eps_bar.is_finite() {
        return Err(Error::InvalidParameter(format!("eps_bar must be > 0, got {eps_bar}")));
    }
    Ok((eps_bar.cbrt(), eps_bar.sqrt().sqrt()))
}

/// Evaluations used by [`fd_hessian`].
pub fn hessian_evals(n: usize) -> u64 {
    let n = n as u64;
    n * n + 3 * n + 1
}

/// Evaluations used by [`fd_d2_ia`].
pub fn d2_ia_evals(n: usize) -> u64 {
    let n = n as u64;
    2 * (n * n + n)
}

/// Evaluations used by [`fd_d2_sia`].
pub fn d2_sia_evals(n: usize, include_diagonal: bool) -> u64 {
    let n = n as u64;
    if include_diagonal {
        4 * (n * n + n)
    } else {
        4 * (n * n - n)
    }
}

/// Second-order Hessian approximation
/// `(2·𝟙𝟙ᵀH(x) + Δ₂ − Δ₁𝟙ᵀ − 𝟙Δ₁ᵀ) / 2τ²`.
///
/// `Δ₂` is evaluated on pairs `i ≤ j` (diagonal included) and mirrored, for a
/// total of `n² + 3n + 1` evaluations. The result is exactly symmetric.
pub fn fd_hessian<H: Hamiltonian + ?Sized>(
    system: &H,
    x: &[f64],
    tau2: f64,
    counter: &mut EvalCounter,
) -> Result<Mat<f64>> {
    check_dim(system, x.len())?;
    if !(tau2 > 0.0) {
        return Err(Error::InvalidParameter(format!("tau2 must be > 0, got {tau2}")));
    }
    let n = x.len();
    let mut p = x.to_vec();
    let h0 = eval_energy(system, &p, counter)?;
    let mut delta1 = vec![0.0; n];
    for i in 0..n {
        p[i] = x[i] + tau2;
        let fp = eval_energy(system, &p, counter)?;
        p[i] = x[i] - tau2;
        let fm = eval_energy(system, &p, counter)?;
        p[i] = x[i];
        delta1[i] = fp + fm;
    }
    let denom = 2.0 * tau2 * tau2;
    let mut hess = Mat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut step = |sign: f64| {
                let mut q = x.to_vec();
                q[i] += sign * tau2;
                q[j] += sign * tau2;
                eval_energy(system, &q, counter)
            };
            let delta2 = step(1.0)? + step(-1.0)?;
            let v = (2.0 * h0 + delta2 - delta1[i] - delta1[j]) / denom;
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    Ok(hess)
}

/// Which argument of `IA(a, b)` is being differentiated.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Wrt {
    A,
    B,
}

struct Partials<'a, H: ?Sized> {
    system: &'a H,
    tau: f64,
}

impl<H: Hamiltonian + ?Sized> Partials<'_, H> {
    /// Midpoint rule for `∂H/∂xⱼ` at `p`.
    fn first(&self, p: &[f64], j: usize, counter: &mut EvalCounter) -> Result<f64> {
        crate::discrete_gradient::central_partial(self.system, p, j, self.tau, counter)
    }

    /// Limit of the divided-difference derivative when the row step vanishes:
    /// `∂ᵢ∂ⱼH(p)` off the diagonal and `½∂ᵢ²H(p)` on it.
    fn degenerate_limit(&self, p: &[f64], i: usize, j: usize, counter: &mut EvalCounter) -> Result<f64> {
        let t = self.tau;
        let mut q = p.to_vec();
        if i == j {
            let f0 = eval_energy(self.system, p, counter)?;
            q[i] = p[i] + t;
            let fp = eval_energy(self.system, &q, counter)?;
            q[i] = p[i] - t;
            let fm = eval_energy(self.system, &q, counter)?;
            return Ok(0.5 * (fp - 2.0 * f0 + fm) / (t * t));
        }
        let mut corner = |si: f64, sj: f64| {
            q.copy_from_slice(p);
            q[i] += si * t;
            q[j] += sj * t;
            eval_energy(self.system, &q, counter)
        };
        let v = corner(1.0, 1.0)? - corner(1.0, -1.0)? - corner(-1.0, 1.0)? + corner(-1.0, -1.0)?;
        Ok(v / (4.0 * t * t))
    }
}

/// Adds `weight · ∂IA(a, b)/∂(wrt)` into `out`.
#[allow(clippy::too_many_arguments)]
fn add_half<H: Hamiltonian + ?Sized>(
    partials: &Partials<'_, H>,
    a: &[f64],
    b: &[f64],
    wrt: Wrt,
    include_diagonal: bool,
    weight: f64,
    counter: &mut EvalCounter,
    out: &mut Mat<f64>,
) -> Result<()> {
    let n = a.len();
    for i in 0..n {
        let p_hi = shifted_point(a, b, i + 1);
        let p_lo = shifted_point(a, b, i);
        let columns: Vec<usize> = match wrt {
            Wrt::B => (0..i).collect(),
            Wrt::A => (i + 1..n).collect(),
        };
        if is_degenerate(a[i], b[i]) {
            for &j in &columns {
                out[(i, j)] += weight * partials.degenerate_limit(&p_hi, i, j, counter)?;
            }
            if include_diagonal {
                out[(i, i)] += weight * partials.degenerate_limit(&p_hi, i, i, counter)?;
            }
            continue;
        }
        let d = b[i] - a[i];
        for &j in &columns {
            let v = partials.first(&p_hi, j, counter)? - partials.first(&p_lo, j, counter)?;
            out[(i, j)] += weight * v / d;
        }
        if include_diagonal {
            let comp =
                (eval_energy(partials.system, &p_hi, counter)? - eval_energy(partials.system, &p_lo, counter)?) / d;
            let v = match wrt {
                Wrt::B => partials.first(&p_hi, i, counter)? - comp,
                Wrt::A => comp - partials.first(&p_lo, i, counter)?,
            };
            out[(i, i)] += weight * v / d;
        }
    }
    Ok(())
}

fn check_tau1(tau1: f64) -> Result<()> {
    if !(tau1 > 0.0) {
        return Err(Error::InvalidParameter(format!("tau1 must be > 0, got {tau1}")));
    }
    Ok(())
}

/// Midpoint-rule approximation of `D₂∇̄_SIA H(x, x̂)`.
///
/// Uses `4(n² + n)` evaluations, or `4(n² − n)` when the diagonal is skipped
/// (its entries are then left at zero).
pub fn fd_d2_sia<H: Hamiltonian + ?Sized>(
    system: &H,
    x: &[f64],
    xhat: &[f64],
    tau1: f64,
    counter: &mut EvalCounter,
    include_diagonal: bool,
) -> Result<Mat<f64>> {
    check_dim(system, x.len())?;
    check_dim(system, xhat.len())?;
    check_tau1(tau1)?;
    let partials = Partials { system, tau: tau1 };
    let mut out = Mat::zeros(x.len(), x.len());
    add_half(&partials, x, xhat, Wrt::B, include_diagonal, 0.5, counter, &mut out)?;
    add_half(&partials, xhat, x, Wrt::A, include_diagonal, 0.5, counter, &mut out)?;
    Ok(out)
}

/// Midpoint-rule approximation of `D₂∇̄_IA H(x, x̂)`; `2(n² + n)` evaluations.
/// The result is lower triangular.
pub fn fd_d2_ia<H: Hamiltonian + ?Sized>(
    system: &H,
    x: &[f64],
    xhat: &[f64],
    tau1: f64,
    counter: &mut EvalCounter,
) -> Result<Mat<f64>> {
    check_dim(system, x.len())?;
    check_dim(system, xhat.len())?;
    check_tau1(tau1)?;
    let partials = Partials { system, tau: tau1 };
    let mut out = Mat::zeros(x.len(), x.len());
    add_half(&partials, x, xhat, Wrt::B, true, 1.0, counter, &mut out)?;
    Ok(out)
}

/// Full `D₂` approximation for the given discrete gradient, diagonal included.
pub fn fd_d2<H: Hamiltonian + ?Sized>(
    kind: DgKind,
    system: &H,
    x: &[f64],
    xhat: &[f64],
    tau1: f64,
    counter: &mut EvalCounter,
) -> Result<Mat<f64>> {
    match kind {
        DgKind::Ia => fd_d2_ia(system, x, xhat, tau1, counter),
        DgKind::Sia => fd_d2_sia(system, x, xhat, tau1, counter, true),
    }
}
