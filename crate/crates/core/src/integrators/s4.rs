use crate::autodiff::{d2_dg_ad, hess_ad};
use crate::discrete_gradient::DgKind;
use crate::error::Result;
use crate::finite_diff::{self, fd_d2_sia, fd_hessian, FDConfig};
use crate::linalg::Mat;
use crate::scalar::Scalar;
use crate::systems::{check_dim, EvalCounter, Hamiltonian, SkewMatrix};

/// `Q = ½(D₂ᵀ − D₂)`, exactly skew-symmetric.
pub fn q_matrix(d2: &Mat<f64>) -> SkewMatrix {
    assert!(d2.is_square(), "q_matrix needs a square matrix");
    SkewMatrix::from_skew_part(&d2.transpose())
}

fn q_generic<T: Scalar>(d2: &Mat<T>) -> Mat<T> {
    d2.transpose().skew_part()
}

/// Energy evaluations of one [`s4_tau`] call: a Hessian plus two off-diagonal
/// discrete-gradient Jacobians.
pub fn s4_tau_evals(n: usize) -> u64 {
    finite_diff::hessian_evals(n) + 2 * finite_diff::d2_sia_evals(n, false)
}

/// The fourth-order structure matrix
///
/// ```text
/// S₄ = S + (h/2)·S[Q(x, (x+2x̂)/3) − Q(x̂, (2x+x̂)/3)]S − (h²/12)·S∇²H(x̄)S∇²H(x̄)S
/// ```
///
/// with `x̄ = (x+x̂)/2`, over any scalar type and with pluggable providers for
/// `D₂∇̄H` and `∇²H`. The result is projected onto its skew part entrywise so
/// that `S₄ᵀ = −S₄` holds bit for bit.
pub fn s4_generic<T: Scalar>(
    structure: &Mat<f64>,
    x: &[T],
    xhat: &[T],
    h: f64,
    mut d2: impl FnMut(&[T], &[T]) -> Result<Mat<T>>,
    mut hess: impl FnMut(&[T]) -> Result<Mat<T>>,
) -> Result<Mat<T>> {
    let n = structure.rows();
    let s: Mat<T> = Mat::from_fn(n, n, |i, j| T::cst(structure[(i, j)]));
    let third: Vec<T> = x.iter().zip(xhat).map(|(&a, &b)| (a + b * 2.0) / 3.0).collect();
    let two_thirds: Vec<T> = x.iter().zip(xhat).map(|(&a, &b)| (a * 2.0 + b) / 3.0).collect();
    let mid: Vec<T> = x.iter().zip(xhat).map(|(&a, &b)| (a + b) * 0.5).collect();

    let q1 = q_generic(&d2(x, &third)?);
    let q2 = q_generic(&d2(xhat, &two_thirds)?);
    let first = s.matmul(&q1.sub(&q2)).matmul(&s).scale(T::cst(h / 2.0));

    let hm = hess(&mid)?;
    let shs = s.matmul(&hm).matmul(&s);
    let second = shs.matmul(&hm).matmul(&s).scale(T::cst(h * h / 12.0));

    Ok(s.add(&first).sub(&second).skew_part())
}

/// `S₄` with caller-supplied derivative providers.
pub fn s4<H: Hamiltonian + ?Sized>(
    system: &H,
    x: &[f64],
    xhat: &[f64],
    h: f64,
    d2_provider: impl FnMut(&[f64], &[f64]) -> Result<Mat<f64>>,
    hess_provider: impl FnMut(&[f64]) -> Result<Mat<f64>>,
) -> Result<SkewMatrix> {
    check_dim(system, x.len())?;
    check_dim(system, xhat.len())?;
    let m = s4_generic(system.structure(), x, xhat, h, d2_provider, hess_provider)?;
    Ok(SkewMatrix::from_skew_part(&m))
}

/// `S₄` with exact (dual-number) derivatives; generic so it can itself be
/// differentiated.
pub fn s4_ad<T: Scalar, H: Hamiltonian + ?Sized>(system: &H, x: &[T], xhat: &[T], h: f64) -> Result<Mat<T>> {
    check_dim(system, x.len())?;
    check_dim(system, xhat.len())?;
    s4_generic(system.structure(), x, xhat, h, |a, b| d2_dg_ad(DgKind::Sia, system, a, b), |m| hess_ad(system, m))
}

/// `S₄^τ`: `S₄` with the finite-difference Hessian (step `τ₂`) and the
/// off-diagonal finite-difference SIA Jacobian (step `τ₁`).
/// Uses exactly `9n² − 5n + 1` evaluations.
pub fn s4_tau<H: Hamiltonian + ?Sized>(
    system: &H,
    x: &[f64],
    xhat: &[f64],
    h: f64,
    fd: &FDConfig,
    counter: &mut EvalCounter,
) -> Result<SkewMatrix> {
    fd.validate()?;
    check_dim(system, x.len())?;
    check_dim(system, xhat.len())?;
    // Both providers need the counter; run them through a shared cell.
    let counter_cell = std::cell::RefCell::new(counter);
    let m = s4_generic(
        system.structure(),
        x,
        xhat,
        h,
        |a, b| fd_d2_sia(system, a, b, fd.tau1, &mut counter_cell.borrow_mut(), false),
        |m| fd_hessian(system, m, fd.tau2, &mut counter_cell.borrow_mut()),
    )?;
    Ok(SkewMatrix::from_skew_part(&m))
}
