use crate::autodiff::grad_ad;
use crate::error::{Error, Result};
use crate::linalg::norm2;
use crate::systems::{check_dim, EvalCounter, Hamiltonian, StateVector};

fn vector_field<H: Hamiltonian + ?Sized>(system: &H, x: &[f64], counter: &mut EvalCounter) -> Result<Vec<f64>> {
    let grad = match system.analytic_gradient(x) {
        Some(g) => g,
        None => {
            let g = grad_ad(system, x)?;
            counter.add_dual(x.len() as u64);
            g
        }
    };
    Ok(system.structure().matvec(&grad))
}

/// Classic four-stage Runge–Kutta step for `ẋ = S∇H(x)`, counting gradient
/// evaluations done in dual arithmetic.
pub fn rk4_step_counted<H: Hamiltonian + ?Sized>(
    system: &H,
    x: &[f64],
    h: f64,
    counter: &mut EvalCounter,
) -> Result<StateVector> {
    check_dim(system, x.len())?;
    let axpy = |a: &[f64], s: f64, b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(u, v)| u + s * v).collect() };
    let k1 = vector_field(system, x, counter)?;
    let k2 = vector_field(system, &axpy(x, h / 2.0, &k1), counter)?;
    let k3 = vector_field(system, &axpy(x, h / 2.0, &k2), counter)?;
    let k4 = vector_field(system, &axpy(x, h, &k3), counter)?;
    let next = (0..x.len()).map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect();
    StateVector::new(next)
}

pub fn rk4_step<H: Hamiltonian + ?Sized>(system: &H, x: &[f64], h: f64) -> Result<StateVector> {
    rk4_step_counted(system, x, h, &mut EvalCounter::new())
}

/// `x(T)` by RK4 with repeated step halving, until two successive refinements
/// differ by less than `10⁻¹²` in the Euclidean norm.
pub fn reference_solution<H: Hamiltonian + ?Sized>(system: &H, x0: &[f64], t_end: f64) -> Result<StateVector> {
    check_dim(system, x0.len())?;
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidParameter(format!("end time must be > 0, got {t_end}")));
    }
    const TOL: f64 = 1e-12;
    const MAX_STEPS: usize = 1 << 22;
    let solve = |steps: usize| -> Result<Vec<f64>> {
        let h = t_end / steps as f64;
        let mut x = x0.to_vec();
        for _ in 0..steps {
            x = rk4_step(system, &x, h)?.into_inner();
        }
        Ok(x)
    };
    let mut steps = 64usize.max((t_end / 0.05).ceil() as usize);
    let mut prev = solve(steps)?;
    let mut diff = f64::INFINITY;
    while steps < MAX_STEPS {
        steps *= 2;
        let cur = solve(steps)?;
        diff = norm2(&cur.iter().zip(&prev).map(|(a, b)| a - b).collect::<Vec<_>>());
        prev = cur;
        if diff < TOL {
            return StateVector::new(prev);
        }
    }
    Err(Error::ReferenceNotConverged(diff))
}
