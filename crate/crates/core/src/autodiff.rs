//! Forward-mode differentiation with nestable dual numbers.
//!
//! `Dual<f64>` carries one directional derivative. `Dual<Dual<f64>>` is a
//! two-direction second-order jet (see [`Dual2`]); nesting further gives higher
//! derivatives, which the exact Newton Jacobian of the fourth-order scheme needs.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::discrete_gradient::{self, DgKind};
use crate::error::Result;
use crate::linalg::Mat;
use crate::scalar::Scalar;
use crate::systems::Hamiltonian;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual<T = f64> {
    pub value: T,
    pub deriv: T,
}

/// Second-order jet in two directions: `value`, `d1`, `d2`, `d12`.
pub type Dual2 = Dual<Dual<f64>>;

impl<T: Scalar> Dual<T> {
    pub fn new(value: T, deriv: T) -> Self {
        Dual { value, deriv }
    }

    pub fn constant(value: T) -> Self {
        Dual { value, deriv: T::zero() }
    }

    pub fn variable(value: T) -> Self {
        Dual { value, deriv: T::one() }
    }
}

impl Dual2 {
    /// Jet of `f` at `value` seeded along directions `d1` and `d2`.
    pub fn jet(value: f64, d1: f64, d2: f64) -> Self {
        Dual { value: Dual::new(value, d1), deriv: Dual::new(d2, 0.0) }
    }

    pub fn d1(&self) -> f64 {
        self.value.deriv
    }

    pub fn d2(&self) -> f64 {
        self.deriv.value
    }

    pub fn d12(&self) -> f64 {
        self.deriv.deriv
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Dual { value: self.value + o.value, deriv: self.deriv + o.deriv }
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Dual { value: self.value - o.value, deriv: self.deriv - o.deriv }
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Dual { value: self.value * o.value, deriv: self.value * o.deriv + self.deriv * o.value }
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let q = self.value / o.value;
        Dual { value: q, deriv: (self.deriv - q * o.deriv) / o.value }
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Dual { value: -self.value, deriv: -self.deriv }
    }
}

impl<T: Scalar> Add<f64> for Dual<T> {
    type Output = Self;
    #[inline]
    fn add(self, c: f64) -> Self {
        Dual { value: self.value + c, deriv: self.deriv }
    }
}

impl<T: Scalar> Sub<f64> for Dual<T> {
    type Output = Self;
    #[inline]
    fn sub(self, c: f64) -> Self {
        Dual { value: self.value - c, deriv: self.deriv }
    }
}

impl<T: Scalar> Mul<f64> for Dual<T> {
    type Output = Self;
    #[inline]
    fn mul(self, c: f64) -> Self {
        Dual { value: self.value * c, deriv: self.deriv * c }
    }
}

impl<T: Scalar> Div<f64> for Dual<T> {
    type Output = Self;
    #[inline]
    fn div(self, c: f64) -> Self {
        Dual { value: self.value / c, deriv: self.deriv / c }
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    const DEPTH: u32 = T::DEPTH + 1;

    fn cst(c: f64) -> Self {
        Dual::constant(T::cst(c))
    }

    fn value(&self) -> f64 {
        self.value.value()
    }

    fn sin(self) -> Self {
        Dual { value: self.value.sin(), deriv: self.deriv * self.value.cos() }
    }

    fn cos(self) -> Self {
        Dual { value: self.value.cos(), deriv: -(self.deriv * self.value.sin()) }
    }

    fn exp(self) -> Self {
        let e = self.value.exp();
        Dual { value: e, deriv: self.deriv * e }
    }

    fn ln(self) -> Self {
        Dual { value: self.value.ln(), deriv: self.deriv / self.value }
    }

    fn sqrt(self) -> Self {
        let s = self.value.sqrt();
        Dual { value: s, deriv: self.deriv / (s * 2.0) }
    }

    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::one();
        }
        Dual { value: self.value.powi(n), deriv: self.deriv * self.value.powi(n - 1) * f64::from(n) }
    }
}

/// Derivative of a scalar function of one variable.
pub fn derivative(f: impl Fn(Dual) -> Dual, x: f64) -> f64 {
    f(Dual::variable(x)).deriv
}

/// Exact gradient of the energy at `x`; one dual evaluation per coordinate.
pub fn grad_ad<T: Scalar, H: Hamiltonian + ?Sized>(system: &H, x: &[T]) -> Result<Vec<T>> {
    crate::systems::check_dim(system, x.len())?;
    let n = x.len();
    let mut seeded: Vec<Dual<T>> = x.iter().map(|&v| Dual::constant(v)).collect();
    let mut grad = Vec::with_capacity(n);
    for i in 0..n {
        seeded[i].deriv = T::one();
        grad.push(crate::systems::checked_energy(system, &seeded)?.deriv);
        seeded[i].deriv = T::zero();
    }
    Ok(grad)
}

/// Exact Hessian. Each `(i, j)` entry is the cross term of a second-order jet;
/// the result is the average of the `(i, j)` and `(j, i)` jets.
pub fn hess_ad<T: Scalar, H: Hamiltonian + ?Sized>(system: &H, x: &[T]) -> Result<Mat<T>> {
    crate::systems::check_dim(system, x.len())?;
    let n = x.len();
    let mut raw = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            raw[(i, j)] = second_partial(system, x, i, j)?;
        }
    }
    Ok(raw.sym_part())
}

/// `∂²H/∂xᵢ∂xⱼ` at `x` from one second-order jet.
pub(crate) fn second_partial<T: Scalar, H: Hamiltonian + ?Sized>(system: &H, x: &[T], i: usize, j: usize) -> Result<T> {
    let seeded: Vec<Dual<Dual<T>>> = x
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let d1 = if k == i { T::one() } else { T::zero() };
            let d2 = if k == j { T::one() } else { T::zero() };
            Dual { value: Dual::new(v, d1), deriv: Dual::new(d2, T::zero()) }
        })
        .collect();
    Ok(crate::systems::checked_energy(system, &seeded)?.deriv.deriv)
}

/// Exact Jacobian of a discrete gradient with respect to its second argument.
///
/// Columns come from running the discrete-gradient formulas in dual arithmetic.
/// Rows whose coordinate step is degenerate use the limiting value of the
/// divided difference, built from exact second partials.
pub fn d2_dg_ad<T: Scalar, H: Hamiltonian + ?Sized>(kind: DgKind, system: &H, x: &[T], xhat: &[T]) -> Result<Mat<T>> {
    crate::systems::check_dim(system, x.len())?;
    crate::systems::check_dim(system, xhat.len())?;
    let n = x.len();
    let weight = match kind {
        DgKind::Ia => 1.0,
        DgKind::Sia => 0.5,
    };
    let mut out = Mat::zeros(n, n);

    // First half: IA(x, x̂), differentiated in x̂ (its `b` argument).
    add_half_ad(system, x, xhat, HalfArg::B, weight, &mut out)?;
    if kind == DgKind::Sia {
        // Second half: IA(x̂, x), differentiated in x̂ (its `a` argument).
        add_half_ad(system, xhat, x, HalfArg::A, weight, &mut out)?;
    }
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum HalfArg {
    A,
    B,
}

fn add_half_ad<T: Scalar, H: Hamiltonian + ?Sized>(
    system: &H,
    a: &[T],
    b: &[T],
    wrt: HalfArg,
    weight: f64,
    out: &mut Mat<T>,
) -> Result<()> {
    let n = a.len();
    let degenerate: Vec<bool> = (0..n).map(|i| discrete_gradient::is_degenerate(a[i].value(), b[i].value())).collect();

    for j in 0..n {
        let da: Vec<Dual<T>> = a
            .iter()
            .enumerate()
            .map(|(k, &v)| Dual::new(v, if wrt == HalfArg::A && k == j { T::one() } else { T::zero() }))
            .collect();
        let db: Vec<Dual<T>> = b
            .iter()
            .enumerate()
            .map(|(k, &v)| Dual::new(v, if wrt == HalfArg::B && k == j { T::one() } else { T::zero() }))
            .collect();
        for i in 0..n {
            // Structural zeros: P_m depends on bₖ for k < m and on aₖ for k ≥ m.
            let touches = match wrt {
                HalfArg::B => j <= i,
                HalfArg::A => j >= i,
            };
            if !touches {
                continue;
            }
            let entry = if degenerate[i] {
                let p = discrete_gradient::shifted_point(a, b, i + 1);
                let d = second_partial(system, &p, i, j)?;
                if i == j {
                    d * 0.5
                } else {
                    d
                }
            } else {
                let hi = crate::systems::checked_energy(system, &discrete_gradient::shifted_point(&da, &db, i + 1))?;
                let lo = crate::systems::checked_energy(system, &discrete_gradient::shifted_point(&da, &db, i))?;
                ((hi - lo) / (db[i] - da[i])).deriv
            };
            out[(i, j)] = out[(i, j)] + entry * weight;
        }
    }
    Ok(())
}
