//! Hamiltonian systems, structure matrices, noisy evaluation and evaluation counting.

use std::fmt;
use std::ops::Deref;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalar::{values, Scalar};
use crate::terrain::TopographicHamiltonian;

/// A point of phase space. Entries are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(Vec<f64>);

impl StateVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if let Some(i) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(StateVector(entries))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for StateVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for StateVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        StateVector::new(v)
    }
}

/// Constant skew-symmetric structure matrix (`Sᵀ = −S` entrywise).
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrix(Mat<f64>);

impl SkewMatrix {
    /// `[[0, I], [−I, 0]]` of size `n` (even).
    pub fn canonical(n: usize) -> Result<Self> {
        if n == 0 || !n.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!("canonical structure needs even n, got {n}")));
        }
        let d = n / 2;
        Ok(SkewMatrix(Mat::from_fn(n, n, |i, j| {
            if j == i + d {
                1.0
            } else if i == j + d {
                -1.0
            } else {
                0.0
            }
        })))
    }

    pub fn new(m: Mat<f64>) -> Result<Self> {
        if !m.is_skew() {
            return Err(Error::InvalidParameter("matrix is not skew-symmetric".into()));
        }
        Ok(SkewMatrix(m))
    }

    /// Skew part `½(M − Mᵀ)` of an arbitrary square matrix.
    pub fn from_skew_part(m: &Mat<f64>) -> Self {
        SkewMatrix(m.skew_part())
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &Mat<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> Mat<f64> {
        self.0
    }
}

impl Deref for SkewMatrix {
    type Target = Mat<f64>;
    fn deref(&self) -> &Mat<f64> {
        &self.0
    }
}

/// A system `ẋ = S∇H(x)` with constant skew-symmetric `S`.
///
/// The energy is written once over a generic [`Scalar`], so the same code is
/// evaluated in plain and dual arithmetic.
pub trait Hamiltonian: Send + Sync {
    fn dim(&self) -> usize;

    fn energy<T: Scalar>(&self, x: &[T]) -> Result<T>;

    fn structure(&self) -> &SkewMatrix;

    fn analytic_gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }
}

pub(crate) fn check_dim<H: Hamiltonian + ?Sized>(system: &H, got: usize) -> Result<()> {
    if system.dim() != got {
        return Err(Error::DimensionMismatch { expected: system.dim(), got });
    }
    Ok(())
}

/// Energy evaluation that rejects non-finite results.
pub(crate) fn checked_energy<T: Scalar, H: Hamiltonian + ?Sized>(system: &H, x: &[T]) -> Result<T> {
    let e = system.energy(x)?;
    if !e.value().is_finite() {
        return Err(Error::Domain(format!("non-finite energy at {:?}", values(x))));
    }
    Ok(e)
}

/// Counts energy evaluations. Plain (`f64`) evaluations and dual-arithmetic
/// evaluations are tallied separately.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalCounter {
    real: u64,
    dual: u64,
}

impl EvalCounter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Plain evaluations of `H`.
    pub fn count(&self) -> u64 {
        self.real
    }

    pub fn dual_count(&self) -> u64 {
        self.dual
    }

    pub fn total(&self) -> u64 {
        self.real + self.dual
    }

    pub(crate) fn add_dual(&mut self, k: u64) {
        self.dual += k;
    }

    fn bump(&mut self, depth: u32) {
        if depth == 0 {
            self.real += 1;
        } else {
            self.dual += 1;
        }
    }
}

/// Instrumented access to `H`: checks the dimension, evaluates, counts one.
pub fn eval_energy<T: Scalar, H: Hamiltonian + ?Sized>(system: &H, x: &[T], counter: &mut EvalCounter) -> Result<T> {
    check_dim(system, x.len())?;
    counter.bump(T::DEPTH);
    checked_energy(system, x)
}

/// `H = ½ xᵀx` in even dimension.
#[derive(Debug, Clone)]
pub struct Harmonic {
    structure: SkewMatrix,
}

pub fn make_harmonic(n: usize) -> Result<Harmonic> {
    Ok(Harmonic { structure: SkewMatrix::canonical(n)? })
}

impl Hamiltonian for Harmonic {
    fn dim(&self) -> usize {
        self.structure.dim()
    }

    fn energy<T: Scalar>(&self, x: &[T]) -> Result<T> {
        Ok(crate::scalar::dot(x, x) * 0.5)
    }

    fn structure(&self) -> &SkewMatrix {
        &self.structure
    }

    fn analytic_gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(x.to_vec())
    }
}

/// Lennard–Jones oscillator, `H = ½p² + ¼(q⁻¹² − 2q⁻⁶)`, state `[q, p]`.
#[derive(Debug, Clone)]
pub struct LennardJones {
    structure: SkewMatrix,
}

pub fn make_lennard_jones() -> LennardJones {
    LennardJones { structure: SkewMatrix::canonical(2).expect("n = 2 is even") }
}

impl Hamiltonian for LennardJones {
    fn dim(&self) -> usize {
        2
    }

    fn energy<T: Scalar>(&self, x: &[T]) -> Result<T> {
        let (q, p) = (x[0], x[1]);
        if q.value() == 0.0 {
            return Err(Error::Domain("Lennard-Jones potential is singular at q = 0".into()));
        }
        let inv6 = q.powi(-6);
        Ok(p * p * 0.5 + (inv6 * inv6 - inv6 * 2.0) * 0.25)
    }

    fn structure(&self) -> &SkewMatrix {
        &self.structure
    }

    fn analytic_gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let q = x[0];
        Some(vec![3.0 * (q.powi(-7) - q.powi(-13)), x[1]])
    }
}

/// Double pendulum with state `[q₁, q₂, p₁, p₂]` and non-separable Hamiltonian
/// `(½p₁² + p₂² − p₁p₂cos(q₁−q₂)) / (1 + sin²(q₁−q₂)) − 2cos q₁ − cos q₂`.
#[derive(Debug, Clone)]
pub struct DoublePendulum {
    structure: SkewMatrix,
}

pub fn make_double_pendulum() -> DoublePendulum {
    DoublePendulum { structure: SkewMatrix::canonical(4).expect("n = 4 is even") }
}

impl Hamiltonian for DoublePendulum {
    fn dim(&self) -> usize {
        4
    }

    fn energy<T: Scalar>(&self, x: &[T]) -> Result<T> {
        let (q1, q2, p1, p2) = (x[0], x[1], x[2], x[3]);
        let dq = q1 - q2;
        let num = p1 * p1 * 0.5 + p2 * p2 - p1 * p2 * dq.cos();
        let den = dq.sin().square() + 1.0;
        Ok(num / den - q1.cos() * 2.0 - q2.cos())
    }

    fn structure(&self) -> &SkewMatrix {
        &self.structure
    }
}

/// `H(x) + ε(x)` with `|ε(x)| ≤ ε̄`, deterministic in `(seed, x)`.
///
/// The perturbation is constant under differentiation, so dual evaluations see
/// the clean derivatives.
#[derive(Debug, Clone)]
pub struct NoisyHamiltonian<H> {
    base: H,
    noise_bound: f64,
    seed: u64,
}

impl<H: Hamiltonian> NoisyHamiltonian<H> {
    pub fn new(base: H, noise_bound: f64, seed: u64) -> Result<Self> {
        if !(noise_bound >= 0.0) || !noise_bound.is_finite() {
            return Err(Error::InvalidParameter(format!("noise bound must be >= 0, got {noise_bound}")));
        }
        Ok(NoisyHamiltonian { base, noise_bound, seed })
    }

    pub fn base(&self) -> &H {
        &self.base
    }

    pub fn noise_bound(&self) -> f64 {
        self.noise_bound
    }

    /// The perturbation `ε(x)`.
    pub fn noise(&self, x: &[f64]) -> f64 {
        if self.noise_bound == 0.0 {
            return 0.0;
        }
        let mut h = splitmix64(self.seed ^ 0x6a09_e667_f3bc_c908);
        for v in x {
            // +0.0 and -0.0 hash alike
            let bits = if *v == 0.0 { 0 } else { v.to_bits() };
            h = splitmix64(h ^ bits);
        }
        // 53 random bits mapped onto [-1, 1]
        let u = (h >> 11) as f64 / (1u64 << 53) as f64;
        self.noise_bound * (2.0 * u - 1.0)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl<H: Hamiltonian> Hamiltonian for NoisyHamiltonian<H> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn energy<T: Scalar>(&self, x: &[T]) -> Result<T> {
        Ok(self.base.energy(x)? + self.noise(&values(x)))
    }

    fn structure(&self) -> &SkewMatrix {
        self.base.structure()
    }

    fn analytic_gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.base.analytic_gradient(x)
    }
}

/// Runtime-selected system, for the command line harness.
#[derive(Debug, Clone)]
pub enum AnySystem {
    Harmonic(Harmonic),
    LennardJones(LennardJones),
    DoublePendulum(DoublePendulum),
    Terrain(TopographicHamiltonian),
}

impl AnySystem {
    pub fn name(&self) -> String {
        match self {
            AnySystem::Harmonic(h) => format!("harmonic{}", h.dim()),
            AnySystem::LennardJones(_) => "lennard-jones".into(),
            AnySystem::DoublePendulum(_) => "double-pendulum".into(),
            AnySystem::Terrain(_) => "terrain".into(),
        }
    }

    /// Initial state used in the reference experiments.
    pub fn default_initial_state(&self) -> StateVector {
        let v = match self {
            AnySystem::Harmonic(h) => {
                let mut v = vec![0.0; h.dim()];
                v[0] = 1.0;
                v
            }
            AnySystem::LennardJones(_) => vec![1.21, 0.34],
            AnySystem::DoublePendulum(_) => vec![0.1, 0.2, 0.25, -0.3],
            AnySystem::Terrain(_) => vec![0.0, 0.0, -0.1, 0.2],
        };
        StateVector::new(v).expect("finite")
    }
}

impl Hamiltonian for AnySystem {
    fn dim(&self) -> usize {
        match self {
            AnySystem::Harmonic(s) => s.dim(),
            AnySystem::LennardJones(s) => s.dim(),
            AnySystem::DoublePendulum(s) => s.dim(),
            AnySystem::Terrain(s) => s.dim(),
        }
    }

    fn energy<T: Scalar>(&self, x: &[T]) -> Result<T> {
        match self {
            AnySystem::Harmonic(s) => s.energy(x),
            AnySystem::LennardJones(s) => s.energy(x),
            AnySystem::DoublePendulum(s) => s.energy(x),
            AnySystem::Terrain(s) => s.energy(x),
        }
    }

    fn structure(&self) -> &SkewMatrix {
        match self {
            AnySystem::Harmonic(s) => s.structure(),
            AnySystem::LennardJones(s) => s.structure(),
            AnySystem::DoublePendulum(s) => s.structure(),
            AnySystem::Terrain(s) => s.structure(),
        }
    }

    fn analytic_gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        match self {
            AnySystem::Harmonic(s) => s.analytic_gradient(x),
            AnySystem::LennardJones(s) => s.analytic_gradient(x),
            AnySystem::DoublePendulum(s) => s.analytic_gradient(x),
            AnySystem::Terrain(s) => s.analytic_gradient(x),
        }
    }
}

impl fmt::Display for AnySystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn energies_at_reference_states() {
        let mut c = EvalCounter::new();
        let h = make_harmonic(2).unwrap();
        assert_eq!(eval_energy(&h, &[1.0, 0.0], &mut c).unwrap(), 0.5);

        let lj = make_lennard_jones();
        assert_eq!(eval_energy(&lj, &[1.0, 0.0], &mut c).unwrap(), -0.25);
        // direct substitution: ½·0.34² + ¼(1.21⁻¹² − 2·1.21⁻⁶)
        let q: f64 = 1.21;
        let expected = 0.5 * 0.34f64.powi(2) + 0.25 * (q.powi(-12) - 2.0 * q.powi(-6));
        let got = eval_energy(&lj, &[1.21, 0.34], &mut c).unwrap();
        assert!((got - expected).abs() < 1e-15);
        assert!((got - (-0.0761)).abs() < 5e-5);

        let dp = make_double_pendulum();
        assert_eq!(eval_energy(&dp, &[0.0; 4], &mut c).unwrap(), -3.0);
        assert!(eval_energy(&dp, &[0.1, 0.2, 0.25, -0.3], &mut c).unwrap().is_finite());
        assert_eq!(c.count(), 5);
        assert_eq!(c.dual_count(), 0);
    }

    #[test]
    fn analytic_gradients() {
        let lj = make_lennard_jones();
        assert_eq!(lj.analytic_gradient(&[1.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        let h = make_harmonic(2).unwrap();
        assert_eq!(h.analytic_gradient(&[3.0, 4.0]).unwrap(), vec![3.0, 4.0]);
    }

    #[test]
    fn error_paths() {
        let mut c = EvalCounter::new();
        assert!(matches!(make_harmonic(3), Err(Error::InvalidParameter(_))));
        let lj = make_lennard_jones();
        assert!(matches!(eval_energy(&lj, &[0.0, 1.0], &mut c), Err(Error::Domain(_))));
        assert!(matches!(
            eval_energy(&lj, &[1.0, 1.0, 1.0], &mut c),
            Err(Error::DimensionMismatch { expected: 2, got: 3 })
        ));
        assert!(matches!(StateVector::new(vec![1.0, f64::NAN]), Err(Error::NonFinite(1))));
    }

    #[test]
    fn canonical_structure_squares_to_minus_identity() {
        let s = make_double_pendulum().structure().clone();
        let s2 = s.matmul(&s);
        assert_eq!(s2, Mat::identity(4).scale(-1.0));
    }

    #[test]
    fn structure_is_skew_for_random_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let systems: Vec<SkewMatrix> = vec![
            make_harmonic(2).unwrap().structure().clone(),
            make_harmonic(6).unwrap().structure().clone(),
            make_lennard_jones().structure().clone(),
            make_double_pendulum().structure().clone(),
        ];
        for s in &systems {
            assert!(s.is_skew());
            let n = s.dim();
            for _ in 0..100 {
                let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                let w: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                let vsw = crate::scalar::dot(&v, &s.matvec(&w));
                let wsv = crate::scalar::dot(&w, &s.matvec(&v));
                assert!((vsw + wsv).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn noisy_evaluation_is_bounded_and_deterministic() {
        let base = make_double_pendulum();
        let noisy = NoisyHamiltonian::new(base.clone(), 1e-9, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut c = EvalCounter::new();
        let mut seen_nonzero = false;
        for _ in 0..200 {
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            let a = eval_energy(&noisy, &x, &mut c).unwrap();
            let b = eval_energy(&noisy, &x, &mut c).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
            let clean = base.energy(&x).unwrap();
            assert!((a - clean).abs() <= 1e-9 * (1.0 + 1e-6));
            seen_nonzero |= a != clean;
        }
        assert!(seen_nonzero);
        assert!(NoisyHamiltonian::new(base, -1.0, 0).is_err());
    }

    #[test]
    fn counter_sums_per_call_increments() {
        let dp = make_double_pendulum();
        let mut total = EvalCounter::new();
        let mut sum = 0;
        for k in 0..10 {
            let before = total.count();
            for _ in 0..k {
                eval_energy(&dp, &[0.1, 0.2, 0.3, 0.4], &mut total).unwrap();
            }
            sum += total.count() - before;
        }
        assert_eq!(sum, total.count());
        assert_eq!(sum, 45);
    }
}
