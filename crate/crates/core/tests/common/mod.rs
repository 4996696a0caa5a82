#![allow(dead_code)]

use dfdg::linalg::Mat;
use dfdg::scalar::Scalar;
use dfdg::systems::{Hamiltonian, SkewMatrix};
use dfdg::Result;

/// `H = x₁²x₂`.
pub struct Cubic {
    s: SkewMatrix,
}

pub fn cubic() -> Cubic {
    Cubic { s: SkewMatrix::canonical(2).unwrap() }
}

impl Hamiltonian for Cubic {
    fn dim(&self) -> usize {
        2
    }

    fn energy<T: Scalar>(&self, x: &[T]) -> Result<T> {
        Ok(x[0] * x[0] * x[1])
    }

    fn structure(&self) -> &SkewMatrix {
        &self.s
    }
}

/// `H = ½xᵀAx`.
pub struct Quadratic {
    pub a: Mat<f64>,
    s: SkewMatrix,
}

pub fn quadratic(a: Mat<f64>) -> Quadratic {
    let s = SkewMatrix::canonical(a.rows()).unwrap();
    Quadratic { a, s }
}

impl Hamiltonian for Quadratic {
    fn dim(&self) -> usize {
        self.a.rows()
    }

    fn energy<T: Scalar>(&self, x: &[T]) -> Result<T> {
        let n = x.len();
        let mut acc = T::zero();
        for i in 0..n {
            for j in 0..n {
                acc = acc + x[i] * x[j] * self.a[(i, j)];
            }
        }
        Ok(acc * 0.5)
    }

    fn structure(&self) -> &SkewMatrix {
        &self.s
    }
}

pub fn random_symmetric(n: usize, seed: u64) -> Mat<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut m = Mat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v: f64 = rng.random_range(-1.0..1.0);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub const DP_X0: [f64; 4] = [0.1, 0.2, 0.25, -0.3];
pub const LJ_X0: [f64; 2] = [1.21, 0.34];
