//! Small dense matrices and an LU solver with partial pivoting.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<T = f64> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Mat { rows: r, cols: c, data: rows.concat() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Mat<T>) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)] + a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        (0..self.rows).map(|i| (0..self.cols).fold(T::zero(), |acc, j| acc + self[(i, j)] * v[j])).collect()
    }

    pub fn scale(&self, s: T) -> Self {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&v| v * s).collect() }
    }

    pub fn add(&self, other: &Mat<T>) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Mat<T>) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Mat<T>, f: impl Fn(T, T) -> T) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    /// `½(M − Mᵀ)`, computed entrywise so the result is skew-symmetric bit for bit.
    pub fn skew_part(&self) -> Self {
        assert!(self.is_square());
        Self::from_fn(self.rows, self.cols, |i, j| if i == j { T::zero() } else { (self[(i, j)] - self[(j, i)]) * 0.5 })
    }

    /// `½(M + Mᵀ)`.
    pub fn sym_part(&self) -> Self {
        assert!(self.is_square());
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)]) * 0.5)
    }

    pub fn map_values(&self) -> Mat<f64> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(Scalar::value).collect() }
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

impl Mat<f64> {
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Maximum absolute entry of `self − other`.
    pub fn max_abs_diff(&self, other: &Mat<f64>) -> f64 {
        self.sub(other).max_abs()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows).map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn is_skew(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..self.cols).all(|j| self[(i, j)] == -self[(j, i)]))
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization `PA = LU` with partial pivoting.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: Mat<f64>,
    perm: Vec<usize>,
}

impl Lu {
    /// Factorizes `a`. A pivot whose magnitude falls below `1e-14 · ‖a‖_∞` is
    /// reported as [`Error::SingularJacobian`].
    pub fn factor(a: &Mat<f64>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch { expected: a.rows(), got: a.cols() });
        }
        let n = a.rows();
        let threshold = 1e-14 * a.norm_inf();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot) =
                (k..n)
                    .map(|i| (i, lu[(i, k)].abs()))
                    .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pivot > threshold) {
                return Err(Error::SingularJacobian { pivot, threshold });
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
            }
            let d = lu[(k, k)];
            for i in k + 1..n {
                let m = lu[(i, k)] / d;
                lu[(i, k)] = m;
                for j in k + 1..n {
                    lu[(i, j)] -= m * lu[(k, j)];
                }
            }
        }
        Ok(Lu { lu, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.perm.len();
        assert_eq!(b.len(), n);
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                y[i] -= self.lu[(i, j)] * y[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                y[i] -= self.lu[(i, j)] * y[j];
            }
            y[i] /= self.lu[(i, i)];
        }
        y
    }
}

pub fn lu_solve(a: &Mat<f64>, b: &[f64]) -> Result<Vec<f64>> {
    Ok(Lu::factor(a)?.solve(b))
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
