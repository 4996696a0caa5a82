//! Scalar abstraction that energy functions are written against.
//!
//! `f64` is the plain evaluation type. [`crate::autodiff::Dual`] nests over any
//! `Scalar`, so one energy implementation serves value, gradient, Hessian and
//! higher-order jets.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    /// Number of dual levels stacked on top of `f64`.
    const DEPTH: u32;

    fn cst(c: f64) -> Self;

    /// Real part, stripped of every derivative component.
    fn value(&self) -> f64;

    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn powi(self, n: i32) -> Self;

    fn zero() -> Self {
        Self::cst(0.0)
    }

    fn one() -> Self {
        Self::cst(1.0)
    }

    fn square(self) -> Self {
        self * self
    }
}

impl Scalar for f64 {
    const DEPTH: u32 = 0;

    #[inline]
    fn cst(c: f64) -> Self {
        c
    }
    #[inline]
    fn value(&self) -> f64 {
        *self
    }
    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
}

/// Dot product over a generic scalar.
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn lift<T: Scalar>(x: &[f64]) -> Vec<T> {
    x.iter().map(|&v| T::cst(v)).collect()
}

pub fn values<T: Scalar>(x: &[T]) -> Vec<f64> {
    x.iter().map(Scalar::value).collect()
}
