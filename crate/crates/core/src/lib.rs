//! Energy-preserving discrete gradient integrators for Hamiltonian ODEs
//! `ẋ = S∇H(x)`, with derivative-free (finite-difference) and dual-number
//! variants of the second- and fourth-order schemes.

// `!(x > 0.0)` is how NaN gets rejected throughout
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod autodiff;
pub mod discrete_gradient;
pub mod error;
pub mod finite_diff;
pub mod harness;
pub mod integrators;
pub mod linalg;
pub mod scalar;
pub mod systems;
pub mod terrain;

pub use error::{Error, Result};
