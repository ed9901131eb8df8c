//! Chern and Bismut geometry of invariant Hermitian structures on six-dimensional
//! solvmanifolds and of the `g(α,β)` metrics on linear Hopf manifolds, together
//! with the Hermitian curvature flow (HCF) reductions they admit.
//!
//! Layout:
//! - [`tensor`]: dense complex tensors with holomorphic/antiholomorphic axis labels
//! - [`invariant`]: structure equations, frame metrics, connections, curvature, HCF tangent
//! - [`oracle`]: finite-difference curvature on open subsets of ℂⁿ
//! - [`hopf`]: closed forms for `g(α,β)`
//! - [`flow`]: the `(α,β,γ)` ODE system and named flows
//! - [`positivity`]: sign classification of bisectional forms
//! - [`catalog`]: the family tables and the classification harness

pub mod catalog;
pub mod error;
pub mod flow;
pub mod hermitian;
pub mod hopf;
pub mod invariant;
pub mod notation;
pub mod oracle;
pub mod positivity;
pub mod sampling;
pub mod tensor;
pub mod tol;

pub use error::{HermError, Result};
pub use num_complex::Complex64;

/// Shorthand used everywhere in the crate.
pub type C64 = Complex64;

pub(crate) const I: C64 = C64 { re: 0.0, im: 1.0 };

#[cfg(test)]
pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
