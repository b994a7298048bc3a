//! Numerical laboratory for semiclassical Schrödinger operators
//! `H = -eps^2 Δ + V_eps` built from slow-growth drift potentials `F`.
//!
//! The crate computes exponentially small interior Dirichlet eigenvalues,
//! resonances through exterior complex scaling, well depths and Agmon
//! distances, and grid scans of the symbol inequalities that control the
//! resolvent away from the wells.
//!
//! Layout:
//! - [`potential`]: drift potentials, `V`, `V_eps`, complex continuation.
//! - [`wells`]: minima, barrier costs, depths, Agmon distances.
//! - [`operator`]: finite-difference operators, real and complex scaled.
//! - [`spectral`]: Sturm bisection, inverse iteration, shift-invert.
//! - [`symbols`]: symbol evaluation and lower-bound scans.
//! - [`pipeline`]: experiment configs, sweeps, depth fits, reports.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod operator;
pub mod pipeline;
pub mod potential;
pub mod spectral;
pub mod symbols;
pub mod wells;

pub use error::{Error, Result};
pub use num_complex::Complex64;
