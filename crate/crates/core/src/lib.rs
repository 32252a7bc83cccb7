//! Steiner–Minkowski polynomials of balls, cubes, regular cross-polytopes and
//! regular simplexes in arbitrary dimension.
//!
//! The crate assembles `M_K(t) = Vol_n(K + tB^n)` from intrinsic volumes,
//! renormalizes it to the dimensionless `𝓜_K(τ)`, evaluates the limiting entire
//! functions as `n → ∞`, locates polynomial zeros, and checks everything
//! against an independent Monte Carlo estimate of the tube volume.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angles;
pub mod error;
pub mod families;
pub mod limits;
pub mod mc;
pub mod numfmt;
pub mod polynomials;
pub mod precision;
pub mod quadrature;
pub mod specfun;
pub mod zeros;

pub use error::{Error, Result};
pub use families::{FamilyInstance, Kind};
