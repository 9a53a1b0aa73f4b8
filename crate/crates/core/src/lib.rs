//! Numerical verification of stress-energy identities and monotonicity
//! formulas for solutions of the semilinear elliptic system `Δu = ∇W(u)`.
//!
//! The pipeline is: pick a [`PotentialSpec`], obtain a [`Field`] on a
//! [`Grid`] (from an [`oracle`], the [`solver`] or a field file), then audit
//! it with [`tensor`] and [`monotonicity`]. [`scenario`] ties the steps
//! together for the command-line runner.

// index loops mirror the formulas; negated comparisons also reject NaN
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod field;
pub mod monotonicity;
pub mod oracle;
pub mod potential;
pub mod quadrature;
pub mod scenario;
pub mod solver;
pub mod tensor;
pub mod verdict;

pub use error::{Error, Result};
pub use field::{Field, Grid, Jacobian, Node, ResidualNorms};
pub use potential::{PotentialKind, PotentialSpec};
pub use verdict::{Location, Property, Verdict};

/// Formats a float with 17 significant digits (lossless round trip).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
