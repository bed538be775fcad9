//! Maximal flows and minimal cutsets for first-passage percolation on the
//! rescaled lattice `ℤ^d/n` inside a bounded domain.

// Validation writes `!(x >= 0.0)` on purpose: NaN must fail the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod cutgeom;
pub mod estimators;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod lattice;

pub use error::{Error, Result};
