//! Uniform q-contact geometry, contact Lagrangian dynamics with several
//! action variables, and the associated symmetry and optimal-control checks.

// `!(a <= b)` is used on purpose so that NaN takes the failing branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod cli;
pub mod config;
pub mod dynamics;
mod error;
pub mod expr;
pub mod geometry;
pub mod lagrangian;
pub mod models;
pub mod point;
pub mod report;
pub mod sampling;
pub mod suite;
pub mod symmetry;

use std::collections::BTreeMap;

pub use error::{Error, Result};
pub use point::{Dims, ExtendedPoint};

/// Named scalar parameters bound into expressions.
pub type Params = BTreeMap<String, f64>;
