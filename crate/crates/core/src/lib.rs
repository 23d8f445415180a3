//! Simulation and verification toolkit for sparse random multigraphs and
//! their multigraphex limits.

// `!(x > 0.0)` guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod canon;
pub mod census;
pub mod dist;
pub mod error;
pub mod families;
pub mod generators;
pub mod graphex;
pub mod measures;
pub mod multigraph;
pub mod rng;
pub mod sampling;
pub mod suite;

pub use error::{Error, Result};
