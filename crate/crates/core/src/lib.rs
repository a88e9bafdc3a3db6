//! Exact-diagonalization checks of the thermal area law for the
//! Bose-Hubbard model on periodic hypercubic boxes.

// `!(x > 0.0)` is used on purpose to reject NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod error;
pub mod fock;
pub mod gibbs;
pub mod lattice;
pub mod linalg;
pub mod quasifree;

pub use error::{Error, Result};
