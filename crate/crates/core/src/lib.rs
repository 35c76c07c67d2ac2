//! Proximal splitting solvers built around a relaxed primal-dual hybrid
//! gradient method whose relaxation parameter and proximal step sizes are both
//! chosen by line search.
//!
//! The crate is `no_std` and only needs `alloc`. Everything that touches the
//! outside world (files, clocks, command line) lives in the companion
//! `rpdhg-cli` crate.
//!
//! Layout:
//!
//! - [`linops`]: matrix-free linear maps with adjoints over real and complex
//!   grids (finite differences, unitary DFT, orthogonal wavelets, masking).
//! - [`prox`]: proximal operators and the Moreau conjugation identity.
//! - [`bsplit`]: construction of the complement operator `B` with
//!   `AA* + BB* = I/theta`, densely by Cholesky or matrix-free for MRI.
//! - [`solvers`]: fixed-step PDHG, PDHG with Malitsky's line search, PDDR with
//!   the averaged-operator line search, and the combined relaxed method.
//! - [`problems`]: seeded generators for the LASSO, 1D/2D total variation and
//!   compressed-sensing homodyne MRI benchmarks.
//! - [`tuning`]: parameter grid searches used to tune the baselines.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bsplit;
pub mod dense;
mod error;
pub mod linops;
pub mod problems;
pub mod prox;
pub mod rng;
pub mod solvers;
pub mod tuning;
pub mod vec;

pub use error::{Error, Result};
