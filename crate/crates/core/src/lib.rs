//! Variable-step BDF3 time stepping with a discrete gradient structure.
//!
//! The crate is organised bottom-up:
//!
//! * [`time_mesh`] builds uniform, periodic-ratio and random time grids.
//! * [`bdf3_kernels`] holds the coefficient functions `d0, d1, d2`, the
//!   step-ratio limit `R_e`, and the gradient-structure functionals `G`/`F`.
//! * [`doc_kernels`] computes discrete orthogonal convolution (DOC) kernels.
//! * [`quad_forms`] assembles the step-rescaled matrix and checks positivity
//!   of the BDF3 and DOC quadratic forms.
//! * [`heat_solver`] is a periodic pseudo-spectral heat solver stepped with
//!   BDF3, including energy monitoring and truncation-error evaluation.
//! * [`experiments`] drives convergence tables and report output.

// `!(x > 0.0)` deliberately rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bdf3_kernels;
pub mod doc_kernels;
pub mod error;
pub mod experiments;
pub mod heat_solver;
pub mod quad_forms;
pub mod rng;
pub mod time_mesh;
mod util;

pub use error::{Error, Result};
pub use time_mesh::TimeMesh;
