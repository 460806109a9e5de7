//! Scattered-data interpolation with compactly supported Wendland kernels
//! augmented by a total-degree Legendre polynomial basis.
//!
//! Three fit pipelines cover the range of kernel supports: a diagonal
//! pipeline when the support is below the node separation, a hybrid
//! sparse-Cholesky / QR pipeline otherwise, and a column-pivoted variant for
//! node sets on which the polynomial block loses rank.

pub mod cli;
pub mod error;
pub mod harness;
pub mod kernel;
pub mod nodes;
pub mod polynomial;
pub mod shape;
pub mod solver;
pub mod sparse_linalg;
mod spatial;

pub use error::{Error, Result};
pub use kernel::{Smoothness, WendlandKernel};
pub use nodes::{DomainTag, PointSet};
pub use polynomial::{Rescale, TotalDegreeBasis};
pub use shape::{apply_strategy, solve_eps_for_cond, ShapeStrategy};
pub use solver::{
    direct_saddle_solve, fit_auto, fit_diag, fit_hybrid, fit_rank_deficient, FitMode, FitPlan, FitReport,
    UnifiedInterpolant,
};
