//! Penalized least-squares over graphs.
//!
//! The estimators here regularize a regression vector through graph
//! difference operators: an order-(k+1) operator built from the oriented
//! incidence matrix of a known graph penalizes departures from piecewise
//! polynomial structure, while a plain l1 term keeps the vector sparse.
//! On top of the solvers sit a CLIME-style sparse inverse of the sample
//! Gram matrix, a de-biased one-step estimator with confidence intervals
//! and coordinate/edge tests, a synthetic-scenario generator, and k-fold
//! cross-validation with warm-started tuning paths.

pub mod clime;
pub mod cv;
pub mod graph;
pub mod inference;
pub mod io;
pub mod linalg;
pub mod normal;
pub mod operator;
pub mod rng;
pub mod simgen;
pub mod solver;
pub mod sparse;
pub mod study;

pub use graph::UndirectedGraph;
pub use operator::{
    build_diff_operator, build_incidence, build_laplacian, structure_counts, DiffOperator, OpMat,
};

/// Library version reported in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
