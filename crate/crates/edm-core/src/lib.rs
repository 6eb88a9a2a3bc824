//! Noisy low-rank Euclidean distance matrix completion.
//!
//! Two complementary solvers recover point positions in ℝʳ from a partial
//! set of noisy squared pairwise distances on a graph:
//!
//! - [`facial::facial_reduction_solve`]: clique-driven facial reduction for
//!   dense graphs: per-clique exposing matrices, noise-weighted aggregation,
//!   and a small restricted least-squares solve on the recovered face.
//! - [`pareto::pareto_solve`]: max- or min-trace completion for sparse
//!   graphs: an inexact Newton root finder over the trace/misfit Pareto
//!   frontier driven by a Frank-Wolfe affine-minorant oracle.
//!
//! Supporting modules: [`linalg`] (EDM operators, centered projections,
//! extreme eigenpairs, Procrustes), [`cliques`] (clique discovery, weights,
//! radio-range-aware clique union), [`refine`] (steepest-descent polishing of
//! a factored realization), and [`instances`] (seeded instance generation,
//! evaluation, file I/O).

pub mod cliques;
pub mod error;
pub mod facial;
pub mod instances;
pub mod linalg;
pub mod pareto;
pub mod realization;
pub mod refine;
pub mod report;

pub use error::{Error, Result};
pub use realization::Realization;
pub use report::SolveReport;
