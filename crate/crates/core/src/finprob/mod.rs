//! Exact probability on finite sample spaces.
//!
//! σ-algebras are partitions (on a finite space every σ-algebra is generated
//! by its atoms), conditional expectation is block averaging, and the usual
//! identities (universal property, tower law, factor-out, Jensen, Chebyshev)
//! are exposed as residual checks.

mod ops;
mod selftest;
mod space;

use thiserror::Error;

pub use ops::{
    borel_cantelli_tail, chebyshev_check, check_factor_out, check_tower, check_universal_property,
    cond_expectation, expectation, is_measurable, jensen_check, lp_norm, ChebyshevBound, Convex,
};
pub use selftest::{
    random_measurable, random_partition, random_refining_pair, random_space, random_var,
    render_table, run_selftest, SelftestConfig, SuiteResult,
};
pub use space::{Event, Filtration, FiniteProbSpace, Partition, RandomVar, TOL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FinProbError {
    #[error("length mismatch: expected {expected} outcomes, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("{0} is not measurable with respect to the partition")]
    NotMeasurable(String),
    #[error("refinement violated: {detail}")]
    NotRefinement { detail: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
