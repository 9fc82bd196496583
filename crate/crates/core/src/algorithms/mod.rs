//! Concrete stochastic approximation schemes as Dvoretzky processes:
//! the sample-mean recursion, Robbins–Monro, Kiefer–Wolfowitz, SGD and
//! relaxed fixed-point iteration, plus the JSON problem schema.

mod iterations;
mod maps;
mod problems;
mod schema;
mod slln;

use thiserror::Error;

use crate::dvoretzky_checker::CheckerError;
use crate::process_engine::ProcessError;
use crate::series_lab::SeriesError;

pub use iterations::{
    affine_spec, banach_iterate, banach_spec, kiefer_wolfowitz, kw_spec, rm_spec, robbins_monro,
    sgd, sgd_spec,
};
pub use maps::MapSpec;
pub use problems::{default_grid, ContractionProblem, MinimizationProblem, RootFindingProblem};
pub use schema::{
    as_dvoretzky, DvoretzkyPackage, NoiseSpec, Overrides, ParamsConstruction, ParamsFile, Problem,
    ProblemFile, ProblemKind, SCHEMA_VERSION,
};
pub use slln::slln_estimator;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgoError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("missing regularity declaration: {0}")]
    MissingRegularity(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error(transparent)]
    Process(#[from] ProcessError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Checker(#[from] CheckerError),
}
