//! Dvoretzky-form processes `X_{n+1} = T_n(X_1, …, X_n) + W_n`.
//!
//! Two views of the same recursion: streaming trajectories driven by a
//! keyed counter-based generator, and an exact product space over finite
//! noise alphabets where `T_n` and `W_n` can be recovered by conditional
//! expectation.

mod exact;
mod monte_carlo;
mod noise;
pub mod rng;
mod simulate;

use thiserror::Error;

use crate::finprob::FinProbError;
use crate::series_lab::SeriesError;

pub(crate) use exact::sgn;
pub use exact::{
    Decomposition, ExactProcess, LoeveReport, StepAlphabet, MAX_EXACT_HORIZON, MAX_EXACT_OUTCOMES,
};
pub use monte_carlo::{
    in_pool, monte_carlo_convergence, quantile, CheckpointStats, MonteCarloReport, SeedOutcome,
    REPORT_SCHEMA_VERSION,
};
pub use noise::NoiseModel;
pub use simulate::{simulate, ProcessSpec, Trajectory, Transform, TransformKind, DIVERGENCE_GUARD};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProcessError {
    #[error("invalid noise model: {0}")]
    InvalidNoise(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("exact process too large: horizon {horizon}, {outcomes} outcomes")]
    ExactGuard { horizon: usize, outcomes: usize },
    #[error("step {n} outside 1..={horizon}")]
    StepOutOfRange { n: usize, horizon: usize },
    #[error("{0}")]
    NotMeasurable(String),
    #[error(transparent)]
    Schedule(#[from] SeriesError),
    #[error(transparent)]
    FinProb(#[from] FinProbError),
}
