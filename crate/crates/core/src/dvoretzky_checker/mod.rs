//! Finite-horizon certification of the hypotheses of Dvoretzky's theorem.
//!
//! Each hypothesis becomes a ledger entry with a numeric witness, the
//! horizon it was checked at and the tolerance it was judged by. A passing
//! ledger is evidence at those horizons, not a proof.
//!
//! | tag | checked as |
//! |-----|------------|
//! | H7  | `max |E(W_n \| F_n)|` on an exact finite model of the noise |
//! | H8  | tail-Cauchy residual of `Σ E W_n²` |
//! | H10–H12 | sign scan of `α`, `β`, `γ` from `N₀` |
//! | H13 | last-decile max of `α` |
//! | H14 | tail-Cauchy residual of `Σ β_n` |
//! | H15 | partial sum of `γ` above a threshold |
//! | H16 | minimal slack of the `T_n` bound on a grid and realized histories |
//!
//! H1–H6 and H9 hold by construction of the types: the sample space, the
//! filtration generated by the noise, real-valued `T_n` and `W_n`.

mod blum;
mod certify;
mod hypotheses;
mod ledger;
mod params;

use thiserror::Error;

use crate::finprob::FinProbError;
use crate::process_engine::ProcessError;
use crate::series_lab::SeriesError;

pub use blum::{blum_to_dvoretzky, BlumConstruction, BlumProblem, RealMap};
pub use certify::{certify, Certificate, CertifyConfig, EmpiricalConfig};
pub use hypotheses::{
    chebyshev_tail, check_noise_hypotheses, check_sequence_hypotheses, check_t_bound, z_sequence,
    GridConfig, NoiseCheckConfig, SequenceTolerances, MARTINGALE_TOL, SLACK_TOL,
};
pub use ledger::{Evidence, HypothesisLedger, LedgerEntry, Status, Tag, LEDGER_SCHEMA_VERSION};
pub use params::{BoundMode, DvoretzkyParams, ParamSeq, PathFn};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CheckerError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("regularity declaration violated: {0}")]
    Regularity(String),
    #[error("rho never enters the inverse domain (largest probed {largest}, smallest {smallest})")]
    BlumDomain { largest: f64, smallest: f64 },
    #[error(transparent)]
    Process(#[from] ProcessError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    FinProb(#[from] FinProbError),
}
