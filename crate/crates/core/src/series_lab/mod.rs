//! Real sequences, finite-horizon series verdicts and the classical
//! constructions used by the convergence arguments (du Bois-Reymond
//! companions, Abel-Dini damping, Abel's criterion, the Derman-Sacks
//! recursion envelope).

mod constructions;
mod lemma;
mod seq;
mod verdict;

use thiserror::Error;

pub(crate) use constructions::last_decile_max;
pub use constructions::{
    abel_descending_check, abel_dini_rho, du_bois_reymond_companion, eventually_positive,
    partial_sums, validate_rm_schedule, CompanionCase, DuBoisCompanion, DuBoisOptions,
    EventualSupport, RmScheduleReport, TailFn, DEFAULT_DIV_THRESHOLD, DEFAULT_HORIZON, DEFAULT_TOL,
};
pub use lemma::{ds_1_helper_bound, ds_lemma1_envelope, unrolled_bound, DsLemmaInput, Envelope};
pub use seq::{DeclaredSign, RealSeq, Schedule, SeqSpec};
pub use verdict::{series_verdict, verdict_from_terms, SeriesEvidence, SeriesVerdict, VerdictKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("{label}: term {index} is {value}, but the sequence is declared nonnegative")]
    SignViolation {
        label: String,
        index: usize,
        value: f64,
    },
    #[error("{label}: index {index} is past the {len} available terms")]
    OutOfRange {
        label: String,
        index: usize,
        len: usize,
    },
    #[error("sequence is not non-increasing: first increase at index {index}")]
    Monotonicity { index: usize },
    #[error("series diverges at horizon {horizon} (partial sum {partial_sum})")]
    Divergent { horizon: usize, partial_sum: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("cannot parse {what}: {message}")]
    Parse { what: String, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}
