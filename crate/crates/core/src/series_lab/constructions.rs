use std::sync::Arc;

use serde::Serialize;

use super::verdict::{series_verdict, verdict_from_terms, SeriesVerdict};
use super::{DeclaredSign, RealSeq, SeriesError};

/// Default finite-horizon tolerance for convergence verdicts.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Default partial-sum threshold for divergence verdicts.
pub const DEFAULT_DIV_THRESHOLD: f64 = 10.0;
/// Default probing horizon.
pub const DEFAULT_HORIZON: usize = 100_000;

/// `out[k] = Σ_{i=1..=k+1} s(i)`, accumulated left to right.
pub fn partial_sums(s: &RealSeq, n: usize) -> Result<Vec<f64>, SeriesError> {
    if n == 0 {
        return Err(SeriesError::InvalidArgument("n must be at least 1".into()));
    }
    let mut acc = 0.0;
    Ok(s.prefix(n)?
        .into_iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect())
}

/// Step-size schedule conditions: `a_n → 0`, `Σ a_n = ∞`, `Σ a_n² < ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RmScheduleReport {
    pub tends_to_zero: bool,
    /// Largest term over the last `⌈horizon/10⌉` probed indices.
    pub tail_max: f64,
    pub sum_diverges: SeriesVerdict,
    pub sum_sq_converges: SeriesVerdict,
}

impl RmScheduleReport {
    pub fn all_pass(&self) -> bool {
        self.tends_to_zero && self.sum_diverges.diverges() && self.sum_sq_converges.converges()
    }
}

/// Maximum over the last `⌈len/10⌉` entries.
pub(crate) fn last_decile_max(values: &[f64]) -> f64 {
    let k = values.len().div_ceil(10).max(1).min(values.len());
    values[values.len() - k..]
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn validate_rm_schedule(
    a: &RealSeq,
    horizon: usize,
    tol: f64,
    div_threshold: f64,
) -> Result<RmScheduleReport, SeriesError> {
    a.require_nonneg("step-size schedule")?;
    if !(tol > 0.0) || !(div_threshold > 0.0) || horizon == 0 {
        return Err(SeriesError::InvalidArgument(
            "horizon, tol and div_threshold must be positive".into(),
        ));
    }
    let terms = a.prefix(horizon)?;
    let tail_max = last_decile_max(&terms);
    let squares: Vec<f64> = terms.iter().map(|v| v * v).collect();
    Ok(RmScheduleReport {
        tends_to_zero: tail_max < tol,
        tail_max,
        sum_diverges: verdict_from_terms(&terms, tol, div_threshold),
        sum_sq_converges: verdict_from_terms(&squares, tol, div_threshold),
    })
}

/// Finite-horizon surrogate for "eventually zero or eventually positive".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EventualSupport {
    pub eventually_zero: bool,
    pub switch_index: Option<usize>,
}

pub fn eventually_positive(a: &RealSeq, horizon: usize) -> Result<EventualSupport, SeriesError> {
    a.require_nonneg("sequence")?;
    let terms = a.prefix(horizon)?;
    Ok(match terms.iter().rposition(|&v| v > 0.0) {
        Some(last) if last + 1 == horizon => EventualSupport {
            eventually_zero: false,
            switch_index: None,
        },
        Some(last) => EventualSupport {
            eventually_zero: true,
            switch_index: Some(last + 2),
        },
        None => EventualSupport {
            eventually_zero: true,
            switch_index: Some(1),
        },
    })
}

/// Analytic tail `r_n = Σ_{k>n} a_k`, evaluated for `n ≥ 0`.
pub type TailFn = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct DuBoisOptions {
    pub tol: f64,
    pub div_threshold: f64,
    /// When absent, tails are summed backwards from the horizon.
    pub tail: Option<TailFn>,
}

impl Default for DuBoisOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            div_threshold: DEFAULT_DIV_THRESHOLD,
            tail: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CompanionCase {
    /// `a` vanishes from `switch_index` on; multiplier is `b_n = n`.
    EventuallyZero { switch_index: usize },
    /// `b_n = 1/√r_{n-1}`.
    Tail,
}

#[derive(Debug, Clone)]
pub struct DuBoisCompanion {
    pub multiplier: RealSeq,
    pub case: CompanionCase,
    /// `r_0 = Σ a_n` (truncated at the horizon unless an analytic tail was given).
    pub r0: f64,
}

impl DuBoisCompanion {
    /// Upper bound on every partial sum of `a_n b_n` in the tail case.
    pub fn sum_bound(&self) -> f64 {
        2.0 * self.r0.sqrt()
    }
}

/// Builds `b_n → ∞` with `Σ a_n b_n < ∞` for a convergent nonnegative `a`.
///
/// With `r_n = Σ_{k>n} a_k`, each term satisfies
/// `a_n / √r_{n-1} ≤ 2(√r_{n-1} - √r_n)`, so the partial sums telescope below `2√r_0`.
pub fn du_bois_reymond_companion(
    a: &RealSeq,
    horizon: usize,
    opts: &DuBoisOptions,
) -> Result<DuBoisCompanion, SeriesError> {
    a.require_nonneg("du Bois-Reymond input")?;
    let verdict = series_verdict(a, horizon, opts.tol, opts.div_threshold)?;
    if verdict.diverges() {
        return Err(SeriesError::Divergent {
            horizon,
            partial_sum: verdict.evidence.partial_sum,
        });
    }
    let support = eventually_positive(a, horizon)?;
    if let Some(switch_index) = support.switch_index {
        return Ok(DuBoisCompanion {
            multiplier: RealSeq::nonneg("n", |n| n as f64),
            case: CompanionCase::EventuallyZero { switch_index },
            r0: verdict.evidence.partial_sum,
        });
    }
    if let Some(tail) = &opts.tail {
        let tail = Arc::clone(tail);
        let r0 = tail(0);
        return Ok(DuBoisCompanion {
            multiplier: RealSeq::nonneg(format!("1/sqrt(tail of {})", a.label()), move |n| {
                1.0 / tail(n - 1).sqrt()
            }),
            case: CompanionCase::Tail,
            r0,
        });
    }
    let terms = a.prefix(horizon)?;
    // tails[n] = r_n for n = 0..=horizon
    let mut tails = vec![0.0; horizon + 1];
    for n in (0..horizon).rev() {
        tails[n] = tails[n + 1] + terms[n];
    }
    let b: Vec<f64> = tails[..horizon].iter().map(|r| 1.0 / r.sqrt()).collect();
    Ok(DuBoisCompanion {
        multiplier: RealSeq::from_values(
            format!("1/sqrt(tail of {})", a.label()),
            DeclaredSign::Nonnegative,
            b,
        )?,
        case: CompanionCase::Tail,
        r0: tails[0],
    })
}

/// `ρ_n = 1/S_n` with `S_n = Σ_{k≤n} a_k`; `ρ_n = 1` before the first positive partial sum.
///
/// `ρ_n → 0` while `Σ a_n ρ_n` keeps diverging.
pub fn abel_dini_rho(a: &RealSeq, horizon: usize) -> Result<RealSeq, SeriesError> {
    a.require_nonneg("Abel-Dini input")?;
    let sums = partial_sums(a, horizon)?;
    let last = *sums.last().expect("horizon >= 1");
    if !(last > 0.0) {
        return Err(SeriesError::Precondition(format!(
            "partial sum of {} is zero through horizon {horizon}",
            a.label()
        )));
    }
    let rho = sums
        .into_iter()
        .map(|s| if s > 0.0 { 1.0 / s } else { 1.0 })
        .collect();
    RealSeq::from_values(
        format!("1/S_n of {}", a.label()),
        DeclaredSign::Nonnegative,
        rho,
    )
}

/// Abel's criterion: `a` bounded and non-increasing, `Σ b` convergent ⇒ `Σ a_n b_n` convergent.
///
/// The product verdict is judged at `tol · max(1, 3·sup|a|)`, the Abel
/// summation bound on the product window residual in terms of the `b`
/// residual, so verified preconditions always yield a converging verdict.
pub fn abel_descending_check(
    a: &RealSeq,
    b: &RealSeq,
    horizon: usize,
    tol: f64,
) -> Result<SeriesVerdict, SeriesError> {
    if !(tol > 0.0) || horizon == 0 {
        return Err(SeriesError::InvalidArgument(
            "horizon and tol must be positive".into(),
        ));
    }
    let av = a.prefix(horizon)?;
    if let Some(i) = av.iter().position(|v| !v.is_finite()) {
        return Err(SeriesError::Precondition(format!(
            "a is unbounded at index {}",
            i + 1
        )));
    }
    if let Some(k) = av.windows(2).position(|w| w[1] > w[0]) {
        return Err(SeriesError::Monotonicity { index: k + 2 });
    }
    let bv = b.prefix(horizon)?;
    let b_verdict = verdict_from_terms(&bv, tol, f64::INFINITY);
    if !b_verdict.converges() {
        return Err(SeriesError::Precondition(format!(
            "Σ b is not tail-Cauchy at tol {tol} (residual {})",
            b_verdict.evidence.residual
        )));
    }
    let sup = av.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let products: Vec<f64> = av.iter().zip(&bv).map(|(x, y)| x * y).collect();
    Ok(verdict_from_terms(
        &products,
        tol * (3.0 * sup).max(1.0),
        f64::INFINITY,
    ))
}
