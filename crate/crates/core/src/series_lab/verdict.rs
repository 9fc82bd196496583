use serde::{Deserialize, Serialize};

use super::{RealSeq, SeriesError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    Converges,
    Diverges,
    Undetermined,
}

/// Finite-horizon witness behind a [`SeriesVerdict`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesEvidence {
    pub horizon: usize,
    pub partial_sum: f64,
    /// `max_{N/2 <= m < n <= N} |S_n - S_m|`
    pub residual: f64,
    pub tol: f64,
    pub div_threshold: f64,
}

/// A certificate about `Σ s_n` at a declared horizon. Never a proof.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesVerdict {
    pub kind: VerdictKind,
    pub evidence: SeriesEvidence,
}

impl SeriesVerdict {
    pub fn converges(&self) -> bool {
        self.kind == VerdictKind::Converges
    }

    pub fn diverges(&self) -> bool {
        self.kind == VerdictKind::Diverges
    }
}

/// Partial sum and tail-Cauchy residual of `terms` (term `k + 1` at `terms[k]`).
///
/// The window sums are accumulated from zero at `⌊N/2⌋` rather than by
/// differencing full partial sums, so tiny residuals keep their precision.
pub(crate) fn sum_and_residual(terms: &[f64]) -> (f64, f64) {
    let horizon = terms.len();
    let mid = horizon / 2;
    let head: f64 = terms[..mid].iter().sum();
    let mut window = 0.0;
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    for &t in &terms[mid..] {
        window += t;
        lo = lo.min(window);
        hi = hi.max(window);
    }
    (head + window, hi - lo)
}

/// Classifies a series from its first `terms.len()` terms.
///
/// Converges when the tail residual is below `tol`; otherwise diverges when
/// the partial sum exceeds `div_threshold`; otherwise undetermined.
pub fn verdict_from_terms(terms: &[f64], tol: f64, div_threshold: f64) -> SeriesVerdict {
    let (partial_sum, residual) = if terms.is_empty() {
        (0.0, 0.0)
    } else {
        sum_and_residual(terms)
    };
    let kind = if residual < tol {
        VerdictKind::Converges
    } else if partial_sum > div_threshold {
        VerdictKind::Diverges
    } else {
        VerdictKind::Undetermined
    };
    SeriesVerdict {
        kind,
        evidence: SeriesEvidence {
            horizon: terms.len(),
            partial_sum,
            residual,
            tol,
            div_threshold,
        },
    }
}

pub fn series_verdict(
    s: &RealSeq,
    horizon: usize,
    tol: f64,
    div_threshold: f64,
) -> Result<SeriesVerdict, SeriesError> {
    if horizon == 0 {
        return Err(SeriesError::InvalidArgument(
            "horizon must be positive".into(),
        ));
    }
    if !(tol > 0.0) {
        return Err(SeriesError::InvalidArgument("tol must be positive".into()));
    }
    Ok(verdict_from_terms(&s.prefix(horizon)?, tol, div_threshold))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residual_matches_max_window_difference() {
        let terms = [1.0, -2.0, 3.0, -1.0, 0.5, -0.25];
        // brute force over partial sums with m, n in [N/2, N]
        let mut s = vec![0.0f64];
        for t in terms {
            s.push(s.last().unwrap() + t);
        }
        let n = terms.len();
        let mut best = 0.0f64;
        for m in n / 2..=n {
            for k in m..=n {
                best = best.max((s[k] - s[m]).abs());
            }
        }
        let (total, residual) = sum_and_residual(&terms);
        assert!((total - s[n]).abs() < 1e-15);
        assert!((residual - best).abs() < 1e-15);
    }

    #[test]
    fn classification_order() {
        let conv = verdict_from_terms(&[1.0, 0.0, 0.0, 0.0], 1e-8, 10.0);
        assert!(conv.converges());
        let div = verdict_from_terms(&[5.0; 4], 1e-8, 10.0);
        assert!(div.diverges());
        let und = verdict_from_terms(&[1.0; 4], 1e-8, 10.0);
        assert_eq!(und.kind, VerdictKind::Undetermined);
    }
}
