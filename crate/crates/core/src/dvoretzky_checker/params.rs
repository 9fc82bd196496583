use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::series_lab::Schedule;

use super::CheckerError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BoundMode {
    /// `max(α_n, (1 + β_n)|x_n − x*| − γ_n)`
    #[default]
    Original,
    /// `max(α_n, (1 + β_n − γ_n)|x_n − x*|)`
    Weak,
}

impl BoundMode {
    pub fn parse(s: &str) -> Result<Self, CheckerError> {
        match s {
            "original" | "original_bound" => Ok(Self::Original),
            "weak" | "weak_bound" => Ok(Self::Weak),
            other => Err(CheckerError::InvalidArgument(format!(
                "unknown bound mode {other:?} (expected original or weak)"
            ))),
        }
    }

    pub fn rhs(self, alpha: f64, beta: f64, gamma: f64, dist: f64) -> f64 {
        match self {
            Self::Original => alpha.max((1.0 + beta) * dist - gamma),
            Self::Weak => alpha.max((1.0 + beta - gamma) * dist),
        }
    }
}

pub type PathFn = Arc<dyn Fn(usize, u64) -> f64 + Send + Sync>;

/// One of `α`, `β`, `γ`: a fixed schedule or a function of the step and the
/// trajectory seed.
#[derive(Clone)]
pub enum ParamSeq {
    Regular(Schedule),
    PerTrajectory { label: String, f: PathFn },
}

impl fmt::Debug for ParamSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Regular(s) => write!(f, "Regular({})", s.label()),
            Self::PerTrajectory { label, .. } => write!(f, "PerTrajectory({label})"),
        }
    }
}

impl ParamSeq {
    pub fn per_trajectory<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(usize, u64) -> f64 + Send + Sync + 'static,
    {
        Self::PerTrajectory {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    /// Lifts a schedule to a per-trajectory function that ignores the seed.
    pub fn lift(s: Schedule) -> Self {
        let label = s.label().to_string();
        Self::per_trajectory(label, move |n, _| s.get(n).unwrap_or(f64::NAN))
    }

    pub fn is_extended(&self) -> bool {
        matches!(self, Self::PerTrajectory { .. })
    }

    pub fn label(&self) -> &str {
        match self {
            Self::Regular(s) => s.label(),
            Self::PerTrajectory { label, .. } => label,
        }
    }

    /// Raw value; a sign violation in a nonnegative schedule comes back as
    /// the offending value rather than an error, so scans can report it.
    pub fn eval(&self, n: usize, seed: u64) -> Result<f64, CheckerError> {
        match self {
            Self::Regular(s) => match s.get(n) {
                Ok(v) => Ok(v),
                Err(crate::series_lab::SeriesError::SignViolation { value, .. }) => Ok(value),
                Err(e) => Err(e.into()),
            },
            Self::PerTrajectory { f, .. } => Ok(f(n, seed)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DvoretzkyParams {
    pub alpha: ParamSeq,
    pub beta: ParamSeq,
    pub gamma: ParamSeq,
    pub mode: BoundMode,
    /// First index from which the hypotheses are claimed.
    pub n0: usize,
}

impl DvoretzkyParams {
    pub fn regular(
        alpha: Schedule,
        beta: Schedule,
        gamma: Schedule,
        mode: BoundMode,
        n0: usize,
    ) -> Self {
        Self {
            alpha: ParamSeq::Regular(alpha),
            beta: ParamSeq::Regular(beta),
            gamma: ParamSeq::Regular(gamma),
            mode,
            n0: n0.max(1),
        }
    }

    pub fn is_extended(&self) -> bool {
        self.alpha.is_extended() || self.beta.is_extended() || self.gamma.is_extended()
    }

    /// Same parameters as per-trajectory functions.
    pub fn lifted(&self) -> Self {
        let lift = |p: &ParamSeq| match p {
            ParamSeq::Regular(s) => ParamSeq::lift(s.clone()),
            other => other.clone(),
        };
        Self {
            alpha: lift(&self.alpha),
            beta: lift(&self.beta),
            gamma: lift(&self.gamma),
            mode: self.mode,
            n0: self.n0,
        }
    }

    pub fn with_mode(mut self, mode: BoundMode) -> Self {
        self.mode = mode;
        self
    }

    /// Right-hand side of the `T_n` bound at distance `dist = |x_n − x*|`.
    pub fn rhs(&self, n: usize, seed: u64, dist: f64) -> Result<f64, CheckerError> {
        Ok(self.mode.rhs(
            self.alpha.eval(n, seed)?,
            self.beta.eval(n, seed)?,
            self.gamma.eval(n, seed)?,
            dist,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_without_gamma() {
        for &(a, b, d) in &[(0.1, 0.0, 3.0), (0.0, 0.5, 1.0), (2.0, 0.1, 0.5)] {
            assert_eq!(
                BoundMode::Original.rhs(a, b, 0.0, d),
                BoundMode::Weak.rhs(a, b, 0.0, d)
            );
        }
        assert_eq!(BoundMode::Original.rhs(0.0, 0.0, 0.5, 2.0), 1.5);
        assert_eq!(BoundMode::Weak.rhs(0.0, 0.0, 0.5, 2.0), 1.0);
    }

    #[test]
    fn sign_violation_surfaces_as_value() {
        let s = Schedule::nonneg("neg", |n| if n == 3 { -1.0 } else { 1.0 });
        let p = ParamSeq::Regular(s);
        assert_eq!(p.eval(2, 0).unwrap(), 1.0);
        assert_eq!(p.eval(3, 0).unwrap(), -1.0);
    }

    #[test]
    fn lifting_preserves_values() {
        let p = DvoretzkyParams::regular(
            Schedule::harmonic(1.0, 0.0),
            Schedule::zero(),
            Schedule::constant(0.2),
            BoundMode::Original,
            1,
        );
        let l = p.lifted();
        assert!(l.is_extended() && !p.is_extended());
        for n in 1..20 {
            assert_eq!(p.rhs(n, 0, 1.5).unwrap(), l.rhs(n, 99, 1.5).unwrap());
        }
    }

    #[test]
    fn parse_modes() {
        assert_eq!(BoundMode::parse("weak").unwrap(), BoundMode::Weak);
        assert!(BoundMode::parse("strong").is_err());
    }
}
