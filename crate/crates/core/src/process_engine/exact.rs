use serde::Serialize;

use crate::finprob::{
    cond_expectation, expectation, is_measurable, Filtration, FiniteProbSpace, Partition,
    RandomVar, TOL,
};

use super::rng;
use super::simulate::{Transform, TransformKind};
use super::ProcessError;

pub const MAX_EXACT_HORIZON: usize = 14;
pub const MAX_EXACT_OUTCOMES: usize = 1 << 20;

/// Finite law of one noise step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepAlphabet {
    values: Vec<f64>,
    probs: Vec<f64>,
}

impl StepAlphabet {
    /// Validates `probs` and shifts `values` to mean zero.
    pub fn new(values: Vec<f64>, probs: Vec<f64>) -> Result<Self, ProcessError> {
        let raw = Self::raw(values, probs)?;
        let mean: f64 = raw.values.iter().zip(&raw.probs).map(|(v, p)| v * p).sum();
        Ok(Self {
            values: raw.values.iter().map(|v| v - mean).collect(),
            probs: raw.probs,
        })
    }

    /// Like [`StepAlphabet::new`] without centering.
    pub fn raw(values: Vec<f64>, probs: Vec<f64>) -> Result<Self, ProcessError> {
        if values.is_empty() || values.len() != probs.len() {
            return Err(ProcessError::InvalidNoise(format!(
                "{} values against {} probabilities",
                values.len(),
                probs.len()
            )));
        }
        if probs.iter().any(|p| !(*p >= 0.0)) || values.iter().any(|v| !v.is_finite()) {
            return Err(ProcessError::InvalidNoise(
                "probabilities must be nonnegative and values finite".into(),
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > TOL {
            return Err(ProcessError::InvalidNoise(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self { values, probs })
    }

    pub fn binary(sd: f64) -> Self {
        Self {
            values: vec![-sd, sd],
            probs: vec![0.5, 0.5],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.probs)
            .map(|(v, p)| v * p)
            .sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.probs)
            .map(|(v, p)| p * v * v)
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub t_hat: RandomVar,
    pub w_hat: RandomVar,
    /// `max |t_hat − T_n|` over outcomes.
    pub t_residual: f64,
    /// `max |w_hat − W_n|` over outcomes.
    pub w_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoeveReport {
    pub max_off_diagonal: f64,
    /// `E Z_n²` for `n = 1..=h`.
    pub diagonal: Vec<f64>,
}

/// The process tabulated on every outcome of `alphabet_1 × … × alphabet_h`.
///
/// Outcomes are numbered in mixed radix with the first step's symbol most
/// significant, so `F_n` (the first `n − 1` symbols) groups contiguous
/// ranges.
#[derive(Debug, Clone)]
pub struct ExactProcess {
    horizon: usize,
    space: FiniteProbSpace,
    filtration: Filtration,
    xs: Vec<RandomVar>,
    ts: Vec<RandomVar>,
    ws: Vec<RandomVar>,
}

impl ExactProcess {
    /// `alphabets[k]` is the law of `W_{k+1}`; the horizon is `alphabets.len()`.
    pub fn build(
        alphabets: &[StepAlphabet],
        transform: &Transform,
        x0: f64,
    ) -> Result<Self, ProcessError> {
        let h = alphabets.len();
        if h == 0 {
            return Err(ProcessError::InvalidArgument(
                "exact horizon must be at least 1".into(),
            ));
        }
        let mut outcomes: usize = 1;
        for a in alphabets {
            outcomes = outcomes.saturating_mul(a.len());
        }
        if h > MAX_EXACT_HORIZON || outcomes > MAX_EXACT_OUTCOMES {
            return Err(ProcessError::ExactGuard {
                horizon: h,
                outcomes,
            });
        }

        let mut symbols = vec![vec![0usize; h]; outcomes];
        let mut weights = vec![1.0; outcomes];
        for (o, (sym, w)) in symbols.iter_mut().zip(weights.iter_mut()).enumerate() {
            let mut rest = o;
            for k in (0..h).rev() {
                let r = alphabets[k].len();
                sym[k] = rest % r;
                rest /= r;
                *w *= alphabets[k].probs[sym[k]];
            }
        }
        let space = FiniteProbSpace::new(weights)?;

        let levels = (0..=h)
            .map(|k| {
                let keys: Vec<&[usize]> = symbols.iter().map(|s| &s[..k]).collect();
                Partition::from_keys(&keys)
            })
            .collect();
        let filtration = Filtration::new(levels)?;

        let mut xs = vec![vec![0.0; outcomes]; h + 1];
        let mut ts = vec![vec![0.0; outcomes]; h];
        let mut ws = vec![vec![0.0; outcomes]; h];
        let mut hist = Vec::with_capacity(h + 1);
        for (o, sym) in symbols.iter().enumerate() {
            hist.clear();
            hist.push(x0);
            xs[0][o] = x0;
            for n in 1..=h {
                let aux = match transform.kind() {
                    TransformKind::Deterministic => 0.5,
                    TransformKind::Adapted => prefix_uniform(&sym[..n - 1], n),
                };
                let t = transform.eval(n, &hist, aux);
                let w = alphabets[n - 1].values[sym[n - 1]];
                let x = t + w;
                ts[n - 1][o] = t;
                ws[n - 1][o] = w;
                xs[n][o] = x;
                hist.push(x);
            }
        }
        Ok(Self {
            horizon: h,
            space,
            filtration,
            xs: xs.into_iter().map(RandomVar::new).collect(),
            ts: ts.into_iter().map(RandomVar::new).collect(),
            ws: ws.into_iter().map(RandomVar::new).collect(),
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn space(&self) -> &FiniteProbSpace {
        &self.space
    }

    pub fn filtration(&self) -> &Filtration {
        &self.filtration
    }

    /// `F_n`: outcomes agreeing on the first `n − 1` symbols, `1 ≤ n ≤ h + 1`.
    pub fn sigma(&self, n: usize) -> Result<&Partition, ProcessError> {
        if n == 0 || n > self.horizon + 1 {
            return Err(ProcessError::StepOutOfRange {
                n,
                horizon: self.horizon + 1,
            });
        }
        Ok(self.filtration.level(n - 1).expect("level exists"))
    }

    pub fn x(&self, n: usize) -> Result<&RandomVar, ProcessError> {
        self.check_step(n, self.horizon + 1)?;
        Ok(&self.xs[n - 1])
    }

    pub fn t(&self, n: usize) -> Result<&RandomVar, ProcessError> {
        self.check_step(n, self.horizon)?;
        Ok(&self.ts[n - 1])
    }

    pub fn w(&self, n: usize) -> Result<&RandomVar, ProcessError> {
        self.check_step(n, self.horizon)?;
        Ok(&self.ws[n - 1])
    }

    fn check_step(&self, n: usize, max: usize) -> Result<(), ProcessError> {
        if n == 0 || n > max {
            return Err(ProcessError::StepOutOfRange { n, horizon: max });
        }
        Ok(())
    }

    /// Splits `X_{n+1}` into its `F_n` projection and the remainder.
    pub fn decompose(&self, n: usize) -> Result<Decomposition, ProcessError> {
        self.check_step(n, self.horizon)?;
        let next = &self.xs[n];
        let t_hat = cond_expectation(&self.space, self.sigma(n)?, next)?;
        let w_hat = next.zip_with(&t_hat, |x, t| x - t);
        Ok(Decomposition {
            t_residual: t_hat.max_abs_diff(&self.ts[n - 1]),
            w_residual: w_hat.max_abs_diff(&self.ws[n - 1]),
            t_hat,
            w_hat,
        })
    }

    /// `max_n max_ω |E(W_n | F_n)(ω)|`.
    pub fn check_martingale_increment(&self) -> Result<f64, ProcessError> {
        let mut worst: f64 = 0.0;
        for n in 1..=self.horizon {
            let ce = cond_expectation(&self.space, self.sigma(n)?, &self.ws[n - 1])?;
            worst = worst.max(ce.values().iter().fold(0.0, |m, v| m.max(v.abs())));
        }
        Ok(worst)
    }

    /// `sgn(T_n)` with `sgn(0) = 0`, one variable per step.
    pub fn sign_of_t(&self) -> Vec<RandomVar> {
        self.ts.iter().map(|t| t.map(sgn)).collect()
    }

    /// `E W_n²` for `n = 1..=h`.
    pub fn second_moments(&self) -> Result<Vec<f64>, ProcessError> {
        self.ws
            .iter()
            .map(|w| Ok(expectation(&self.space, &w.map(|v| v * v))?))
            .collect()
    }

    /// With `Z_n = signs[n−1] · W_n`, the largest `|E Z_i Z_j|` over `i ≠ j`.
    pub fn loeve_orthogonality(&self, signs: &[RandomVar]) -> Result<LoeveReport, ProcessError> {
        if signs.len() != self.horizon {
            return Err(ProcessError::InvalidArgument(format!(
                "expected {} sign variables, got {}",
                self.horizon,
                signs.len()
            )));
        }
        let mut zs = Vec::with_capacity(self.horizon);
        for (k, s) in signs.iter().enumerate() {
            let n = k + 1;
            if !is_measurable(s, self.sigma(n)?)? {
                return Err(ProcessError::NotMeasurable(format!(
                    "sign variable for step {n} is not F_{n}-measurable"
                )));
            }
            zs.push(s.zip_with(&self.ws[k], |a, b| a * b));
        }
        let mut max_off: f64 = 0.0;
        let mut diagonal = Vec::with_capacity(self.horizon);
        for i in 0..zs.len() {
            for j in i..zs.len() {
                let m = expectation(&self.space, &zs[i].zip_with(&zs[j], |a, b| a * b))?;
                if i == j {
                    diagonal.push(m);
                } else {
                    max_off = max_off.max(m.abs());
                }
            }
        }
        Ok(LoeveReport {
            max_off_diagonal: max_off,
            diagonal,
        })
    }
}

pub(crate) fn sgn(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Deterministic uniform attached to a symbol prefix, so that it is
/// measurable with respect to the prefix's σ-algebra.
fn prefix_uniform(prefix: &[usize], n: usize) -> f64 {
    let key = prefix.iter().fold(0x51_7cc1_b727_220a_u64, |acc, &s| {
        rng::hash_key(acc, s as u64, 0)
    });
    rng::uniform(key, n as u64, rng::LANE_ADAPTED)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binaries(h: usize) -> Vec<StepAlphabet> {
        vec![StepAlphabet::binary(1.0); h]
    }

    #[test]
    fn structure_counts() {
        let ep = ExactProcess::build(&binaries(2), &Transform::identity(), 0.0).unwrap();
        let counts: Vec<usize> = ep
            .filtration()
            .levels()
            .iter()
            .map(|p| p.block_count())
            .collect();
        assert_eq!(counts, vec![1, 2, 4]);
        assert_eq!(ep.space().size(), 4);
    }

    #[test]
    fn point_alphabet_is_deterministic() {
        let a = StepAlphabet::new(vec![3.0], vec![1.0]).unwrap();
        let ep = ExactProcess::build(&vec![a; 5], &Transform::identity(), 2.0).unwrap();
        assert_eq!(ep.space().size(), 1);
        assert_eq!(ep.x(6).unwrap().values(), &[2.0]);
    }

    #[test]
    fn horizon_twelve_weights() {
        let ep = ExactProcess::build(&binaries(12), &Transform::identity(), 0.0).unwrap();
        assert_eq!(ep.space().size(), 4096);
        let total: f64 = ep.space().weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn guard() {
        let three = StepAlphabet::new(vec![-1.0, 0.0, 1.0], vec![0.25, 0.5, 0.25]).unwrap();
        let err = ExactProcess::build(&vec![three; 13], &Transform::identity(), 0.0).unwrap_err();
        assert!(matches!(err, ProcessError::ExactGuard { .. }));
        assert!(ExactProcess::build(&binaries(15), &Transform::identity(), 0.0).is_err());
    }

    #[test]
    fn bias_shows_up_in_martingale_check() {
        let biased = StepAlphabet::raw(vec![-0.9, 1.1], vec![0.5, 0.5]).unwrap();
        let ep = ExactProcess::build(&vec![biased; 6], &Transform::identity(), 0.0).unwrap();
        assert!((ep.check_martingale_increment().unwrap() - 0.1).abs() < 1e-12);
        let centered = ExactProcess::build(&binaries(6), &Transform::identity(), 0.0).unwrap();
        assert!(centered.check_martingale_increment().unwrap() < 1e-12);
    }

    #[test]
    fn rejects_unmeasurable_signs() {
        let ep = ExactProcess::build(&binaries(3), &Transform::identity(), 1.0).unwrap();
        let mut signs = ep.sign_of_t();
        signs[0] = ep.w(1).unwrap().map(sgn);
        assert!(matches!(
            ep.loeve_orthogonality(&signs),
            Err(ProcessError::NotMeasurable(_))
        ));
    }

    #[test]
    fn step_ranges() {
        let ep = ExactProcess::build(&binaries(3), &Transform::identity(), 0.0).unwrap();
        assert!(ep.decompose(0).is_err());
        assert!(ep.decompose(3).is_ok());
        assert!(ep.decompose(4).is_err());
        assert!(ep.x(4).is_ok());
        assert!(ep.x(5).is_err());
    }
}
