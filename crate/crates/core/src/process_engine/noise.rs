use crate::series_lab::Schedule;

use super::exact::StepAlphabet;
use super::rng;
use super::ProcessError;

#[derive(Debug, Clone)]
enum Kind {
    Gaussian {
        sigma: Schedule,
    },
    Uniform {
        half_width: Schedule,
    },
    Discrete {
        values: Vec<f64>,
        cumulative: Vec<f64>,
        probs: Vec<f64>,
        scale: Schedule,
    },
    Scaled {
        inner: Box<NoiseModel>,
        factor: Schedule,
        negate: bool,
    },
    Difference {
        inner: Box<NoiseModel>,
    },
}

/// Per-step centered noise `W_n` with a closed-form second moment.
#[derive(Debug, Clone)]
pub struct NoiseModel {
    kind: Kind,
}

impl NoiseModel {
    pub fn zero() -> Self {
        Self::gaussian(Schedule::zero())
    }

    /// `σ_n · Z` with `Z` standard normal.
    pub fn gaussian(sigma: Schedule) -> Self {
        Self {
            kind: Kind::Gaussian { sigma },
        }
    }

    /// Uniform on `[−h_n, h_n]`.
    pub fn uniform(half_width: Schedule) -> Self {
        Self {
            kind: Kind::Uniform { half_width },
        }
    }

    /// `scale_n · V` where `V` takes `values[i]` with `probs[i]`. The values
    /// are shifted so that `V` has mean zero.
    pub fn discrete(
        values: Vec<f64>,
        probs: Vec<f64>,
        scale: Schedule,
    ) -> Result<Self, ProcessError> {
        let alpha = StepAlphabet::new(values, probs)?;
        let mut acc = 0.0;
        let cumulative = alpha
            .probs()
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(Self {
            kind: Kind::Discrete {
                values: alpha.values().to_vec(),
                probs: alpha.probs().to_vec(),
                cumulative,
                scale,
            },
        })
    }

    /// `± factor_n · inner_n`; used for step-size weighted noise.
    pub fn scaled(inner: NoiseModel, factor: Schedule, negate: bool) -> Self {
        Self {
            kind: Kind::Scaled {
                inner: Box::new(inner),
                factor,
                negate,
            },
        }
    }

    /// `ε − ε′` for two independent copies of `inner`, the second drawn from
    /// its own lane.
    pub fn difference(inner: NoiseModel) -> Self {
        Self {
            kind: Kind::Difference {
                inner: Box::new(inner),
            },
        }
    }

    /// Noise value at step `n` for a uniform draw `u ∈ (0, 1)`.
    ///
    /// Difference models need two draws; use [`NoiseModel::draw`].
    pub fn sample(&self, n: usize, u: f64) -> Result<f64, ProcessError> {
        Ok(match &self.kind {
            Kind::Gaussian { sigma } => {
                let s = sigma.get(n)?;
                if s == 0.0 {
                    0.0
                } else {
                    s * rng::inv_norm_cdf(u)
                }
            }
            Kind::Uniform { half_width } => half_width.get(n)? * (2.0 * u - 1.0),
            Kind::Discrete {
                values,
                cumulative,
                scale,
                ..
            } => {
                let i = cumulative
                    .partition_point(|&c| c <= u)
                    .min(values.len() - 1);
                scale.get(n)? * values[i]
            }
            Kind::Scaled {
                inner,
                factor,
                negate,
            } => {
                let v = factor.get(n)? * inner.sample(n, u)?;
                if *negate {
                    -v
                } else {
                    v
                }
            }
            Kind::Difference { .. } => {
                return Err(ProcessError::InvalidNoise(
                    "a difference of two draws cannot be sampled from one uniform".into(),
                ))
            }
        })
    }

    pub fn draw(&self, seed: u64, n: usize, lane: u64) -> Result<f64, ProcessError> {
        match &self.kind {
            Kind::Difference { inner } => {
                Ok(inner.draw(seed, n, lane)? - inner.draw(seed, n, lane + rng::LANE_NOISE_AUX)?)
            }
            Kind::Scaled {
                inner,
                factor,
                negate,
            } if inner.needs_two_draws() => {
                let v = factor.get(n)? * inner.draw(seed, n, lane)?;
                Ok(if *negate { -v } else { v })
            }
            _ => self.sample(n, rng::uniform(seed, n as u64, lane)),
        }
    }

    fn needs_two_draws(&self) -> bool {
        match &self.kind {
            Kind::Difference { .. } => true,
            Kind::Scaled { inner, .. } => inner.needs_two_draws(),
            _ => false,
        }
    }

    /// `E W_n²` in closed form.
    pub fn variance(&self, n: usize) -> Result<f64, ProcessError> {
        Ok(match &self.kind {
            Kind::Gaussian { sigma } => sigma.get(n)?.powi(2),
            Kind::Uniform { half_width } => half_width.get(n)?.powi(2) / 3.0,
            Kind::Discrete {
                values,
                probs,
                scale,
                ..
            } => {
                let m2: f64 = values.iter().zip(probs).map(|(v, p)| p * v * v).sum();
                scale.get(n)?.powi(2) * m2
            }
            Kind::Scaled { inner, factor, .. } => factor.get(n)?.powi(2) * inner.variance(n)?,
            Kind::Difference { inner } => 2.0 * inner.variance(n)?,
        })
    }

    pub fn std_dev(&self, n: usize) -> Result<f64, ProcessError> {
        Ok(self.variance(n)?.sqrt())
    }

    /// Two-point `±sd_n` law with the same second moment.
    pub fn binary_surrogate(&self, n: usize) -> Result<StepAlphabet, ProcessError> {
        let sd = self.std_dev(n)?;
        StepAlphabet::new(vec![-sd, sd], vec![0.5, 0.5])
    }

    /// The law of `W_n` itself when it is finitely supported.
    pub fn exact_alphabet(&self, n: usize) -> Result<Option<StepAlphabet>, ProcessError> {
        Ok(match &self.kind {
            Kind::Gaussian { sigma } if sigma.get(n)? == 0.0 => {
                Some(StepAlphabet::raw(vec![0.0], vec![1.0])?)
            }
            Kind::Gaussian { .. } | Kind::Uniform { .. } => None,
            Kind::Discrete {
                values,
                probs,
                scale,
                ..
            } => {
                let s = scale.get(n)?;
                Some(StepAlphabet::raw(
                    values.iter().map(|v| s * v).collect(),
                    probs.clone(),
                )?)
            }
            Kind::Scaled {
                inner,
                factor,
                negate,
            } => {
                let f = factor.get(n)? * if *negate { -1.0 } else { 1.0 };
                match inner.exact_alphabet(n)? {
                    Some(a) => Some(StepAlphabet::raw(
                        a.values().iter().map(|v| f * v).collect(),
                        a.probs().to_vec(),
                    )?),
                    None => None,
                }
            }
            Kind::Difference { inner } => match inner.exact_alphabet(n)? {
                Some(a) => {
                    let mut values = Vec::with_capacity(a.len() * a.len());
                    let mut probs = Vec::with_capacity(a.len() * a.len());
                    for (v, p) in a.values().iter().zip(a.probs()) {
                        for (v2, p2) in a.values().iter().zip(a.probs()) {
                            values.push(v - v2);
                            probs.push(p * p2);
                        }
                    }
                    Some(StepAlphabet::raw(values, probs)?)
                }
                None => None,
            },
        })
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            Kind::Gaussian { sigma } => format!("gaussian({})", sigma.label()),
            Kind::Uniform { half_width } => format!("uniform({})", half_width.label()),
            Kind::Discrete { values, scale, .. } => {
                format!("discrete({} atoms, {})", values.len(), scale.label())
            }
            Kind::Scaled {
                inner,
                factor,
                negate,
            } => format!(
                "{}{} * {}",
                if *negate { "-" } else { "" },
                factor.label(),
                inner.describe()
            ),
            Kind::Difference { inner } => format!("difference of two {}", inner.describe()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discrete_is_recentered() {
        let m =
            NoiseModel::discrete(vec![0.0, 1.0], vec![0.5, 0.5], Schedule::constant(1.0)).unwrap();
        let a = m.exact_alphabet(3).unwrap().unwrap();
        assert_eq!(a.values(), &[-0.5, 0.5]);
        assert_eq!(m.variance(3).unwrap(), 0.25);
        assert_eq!(m.sample(1, 0.1).unwrap(), -0.5);
        assert_eq!(m.sample(1, 0.9).unwrap(), 0.5);
    }

    #[test]
    fn discrete_rejects_bad_probs() {
        assert!(
            NoiseModel::discrete(vec![0.0, 1.0], vec![0.5, 0.6], Schedule::constant(1.0)).is_err()
        );
        assert!(NoiseModel::discrete(vec![0.0], vec![0.5, 0.5], Schedule::constant(1.0)).is_err());
    }

    #[test]
    fn closed_form_variances() {
        let g = NoiseModel::gaussian(Schedule::constant(2.0));
        assert_eq!(g.variance(5).unwrap(), 4.0);
        let u = NoiseModel::uniform(Schedule::constant(3.0));
        assert_eq!(u.variance(5).unwrap(), 3.0);
        let s = NoiseModel::scaled(g, Schedule::harmonic(1.0, 1.0), true);
        assert!((s.variance(3).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn empirical_variance_matches() {
        let models = [
            NoiseModel::gaussian(Schedule::constant(1.5)),
            NoiseModel::uniform(Schedule::constant(2.0)),
            NoiseModel::discrete(
                vec![-1.0, 0.0, 4.0],
                vec![0.2, 0.5, 0.3],
                Schedule::constant(1.0),
            )
            .unwrap(),
        ];
        for m in &models {
            let n = 100_000;
            let (mut s1, mut s2) = (0.0, 0.0);
            for seed in 0..n {
                let w = m.draw(seed, 7, rng::LANE_NOISE).unwrap();
                s1 += w;
                s2 += w * w;
            }
            let var = m.variance(7).unwrap();
            assert!(
                (s1 / n as f64).abs() < 4.0 * (var / n as f64).sqrt(),
                "{}",
                m.describe()
            );
            assert!((s2 / n as f64 / var - 1.0).abs() < 0.03, "{}", m.describe());
        }
    }

    #[test]
    fn negated_scaling_flips_sign() {
        let base = NoiseModel::uniform(Schedule::constant(1.0));
        let neg = NoiseModel::scaled(base.clone(), Schedule::constant(0.5), true);
        assert_eq!(
            neg.sample(2, 0.8).unwrap(),
            -0.5 * base.sample(2, 0.8).unwrap()
        );
    }

    #[test]
    fn difference_uses_two_lanes() {
        let base = NoiseModel::gaussian(Schedule::constant(1.0));
        let d = NoiseModel::difference(base.clone());
        let want = base.draw(4, 3, rng::LANE_NOISE).unwrap()
            - base.draw(4, 3, rng::LANE_NOISE_AUX).unwrap();
        assert_eq!(d.draw(4, 3, rng::LANE_NOISE).unwrap(), want);
        assert_eq!(d.variance(3).unwrap(), 2.0);
        assert!(d.sample(3, 0.5).is_err());
        let scaled = NoiseModel::scaled(d, Schedule::constant(0.5), false);
        assert_eq!(scaled.draw(4, 3, rng::LANE_NOISE).unwrap(), 0.5 * want);
        let coin =
            NoiseModel::discrete(vec![-1.0, 1.0], vec![0.5, 0.5], Schedule::constant(1.0)).unwrap();
        let a = NoiseModel::difference(coin)
            .exact_alphabet(1)
            .unwrap()
            .unwrap();
        assert_eq!(a.len(), 4);
        assert_eq!(a.second_moment(), 2.0);
    }

    #[test]
    fn zero_noise_has_point_alphabet() {
        let a = NoiseModel::zero().exact_alphabet(1).unwrap().unwrap();
        assert_eq!(a.values(), &[0.0]);
        assert_eq!(NoiseModel::zero().draw(9, 9, 0).unwrap(), 0.0);
    }
}
