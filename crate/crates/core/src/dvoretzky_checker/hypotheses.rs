use serde::Serialize;
use serde_json::json;

use crate::finprob::borel_cantelli_tail;
use crate::process_engine::{
    rng, ExactProcess, NoiseModel, ProcessError, ProcessSpec, StepAlphabet, Trajectory,
};
use crate::series_lab::{last_decile_max, verdict_from_terms, RealSeq, Schedule};

use super::ledger::{LedgerEntry, Status, Tag};
use super::params::{DvoretzkyParams, ParamSeq};
use super::CheckerError;

/// Smallest slack accepted by the `T_n` bound check.
pub const SLACK_TOL: f64 = -1e-9;
pub const MARTINGALE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SequenceTolerances {
    /// `α_n → 0` passes when the last-decile max is below this.
    pub alpha_tol: f64,
    /// Tail-Cauchy tolerance for `Σβ_n`.
    pub beta_tol: f64,
    /// `Σγ_n` must exceed this.
    pub div_threshold: f64,
}

impl Default for SequenceTolerances {
    fn default() -> Self {
        Self {
            alpha_tol: 0.05,
            beta_tol: 1e-4,
            div_threshold: 3.0,
        }
    }
}

struct Scan {
    min: f64,
    argmin: usize,
    decile_max: f64,
    residual: f64,
    partial_sum: f64,
}

fn scan(p: &ParamSeq, seed: u64, n0: usize, horizon: usize) -> Result<Scan, CheckerError> {
    let values = (n0..=horizon)
        .map(|n| p.eval(n, seed))
        .collect::<Result<Vec<_>, _>>()?;
    let (mut min, mut argmin) = (f64::INFINITY, n0);
    for (k, &v) in values.iter().enumerate() {
        if !(v >= min) {
            min = if v.is_nan() { f64::NEG_INFINITY } else { v };
            argmin = n0 + k;
            if v.is_nan() {
                break;
            }
        }
    }
    let verdict = verdict_from_terms(&values, 0.0, f64::INFINITY);
    Ok(Scan {
        min,
        argmin,
        decile_max: last_decile_max(&values),
        residual: verdict.evidence.residual,
        partial_sum: verdict.evidence.partial_sum,
    })
}

fn at(n: usize, seed: Option<u64>) -> serde_json::Value {
    match seed {
        Some(s) => json!({ "n": n, "seed": s }),
        None => json!({ "n": n }),
    }
}

/// H10–H15 over `n0..=horizon`.
///
/// Per-trajectory parameters are evaluated for every seed in `seeds` and
/// the worst seed is reported; regular parameters are evaluated once.
pub fn check_sequence_hypotheses(
    p: &DvoretzkyParams,
    horizon: usize,
    tols: &SequenceTolerances,
    seeds: &[u64],
) -> Result<Vec<(Tag, LedgerEntry)>, CheckerError> {
    if horizon <= p.n0 {
        return Err(CheckerError::InvalidArgument(format!(
            "horizon {horizon} must exceed n0 = {}",
            p.n0
        )));
    }
    let per_seed: Vec<Option<u64>> = if p.is_extended() {
        if seeds.is_empty() {
            return Err(CheckerError::InvalidArgument(
                "per-trajectory parameters need a nonempty seed set".into(),
            ));
        }
        seeds.iter().map(|&s| Some(s)).collect()
    } else {
        vec![None]
    };

    // (value, location) of the worst case so far, per tag
    let mut nonneg: [(f64, serde_json::Value); 3] =
        std::array::from_fn(|_| (f64::INFINITY, at(p.n0, None)));
    let mut h13 = (f64::NEG_INFINITY, json!(null));
    let mut h14 = (f64::NEG_INFINITY, json!(null));
    let mut h15 = (f64::INFINITY, json!(null));
    for seed in per_seed {
        let s = seed.unwrap_or(0);
        let sa = scan(&p.alpha, s, p.n0, horizon)?;
        let sb = scan(&p.beta, s, p.n0, horizon)?;
        let sg = scan(&p.gamma, s, p.n0, horizon)?;
        for (slot, sc) in nonneg.iter_mut().zip([&sa, &sb, &sg]) {
            if sc.min < slot.0 {
                *slot = (sc.min, at(sc.argmin, seed));
            }
        }
        if !(sa.decile_max <= h13.0) {
            h13 = (sa.decile_max, at(horizon, seed));
        }
        if !(sb.residual <= h14.0) {
            h14 = (sb.residual, at(horizon, seed));
        }
        if !(sg.partial_sum >= h15.0) {
            h15 = (sg.partial_sum, at(horizon, seed));
        }
    }

    let mut out = Vec::with_capacity(6);
    for (tag, (min, loc)) in [Tag::H10, Tag::H11, Tag::H12].into_iter().zip(nonneg) {
        out.push((
            tag,
            LedgerEntry::new(Status::from_bool(min >= 0.0), min, loc, horizon, 0.0),
        ));
    }
    out.push((
        Tag::H13,
        LedgerEntry::new(
            Status::from_bool(h13.0 < tols.alpha_tol),
            h13.0,
            h13.1,
            horizon,
            tols.alpha_tol,
        )
        .with_note("max of alpha over the last tenth of the horizon"),
    ));
    out.push((
        Tag::H14,
        LedgerEntry::new(
            Status::from_bool(h14.0 < tols.beta_tol),
            h14.0,
            h14.1,
            horizon,
            tols.beta_tol,
        )
        .with_note("tail-Cauchy residual of sum beta over the second half of the horizon"),
    ));
    out.push((
        Tag::H15,
        LedgerEntry::new(
            Status::from_bool(h15.0 > tols.div_threshold),
            h15.0,
            h15.1,
            horizon,
            tols.div_threshold,
        )
        .with_note("partial sum of gamma must exceed tol"),
    ));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseCheckConfig {
    pub horizon: usize,
    pub tail_tol: f64,
    pub exact_horizon: usize,
    /// Seeds per step for the Monte Carlo fallback of the martingale check.
    pub mc_seeds: u64,
}

impl Default for NoiseCheckConfig {
    fn default() -> Self {
        Self {
            horizon: 1_000_000,
            tail_tol: 1e-6,
            exact_horizon: 12,
            mc_seeds: 10_000,
        }
    }
}

/// H7 on a finite model of the noise and H8 from the analytic variances.
pub fn check_noise_hypotheses(
    spec: &ProcessSpec,
    cfg: &NoiseCheckConfig,
) -> Result<Vec<(Tag, LedgerEntry)>, CheckerError> {
    if cfg.horizon < 2 || cfg.exact_horizon == 0 {
        return Err(CheckerError::InvalidArgument(
            "noise horizons must be positive".into(),
        ));
    }
    let variances = (1..=cfg.horizon)
        .map(|n| spec.noise.variance(n))
        .collect::<Result<Vec<_>, _>>()?;
    let v = verdict_from_terms(&variances, cfg.tail_tol, f64::INFINITY);
    let h8 = LedgerEntry::new(
        Status::from_bool(v.converges()),
        v.evidence.residual,
        json!({ "window": [cfg.horizon / 2, cfg.horizon], "partial_sum": v.evidence.partial_sum }),
        cfg.horizon,
        cfg.tail_tol,
    );
    Ok(vec![(Tag::H7, martingale_entry(spec, cfg)?), (Tag::H8, h8)])
}

fn martingale_entry(
    spec: &ProcessSpec,
    cfg: &NoiseCheckConfig,
) -> Result<LedgerEntry, CheckerError> {
    let h = cfg.exact_horizon;
    let exact: Option<Vec<StepAlphabet>> = (1..=h)
        .map(|n| spec.noise.exact_alphabet(n))
        .collect::<Result<Option<Vec<_>>, _>>()?;
    let (alphabets, law) = match exact {
        Some(a) => (a, "exact"),
        None => (
            (1..=h)
                .map(|n| spec.noise.binary_surrogate(n))
                .collect::<Result<Vec<_>, _>>()?,
            "binary surrogate",
        ),
    };
    match ExactProcess::build(&alphabets, &spec.transform, spec.x0) {
        Ok(ep) => {
            let worst = ep.check_martingale_increment()?;
            Ok(LedgerEntry::new(
                Status::from_bool(worst < MARTINGALE_TOL),
                worst,
                json!({ "steps": h, "outcomes": ep.space().size(), "law": law }),
                h,
                MARTINGALE_TOL,
            ))
        }
        Err(ProcessError::ExactGuard { .. }) => monte_carlo_martingale(&spec.noise, cfg),
        Err(e) => Err(e.into()),
    }
}

/// Per-step sample mean of `W_n` over `mc_seeds` seeds against `3σ_n/√m`.
fn monte_carlo_martingale(
    noise: &NoiseModel,
    cfg: &NoiseCheckConfig,
) -> Result<LedgerEntry, CheckerError> {
    let m = cfg.mc_seeds.max(1);
    let mut worst = 0.0f64;
    let mut worst_n = 1;
    for n in 1..=cfg.exact_horizon {
        let mut sum = 0.0;
        for seed in 0..m {
            sum += noise.draw(seed, n, rng::LANE_NOISE)?;
        }
        let mean = sum / m as f64;
        let band = 3.0 * noise.std_dev(n)? / (m as f64).sqrt();
        let ratio = if band > 0.0 {
            mean.abs() / band
        } else if mean == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        if !(ratio <= worst) {
            worst = ratio;
            worst_n = n;
        }
    }
    let status = if worst < 1.0 {
        Status::FiniteHorizonPass
    } else {
        Status::Fail
    };
    Ok(LedgerEntry::new(
        status,
        worst,
        json!({ "n": worst_n, "seeds": m }),
        cfg.exact_horizon,
        1.0,
    )
    .with_note("exact model too large; value is max |mean W_n| / (3 sd_n / sqrt(seeds))"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridConfig {
    /// Steps `n0..=n0 + n_span` are probed.
    pub n_span: usize,
    /// Log-spaced offsets on each side of `x*`.
    pub points_per_side: usize,
    pub d_min: f64,
    pub d_max: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n_span: 1000,
            points_per_side: 200,
            d_min: 1e-6,
            d_max: 1e3,
        }
    }
}

impl GridConfig {
    /// `x*` together with `x* ± d` for log-spaced `d`.
    pub fn points(&self, x_star: f64) -> Vec<f64> {
        let k = self.points_per_side;
        let mut out = Vec::with_capacity(2 * k + 1);
        out.push(x_star);
        for i in 0..k {
            let t = if k == 1 {
                0.0
            } else {
                i as f64 / (k - 1) as f64
            };
            let d = self.d_min * (self.d_max / self.d_min).powf(t);
            out.push(x_star + d);
            out.push(x_star - d);
        }
        out
    }
}

struct Worst {
    slack: f64,
    n: usize,
    x: f64,
    source: String,
}

impl Worst {
    fn offer(&mut self, slack: f64, n: usize, x: f64, source: impl FnOnce() -> String) {
        let slack = if slack.is_nan() {
            f64::NEG_INFINITY
        } else {
            slack
        };
        if slack < self.slack {
            *self = Worst {
                slack,
                n,
                x,
                source: source(),
            };
        }
    }
}

/// H16: slack `RHS − |T_n(history) − x*|` over a synthetic grid and over
/// realized trajectories.
///
/// Grid histories have every coordinate but the last set to `x*`, and
/// adapted transforms see the auxiliary draw `0.5` there. Realized
/// histories use the recorded `T_n`.
pub fn check_t_bound(
    spec: &ProcessSpec,
    params: &DvoretzkyParams,
    grid: Option<&GridConfig>,
    histories: &[Trajectory],
    seeds: &[u64],
) -> Result<LedgerEntry, CheckerError> {
    let mut worst = Worst {
        slack: f64::INFINITY,
        n: params.n0,
        x: spec.x_star,
        source: "none".into(),
    };
    let mut max_n = params.n0;
    let mut probes = 0usize;
    if let Some(g) = grid {
        let xs = g.points(spec.x_star);
        let grid_seeds: Vec<u64> = if params.is_extended() {
            seeds.to_vec()
        } else {
            vec![0]
        };
        for n in params.n0..=params.n0 + g.n_span {
            let mut hist = vec![spec.x_star; n];
            for &seed in &grid_seeds {
                let (a, b, c) = (
                    params.alpha.eval(n, seed)?,
                    params.beta.eval(n, seed)?,
                    params.gamma.eval(n, seed)?,
                );
                for &x in &xs {
                    hist[n - 1] = x;
                    let t = spec.transform.eval(n, &hist, 0.5);
                    let slack =
                        params.mode.rhs(a, b, c, (x - spec.x_star).abs()) - (t - spec.x_star).abs();
                    probes += 1;
                    worst.offer(slack, n, x, || "grid".into());
                }
            }
        }
        max_n = params.n0 + g.n_span;
    }
    for tr in histories {
        for n in params.n0..=tr.ts.len() {
            let x = tr.xs[n - 1];
            let t = tr.ts[n - 1];
            let slack = params.rhs(n, tr.seed, (x - spec.x_star).abs())? - (t - spec.x_star).abs();
            probes += 1;
            worst.offer(slack, n, x, || format!("seed {}", tr.seed));
        }
        max_n = max_n.max(tr.ts.len());
    }
    if probes == 0 {
        return Err(CheckerError::InvalidArgument(
            "no histories to probe".into(),
        ));
    }
    Ok(LedgerEntry::new(
        Status::from_bool(worst.slack >= SLACK_TOL),
        worst.slack,
        json!({ "n": worst.n, "x": worst.x, "source": worst.source, "probes": probes }),
        max_n,
        SLACK_TOL,
    ))
}

/// `Z_n = W_n · sgn(T_n)` with `sgn(0) = 0`.
pub fn z_sequence(tr: &Trajectory) -> Vec<f64> {
    tr.ws
        .iter()
        .zip(&tr.ts)
        .map(|(w, t)| w * crate::process_engine::sgn(*t))
        .collect()
}

/// Chebyshev/Borel–Cantelli budget `Σ_{n=k}^{horizon} min(1, E W_n² / α_n²)`
/// for the events `|W_n| > α_n`.
pub fn chebyshev_tail(
    noise: &NoiseModel,
    alpha: &Schedule,
    k: usize,
    horizon: usize,
) -> Result<f64, CheckerError> {
    if k == 0 || k > horizon {
        return Err(CheckerError::InvalidArgument(format!(
            "need 1 <= k <= horizon, got k = {k}"
        )));
    }
    let mut probs = vec![0.0; horizon];
    for n in k..=horizon {
        let a = alpha.get(n)?;
        let v = noise.variance(n)?;
        probs[n - 1] = if v == 0.0 {
            0.0
        } else if a > 0.0 {
            (v / (a * a)).min(1.0)
        } else {
            1.0
        };
    }
    let p = RealSeq::from_values(
        "chebyshev",
        crate::series_lab::DeclaredSign::Nonnegative,
        probs,
    )?;
    Ok(borel_cantelli_tail(&p, k, horizon)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dvoretzky_checker::BoundMode;
    use crate::process_engine::{simulate, Transform};

    fn regular(alpha: Schedule, beta: Schedule, gamma: Schedule) -> DvoretzkyParams {
        DvoretzkyParams::regular(alpha, beta, gamma, BoundMode::Original, 1)
    }

    fn status_of(entries: &[(Tag, LedgerEntry)], tag: Tag) -> Status {
        entries.iter().find(|(t, _)| *t == tag).unwrap().1.status
    }

    const STD: SequenceTolerances = SequenceTolerances {
        alpha_tol: 0.05,
        beta_tol: 1e-4,
        div_threshold: 10.0,
    };

    #[test]
    fn standard_sequences_pass() {
        let p = regular(
            Schedule::harmonic(1.0, 0.0),
            Schedule::power(2.0, 1.0, 0.0),
            Schedule::harmonic(1.0, 0.0),
        );
        let e = check_sequence_hypotheses(&p, 100_000, &STD, &[]).unwrap();
        assert!(e.iter().all(|(_, x)| x.status == Status::Pass), "{e:?}");
    }

    #[test]
    fn summable_gamma_fails_h15() {
        let p = regular(
            Schedule::harmonic(1.0, 0.0),
            Schedule::zero(),
            Schedule::power(2.0, 1.0, 0.0),
        );
        let e = check_sequence_hypotheses(&p, 100_000, &STD, &[]).unwrap();
        assert_eq!(status_of(&e, Tag::H15), Status::Fail);
        let h15 = &e.iter().find(|(t, _)| *t == Tag::H15).unwrap().1;
        assert!(h15.evidence.value < 2.0);
        assert_eq!(status_of(&e, Tag::H13), Status::Pass);
    }

    #[test]
    fn harmonic_beta_fails_h14() {
        let p = regular(
            Schedule::harmonic(1.0, 0.0),
            Schedule::harmonic(1.0, 0.0),
            Schedule::harmonic(1.0, 0.0),
        );
        let tols = SequenceTolerances {
            beta_tol: 1e-8,
            ..STD
        };
        let e = check_sequence_hypotheses(&p, 100_000, &tols, &[]).unwrap();
        assert_eq!(status_of(&e, Tag::H14), Status::Fail);
        let v = e
            .iter()
            .find(|(t, _)| *t == Tag::H14)
            .unwrap()
            .1
            .evidence
            .value;
        assert!((v - std::f64::consts::LN_2).abs() < 1e-3);
    }

    #[test]
    fn negative_values_fail_scans() {
        let p = regular(
            Schedule::unrestricted("a", |n| if n == 7 { -0.5 } else { 0.0 }),
            Schedule::zero(),
            Schedule::constant(1.0),
        );
        let e = check_sequence_hypotheses(&p, 1000, &STD, &[]).unwrap();
        let h10 = &e.iter().find(|(t, _)| *t == Tag::H10).unwrap().1;
        assert_eq!(h10.status, Status::Fail);
        assert_eq!(h10.evidence.value, -0.5);
        assert_eq!(h10.evidence.at, json!({"n": 7}));
    }

    #[test]
    fn extended_reduction_matches_regular() {
        let p = regular(
            Schedule::harmonic(1.0, 0.0),
            Schedule::power(2.0, 1.0, 0.0),
            Schedule::harmonic(1.0, 0.0),
        );
        let a = check_sequence_hypotheses(&p, 20_000, &STD, &[]).unwrap();
        let b = check_sequence_hypotheses(&p.lifted(), 20_000, &STD, &[0, 1, 2]).unwrap();
        for ((ta, ea), (tb, eb)) in a.iter().zip(&b) {
            assert_eq!(ta, tb);
            assert_eq!(ea.status, eb.status);
            assert_eq!(ea.evidence.value, eb.evidence.value);
        }
    }

    #[test]
    fn extended_worst_seed_decides() {
        let alpha = ParamSeq::per_trajectory("a", |n, s| if s == 2 { 1.0 } else { 1.0 / n as f64 });
        let p = DvoretzkyParams {
            alpha,
            beta: ParamSeq::Regular(Schedule::zero()),
            gamma: ParamSeq::Regular(Schedule::harmonic(1.0, 0.0)),
            mode: BoundMode::Original,
            n0: 1,
        };
        let e = check_sequence_hypotheses(&p, 20_000, &STD, &[0, 1, 2, 3]).unwrap();
        let h13 = &e.iter().find(|(t, _)| *t == Tag::H13).unwrap().1;
        assert_eq!(h13.status, Status::Fail);
        assert_eq!(h13.evidence.at["seed"], 2);
        assert!(check_sequence_hypotheses(&p, 100, &STD, &[]).is_err());
    }

    fn rm_spec(a: Schedule) -> ProcessSpec {
        let noise = NoiseModel::scaled(NoiseModel::gaussian(Schedule::constant(1.0)), a, true);
        ProcessSpec::new("rm", Transform::identity(), noise, 0.0, 0.0)
    }

    #[test]
    fn noise_summability() {
        let cfg = NoiseCheckConfig::default();
        let good = check_noise_hypotheses(&rm_spec(Schedule::harmonic(1.0, 1.0)), &cfg).unwrap();
        assert_eq!(status_of(&good, Tag::H8), Status::Pass);
        assert_eq!(status_of(&good, Tag::H7), Status::Pass);
        let cfg_small = NoiseCheckConfig {
            horizon: 100_000,
            ..cfg
        };
        let bad =
            check_noise_hypotheses(&rm_spec(Schedule::power(0.5, 1.0, 0.0)), &cfg_small).unwrap();
        assert_eq!(status_of(&bad, Tag::H8), Status::Fail);
    }

    #[test]
    fn oversized_exact_model_falls_back_to_monte_carlo() {
        let noise = NoiseModel::discrete(
            vec![-1.0, 0.0, 2.0],
            vec![0.3, 0.4, 0.3],
            Schedule::constant(1.0),
        )
        .unwrap();
        let spec = ProcessSpec::new("d", Transform::identity(), noise, 0.0, 0.0);
        let cfg = NoiseCheckConfig {
            horizon: 1000,
            tail_tol: 1e-6,
            exact_horizon: 14,
            mc_seeds: 10_000,
        };
        let e = check_noise_hypotheses(&spec, &cfg).unwrap();
        assert_eq!(status_of(&e, Tag::H7), Status::FiniteHorizonPass);
        assert_eq!(status_of(&e, Tag::H8), Status::Fail);
    }

    #[test]
    fn fixed_point_map_always_passes() {
        let spec = ProcessSpec::new(
            "const",
            Transform::deterministic(|_, _| 1.5),
            NoiseModel::zero(),
            1.5,
            0.0,
        );
        let p = regular(Schedule::zero(), Schedule::zero(), Schedule::zero());
        let e = check_t_bound(&spec, &p, Some(&GridConfig::default()), &[], &[]).unwrap();
        assert_eq!(e.status, Status::Pass);
        assert!(e.evidence.value >= 0.0);
    }

    #[test]
    fn doubling_map_fails_with_expected_slack() {
        let spec = ProcessSpec::new(
            "double",
            Transform::deterministic(|n, h| 2.0 * h[n - 1]),
            NoiseModel::zero(),
            0.0,
            1.0,
        );
        let p = regular(Schedule::zero(), Schedule::zero(), Schedule::zero());
        let g = GridConfig {
            n_span: 3,
            ..Default::default()
        };
        let e = check_t_bound(&spec, &p, Some(&g), &[], &[]).unwrap();
        assert_eq!(e.status, Status::Fail);
        assert_eq!(e.evidence.value, -1e3);
        assert_eq!(e.evidence.at["x"].as_f64().unwrap().abs(), 1e3);
    }

    #[test]
    fn realized_histories_are_probed() {
        let spec = ProcessSpec::new(
            "half",
            Transform::deterministic(|n, h| 0.5 * h[n - 1]),
            NoiseModel::gaussian(Schedule::constant(0.1)),
            0.0,
            1.0,
        );
        let trs: Vec<Trajectory> = (0..5).map(|s| simulate(&spec, s, 200).unwrap()).collect();
        let ok = regular(Schedule::zero(), Schedule::zero(), Schedule::zero());
        assert_eq!(
            check_t_bound(&spec, &ok, None, &trs, &[]).unwrap().status,
            Status::Pass
        );
        let p = regular(Schedule::zero(), Schedule::zero(), Schedule::constant(10.0));
        let e = check_t_bound(&spec, &p, None, &trs, &[]).unwrap();
        assert_eq!(e.status, Status::Fail);
        assert!(e.evidence.at["source"]
            .as_str()
            .unwrap()
            .starts_with("seed"));
    }

    #[test]
    fn z_sequence_conventions() {
        let tr = Trajectory {
            seed: 0,
            xs: vec![0.0; 4],
            ts: vec![1.0, 0.0, -2.0],
            ws: vec![0.5, 0.7, 0.25],
            diverged_at: None,
        };
        assert_eq!(z_sequence(&tr), vec![0.5, 0.0, -0.25]);
    }

    #[test]
    fn chebyshev_budget() {
        let noise = NoiseModel::gaussian(Schedule::harmonic(1.0, 0.0));
        // E W_n² / α_n² = (1/n²) / (1/√n)² = 1/n
        let tail = chebyshev_tail(&noise, &Schedule::power(0.5, 1.0, 0.0), 2, 1000).unwrap();
        let want: f64 = (2..=1000).map(|n| 1.0 / n as f64).sum();
        assert!((tail - want).abs() < 1e-9);
        assert!(chebyshev_tail(&noise, &Schedule::zero(), 0, 10).is_err());
    }
}
