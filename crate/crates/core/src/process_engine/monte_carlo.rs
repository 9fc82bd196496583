use rayon::prelude::*;
use serde::Serialize;

use super::simulate::{run_with, ProcessSpec};
use super::ProcessError;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedOutcome {
    pub seed: u64,
    /// `|X_horizon − x*|`, absent when the trajectory diverged.
    pub terminal_error: Option<f64>,
    pub converged: bool,
    pub diverged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckpointStats {
    pub n: usize,
    /// Over seeds still inside the divergence guard at step `n`.
    pub median_err: Option<f64>,
    pub p90_err: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloReport {
    pub schema_version: u32,
    pub spec_id: String,
    pub horizon: usize,
    pub eps: f64,
    pub fraction_converged: f64,
    pub diverged_count: usize,
    pub seeds: Vec<SeedOutcome>,
    pub checkpoints: Vec<CheckpointStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

/// Runs `work` on a dedicated pool of `jobs` threads, or on rayon's global
/// pool when `jobs` is `None`.
pub fn in_pool<T, F>(jobs: Option<usize>, work: F) -> Result<T, ProcessError>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    match jobs {
        Some(k) => Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build()
            .map_err(|e| ProcessError::InvalidArgument(format!("thread pool: {e}")))?
            .install(work)),
        None => Ok(work()),
    }
}

/// Linear interpolation between order statistics; `sorted` must be ascending.
pub fn quantile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    Some(sorted[lo] + (sorted[hi] - sorted[lo]) * frac)
}

struct SeedRun {
    outcome: SeedOutcome,
    at_checkpoints: Vec<Option<f64>>,
}

fn run_seed(
    spec: &ProcessSpec,
    seed: u64,
    horizon: usize,
    eps: f64,
    checkpoints: &[usize],
) -> Result<SeedRun, ProcessError> {
    let mut at = vec![None; checkpoints.len()];
    let mut xs = Vec::with_capacity(horizon);
    let record_cp = |at: &mut Vec<Option<f64>>, n: usize, x: f64| {
        for (slot, &c) in at.iter_mut().zip(checkpoints) {
            if c == n && x.is_finite() {
                *slot = Some((x - spec.x_star).abs());
            }
        }
    };
    record_cp(&mut at, 1, spec.x0);
    let diverged_at = run_with(spec, seed, horizon, &mut xs, |n, _, _, x| {
        record_cp(&mut at, n + 1, x);
    })?;
    let diverged = diverged_at.is_some();
    if let Some(d) = diverged_at {
        // the value that tripped the guard is not a usable error
        for (slot, &c) in at.iter_mut().zip(checkpoints) {
            if c >= d {
                *slot = None;
            }
        }
    }
    let terminal_error = if diverged {
        None
    } else {
        Some((xs[xs.len() - 1] - spec.x_star).abs())
    };
    Ok(SeedRun {
        outcome: SeedOutcome {
            seed,
            converged: terminal_error.is_some_and(|e| e < eps),
            terminal_error,
            diverged,
        },
        at_checkpoints: at,
    })
}

/// Runs every seed to `horizon` and summarizes the terminal errors.
///
/// Seeds run on a pool of `jobs` threads (`None`: rayon's default); the
/// report depends only on the seed list, never on scheduling.
pub fn monte_carlo_convergence(
    spec: &ProcessSpec,
    seeds: &[u64],
    horizon: usize,
    eps: f64,
    checkpoints: &[usize],
    jobs: Option<usize>,
) -> Result<MonteCarloReport, ProcessError> {
    if seeds.is_empty() {
        return Err(ProcessError::InvalidArgument("seed set is empty".into()));
    }
    if !(eps > 0.0) {
        return Err(ProcessError::InvalidArgument(format!(
            "eps must be positive, got {eps}"
        )));
    }
    if let Some(&c) = checkpoints.iter().find(|&&c| c == 0 || c > horizon) {
        return Err(ProcessError::InvalidArgument(format!(
            "checkpoint {c} outside 1..={horizon}"
        )));
    }
    let mut sorted_seeds = seeds.to_vec();
    sorted_seeds.sort_unstable();
    sorted_seeds.dedup();

    let runs: Vec<SeedRun> = in_pool(jobs, || {
        sorted_seeds
            .par_iter()
            .map(|&s| run_seed(spec, s, horizon, eps, checkpoints))
            .collect::<Result<_, _>>()
    })??;

    let converged = runs.iter().filter(|r| r.outcome.converged).count();
    let diverged_count = runs.iter().filter(|r| r.outcome.diverged).count();
    let checkpoints = checkpoints
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let mut errs: Vec<f64> = runs.iter().filter_map(|r| r.at_checkpoints[k]).collect();
            errs.sort_by(f64::total_cmp);
            CheckpointStats {
                n,
                median_err: quantile(&errs, 0.5),
                p90_err: quantile(&errs, 0.9),
            }
        })
        .collect();
    Ok(MonteCarloReport {
        schema_version: REPORT_SCHEMA_VERSION,
        spec_id: spec.id.clone(),
        horizon,
        eps,
        fraction_converged: converged as f64 / runs.len() as f64,
        diverged_count,
        seeds: runs.into_iter().map(|r| r.outcome).collect(),
        checkpoints,
        timestamp: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process_engine::{NoiseModel, Transform};
    use crate::series_lab::Schedule;

    #[test]
    fn quantiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), Some(2.5));
        assert_eq!(quantile(&v, 0.0), Some(1.0));
        assert_eq!(quantile(&v, 1.0), Some(4.0));
        assert!((quantile(&v, 0.9).unwrap() - 3.7).abs() < 1e-15);
        assert_eq!(quantile(&[], 0.5), None);
    }

    #[test]
    fn contraction_without_noise_converges() {
        let spec = ProcessSpec::new(
            "half",
            Transform::deterministic(|n, h| 0.5 * h[n - 1]),
            NoiseModel::zero(),
            0.0,
            4.0,
        );
        let r = monte_carlo_convergence(&spec, &[3, 1, 2], 80, 1e-9, &[1, 80], Some(2)).unwrap();
        assert_eq!(r.fraction_converged, 1.0);
        assert_eq!(
            r.seeds.iter().map(|s| s.seed).collect::<Vec<_>>(),
            vec![1, 2, 3]
        );
        assert_eq!(r.checkpoints[0].median_err, Some(4.0));
    }

    #[test]
    fn huge_eps_counts_everything_but_divergence() {
        let spec = ProcessSpec::new(
            "mixed",
            Transform::deterministic(|n, h| 3.0 * h[n - 1]),
            NoiseModel::gaussian(Schedule::constant(1.0)),
            0.0,
            0.0,
        );
        let r = monte_carlo_convergence(&spec, &(0..20).collect::<Vec<_>>(), 40, 1e18, &[], None)
            .unwrap();
        let expect = 1.0 - r.diverged_count as f64 / 20.0;
        assert_eq!(r.fraction_converged, expect);
        assert_eq!(r.diverged_count, 20);
    }

    #[test]
    fn jobs_do_not_change_report() {
        let spec = ProcessSpec::new(
            "ou",
            Transform::deterministic(|n, h| 0.9 * h[n - 1]),
            NoiseModel::gaussian(Schedule::constant(0.1)),
            0.0,
            1.0,
        );
        let seeds: Vec<u64> = (0..64).collect();
        let a = monte_carlo_convergence(&spec, &seeds, 500, 0.2, &[10, 500], Some(1)).unwrap();
        let b = monte_carlo_convergence(&spec, &seeds, 500, 0.2, &[10, 500], Some(8)).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn rejects_bad_config() {
        let spec = ProcessSpec::new("id", Transform::identity(), NoiseModel::zero(), 0.0, 0.0);
        assert!(monte_carlo_convergence(&spec, &[], 10, 0.1, &[], None).is_err());
        assert!(monte_carlo_convergence(&spec, &[1], 10, 0.0, &[], None).is_err());
        assert!(monte_carlo_convergence(&spec, &[1], 10, 0.1, &[11], None).is_err());
    }
}
