//! Randomized property suite over small finite spaces.
//!
//! Every suite reduces each trial to a "violation" that must stay at or
//! below the suite tolerance, so the table reads uniformly: residuals for
//! identities, `−gap` for Jensen, `lhs − rhs` for inequalities.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::ops::{
    chebyshev_check, check_factor_out, check_tower, check_universal_property, cond_expectation,
    expectation, is_measurable, jensen_check, lp_norm, Convex,
};
use super::space::{FiniteProbSpace, Partition, RandomVar, TOL};
use super::FinProbError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SelftestConfig {
    pub trials: usize,
    pub seed: u64,
    pub max_size: usize,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        Self {
            trials: 1000,
            seed: 7,
            max_size: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub trials: usize,
    pub worst_violation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Competitors per instance in the L² minimality suite.
const L2_COMPETITORS: usize = 50;

type Trial = fn(&mut ChaCha8Rng, usize) -> Result<f64, FinProbError>;

const SUITES: &[(&str, f64, Trial)] = &[
    ("universal_property", TOL, trial_universal),
    ("tower_law", TOL, trial_tower),
    ("expectation_preserved", TOL, trial_preserve),
    ("factor_out", TOL, trial_factor_out),
    ("jensen_square", TOL, trial_jensen_sq),
    ("jensen_abs", TOL, trial_jensen_abs),
    ("jensen_exp", TOL, trial_jensen_exp),
    ("linearity", TOL, trial_linearity),
    ("monotonicity", TOL, trial_monotonicity),
    ("idempotence", 0.0, trial_idempotence),
    ("measurable_output", 0.0, trial_measurable),
    ("l2_minimality", TOL, trial_l2_min),
    ("contractive_l1", TOL, trial_contract_l1),
    ("contractive_l2", TOL, trial_contract_l2),
    ("chebyshev", TOL, trial_chebyshev),
    ("lp_triangle", TOL, trial_triangle),
];

/// Runs every suite; each suite has its own deterministic stream derived from `seed`.
pub fn run_selftest(cfg: &SelftestConfig) -> Result<Vec<SuiteResult>, FinProbError> {
    if cfg.trials == 0 || cfg.max_size == 0 {
        return Err(FinProbError::InvalidArgument(
            "trials and max_size must be positive".into(),
        ));
    }
    SUITES
        .iter()
        .enumerate()
        .map(|(idx, &(name, tolerance, trial))| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(idx as u64);
            let mut worst = f64::NEG_INFINITY;
            for _ in 0..cfg.trials {
                let size = rng.gen_range(1..=cfg.max_size);
                let v = trial(&mut rng, size)?;
                worst = if v.is_nan() {
                    f64::INFINITY
                } else {
                    worst.max(v)
                };
            }
            Ok(SuiteResult {
                name,
                trials: cfg.trials,
                worst_violation: worst,
                tolerance,
                pass: worst <= tolerance,
            })
        })
        .collect()
}

pub fn render_table(results: &[SuiteResult]) -> String {
    let mut out = format!(
        "{:<24} {:>7} {:>14} {:>9}  result\n",
        "suite", "trials", "worst", "tol"
    );
    for r in results {
        out.push_str(&format!(
            "{:<24} {:>7} {:>14.3e} {:>9.1e}  {}\n",
            r.name,
            r.trials,
            r.worst_violation,
            r.tolerance,
            if r.pass { "PASS" } else { "FAIL" }
        ));
    }
    out
}

/// Strictly positive weights, normalized.
pub fn random_space<R: Rng>(rng: &mut R, size: usize) -> FiniteProbSpace {
    let raw: Vec<f64> = (0..size).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    FiniteProbSpace::new(raw.into_iter().map(|w| w / total).collect())
        .expect("normalized positive weights form a distribution")
}

pub fn random_var<R: Rng>(rng: &mut R, size: usize, bound: f64) -> RandomVar {
    RandomVar::new((0..size).map(|_| rng.gen_range(-bound..bound)).collect())
}

pub fn random_partition<R: Rng>(rng: &mut R, size: usize) -> Partition {
    let k = rng.gen_range(1..=size);
    let labels: Vec<usize> = (0..size).map(|_| rng.gen_range(0..k)).collect();
    Partition::from_keys(&labels)
}

/// `(coarse, fine)` with `fine` refining `coarse`.
pub fn random_refining_pair<R: Rng>(rng: &mut R, size: usize) -> (Partition, Partition) {
    let fine = random_partition(rng, size);
    let k = rng.gen_range(1..=fine.block_count());
    let merge: Vec<usize> = (0..fine.block_count())
        .map(|_| rng.gen_range(0..k))
        .collect();
    let coarse_labels: Vec<usize> = fine.block_of().iter().map(|&b| merge[b]).collect();
    (Partition::from_keys(&coarse_labels), fine)
}

pub fn random_measurable<R: Rng>(rng: &mut R, part: &Partition, bound: f64) -> RandomVar {
    let levels: Vec<f64> = (0..part.block_count())
        .map(|_| rng.gen_range(-bound..bound))
        .collect();
    RandomVar::new(part.block_of().iter().map(|&b| levels[b]).collect())
}

const BOUND: f64 = 3.0;

fn instance(rng: &mut ChaCha8Rng, size: usize) -> (FiniteProbSpace, Partition, RandomVar) {
    let sp = random_space(rng, size);
    let part = random_partition(rng, size);
    let x = random_var(rng, size, BOUND);
    (sp, part, x)
}

fn trial_universal(rng: &mut ChaCha8Rng, size: usize) -> Result<f64, FinProbError> {
    let (sp, part, x) = instance(rng, size);
    let ce = cond_expectation(&sp, &part, &x)?;
    check_universal_property(&sp, &part, &x, &ce)
}

fn trial_tower(rng: &mut ChaCha8Rng, size: usize) -> Result<f64, FinProbError> {
    let sp = random_space(rng, size);
    let (coarse, fine) = random_refining_pair(rng, size);
    let x = random_var(rng, size, BOUND);
    check_tower(&sp, &coarse, &fine, &x)
}

fn trial_preserve(rng: &mut ChaCha8Rng, size: usize) -> Result<f64, FinProbError> {
    let (sp, part, x) = instance(rng, size);
    let ce = cond_expectation(&sp, &part, &x)?;
    Ok((expectation(&sp, &ce)? - expectation(&sp, &x)?).abs())
}

fn trial_factor_out(rng: &mut ChaCha8Rng, size: usize) -> Result<f64, FinProbError> {
    let (sp, part, y) = instance(rng, size);
    let xm = random_measurable(rng, &part, BOUND);
    check_factor_out(&sp, &part, &xm, &y)
}

fn jensen_with(
    rng: &mut ChaCha8Rng,
    size: usize,
    phi: &Convex<fn(f64) -> f64>,
) -> Result<f64, FinProbError> {
    let (sp, part, x) = instance(rng, size);
    Ok(-jensen_check(&sp, &part, &x, phi)?)
}

fn trial_jensen_sq(rng: &mut ChaCha8Rng, size: usize) -> Result<f64, FinProbError> {
    jensen_with(rng, size, &Convex(|v| v * v))
}

fn trial_jensen_abs(rng: &mut ChaCha8Rng, size: usize) -> Result<f64, FinProbError> {
    jensen_with(rng, size, &Convex(f64::abs))
}

fn trial_jensen_exp(rng: &mut ChaCha8Rng, size: usize) -> Result<f64, FinProbError> {
    jensen_with(rng, size, &Convex(f64::exp))
}

fn trial_linearity(rng: &mut ChaCha8Rng, size: usize) -> Result<f64, FinProbError> {
    let (sp, part, x) = instance(rng, size);
    let y = random_var(rng, size, BOUND);
    let alpha = rng.gen_range(-BOUND..BOUND);
    let combo = x.zip_with(&y, |a, b| alpha * a + b);
    let lhs = cond_expectation(&sp, &part, &combo)?;
    let rhs = cond_expectation(&sp, &part, &x)?
        .zip_with(&cond_expectation(&sp, &part, &y)?, |a, b| alpha * a + b);
    Ok(lhs.max_abs_diff(&rhs))
}

fn trial_monotonicity(rng: &mut ChaCha8Rng, size: usize) -> Result<f64, FinProbError> {
    let (sp, part, x) = instance(rng, size);
    let y = x.map(|v| v + rng.gen_range(0.0..1.0));
    let cx = cond_expectation(&sp, &part, &x)?;
    let cy = cond_expectation(&sp, &part, &y)?;
    Ok(cx
        .zip_with(&cy, |a, b| a - b)
        .values()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max))
}

fn trial_idempotence(rng: &mut ChaCha8Rng, size: usize) -> Result<f64, FinProbError> {
    let (sp, part, x) = instance(rng, size);
    let once = cond_expectation(&sp, &part, &x)?;
    let twice = cond_expectation(&sp, &part, &once)?;
    Ok(once.max_abs_diff(&twice))
}

fn trial_measurable(rng: &mut ChaCha8Rng, size: usize) -> Result<f64, FinProbError> {
    let (sp, part, x) = instance(rng, size);
    let ce = cond_expectation(&sp, &part, &x)?;
    Ok(if is_measurable(&ce, &part)? { 0.0 } else { 1.0 })
}

fn trial_l2_min(rng: &mut ChaCha8Rng, size: usize) -> Result<f64, FinProbError> {
    let (sp, part, x) = instance(rng, size);
    let ce = cond_expectation(&sp, &part, &x)?;
    let best = lp_norm(&sp, &x.zip_with(&ce, |a, b| a - b), 2.0)?;
    let mut worst = f64::NEG_INFINITY;
    for k in 0..L2_COMPETITORS {
        // half the competitors are small measurable perturbations of the projection
        let other = if k % 2 == 0 {
            random_measurable(rng, &part, BOUND)
        } else {
            let bump = random_measurable(rng, &part, 1e-3);
            ce.zip_with(&bump, |a, b| a + b)
        };
        let dist = lp_norm(&sp, &x.zip_with(&other, |a, b| a - b), 2.0)?;
        worst = worst.max(best - dist);
    }
    Ok(worst)
}

fn contract(rng: &mut ChaCha8Rng, size: usize, p: f64) -> Result<f64, FinProbError> {
    let (sp, part, x) = instance(rng, size);
    let ce = cond_expectation(&sp, &part, &x)?;
    Ok(lp_norm(&sp, &ce, p)? - lp_norm(&sp, &x, p)?)
}

fn trial_contract_l1(rng: &mut ChaCha8Rng, size: usize) -> Result<f64, FinProbError> {
    contract(rng, size, 1.0)
}

fn trial_contract_l2(rng: &mut ChaCha8Rng, size: usize) -> Result<f64, FinProbError> {
    contract(rng, size, 2.0)
}

fn trial_chebyshev(rng: &mut ChaCha8Rng, size: usize) -> Result<f64, FinProbError> {
    let sp = random_space(rng, size);
    let x = random_var(rng, size, BOUND);
    let a = rng.gen_range(0.1..BOUND);
    let c = chebyshev_check(&sp, &x, a)?;
    Ok(c.lhs - c.rhs)
}

fn trial_triangle(rng: &mut ChaCha8Rng, size: usize) -> Result<f64, FinProbError> {
    let sp = random_space(rng, size);
    let x = random_var(rng, size, BOUND);
    let y = random_var(rng, size, BOUND);
    let p = rng.gen_range(1.0..4.0);
    let sum = x.zip_with(&y, |a, b| a + b);
    Ok(lp_norm(&sp, &sum, p)? - lp_norm(&sp, &x, p)? - lp_norm(&sp, &y, p)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_passes_and_is_deterministic() {
        let cfg = SelftestConfig {
            trials: 50,
            seed: 3,
            max_size: 16,
        };
        let a = run_selftest(&cfg).unwrap();
        let b = run_selftest(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), SUITES.len());
        for r in &a {
            assert!(r.pass, "{} failed: {}", r.name, r.worst_violation);
        }
        assert!(render_table(&a).contains("tower_law"));
    }

    #[test]
    fn refining_pair_refines() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let size = rng.gen_range(1..=20);
            let (coarse, fine) = random_refining_pair(&mut rng, size);
            assert!(fine.refines(&coarse));
        }
    }

    #[test]
    fn zero_trials_rejected() {
        let cfg = SelftestConfig {
            trials: 0,
            ..Default::default()
        };
        assert!(run_selftest(&cfg).is_err());
    }
}
