use rayon::prelude::*;
use serde::Serialize;

use crate::process_engine::{
    in_pool, monte_carlo_convergence, simulate, MonteCarloReport, ProcessSpec, Trajectory,
};

use super::hypotheses::{
    check_noise_hypotheses, check_sequence_hypotheses, check_t_bound, GridConfig, NoiseCheckConfig,
    SequenceTolerances,
};
use super::ledger::{HypothesisLedger, Tag};
use super::params::DvoretzkyParams;
use super::CheckerError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalConfig {
    pub seeds: Vec<u64>,
    pub horizon: usize,
    pub eps: f64,
    pub checkpoints: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifyConfig {
    /// Horizon for the α/β/γ scans.
    pub seq_horizon: usize,
    pub tolerances: SequenceTolerances,
    pub noise: NoiseCheckConfig,
    pub grid: GridConfig,
    /// Realized histories for the `T_n` bound: seeds
    /// `seed_base..seed_base + history_count`, each `history_horizon` long.
    pub history_count: usize,
    pub history_horizon: usize,
    pub seed_base: u64,
    /// Seed set standing in for "with probability 1" when parameters depend
    /// on the trajectory.
    pub param_seeds: Vec<u64>,
    pub empirical: Option<EmpiricalConfig>,
    #[serde(skip)]
    pub jobs: Option<usize>,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        Self {
            seq_horizon: 100_000,
            tolerances: SequenceTolerances::default(),
            noise: NoiseCheckConfig::default(),
            grid: GridConfig::default(),
            history_count: 100,
            history_horizon: 10_000,
            seed_base: 0,
            param_seeds: (0..16).collect(),
            empirical: None,
            jobs: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub ledger: HypothesisLedger,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub empirical: Option<MonteCarloReport>,
}

/// Runs every hypothesis check and, if configured, the empirical
/// convergence experiment.
///
/// The ledger passes iff every entry passes; the report is attached as
/// evidence and does not enter the verdict.
pub fn certify(
    spec: &ProcessSpec,
    params: &DvoretzkyParams,
    cfg: &CertifyConfig,
) -> Result<Certificate, CheckerError> {
    let mut ledger = HypothesisLedger::new(params.mode, params.n0);
    if params.is_extended() {
        ledger.seed_set = Some(cfg.param_seeds.clone());
    }
    ledger.extend(check_noise_hypotheses(spec, &cfg.noise)?);
    ledger.extend(check_sequence_hypotheses(
        params,
        cfg.seq_horizon,
        &cfg.tolerances,
        &cfg.param_seeds,
    )?);

    let seeds: Vec<u64> = (0..cfg.history_count as u64)
        .map(|k| cfg.seed_base + k)
        .collect();
    let histories: Vec<Trajectory> = in_pool(cfg.jobs, || {
        seeds
            .par_iter()
            .map(|&s| simulate(spec, s, cfg.history_horizon))
            .collect::<Result<Vec<_>, _>>()
    })??;
    ledger.insert(
        Tag::H16,
        check_t_bound(spec, params, Some(&cfg.grid), &histories, &cfg.param_seeds)?,
    );

    let empirical = match &cfg.empirical {
        Some(e) => Some(monte_carlo_convergence(
            spec,
            &e.seeds,
            e.horizon,
            e.eps,
            &e.checkpoints,
            cfg.jobs,
        )?),
        None => None,
    };
    Ok(Certificate { ledger, empirical })
}
