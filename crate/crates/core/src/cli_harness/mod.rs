//! Command-line front end.
//!
//! Exit codes: 0 success, 1 a check ran and failed, 2 bad arguments or
//! configuration. Reports depend only on the arguments and seeds; the one
//! exception is the optional `timestamp` field of `run` reports, which
//! `--no-timestamp` removes.

mod builtins;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use crate::algorithms::{
    as_dvoretzky, AlgoError, ParamsConstruction, ParamsFile, ProblemFile, SCHEMA_VERSION,
};
use crate::dvoretzky_checker::{certify, BoundMode, CertifyConfig};
use crate::finprob::{render_table, run_selftest, SelftestConfig};
use crate::process_engine::{monte_carlo_convergence, simulate};
use crate::series_lab::{
    abel_dini_rho, du_bois_reymond_companion, partial_sums, validate_rm_schedule, DuBoisOptions,
    SeqSpec, DEFAULT_DIV_THRESHOLD,
};

pub use builtins::{builtin_names, builtin_problem};

#[derive(Debug, Parser)]
#[command(name = "salab", version, about = "Stochastic approximation laboratory")]
pub struct Cli {
    /// Added to every seed the command uses.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed_base: u64,
    /// Worker threads for per-seed work (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Leave the timestamp out of reports.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate many seeds and report terminal errors.
    Run(RunArgs),
    /// Certify the convergence hypotheses and write a ledger.
    Check(CheckArgs),
    /// Step-size schedule and series constructions.
    #[command(subcommand)]
    Series(SeriesCommand),
    /// Finite probability identity checks.
    #[command(subcommand)]
    Finprob(FinprobCommand),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Problem file, or the name of a builtin problem.
    #[arg(long)]
    pub spec: String,
    /// Inclusive seed range `A..B`, or a single seed.
    #[arg(long, default_value = "0..99")]
    pub seeds: String,
    #[arg(long, default_value_t = 10_000)]
    pub horizon: usize,
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    /// Comma-separated steps at which error quantiles are reported.
    #[arg(long, value_delimiter = ',')]
    pub checkpoints: Vec<usize>,
    /// Directory for per-seed `n,x,t,w` trajectory CSVs.
    #[arg(long)]
    pub trajectories: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub spec: String,
    /// Parameter file; parameters derived from the problem when absent.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Overrides the mode of the parameter file.
    #[arg(long)]
    pub mode: Option<String>,
    /// Horizon for the α, β, γ scans.
    #[arg(long, default_value_t = 100_000)]
    pub horizon: usize,
    /// Horizon for the noise variance tail.
    #[arg(long, default_value_t = 1_000_000)]
    pub noise_horizon: usize,
    /// Number of realized histories probed for the `T_n` bound.
    #[arg(long, default_value_t = 100)]
    pub histories: usize,
    #[arg(long, default_value_t = 10_000)]
    pub history_horizon: usize,
}

#[derive(Debug, Subcommand)]
pub enum SeriesCommand {
    /// Checks `a_n → 0`, `Σ a_n = ∞` and `Σ a_n² < ∞`.
    RmCheck {
        #[arg(long)]
        a: String,
        #[arg(long, default_value_t = 100_000)]
        horizon: usize,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_DIV_THRESHOLD)]
        div_threshold: f64,
    },
    /// Companion `b_n → ∞` with `Σ a_n b_n < ∞`, as `n,value` CSV.
    Dubois {
        #[arg(long)]
        a: String,
        #[arg(long, default_value_t = 100_000)]
        horizon: usize,
    },
    /// `ρ_n = 1/S_n`, as `n,value` CSV.
    AbelDini {
        #[arg(long)]
        a: String,
        #[arg(long, default_value_t = 100_000)]
        horizon: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum FinprobCommand {
    Selftest {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 64)]
        max_size: usize,
    },
}

/// A failure that maps to an exit code.
#[derive(Debug)]
enum Exit {
    Config(String),
    Failed,
}

impl<E: std::fmt::Display> From<E> for Exit {
    fn from(e: E) -> Self {
        Exit::Config(e.to_string())
    }
}

type CmdResult = Result<(), Exit>;

/// Runs the CLI with the process streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let (stdout, stderr) = (std::io::stdout(), std::io::stderr());
    run_with_io(args, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs the CLI against the given streams and returns the exit code.
pub fn run_with_io<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Run(a) => cmd_run(&cli, a, out),
        Command::Check(a) => cmd_check(&cli, a, out),
        Command::Series(s) => cmd_series(&cli, s, out),
        Command::Finprob(FinprobCommand::Selftest {
            trials,
            seed,
            max_size,
        }) => cmd_selftest(*trials, cli.seed_base.wrapping_add(*seed), *max_size, out),
    };
    match result {
        Ok(()) => 0,
        Err(Exit::Failed) => 1,
        Err(Exit::Config(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
    }
}

/// Reads a problem from a file, falling back to the builtin of that name.
pub fn load_problem(reference: &str) -> Result<ProblemFile, AlgoError> {
    let path = Path::new(reference);
    if path.exists() {
        return ProblemFile::load(path);
    }
    let name = reference.strip_prefix("builtin:").unwrap_or(reference);
    builtin_problem(name).ok_or_else(|| {
        AlgoError::Schema(format!(
            "{reference}: no such file or builtin (builtins: {})",
            builtin_names().join(", ")
        ))
    })
}

/// Parses `A..B` (inclusive) or a single seed.
pub fn parse_seed_range(s: &str) -> Result<Vec<u64>, String> {
    let bad = || format!("invalid seed range `{s}`, expected A..B");
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (a.trim().parse::<u64>(), b.trim().parse::<u64>()),
        None => (s.trim().parse::<u64>(), s.trim().parse::<u64>()),
    };
    let (lo, hi) = (lo.map_err(|_| bad())?, hi.map_err(|_| bad())?);
    if hi < lo {
        return Err(format!("seed range `{s}` is empty"));
    }
    Ok((lo..=hi).collect())
}

fn emit(cli: &Cli, text: &str, out: &mut dyn Write) -> CmdResult {
    match &cli.out {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| Exit::Config(format!("{}: {e}", p.display())))
        }
        None => out.write_all(text.as_bytes()).map_err(Exit::from),
    }
}

fn timestamp() -> String {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("unix:{secs}")
}

fn cmd_run(cli: &Cli, a: &RunArgs, out: &mut dyn Write) -> CmdResult {
    let problem = load_problem(&a.spec)?;
    let mut spec = problem.resolve()?.process_spec();
    spec.id = problem.spec_id();
    let seeds: Vec<u64> = parse_seed_range(&a.seeds)
        .map_err(Exit::Config)?
        .into_iter()
        .map(|s| s.wrapping_add(cli.seed_base))
        .collect();
    if a.horizon == 0 {
        return Err(Exit::Config("horizon must be at least 1".into()));
    }
    let mut report =
        monte_carlo_convergence(&spec, &seeds, a.horizon, a.eps, &a.checkpoints, cli.jobs)?;
    if !cli.no_timestamp {
        report.timestamp = Some(timestamp());
    }
    if let Some(dir) = &a.trajectories {
        std::fs::create_dir_all(dir)?;
        for s in &seeds {
            let tr = simulate(&spec, *s, a.horizon)?;
            std::fs::write(dir.join(format!("seed_{s}.csv")), tr.to_csv())?;
        }
    }
    emit(cli, &(serde_json::to_string_pretty(&report)? + "\n"), out)
}

fn cmd_check(cli: &Cli, a: &CheckArgs, out: &mut dyn Write) -> CmdResult {
    let problem = load_problem(&a.spec)?.resolve()?;
    let params_file = match &a.params {
        Some(p) => ParamsFile::load(p)?,
        None => ParamsFile {
            schema_version: SCHEMA_VERSION,
            mode: None,
            construction: ParamsConstruction::Auto {
                overrides: Default::default(),
            },
        },
    };
    let cfg = CertifyConfig {
        seq_horizon: a.horizon,
        noise: crate::dvoretzky_checker::NoiseCheckConfig {
            horizon: a.noise_horizon,
            ..Default::default()
        },
        history_count: a.histories,
        history_horizon: a.history_horizon,
        seed_base: cli.seed_base,
        jobs: cli.jobs,
        ..Default::default()
    };
    // parameters must cover every step any check probes
    let params_horizon = a.horizon.max(a.history_horizon) + cfg.grid.n_span + 1;
    let pkg = as_dvoretzky(&problem, params_horizon)?;
    let mut params = params_file.resolve(&pkg, params_horizon)?;
    if let Some(m) = &a.mode {
        params.mode = BoundMode::parse(m)?;
    }
    let cert = certify(&pkg.spec, &params, &cfg)?;
    emit(cli, &cert.ledger.to_json(), out)?;
    if cli.out.is_some() {
        out.write_all(cert.ledger.summary().as_bytes())?;
    }
    if cert.ledger.all_pass() {
        Ok(())
    } else {
        Err(Exit::Failed)
    }
}

fn seq_arg(a: &str) -> Result<crate::series_lab::RealSeq, Exit> {
    Ok(SeqSpec::parse_cli(a)?.build()?)
}

fn csv(values: &[f64]) -> String {
    let mut s = String::from("n,value\n");
    for (k, v) in values.iter().enumerate() {
        s.push_str(&format!("{},{v}\n", k + 1));
    }
    s
}

fn verdict_word(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

fn cmd_series(cli: &Cli, cmd: &SeriesCommand, out: &mut dyn Write) -> CmdResult {
    match cmd {
        SeriesCommand::RmCheck {
            a,
            horizon,
            tol,
            div_threshold,
        } => {
            let r = validate_rm_schedule(&seq_arg(a)?, *horizon, *tol, *div_threshold)?;
            let text = format!(
                "a_n -> 0          {}  tail max {:.6e} (tol {tol:e})\n\
                 sum a_n = inf     {}  partial sum {:.6e} (threshold {div_threshold})\n\
                 sum a_n^2 < inf   {}  tail residual {:.6e} (tol {tol:e})\n",
                verdict_word(r.tends_to_zero),
                r.tail_max,
                verdict_word(r.sum_diverges.diverges()),
                r.sum_diverges.evidence.partial_sum,
                verdict_word(r.sum_sq_converges.converges()),
                r.sum_sq_converges.evidence.residual,
            );
            emit(cli, &text, out)?;
            if r.all_pass() {
                Ok(())
            } else {
                Err(Exit::Failed)
            }
        }
        SeriesCommand::Dubois { a, horizon } => {
            let seq = seq_arg(a)?;
            let c = match du_bois_reymond_companion(&seq, *horizon, &DuBoisOptions::default()) {
                Ok(c) => c,
                Err(crate::series_lab::SeriesError::Divergent { partial_sum, .. }) => {
                    writeln!(
                        out,
                        "sum a_n diverges at horizon {horizon} (partial sum {partial_sum:.6e})"
                    )?;
                    return Err(Exit::Failed);
                }
                Err(e) => return Err(e.into()),
            };
            emit(cli, &csv(&c.multiplier.prefix(*horizon)?), out)
        }
        SeriesCommand::AbelDini { a, horizon } => {
            let seq = seq_arg(a)?;
            let rho = abel_dini_rho(&seq, *horizon)?.prefix(*horizon)?;
            emit(cli, &csv(&rho), out)?;
            if cli.out.is_some() {
                let terms = seq.prefix(*horizon)?;
                let prod: Vec<f64> = terms.iter().zip(&rho).map(|(x, r)| x * r).collect();
                let s = partial_sums(
                    &crate::series_lab::RealSeq::from_values(
                        "a rho",
                        crate::series_lab::DeclaredSign::Nonnegative,
                        prod,
                    )?,
                    *horizon,
                )?;
                writeln!(
                    out,
                    "rho_N = {:.6e}, sum a_n rho_n = {:.6e} at N = {horizon}",
                    rho[horizon - 1],
                    s[horizon - 1]
                )?;
            }
            Ok(())
        }
    }
}

fn cmd_selftest(trials: usize, seed: u64, max_size: usize, out: &mut dyn Write) -> CmdResult {
    let results = run_selftest(&SelftestConfig {
        trials,
        seed,
        max_size,
    })?;
    out.write_all(render_table(&results).as_bytes())?;
    if results.iter().all(|r| r.pass) {
        Ok(())
    } else {
        Err(Exit::Failed)
    }
}
