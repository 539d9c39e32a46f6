//! Subcommands of the `pourgoal` binary.

use std::fs;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pourgoal_core::harness::{max_weight_diff, replay_oracle, run_batch, BatchSummary, Metrics};
use pourgoal_core::observation::likelihood_vector;
use pourgoal_core::{
    entropy, init_belief, map_estimate, run_episode, update_belief, EpisodeConfig, EpisodeTrace,
    HumanAction, Policy, RobotState,
};
use pourgoal_teach::{ServeError, ServerConfig};
use serde::Serialize;

/// Largest per-weight disagreement accepted by `oracle-check`.
pub const ORACLE_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(
    name = "pourgoal",
    version,
    about = "Goal inference from physical corrections during pouring"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one episode and write trace.csv and metrics.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run many seeded episodes and write per-episode traces plus summary.json.
    Batch {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        episodes: usize,
        #[arg(long, default_value_t = 0)]
        seed_base: u64,
        #[arg(long)]
        out: PathBuf,
        /// Replace the adaptive pour with a comparison policy.
        #[arg(long, value_enum)]
        baseline: Option<Baseline>,
        /// Tilt rate of the fixed-rate baseline (rad/s); defaults to half of r_max.
        #[arg(long)]
        baseline_rate: Option<f64>,
    },
    /// Recompute the posterior of a recorded trace two ways and compare.
    OracleCheck {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        config: PathBuf,
    },
    /// Start the live teaching server.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value_t = pourgoal_teach::server::DEFAULT_TICK_HZ)]
        tick_hz: u32,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Baseline {
    FixedRate,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] pourgoal_core::Error),
    #[error(transparent)]
    Serve(#[from] ServeError),
    #[error("{0}")]
    Config(String),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Core(pourgoal_core::Error::DegeneratePosterior) => 3,
            Self::Core(e) if e.is_config() => 2,
            Self::Serve(ServeError::TickRate(_)) | Self::Config(_) => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn main_with(cli: Cli) -> ExitCode {
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn execute(command: Command) -> CliResult<()> {
    match command {
        Command::Run { config, seed, out } => run(&config, seed, &out),
        Command::Batch {
            config,
            episodes,
            seed_base,
            out,
            baseline,
            baseline_rate,
        } => batch(&config, episodes, seed_base, &out, baseline, baseline_rate),
        Command::OracleCheck { trace, config } => {
            let report = oracle_check(&trace, &config)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("report serializes")
            );
            if report.pass {
                Ok(())
            } else {
                Err(CliError::OracleMismatch(format!(
                    "max weight difference {:e}, MAP mismatches {}",
                    report.max_weight_diff, report.map_mismatches
                )))
            }
        }
        Command::Serve {
            port,
            tick_hz,
            host,
        } => serve(SocketAddr::new(host, port), tick_hz),
    }
}

fn create_dir(out: &Path) -> CliResult<()> {
    fs::create_dir_all(out).map_err(|source| CliError::Write {
        path: out.to_path_buf(),
        source,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("output types serialize");
    fs::write(path, text + "\n").map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn run(config: &Path, seed: Option<u64>, out: &Path) -> CliResult<()> {
    let mut cfg = EpisodeConfig::load(config)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let outcome = run_episode(&cfg)?;
    create_dir(out)?;
    outcome.trace.save(&out.join("trace.csv"))?;
    write_json(&out.join("metrics.json"), &outcome.metrics)?;
    write_json(&out.join("config.json"), &cfg)?;
    let m = &outcome.metrics;
    println!(
        "seed {}: {:?} after {} ticks, poured {:.2} g, error {:.2} g, effort {:.4} rad",
        cfg.seed, m.terminated, m.ticks, m.final_poured_g, m.final_error_g, m.human_effort
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct EpisodeEntry {
    seed: u64,
    trace: String,
    metrics: Metrics,
}

#[derive(Debug, Serialize)]
struct BatchReport {
    summary: BatchSummary,
    episodes: Vec<EpisodeEntry>,
}

fn batch(
    config: &Path,
    episodes: usize,
    seed_base: u64,
    out: &Path,
    baseline: Option<Baseline>,
    baseline_rate: Option<f64>,
) -> CliResult<()> {
    let cfg = EpisodeConfig::load(config)?;
    let policy = match baseline {
        None => {
            if baseline_rate.is_some() {
                return Err(CliError::Config(
                    "--baseline-rate needs --baseline fixed-rate".into(),
                ));
            }
            Policy::Adaptive
        }
        Some(Baseline::FixedRate) => {
            let tilt_rate = baseline_rate.unwrap_or(cfg.obs.r_max / 2.0);
            if !(tilt_rate > 0.0 && tilt_rate <= cfg.obs.r_max) {
                return Err(CliError::Config(format!(
                    "baseline rate {tilt_rate} outside (0, {}]",
                    cfg.obs.r_max
                )));
            }
            Policy::FixedRate { tilt_rate }
        }
    };
    let result = run_batch(&cfg, episodes, seed_base, policy)?;
    create_dir(out)?;
    let mut entries = Vec::with_capacity(result.outcomes.len());
    for outcome in &result.outcomes {
        let name = format!("trace_seed{}.csv", outcome.seed);
        outcome.trace.save(&out.join(&name))?;
        entries.push(EpisodeEntry {
            seed: outcome.seed,
            trace: name,
            metrics: outcome.metrics,
        });
    }
    write_json(&out.join("config.json"), &cfg)?;
    write_json(
        &out.join("summary.json"),
        &BatchReport {
            summary: result.summary.clone(),
            episodes: entries,
        },
    )?;
    let s = &result.summary;
    println!(
        "{} episodes ({} stopped, {} timeouts): median effort {:.4} rad (IQR {:.4}), median error {:.3} g",
        s.episodes, s.stopped, s.timeouts, s.human_effort.median, s.human_effort.iqr, s.final_error_g.median
    );
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub ticks: usize,
    pub max_weight_diff: f64,
    /// Rows whose recorded MAP differs from the replayed filter's.
    pub map_mismatches: usize,
    pub final_map_g: f64,
    pub final_entropy: f64,
    pub pass: bool,
}

/// Replay the filter tick by tick over `trace` and compare it with the
/// single-shot oracle and with the MAP column the trace recorded.
pub fn oracle_check(trace: &Path, config: &Path) -> CliResult<OracleReport> {
    let cfg = EpisodeConfig::load(config)?;
    let trace = EpisodeTrace::load(trace)?;
    let grid = cfg.grid.build()?;
    let mut belief = init_belief(&grid);
    let mut map_mismatches = 0;
    for row in trace.rows() {
        let x_r = RobotState {
            tilt: row.tilt,
            ..Default::default()
        };
        let lik = likelihood_vector(
            &HumanAction::tilt(row.u_h_tilt),
            &grid,
            &x_r,
            row.poured_sensed,
            row.u_r_tilt,
            &cfg.obs,
        )?;
        belief = update_belief(&belief, &lik)?;
        if map_estimate(&belief) != row.map_g {
            map_mismatches += 1;
        }
    }
    let oracle = replay_oracle(&trace, &cfg)?;
    let diff = max_weight_diff(&belief, &oracle);
    Ok(OracleReport {
        ticks: trace.len(),
        max_weight_diff: diff,
        map_mismatches,
        final_map_g: map_estimate(&belief),
        final_entropy: entropy(&belief),
        pass: diff <= ORACLE_TOL && map_mismatches == 0,
    })
}

fn serve(addr: SocketAddr, tick_hz: u32) -> CliResult<()> {
    let config = ServerConfig::new(tick_hz)?;
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(ServeError::from)?;
    runtime.block_on(pourgoal_teach::serve(addr, config))?;
    Ok(())
}
