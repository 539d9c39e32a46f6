use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::config::EpisodeConfig;
use crate::harness::episode::{run_episode_with, Episode, EpisodeOutcome, Policy};
use crate::harness::metrics::{Metrics, Termination};

/// Median and interquartile range of one metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
}

impl MetricSummary {
    pub fn of(values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let q1 = quantile(&sorted, 0.25);
        let q3 = quantile(&sorted, 0.75);
        Self {
            median: quantile(&sorted, 0.5),
            q1,
            q3,
            iqr: q3 - q1,
        }
    }
}

/// Linearly interpolated quantile of sorted data (`NaN` when empty).
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub episodes: usize,
    pub seed_base: u64,
    pub policy: Policy,
    pub stopped: usize,
    pub timeouts: usize,
    pub final_error_g: MetricSummary,
    pub human_effort: MetricSummary,
    pub interaction_time_s: MetricSummary,
    pub convergence_tick: MetricSummary,
}

impl BatchSummary {
    pub fn from_metrics(metrics: &[Metrics], seed_base: u64, policy: Policy) -> Self {
        let column =
            |f: fn(&Metrics) -> f64| MetricSummary::of(&metrics.iter().map(f).collect::<Vec<_>>());
        let stopped = metrics
            .iter()
            .filter(|m| m.terminated == Termination::Stopped)
            .count();
        Self {
            episodes: metrics.len(),
            seed_base,
            policy,
            stopped,
            timeouts: metrics.len() - stopped,
            final_error_g: column(|m| m.final_error_g),
            human_effort: column(|m| m.human_effort),
            interaction_time_s: column(|m| m.interaction_time_s),
            convergence_tick: column(|m| m.convergence_tick as f64),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BatchResult {
    /// Ordered by episode index.
    pub outcomes: Vec<EpisodeOutcome>,
    pub summary: BatchSummary,
}

impl BatchResult {
    pub fn metrics(&self) -> Vec<Metrics> {
        self.outcomes.iter().map(|o| o.metrics).collect()
    }
}

/// Run `episodes` episodes in parallel; episode `i` uses seed `seed_base + i`.
pub fn run_batch(
    cfg: &EpisodeConfig,
    episodes: usize,
    seed_base: u64,
    policy: Policy,
) -> Result<BatchResult> {
    if episodes == 0 {
        return Err(Error::Config("a batch needs at least one episode".into()));
    }
    cfg.validate()?;
    let outcomes = (0..episodes)
        .into_par_iter()
        .map(|i| {
            let episode_cfg = cfg.with_seed(seed_base.wrapping_add(i as u64));
            let mut human = Episode::simulated_human(&episode_cfg);
            run_episode_with(&episode_cfg, policy, &mut human)
        })
        .collect::<Result<Vec<_>>>()?;
    let metrics: Vec<Metrics> = outcomes.iter().map(|o| o.metrics).collect();
    let summary = BatchSummary::from_metrics(&metrics, seed_base, policy);
    Ok(BatchResult { outcomes, summary })
}
