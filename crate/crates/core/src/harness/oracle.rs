//! Single-shot posterior recomputed from a recorded trace.
//!
//! The incremental filter normalizes after every tick; this route sums log
//! likelihood ratios over the whole trace and normalizes exactly once. Both
//! apply the same per-tick likelihood floor.

use crate::belief::{Belief, LIKELIHOOD_FLOOR};
use crate::error::{Error, Result};
use crate::harness::config::EpisodeConfig;
use crate::harness::trace::EpisodeTrace;
use crate::observation::{likelihood, HumanAction};
use crate::sim::RobotState;

/// Posterior implied by `trace` under the observation model in `cfg`.
pub fn replay_oracle(trace: &EpisodeTrace, cfg: &EpisodeConfig) -> Result<Belief> {
    let grid = cfg.grid.build()?;
    let mut log_post = vec![0.0_f64; grid.len()];
    for row in trace.rows() {
        let u_h = HumanAction::tilt(row.u_h_tilt);
        let x_r = RobotState {
            tilt: row.tilt,
            ..Default::default()
        };
        let lik = grid
            .values()
            .iter()
            .map(|&beta| likelihood(&u_h, beta, &x_r, row.poured_sensed, row.u_r_tilt, &cfg.obs))
            .collect::<Result<Vec<f64>>>()?;
        let max = lik.iter().copied().fold(0.0_f64, f64::max);
        if max <= 0.0 {
            return Err(Error::DegeneratePosterior);
        }
        for (acc, l) in log_post.iter_mut().zip(&lik) {
            *acc += (l / max).max(LIKELIHOOD_FLOOR).ln();
        }
    }
    let peak = log_post.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let unnormalized: Vec<f64> = log_post.iter().map(|lp| (lp - peak).exp()).collect();
    let total: f64 = unnormalized.iter().sum();
    Belief::from_weights(grid, unnormalized.iter().map(|w| w / total).collect())
}

/// Largest per-weight gap between two beliefs on the same grid.
pub fn max_weight_diff(a: &Belief, b: &Belief) -> f64 {
    a.weights()
        .iter()
        .zip(b.weights())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
