use serde::{Deserialize, Serialize};

use crate::harness::config::EpisodeConfig;
use crate::harness::trace::EpisodeTrace;
use crate::sim::EnvState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Stopped,
    Timeout,
}

/// Effort and accuracy figures for one episode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// `|true goal - poured|` after the last tick (g).
    pub final_error_g: f64,
    /// Integrated correction magnitude, `sum |u_h_tilt| dt` (rad).
    pub human_effort: f64,
    /// Time with a nonzero correction applied (s).
    pub interaction_time_s: f64,
    /// First tick from which the MAP estimate never changes again.
    pub convergence_tick: u64,
    pub terminated: Termination,
    pub ticks: u64,
    pub final_map_g: f64,
    pub final_poured_g: f64,
}

impl Metrics {
    /// `env` is the environment after the last tick.
    pub fn compute(
        trace: &EpisodeTrace,
        env: &EnvState,
        cfg: &EpisodeConfig,
        terminated: Termination,
    ) -> Self {
        let dt = cfg.env.dt;
        let rows = trace.rows();
        let human_effort = rows.iter().map(|r| r.u_h_tilt.abs() * dt).sum();
        let active = rows.iter().filter(|r| r.u_h_tilt != 0.0).count();
        let final_map_g = rows.last().map_or(cfg.grid.min_g, |r| r.map_g);
        let convergence_tick = rows
            .iter()
            .rposition(|r| r.map_g != final_map_g)
            .map_or(0, |i| i as u64 + 1);
        Self {
            final_error_g: (cfg.human.true_goal_g - env.poured_g).abs(),
            human_effort,
            interaction_time_s: active as f64 * dt,
            convergence_tick,
            terminated,
            ticks: rows.len() as u64,
            final_map_g,
            final_poured_g: env.poured_g,
        }
    }
}
