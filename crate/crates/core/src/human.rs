//! Sources of human corrective input for an episode.
//!
//! [`SimulatedHuman`] stands in for the person holding the end effector in
//! batch experiments; [`ScriptedHuman`] replays a recorded sequence.

use std::collections::VecDeque;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observation::{sample_human_action, HumanAction, ObservationModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HumanPolicyParams {
    /// The goal the human wants, hidden from the robot (g).
    pub true_goal_g: f64,
    /// Probability of acting on any given tick.
    pub p_intervene: f64,
    /// The human's own action model. `None` means "same as the filter's".
    pub obs: Option<ObservationModelParams>,
    /// Ticks between a scale reading and the correction based on it.
    pub reaction_delay_ticks: usize,
}

impl Default for HumanPolicyParams {
    fn default() -> Self {
        Self {
            true_goal_g: 150.0,
            p_intervene: 0.5,
            obs: None,
            reaction_delay_ticks: 0,
        }
    }
}

impl HumanPolicyParams {
    pub fn validate(&self, capacity_g: f64) -> Result<()> {
        if !(self.true_goal_g.is_finite() && (0.0..=capacity_g).contains(&self.true_goal_g)) {
            return Err(Error::InvalidParams(format!(
                "true_goal_g {} outside [0, {capacity_g}]",
                self.true_goal_g
            )));
        }
        if !(0.0..=1.0).contains(&self.p_intervene) {
            return Err(Error::InvalidParams(format!(
                "p_intervene {} outside [0, 1]",
                self.p_intervene
            )));
        }
        if let Some(obs) = &self.obs {
            obs.validate()?;
        }
        Ok(())
    }
}

/// One draw of the lazy human policy on an already-delayed reading.
pub fn human_act<R: Rng + ?Sized>(
    params: &HumanPolicyParams,
    obs: &ObservationModelParams,
    x_e: f64,
    u_r_tilt: f64,
    rng: &mut R,
) -> HumanAction {
    // always consume the coin so the stream layout does not depend on p
    let coin: f64 = rng.random();
    if coin < params.p_intervene {
        sample_human_action(params.true_goal_g, x_e, u_r_tilt, obs, rng)
    } else {
        HumanAction::ZERO
    }
}

/// Something that produces `u_h` once per tick.
pub trait HumanInput {
    /// `x_e` is the scale reading of this tick, `u_r_tilt` the robot command.
    fn act(&mut self, tick: u64, x_e: f64, u_r_tilt: f64) -> HumanAction;
}

/// Lazy, delayed, noisy human following the observation model.
#[derive(Debug, Clone)]
pub struct SimulatedHuman {
    params: HumanPolicyParams,
    obs: ObservationModelParams,
    readings: VecDeque<f64>,
    rng: ChaCha8Rng,
}

impl SimulatedHuman {
    /// `filter_obs` is used when the policy does not carry its own model.
    pub fn new(
        params: HumanPolicyParams,
        filter_obs: ObservationModelParams,
        rng: ChaCha8Rng,
    ) -> Self {
        Self {
            obs: params.obs.unwrap_or(filter_obs),
            readings: VecDeque::with_capacity(params.reaction_delay_ticks + 1),
            params,
            rng,
        }
    }

    pub fn params(&self) -> &HumanPolicyParams {
        &self.params
    }
}

impl HumanInput for SimulatedHuman {
    fn act(&mut self, _tick: u64, x_e: f64, u_r_tilt: f64) -> HumanAction {
        self.readings.push_back(x_e);
        if self.readings.len() > self.params.reaction_delay_ticks + 1 {
            self.readings.pop_front();
        }
        // before the buffer fills, the human reacts to the oldest reading seen
        let seen = *self.readings.front().expect("just pushed");
        human_act(&self.params, &self.obs, seen, u_r_tilt, &mut self.rng)
    }
}

/// Replays fixed per-tick actions; zero once the script runs out.
#[derive(Debug, Clone, Default)]
pub struct ScriptedHuman {
    actions: Vec<HumanAction>,
}

impl ScriptedHuman {
    pub fn new(actions: Vec<HumanAction>) -> Self {
        Self { actions }
    }
}

impl HumanInput for ScriptedHuman {
    fn act(&mut self, tick: u64, _x_e: f64, _u_r_tilt: f64) -> HumanAction {
        usize::try_from(tick)
            .ok()
            .and_then(|i| self.actions.get(i).copied())
            .unwrap_or(HumanAction::ZERO)
    }
}
