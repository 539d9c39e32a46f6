//! Observation model for human corrective actions.
//!
//! The human is modelled as wanting the container to tilt at a rate that grows
//! with the remaining gap to their goal, saturating at `r_max`. A correction is
//! the difference between that desired rate and the robot's current command,
//! observed through Gaussian noise on the tilt axis. Inputs inside the deadband
//! count as "no action" and carry no evidence.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::belief::{GoalGrid, LikelihoodVector};
use crate::error::{Error, Result};
use crate::sim::{RobotState, TaskVelocity};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObservationModelParams {
    /// Sigmoid gain (1/g).
    pub k: f64,
    /// Saturation correction rate (rad/s).
    pub r_max: f64,
    /// Action noise standard deviation (rad/s).
    pub sigma_h: f64,
    /// Magnitude below which an input counts as zero (rad/s).
    pub deadband: f64,
}

impl Default for ObservationModelParams {
    fn default() -> Self {
        Self {
            k: 0.02,
            r_max: 0.6,
            sigma_h: 0.02,
            deadband: 0.02,
        }
    }
}

impl ObservationModelParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("k", self.k),
            ("r_max", self.r_max),
            ("sigma_h", self.sigma_h),
            ("deadband", self.deadband),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "observation {name} must be finite and positive, got {v}"
                )));
            }
        }
        if self.deadband >= self.r_max {
            return Err(Error::InvalidParams(format!(
                "deadband {} must be below r_max {}",
                self.deadband, self.r_max
            )));
        }
        Ok(())
    }

    /// Peak of the action density, `1 / (sigma_h sqrt(2 pi))`.
    pub fn max_density(&self) -> f64 {
        1.0 / (self.sigma_h * (2.0 * PI).sqrt())
    }
}

/// Human corrective velocity applied at the end effector.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct HumanAction {
    /// rad/s
    pub u_h_tilt: f64,
    /// m/s
    pub u_h_vert: f64,
}

impl HumanAction {
    pub const ZERO: Self = Self {
        u_h_tilt: 0.0,
        u_h_vert: 0.0,
    };

    pub fn tilt(u_h_tilt: f64) -> Self {
        Self {
            u_h_tilt,
            u_h_vert: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.u_h_tilt.is_finite() && self.u_h_vert.is_finite()
    }

    /// True when the tilt correction is inside the deadband.
    ///
    /// Only the tilt axis carries goal information, so the vertical axis does
    /// not decide which likelihood branch applies.
    pub fn is_silent(&self, deadband: f64) -> bool {
        self.u_h_tilt.abs() <= deadband
    }

    pub fn is_zero(&self) -> bool {
        self.u_h_tilt == 0.0 && self.u_h_vert == 0.0
    }

    pub fn velocity(&self) -> TaskVelocity {
        TaskVelocity::new(self.u_h_tilt, self.u_h_vert)
    }
}

/// Signed remaining gap; positive means under-poured.
pub fn distance(x_e: f64, beta: f64) -> f64 {
    beta - x_e
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Tilt rate the human wants for a remaining gap `delta`.
pub fn desired_rate(delta: f64, p: &ObservationModelParams) -> f64 {
    if delta > 0.0 {
        p.r_max * (2.0 * logistic(p.k * delta) - 1.0)
    } else {
        0.0
    }
}

/// Mean correction expected from a human with goal `beta`.
pub fn expected_correction(beta: f64, x_e: f64, u_r_tilt: f64, p: &ObservationModelParams) -> f64 {
    desired_rate(distance(x_e, beta), p) - u_r_tilt
}

fn gaussian_density(x: f64, mean: f64, sigma: f64) -> f64 {
    let z = (x - mean) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * PI).sqrt())
}

/// `P(u_h | beta, x_r, x_e)`; exactly 1 when the human does not act.
///
/// `x_r` does not enter the density (the correction depends on the robot
/// only through its command `u_r_tilt`) but must be a valid state.
pub fn likelihood(
    u_h: &HumanAction,
    beta: f64,
    x_r: &RobotState,
    x_e: f64,
    u_r_tilt: f64,
    p: &ObservationModelParams,
) -> Result<f64> {
    check_observation(u_h, x_r, x_e, u_r_tilt)?;
    if !beta.is_finite() {
        return Err(Error::InvalidObservation(format!(
            "goal {beta} is not finite"
        )));
    }
    Ok(density_unchecked(u_h, beta, x_e, u_r_tilt, p))
}

fn check_observation(u_h: &HumanAction, x_r: &RobotState, x_e: f64, u_r_tilt: f64) -> Result<()> {
    if !u_h.is_finite() {
        return Err(Error::InvalidObservation(format!("human action {u_h:?}")));
    }
    if !x_r.is_finite() {
        return Err(Error::InvalidObservation(format!("robot state {x_r:?}")));
    }
    if !x_e.is_finite() || !u_r_tilt.is_finite() {
        return Err(Error::InvalidObservation(format!(
            "progress {x_e} or command {u_r_tilt} is not finite"
        )));
    }
    Ok(())
}

fn density_unchecked(
    u_h: &HumanAction,
    beta: f64,
    x_e: f64,
    u_r_tilt: f64,
    p: &ObservationModelParams,
) -> f64 {
    if u_h.is_silent(p.deadband) {
        return 1.0;
    }
    gaussian_density(
        u_h.u_h_tilt,
        expected_correction(beta, x_e, u_r_tilt, p),
        p.sigma_h,
    )
}

/// Likelihood of one observation under every goal on the grid.
pub fn likelihood_vector(
    u_h: &HumanAction,
    grid: &GoalGrid,
    x_r: &RobotState,
    x_e: f64,
    u_r_tilt: f64,
    p: &ObservationModelParams,
) -> Result<LikelihoodVector> {
    check_observation(u_h, x_r, x_e, u_r_tilt)?;
    if u_h.is_silent(p.deadband) {
        return Ok(LikelihoodVector::ones(grid.len()));
    }
    LikelihoodVector::new(
        grid.values()
            .iter()
            .map(|&beta| density_unchecked(u_h, beta, x_e, u_r_tilt, p))
            .collect(),
    )
}

/// Draw a correction from a human whose goal is `beta_true`.
///
/// Draws inside the deadband are emitted as an exact zero.
pub fn sample_human_action<R: Rng + ?Sized>(
    beta_true: f64,
    x_e: f64,
    u_r_tilt: f64,
    p: &ObservationModelParams,
    rng: &mut R,
) -> HumanAction {
    let mean = expected_correction(beta_true, x_e, u_r_tilt, p);
    let u = Normal::new(mean, p.sigma_h)
        .expect("sigma_h is finite and positive")
        .sample(rng);
    if u.abs() <= p.deadband {
        HumanAction::ZERO
    } else {
        HumanAction::tilt(u)
    }
}
