//! Discrete-time pouring simulator.
//!
//! The robot is reduced to a two-axis task space (container tilt and vertical
//! offset of the end effector) under velocity-resolved control: each tick the
//! commanded robot velocity and the human velocity are summed and integrated.
//! The environment is a source container emptying into a receiver on a scale.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum tilt (container horizontal).
pub const MAX_TILT: f64 = FRAC_PI_2;

/// Shake pulses only dislodge material above this fraction of the spill angle.
pub const SHAKE_TILT_FRACTION: f64 = 0.8;

/// Task-space velocity, per axis.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TaskVelocity {
    /// rad/s
    pub tilt: f64,
    /// m/s
    pub vert: f64,
}

impl TaskVelocity {
    pub const ZERO: Self = Self {
        tilt: 0.0,
        vert: 0.0,
    };

    pub fn new(tilt: f64, vert: f64) -> Self {
        Self { tilt, vert }
    }

    pub fn is_finite(&self) -> bool {
        self.tilt.is_finite() && self.vert.is_finite()
    }
}

impl std::ops::Add for TaskVelocity {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.tilt + rhs.tilt, self.vert + rhs.vert)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    /// rad, in `[0, pi/2]`
    pub tilt: f64,
    /// rad/s
    pub tilt_rate: f64,
    /// m
    pub vert: f64,
    /// m/s
    pub vert_rate: f64,
}

impl RobotState {
    pub fn is_finite(&self) -> bool {
        self.tilt.is_finite()
            && self.tilt_rate.is_finite()
            && self.vert.is_finite()
            && self.vert_rate.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvState {
    pub source_g: f64,
    pub poured_g: f64,
    pub flow_g_s: f64,
}

impl EnvState {
    /// Full source container, empty receiver.
    pub fn full(capacity_g: f64) -> Self {
        Self {
            source_g: capacity_g,
            poured_g: 0.0,
            flow_g_s: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvParams {
    /// Initial mass in the source container (g).
    pub capacity_g: f64,
    /// Tilt above which material flows (rad).
    pub theta_crit: f64,
    /// Outflow per radian above `theta_crit` (g/(rad s)).
    pub flow_coeff: f64,
    /// Outflow per unit vertical speed while shaking (g s/m).
    pub shake_gain: f64,
    /// Scale noise standard deviation (g).
    pub sensor_sigma: f64,
    /// Control period (s).
    pub dt: f64,
}

impl Default for EnvParams {
    fn default() -> Self {
        Self {
            capacity_g: 500.0,
            theta_crit: 0.4,
            flow_coeff: 50.0,
            shake_gain: 5.0,
            sensor_sigma: 0.5,
            dt: 0.02,
        }
    }
}

impl EnvParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("capacity_g", self.capacity_g),
            ("theta_crit", self.theta_crit),
            ("flow_coeff", self.flow_coeff),
            ("dt", self.dt),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::SimConfig(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        for (name, v) in [
            ("shake_gain", self.shake_gain),
            ("sensor_sigma", self.sensor_sigma),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::SimConfig(format!(
                    "{name} must be nonnegative, got {v}"
                )));
            }
        }
        if self.dt > 0.1 {
            return Err(Error::SimConfig(format!(
                "dt must be at most 0.1 s, got {}",
                self.dt
            )));
        }
        if self.theta_crit >= MAX_TILT {
            return Err(Error::SimConfig(format!(
                "theta_crit must be below pi/2, got {}",
                self.theta_crit
            )));
        }
        Ok(())
    }

    /// Largest mass that can move in one tick from tilt alone.
    pub fn max_tick_flow(&self) -> f64 {
        self.flow_coeff * MAX_TILT * self.dt
    }

    /// Instantaneous outflow for a robot state (g/s), before source limits.
    pub fn flow_rate(&self, robot: &RobotState) -> f64 {
        let spill = self.flow_coeff * (robot.tilt - self.theta_crit).max(0.0);
        let shake = if robot.tilt > self.theta_crit * SHAKE_TILT_FRACTION {
            self.shake_gain * robot.vert_rate.abs()
        } else {
            0.0
        };
        spill + shake
    }
}

/// Advance robot and environment by one tick under `u_r + u_h`.
///
/// A tilt pinned at either limit reports zero tilt rate.
pub fn step(
    robot: &RobotState,
    env: &EnvState,
    u_r: TaskVelocity,
    u_h: TaskVelocity,
    params: &EnvParams,
) -> Result<(RobotState, EnvState)> {
    params.validate()?;
    if !(u_r.is_finite() && u_h.is_finite() && robot.is_finite()) {
        return Err(Error::SimConfig(
            "non-finite robot state or velocity".into(),
        ));
    }
    let dt = params.dt;
    let rate = u_r + u_h;

    let unclamped = robot.tilt + rate.tilt * dt;
    let tilt = unclamped.clamp(0.0, MAX_TILT);
    let next_robot = RobotState {
        tilt,
        tilt_rate: if tilt == unclamped { rate.tilt } else { 0.0 },
        vert: robot.vert + rate.vert * dt,
        vert_rate: rate.vert,
    };

    let flow = if env.source_g > 0.0 {
        params.flow_rate(&next_robot)
    } else {
        0.0
    };
    let transfer = (flow * dt).min(env.source_g);
    let next_env = EnvState {
        source_g: env.source_g - transfer,
        poured_g: env.poured_g + transfer,
        flow_g_s: transfer / dt,
    };
    Ok((next_robot, next_env))
}

/// Scale reading: true poured mass plus Gaussian noise, clamped at zero.
pub fn sense_poured<R: Rng + ?Sized>(env: &EnvState, sensor_sigma: f64, rng: &mut R) -> f64 {
    if sensor_sigma <= 0.0 {
        return env.poured_g;
    }
    let noise = Normal::new(0.0, sensor_sigma)
        .expect("sensor sigma is finite and positive")
        .sample(rng);
    (env.poured_g + noise).max(0.0)
}
