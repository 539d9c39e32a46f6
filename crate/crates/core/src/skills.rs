//! Behavior primitives, the impedance command that tracks them, and the skill
//! selector that picks the next primitive from the belief.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::belief::{map_estimate, Belief};
use crate::error::{Error, Result};
use crate::observation::{desired_rate, ObservationModelParams};
use crate::sim::{RobotState, TaskVelocity, MAX_TILT};

/// Fraction of each tap period spent pushing the tilt forward.
pub const TAP_DUTY: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Primitive {
    /// Tilt steadily at `tilt_rate` (rad/s).
    Pour { tilt_rate: f64 },
    /// Vertical oscillation, `amplitude` m at `frequency` Hz.
    Shake { amplitude: f64, frequency: f64 },
    /// Short tilt impulses at `impulse_rate` (rad/s) every `period` s.
    Tap { impulse_rate: f64, period: f64 },
    /// Return upright and hold.
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimitiveKind {
    Stop,
    Tap,
    Shake,
    Pour,
}

impl PrimitiveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PrimitiveKind::Pour => "pour",
            PrimitiveKind::Shake => "shake",
            PrimitiveKind::Tap => "tap",
            PrimitiveKind::Stop => "stop",
        }
    }
}

impl std::fmt::Display for PrimitiveKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PrimitiveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pour" => Ok(PrimitiveKind::Pour),
            "shake" => Ok(PrimitiveKind::Shake),
            "tap" => Ok(PrimitiveKind::Tap),
            "stop" => Ok(PrimitiveKind::Stop),
            other => Err(Error::Trace(format!("unknown primitive {other:?}"))),
        }
    }
}

impl Primitive {
    pub fn kind(&self) -> PrimitiveKind {
        match self {
            Primitive::Pour { .. } => PrimitiveKind::Pour,
            Primitive::Shake { .. } => PrimitiveKind::Shake,
            Primitive::Tap { .. } => PrimitiveKind::Tap,
            Primitive::Stop => PrimitiveKind::Stop,
        }
    }

    pub fn validate(&self, r_max: f64) -> Result<()> {
        let ok = match *self {
            Primitive::Pour { tilt_rate } => {
                tilt_rate.is_finite() && (0.0..=r_max).contains(&tilt_rate)
            }
            Primitive::Shake {
                amplitude,
                frequency,
            } => amplitude.is_finite() && frequency.is_finite() && frequency > 0.0,
            Primitive::Tap {
                impulse_rate,
                period,
            } => impulse_rate.is_finite() && period.is_finite() && period > 0.0,
            Primitive::Stop => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("invalid primitive {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImpedanceParams {
    /// Damping gain on the velocity error.
    pub b_r: f64,
    /// Stiffness gain on the pose error.
    pub k_r: f64,
}

impl Default for ImpedanceParams {
    fn default() -> Self {
        // k_r = 1/dt at the default 50 Hz: the reference is reached in one tick
        Self {
            b_r: 0.0,
            k_r: 50.0,
        }
    }
}

impl ImpedanceParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.b_r.is_finite() && self.k_r.is_finite()) || self.b_r < 0.0 || self.k_r < 0.0 {
            return Err(Error::InvalidParams(format!(
                "impedance gains must be finite and nonnegative, got {self:?}"
            )));
        }
        if self.b_r == 0.0 && self.k_r == 0.0 {
            return Err(Error::InvalidParams(
                "impedance gains cannot both be zero".into(),
            ));
        }
        Ok(())
    }
}

/// Reference pose and velocity tracked by the impedance command.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ReferencePoint {
    pub tilt: f64,
    pub vert: f64,
    pub tilt_rate: f64,
    pub vert_rate: f64,
}

impl ReferencePoint {
    /// Reference sitting exactly on the robot's current pose and velocity.
    pub fn at(robot: &RobotState) -> Self {
        Self {
            tilt: robot.tilt,
            vert: robot.vert,
            tilt_rate: robot.tilt_rate,
            vert_rate: robot.vert_rate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SkillThresholds {
    /// Gap (g) at or below which the robot stops.
    pub stop_tol: f64,
    /// Gap (g) above which the robot pours freely.
    pub fine_gap: f64,
    /// Gap (g) at or below which fine dispensing taps instead of shaking.
    pub shake_gap: f64,
}

impl Default for SkillThresholds {
    fn default() -> Self {
        Self {
            stop_tol: 1.0,
            shake_gap: 4.0,
            fine_gap: 10.0,
        }
    }
}

impl SkillThresholds {
    pub fn validate(&self) -> Result<()> {
        let ok = self.stop_tol.is_finite()
            && self.fine_gap.is_finite()
            && self.shake_gap.is_finite()
            && 0.0 < self.stop_tol
            && self.stop_tol < self.fine_gap
            && self.stop_tol < self.shake_gap
            && self.shake_gap <= self.fine_gap;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!(
                "thresholds need 0 < stop_tol < shake_gap <= fine_gap, got {self:?}"
            )))
        }
    }
}

/// Parameters of the fine-dispensing primitives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FineSkillParams {
    pub shake_amplitude: f64,
    pub shake_frequency: f64,
    pub tap_impulse_rate: f64,
    pub tap_period: f64,
}

impl Default for FineSkillParams {
    fn default() -> Self {
        Self {
            shake_amplitude: 0.01,
            shake_frequency: 3.0,
            tap_impulse_rate: 0.3,
            tap_period: 0.5,
        }
    }
}

impl FineSkillParams {
    pub fn validate(&self) -> Result<()> {
        self.shake().validate(f64::INFINITY)?;
        self.tap().validate(f64::INFINITY)
    }

    pub fn shake(&self) -> Primitive {
        Primitive::Shake {
            amplitude: self.shake_amplitude,
            frequency: self.shake_frequency,
        }
    }

    pub fn tap(&self) -> Primitive {
        Primitive::Tap {
            impulse_rate: self.tap_impulse_rate,
            period: self.tap_period,
        }
    }
}

/// Skill selection from the MAP gap.
///
/// `gap <= stop_tol` stops, `(stop_tol, shake_gap]` taps, `(shake_gap, fine_gap]`
/// shakes, and anything larger pours at the rate the human model wants.
pub fn select_primitive(
    belief: &Belief,
    x_e: f64,
    thresholds: &SkillThresholds,
    fine: &FineSkillParams,
    obs: &ObservationModelParams,
) -> Primitive {
    let gap = map_estimate(belief) - x_e;
    primitive_for_gap(gap, thresholds, fine, obs)
}

pub fn primitive_for_gap(
    gap: f64,
    thresholds: &SkillThresholds,
    fine: &FineSkillParams,
    obs: &ObservationModelParams,
) -> Primitive {
    if gap <= thresholds.stop_tol {
        Primitive::Stop
    } else if gap <= thresholds.shake_gap {
        fine.tap()
    } else if gap <= thresholds.fine_gap {
        fine.shake()
    } else {
        Primitive::Pour {
            tilt_rate: desired_rate(gap, obs),
        }
    }
}

/// Timing and limits needed to advance a reference by one tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceContext {
    pub dt: f64,
    pub r_max: f64,
    /// Height the vertical axis returns to and shakes about.
    pub home_vert: f64,
}

/// Next reference for `primitive`, `t` seconds after it became active.
pub fn primitive_reference(
    primitive: &Primitive,
    t: f64,
    current: &ReferencePoint,
    ctx: &ReferenceContext,
) -> ReferencePoint {
    let hold_vert = |tilt: f64, tilt_rate: f64| ReferencePoint {
        tilt,
        tilt_rate,
        vert: ctx.home_vert,
        vert_rate: 0.0,
    };
    match *primitive {
        Primitive::Pour { tilt_rate } => {
            let tilt = (current.tilt + tilt_rate * ctx.dt).min(MAX_TILT);
            hold_vert(tilt, tilt_rate)
        }
        Primitive::Shake {
            amplitude,
            frequency,
        } => {
            let omega = 2.0 * PI * frequency;
            ReferencePoint {
                tilt: current.tilt,
                tilt_rate: 0.0,
                vert: ctx.home_vert + amplitude * (omega * t).sin(),
                vert_rate: amplitude * omega * (omega * t).cos(),
            }
        }
        Primitive::Tap {
            impulse_rate,
            period,
        } => {
            let rate = if t.rem_euclid(period) < TAP_DUTY * period {
                impulse_rate
            } else {
                0.0
            };
            let tilt = (current.tilt + rate * ctx.dt).min(MAX_TILT);
            hold_vert(tilt, rate)
        }
        Primitive::Stop => {
            let tilt = (current.tilt - ctx.r_max * ctx.dt).max(0.0);
            let rate = if tilt > 0.0 { -ctx.r_max } else { 0.0 };
            hold_vert(tilt, rate)
        }
    }
}

/// `u_r = B_r (qdot_r - qdot) + K_r (q_r - q)` per axis, tilt clamped to `r_max`.
pub fn impedance_command(
    robot: &RobotState,
    reference: &ReferencePoint,
    gains: &ImpedanceParams,
    r_max: f64,
) -> TaskVelocity {
    let axis = |q_ref: f64, q: f64, qd_ref: f64, qd: f64| {
        gains.b_r * (qd_ref - qd) + gains.k_r * (q_ref - q)
    };
    TaskVelocity {
        tilt: axis(
            reference.tilt,
            robot.tilt,
            reference.tilt_rate,
            robot.tilt_rate,
        )
        .clamp(-r_max, r_max),
        vert: axis(
            reference.vert,
            robot.vert,
            reference.vert_rate,
            robot.vert_rate,
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::belief::{Belief, GoalGrid};

    fn obs() -> ObservationModelParams {
        ObservationModelParams::default()
    }

    fn point_belief(goal: f64) -> Belief {
        let grid = GoalGrid::uniform(0.0, 500.0, 101).unwrap();
        let i = grid.nearest_index(goal);
        let mut w = vec![0.0; grid.len()];
        w[i] = 1.0;
        Belief::from_weights(grid, w).unwrap()
    }

    fn ctx() -> ReferenceContext {
        ReferenceContext {
            dt: 0.02,
            r_max: 0.6,
            home_vert: 0.0,
        }
    }

    #[test]
    fn selection_table() {
        let th = SkillThresholds::default();
        let fine = FineSkillParams::default();
        let b = point_belief(200.0);
        assert_eq!(
            select_primitive(&b, 200.0, &th, &fine, &obs()),
            Primitive::Stop
        );
        assert_eq!(
            select_primitive(&b, 0.0, &th, &fine, &obs()),
            Primitive::Pour {
                tilt_rate: desired_rate(200.0, &obs())
            }
        );
        assert_eq!(
            select_primitive(&b, 195.0, &th, &fine, &obs()),
            fine.shake()
        );
        let th = SkillThresholds {
            stop_tol: 1.0,
            shake_gap: 5.0,
            fine_gap: 10.0,
        };
        assert_eq!(select_primitive(&b, 195.0, &th, &fine, &obs()), fine.tap());
        assert_eq!(
            select_primitive(&b, 199.0, &th, &fine, &obs()),
            Primitive::Stop
        );
        assert_eq!(
            select_primitive(&b, 250.0, &th, &fine, &obs()),
            Primitive::Stop
        );
    }

    #[test]
    fn threshold_validation() {
        assert!(SkillThresholds::default().validate().is_ok());
        for th in [
            SkillThresholds {
                stop_tol: 0.0,
                ..Default::default()
            },
            SkillThresholds {
                stop_tol: 5.0,
                shake_gap: 4.0,
                fine_gap: 10.0,
            },
            SkillThresholds {
                stop_tol: 1.0,
                shake_gap: 12.0,
                fine_gap: 10.0,
            },
        ] {
            assert!(th.validate().is_err(), "{th:?}");
        }
    }

    #[test]
    fn stop_reference() {
        let r = primitive_reference(&Primitive::Stop, 0.3, &ReferencePoint::default(), &ctx());
        assert_eq!(r, ReferencePoint::default());
        let start = ReferencePoint {
            tilt: 0.5,
            ..Default::default()
        };
        let r = primitive_reference(&Primitive::Stop, 0.0, &start, &ctx());
        assert!((r.tilt - 0.488).abs() < 1e-12);
        assert_eq!(r.tilt_rate, -0.6);
        let almost = ReferencePoint {
            tilt: 0.005,
            ..Default::default()
        };
        let r = primitive_reference(&Primitive::Stop, 0.0, &almost, &ctx());
        assert_eq!((r.tilt, r.tilt_rate), (0.0, 0.0));
    }

    #[test]
    fn shake_reference_at_start() {
        let shake = Primitive::Shake {
            amplitude: 0.01,
            frequency: 3.0,
        };
        let r = primitive_reference(&shake, 0.0, &ReferencePoint::default(), &ctx());
        assert_eq!(r.vert, 0.0);
        assert!((r.vert_rate - 0.01 * 2.0 * PI * 3.0).abs() < 1e-15);
        assert_eq!(r.tilt_rate, 0.0);
    }

    #[test]
    fn pour_reference_integrates() {
        let start = ReferencePoint {
            tilt: 0.2,
            ..Default::default()
        };
        let r = primitive_reference(&Primitive::Pour { tilt_rate: 0.3 }, 1.0, &start, &ctx());
        assert!((r.tilt - 0.206).abs() < 1e-15);
        assert_eq!(r.tilt_rate, 0.3);
    }

    #[test]
    fn tap_reference_duty_cycle() {
        let tap = Primitive::Tap {
            impulse_rate: 0.3,
            period: 0.5,
        };
        let cur = ReferencePoint::default();
        let on = primitive_reference(&tap, 0.02, &cur, &ctx());
        assert_eq!(on.tilt_rate, 0.3);
        let off = primitive_reference(&tap, 0.2, &cur, &ctx());
        assert_eq!(off.tilt_rate, 0.0);
        assert_eq!(off.tilt, 0.0);
        let again = primitive_reference(&tap, 0.52, &cur, &ctx());
        assert_eq!(again.tilt_rate, 0.3);
    }

    #[test]
    fn impedance_examples() {
        let gains = ImpedanceParams { b_r: 0.5, k_r: 2.0 };
        let robot = RobotState {
            tilt: 0.3,
            tilt_rate: 0.1,
            vert: 0.01,
            vert_rate: -0.02,
        };
        let u = impedance_command(&robot, &ReferencePoint::at(&robot), &gains, 0.6);
        assert_eq!(u, TaskVelocity::ZERO);

        let ahead = ReferencePoint {
            tilt: 0.4,
            ..ReferencePoint::at(&robot)
        };
        let u = impedance_command(&robot, &ahead, &gains, 0.6);
        assert!((u.tilt - 0.2).abs() < 1e-12);

        let far = ReferencePoint {
            tilt: 100.0,
            ..ReferencePoint::at(&robot)
        };
        assert_eq!(impedance_command(&robot, &far, &gains, 0.6).tilt, 0.6);
        let behind = ReferencePoint {
            tilt: -100.0,
            ..ReferencePoint::at(&robot)
        };
        assert_eq!(impedance_command(&robot, &behind, &gains, 0.6).tilt, -0.6);
    }

    #[test]
    fn gain_validation() {
        assert!(ImpedanceParams::default().validate().is_ok());
        assert!(ImpedanceParams { b_r: 0.0, k_r: 0.0 }.validate().is_err());
        assert!(ImpedanceParams {
            b_r: -1.0,
            k_r: 1.0
        }
        .validate()
        .is_err());
    }
}
