//! The online goal-learning loop, one control tick at a time.
//!
//! Per tick: advance the active primitive's reference and compute the
//! impedance command, read the scale, take the human's correction, weigh every
//! goal by the likelihood of that correction, normalize, integrate the
//! dynamics, then pick the primitive for the next tick from the updated belief.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::belief::{
    entropy, init_belief, map_estimate, mean_estimate, update_belief, Belief, GoalGrid,
};
use crate::error::Result;
use crate::harness::config::EpisodeConfig;
use crate::harness::metrics::{Metrics, Termination};
use crate::harness::trace::{EpisodeTrace, TraceRow};
use crate::human::{HumanInput, SimulatedHuman};
use crate::observation::{likelihood_vector, HumanAction};
use crate::sim::{self, sense_poured, EnvState, RobotState, TaskVelocity};
use crate::skills::{
    impedance_command, primitive_reference, select_primitive, Primitive, PrimitiveKind,
    ReferenceContext, ReferencePoint,
};

/// Belief entropy (nats) below which a stopped episode counts as settled.
pub const SETTLED_ENTROPY: f64 = 0.05;

const SENSOR_STREAM: u64 = 0;
const HUMAN_STREAM: u64 = 1;

/// How the robot chooses its pouring speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Policy {
    /// Pour at the rate implied by the current goal estimate.
    Adaptive,
    /// Same skill schedule, but every pour runs at one fixed tilt rate.
    FixedRate { tilt_rate: f64 },
}

/// Independent random streams for the scale and the simulated human.
///
/// Keeping them apart lets a scripted human replace the simulated one without
/// shifting the sensor noise sequence.
pub fn rng_streams(seed: u64) -> (ChaCha8Rng, ChaCha8Rng) {
    let mut sensor = ChaCha8Rng::seed_from_u64(seed);
    sensor.set_stream(SENSOR_STREAM);
    let mut human = ChaCha8Rng::seed_from_u64(seed);
    human.set_stream(HUMAN_STREAM);
    (sensor, human)
}

/// Everything observed and decided during one tick.
#[derive(Debug, Clone, PartialEq)]
pub struct TickRecord {
    pub tick: u64,
    pub t: f64,
    /// Robot state at the start of the tick.
    pub robot: RobotState,
    /// Environment state at the start of the tick.
    pub env: EnvState,
    pub poured_sensed: f64,
    pub u_r: TaskVelocity,
    pub u_h: HumanAction,
    /// Primitive that produced `u_r`.
    pub primitive: PrimitiveKind,
    pub map_g: f64,
    pub mean_g: f64,
    pub entropy: f64,
    /// Primitive selected for the following tick.
    pub next_primitive: Primitive,
}

impl TickRecord {
    /// The robot has chosen to stop and the belief has settled.
    pub fn settled_stop(&self) -> bool {
        self.next_primitive == Primitive::Stop && self.entropy < SETTLED_ENTROPY
    }

    pub fn trace_row(&self) -> TraceRow {
        TraceRow {
            t: self.t,
            tilt: self.robot.tilt,
            poured_true: self.env.poured_g,
            poured_sensed: self.poured_sensed,
            u_r_tilt: self.u_r.tilt,
            u_h_tilt: self.u_h.u_h_tilt,
            primitive: self.primitive,
            map_g: self.map_g,
            mean_g: self.mean_g,
            entropy: self.entropy,
        }
    }
}

/// Live state of one episode.
#[derive(Debug, Clone)]
pub struct Episode {
    cfg: EpisodeConfig,
    policy: Policy,
    belief: Belief,
    robot: RobotState,
    env: EnvState,
    reference: ReferencePoint,
    primitive: Primitive,
    phase_t: f64,
    tick: u64,
    sensor_rng: ChaCha8Rng,
}

impl Episode {
    pub fn new(cfg: EpisodeConfig, policy: Policy) -> Result<Self> {
        cfg.validate()?;
        let grid = cfg.grid.build()?;
        let belief = init_belief(&grid);
        let env = EnvState::full(cfg.env.capacity_g);
        let primitive = Self::choose(&cfg, policy, &belief, env.poured_g);
        let (sensor_rng, _) = rng_streams(cfg.seed);
        Ok(Self {
            cfg,
            policy,
            belief,
            robot: RobotState::default(),
            env,
            reference: ReferencePoint::default(),
            primitive,
            phase_t: 0.0,
            tick: 0,
            sensor_rng,
        })
    }

    /// The simulated human for this episode's seed.
    pub fn simulated_human(cfg: &EpisodeConfig) -> SimulatedHuman {
        let (_, human_rng) = rng_streams(cfg.seed);
        SimulatedHuman::new(cfg.human, cfg.obs, human_rng)
    }

    fn choose(cfg: &EpisodeConfig, policy: Policy, belief: &Belief, x_e: f64) -> Primitive {
        let next = select_primitive(belief, x_e, &cfg.thresholds, &cfg.skills, &cfg.obs);
        match (policy, next) {
            (Policy::FixedRate { tilt_rate }, Primitive::Pour { .. }) => {
                Primitive::Pour { tilt_rate }
            }
            _ => next,
        }
    }

    pub fn config(&self) -> &EpisodeConfig {
        &self.cfg
    }

    pub fn belief(&self) -> &Belief {
        &self.belief
    }

    pub fn grid(&self) -> &GoalGrid {
        self.belief.grid()
    }

    pub fn robot(&self) -> &RobotState {
        &self.robot
    }

    pub fn env(&self) -> &EnvState {
        &self.env
    }

    pub fn primitive(&self) -> &Primitive {
        &self.primitive
    }

    /// Index of the next tick to run.
    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn time(&self) -> f64 {
        self.tick as f64 * self.cfg.env.dt
    }

    pub fn out_of_time(&self) -> bool {
        self.tick >= self.cfg.max_ticks()
    }

    /// Run one tick. On error the episode state is left untouched.
    pub fn step(&mut self, human: &mut dyn HumanInput) -> Result<TickRecord> {
        let cfg = &self.cfg;
        let ctx = ReferenceContext {
            dt: cfg.env.dt,
            r_max: cfg.obs.r_max,
            home_vert: 0.0,
        };
        let reference = primitive_reference(&self.primitive, self.phase_t, &self.reference, &ctx);
        let u_r = impedance_command(&self.robot, &reference, &cfg.gains, cfg.obs.r_max);

        let mut sensor_rng = self.sensor_rng.clone();
        let x_e = sense_poured(&self.env, cfg.env.sensor_sigma, &mut sensor_rng);
        let u_h = human.act(self.tick, x_e, u_r.tilt);

        let likelihood = likelihood_vector(
            &u_h,
            self.belief.grid(),
            &self.robot,
            x_e,
            u_r.tilt,
            &cfg.obs,
        )?;
        let belief = update_belief(&self.belief, &likelihood)?;
        let (robot, env) = sim::step(&self.robot, &self.env, u_r, u_h.velocity(), &cfg.env)?;
        let next = Self::choose(cfg, self.policy, &belief, x_e);

        let record = TickRecord {
            tick: self.tick,
            t: self.time(),
            robot: self.robot,
            env: self.env,
            poured_sensed: x_e,
            u_r,
            u_h,
            primitive: self.primitive.kind(),
            map_g: map_estimate(&belief),
            mean_g: mean_estimate(&belief),
            entropy: entropy(&belief),
            next_primitive: next,
        };

        if next.kind() == self.primitive.kind() {
            self.reference = reference;
            self.phase_t += cfg.env.dt;
        } else {
            // a new skill starts from where the robot actually is
            self.reference = ReferencePoint::at(&robot);
            self.phase_t = 0.0;
        }
        self.primitive = next;
        self.belief = belief;
        self.robot = robot;
        self.env = env;
        self.sensor_rng = sensor_rng;
        self.tick += 1;
        Ok(record)
    }
}

/// Result of a finished episode.
#[derive(Debug, Clone)]
pub struct EpisodeOutcome {
    pub seed: u64,
    pub trace: EpisodeTrace,
    pub metrics: Metrics,
    /// Belief maintained incrementally by the filter at termination.
    pub belief: Belief,
}

/// Run one episode with the simulated human and the adaptive policy.
pub fn run_episode(cfg: &EpisodeConfig) -> Result<EpisodeOutcome> {
    run_episode_with(cfg, Policy::Adaptive, &mut Episode::simulated_human(cfg))
}

/// Run one episode to termination (settled stop) or timeout.
pub fn run_episode_with(
    cfg: &EpisodeConfig,
    policy: Policy,
    human: &mut dyn HumanInput,
) -> Result<EpisodeOutcome> {
    let mut episode = Episode::new(cfg.clone(), policy)?;
    let mut rows = Vec::with_capacity(cfg.max_ticks() as usize);
    let mut termination = Termination::Timeout;
    while !episode.out_of_time() {
        let record = episode.step(human)?;
        rows.push(record.trace_row());
        if record.settled_stop() {
            termination = Termination::Stopped;
            break;
        }
    }
    let trace = EpisodeTrace::new(rows);
    let metrics = Metrics::compute(&trace, episode.env(), cfg, termination);
    Ok(EpisodeOutcome {
        seed: cfg.seed,
        trace,
        metrics,
        belief: episode.belief,
    })
}
