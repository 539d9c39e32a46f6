//! Online inference of a human's pouring goal from physical corrections.
//!
//! The robot keeps a belief over candidate target amounts, reweights it by the
//! likelihood of every correction the human applies, and picks pouring skills
//! from its current best guess.

pub mod belief;
pub mod error;
pub mod harness;
pub mod human;
pub mod observation;
pub mod sim;
pub mod skills;

pub use belief::{
    entropy, init_belief, map_estimate, mean_estimate, update_belief, Belief, GoalGrid,
    LikelihoodVector,
};
pub use error::{Error, Result};
pub use harness::{
    replay_oracle, run_batch, run_episode, run_episode_with, Episode, EpisodeConfig,
    EpisodeOutcome, EpisodeTrace, Metrics, Policy, Termination,
};
pub use human::{HumanInput, HumanPolicyParams, ScriptedHuman, SimulatedHuman};
pub use observation::{HumanAction, ObservationModelParams};
pub use sim::{EnvParams, EnvState, RobotState, TaskVelocity};
pub use skills::{Primitive, PrimitiveKind};
