//! Episode runner, batch driver, metrics, traces and the replay oracle.

pub mod batch;
pub mod config;
pub mod episode;
pub mod metrics;
pub mod oracle;
pub mod trace;

pub use batch::{quantile, run_batch, BatchResult, BatchSummary, MetricSummary};
pub use config::{EpisodeConfig, GridSpec};
pub use episode::{
    rng_streams, run_episode, run_episode_with, Episode, EpisodeOutcome, Policy, TickRecord,
    SETTLED_ENTROPY,
};
pub use metrics::{Metrics, Termination};
pub use oracle::{max_weight_diff, replay_oracle};
pub use trace::{EpisodeTrace, TraceRow, TRACE_HEADER};
