//! JSON messages exchanged over `/session`. Every message carries a `type` tag.

use std::fmt;

use pourgoal_core::harness::{Metrics, Termination, TickRecord};
use pourgoal_core::{Belief, EpisodeConfig, PrimitiveKind};
use serde::{Deserialize, Serialize};

/// Client to server.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Inbound {
    /// Begin a new episode. Missing config fields take defaults.
    Start {
        #[serde(default)]
        config: Option<EpisodeConfig>,
    },
    /// Latest applied correction, held until replaced or timed out.
    Correct {
        u_h_tilt: f64,
        #[serde(default)]
        u_h_vert: f64,
    },
    Pause,
    Resume,
    Reset,
}

impl Inbound {
    pub fn kind(&self) -> InboundKind {
        match self {
            Self::Start { .. } => InboundKind::Start,
            Self::Correct { .. } => InboundKind::Correct,
            Self::Pause => InboundKind::Pause,
            Self::Resume => InboundKind::Resume,
            Self::Reset => InboundKind::Reset,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InboundKind {
    Start,
    Correct,
    Pause,
    Resume,
    Reset,
}

impl fmt::Display for InboundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Start => "start",
            Self::Correct => "correct",
            Self::Pause => "pause",
            Self::Resume => "resume",
            Self::Reset => "reset",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeliefPoint {
    pub beta: f64,
    pub w: f64,
}

/// State broadcast once per tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickMessage {
    pub n: u64,
    pub t: f64,
    pub tilt: f64,
    pub poured: f64,
    pub source: f64,
    pub primitive: PrimitiveKind,
    pub u_r: f64,
    pub u_h: f64,
    pub map: f64,
    pub mean: f64,
    pub entropy: f64,
    pub belief: Vec<BeliefPoint>,
}

impl TickMessage {
    /// `belief` is the posterior after the record's update.
    pub fn new(record: &TickRecord, belief: &Belief) -> Self {
        Self {
            n: record.tick,
            t: record.t,
            tilt: record.robot.tilt,
            poured: record.env.poured_g,
            source: record.env.source_g,
            primitive: record.primitive,
            u_r: record.u_r.tilt,
            u_h: record.u_h.u_h_tilt,
            map: record.map_g,
            mean: record.mean_g,
            entropy: record.entropy,
            belief: belief
                .iter()
                .map(|(beta, w)| BeliefPoint { beta, w })
                .collect(),
        }
    }
}

/// Server to client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Outbound {
    Tick(TickMessage),
    Ack {
        of: InboundKind,
        /// Present on `correct` acks: whether the tilt rate was clamped.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        clamped: Option<bool>,
    },
    Error {
        reason: String,
    },
    /// The episode ended; no more ticks until `start` or `reset`.
    Done {
        reason: Termination,
        metrics: Metrics,
    },
}

impl Outbound {
    pub fn ack(of: InboundKind) -> Self {
        Self::Ack { of, clamped: None }
    }

    pub fn error(reason: impl Into<String>) -> Self {
        Self::Error {
            reason: reason.into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("outbound messages always serialize")
    }
}

pub fn parse_inbound(text: &str) -> Result<Inbound, serde_json::Error> {
    serde_json::from_str(text)
}
