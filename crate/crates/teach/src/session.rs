//! One live teaching episode driven by client corrections.
//!
//! The session is synchronous and owns all episode state. The server calls
//! [`Session::handle`] for inbound messages and [`Session::tick`] on its clock,
//! never both at once, so messages only take effect between ticks.

use pourgoal_core::harness::{Metrics, Termination, TraceRow};
use pourgoal_core::{Episode, EpisodeConfig, EpisodeTrace, Error, HumanAction, HumanInput, Policy};

use crate::protocol::{Inbound, InboundKind, Outbound, TickMessage};

/// A held correction is applied on at most this many ticks.
pub const DEADMAN_TICKS: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Held {
    action: HumanAction,
    ticks_applied: u32,
}

/// Feeds the held correction to the episode for one tick.
struct HeldInput(HumanAction);

impl HumanInput for HeldInput {
    fn act(&mut self, _tick: u64, _x_e: f64, _u_r_tilt: f64) -> HumanAction {
        self.0
    }
}

#[derive(Debug, Clone)]
pub struct Session {
    id: u64,
    cfg: EpisodeConfig,
    episode: Option<Episode>,
    rows: Vec<TraceRow>,
    held: Option<Held>,
    /// Correction received while paused, applied on resume.
    buffered: Option<HumanAction>,
    paused: bool,
    finished: Option<Termination>,
}

impl Session {
    pub fn new(id: u64) -> Self {
        Self {
            id,
            cfg: EpisodeConfig::default(),
            episode: None,
            rows: Vec::new(),
            held: None,
            buffered: None,
            paused: false,
            finished: None,
        }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn config(&self) -> &EpisodeConfig {
        &self.cfg
    }

    pub fn episode(&self) -> Option<&Episode> {
        self.episode.as_ref()
    }

    pub fn is_paused(&self) -> bool {
        self.paused
    }

    pub fn finished(&self) -> Option<Termination> {
        self.finished
    }

    /// Whether the next call to [`Session::tick`] advances the episode.
    pub fn is_running(&self) -> bool {
        self.episode.is_some() && !self.paused && self.finished.is_none()
    }

    /// Trace of the current episode so far.
    pub fn trace(&self) -> EpisodeTrace {
        EpisodeTrace::new(self.rows.clone())
    }

    /// Apply one raw client message.
    pub fn handle_text(&mut self, text: &str) -> Outbound {
        match crate::protocol::parse_inbound(text) {
            Ok(msg) => self.handle(msg),
            Err(e) => Outbound::error(format!("malformed message: {e}")),
        }
    }

    /// Apply one message. On error the session is unchanged.
    pub fn handle(&mut self, msg: Inbound) -> Outbound {
        let kind = msg.kind();
        match msg {
            Inbound::Start { config } => {
                let cfg = config.unwrap_or_default();
                match self.begin(cfg) {
                    Ok(()) => Outbound::ack(kind),
                    Err(e) => Outbound::error(format!("cannot start: {e}")),
                }
            }
            Inbound::Reset => {
                if self.episode.is_none() {
                    return Outbound::error("no episode to reset");
                }
                match self.begin(self.cfg.clone()) {
                    Ok(()) => Outbound::ack(kind),
                    Err(e) => Outbound::error(format!("cannot reset: {e}")),
                }
            }
            Inbound::Correct { u_h_tilt, u_h_vert } => self.correct(u_h_tilt, u_h_vert),
            Inbound::Pause => {
                if self.episode.is_none() {
                    return Outbound::error("no episode to pause");
                }
                self.paused = true;
                Outbound::ack(kind)
            }
            Inbound::Resume => {
                if self.episode.is_none() {
                    return Outbound::error("no episode to resume");
                }
                self.paused = false;
                if let Some(action) = self.buffered.take() {
                    self.hold(action);
                }
                Outbound::ack(kind)
            }
        }
    }

    fn begin(&mut self, cfg: EpisodeConfig) -> pourgoal_core::Result<()> {
        let episode = Episode::new(cfg.clone(), Policy::Adaptive)?;
        self.rows = Vec::with_capacity(cfg.max_ticks() as usize);
        self.cfg = cfg;
        self.episode = Some(episode);
        self.held = None;
        self.buffered = None;
        self.paused = false;
        self.finished = None;
        Ok(())
    }

    fn correct(&mut self, u_h_tilt: f64, u_h_vert: f64) -> Outbound {
        if self.episode.is_none() {
            return Outbound::error("no episode running; send start first");
        }
        if !(u_h_tilt.is_finite() && u_h_vert.is_finite()) {
            return Outbound::error("correction must be finite");
        }
        let r_max = self.cfg.obs.r_max;
        let tilt = u_h_tilt.clamp(-r_max, r_max);
        let action = HumanAction {
            u_h_tilt: tilt,
            u_h_vert,
        };
        if self.paused {
            self.buffered = Some(action);
        } else {
            self.hold(action);
        }
        Outbound::Ack {
            of: InboundKind::Correct,
            clamped: Some(tilt != u_h_tilt),
        }
    }

    fn hold(&mut self, action: HumanAction) {
        self.held = Some(Held {
            action,
            ticks_applied: 0,
        });
    }

    /// The correction the next tick will apply.
    pub fn pending_action(&self) -> HumanAction {
        match self.held {
            Some(h) if h.ticks_applied < DEADMAN_TICKS => h.action,
            _ => HumanAction::ZERO,
        }
    }

    /// Advance one tick if running. Returns the messages to send, in order.
    pub fn tick(&mut self) -> Vec<Outbound> {
        if !self.is_running() {
            return Vec::new();
        }
        let action = self.pending_action();
        let episode = self.episode.as_mut().expect("running implies an episode");
        match episode.step(&mut HeldInput(action)) {
            Ok(record) => {
                if let Some(h) = self.held.as_mut() {
                    h.ticks_applied += 1;
                }
                self.rows.push(record.trace_row());
                let mut out = vec![Outbound::Tick(TickMessage::new(&record, episode.belief()))];
                let ended = if record.settled_stop() {
                    Some(Termination::Stopped)
                } else if episode.out_of_time() {
                    Some(Termination::Timeout)
                } else {
                    None
                };
                if let Some(reason) = ended {
                    self.finished = Some(reason);
                    let trace = EpisodeTrace::new(self.rows.clone());
                    let metrics = Metrics::compute(&trace, episode.env(), &self.cfg, reason);
                    out.push(Outbound::Done { reason, metrics });
                }
                out
            }
            Err(e) => {
                // the episode refused the tick; drop the correction that caused it
                self.paused = true;
                self.held = None;
                let reason = match e {
                    Error::DegeneratePosterior => {
                        "degenerate posterior: no goal explains the correction; session paused"
                            .to_string()
                    }
                    other => format!("tick failed: {other}; session paused"),
                };
                vec![Outbound::error(reason)]
            }
        }
    }
}
