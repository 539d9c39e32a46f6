//! Live teaching sessions: a client supplies the corrections the simulated
//! human would otherwise produce, and receives state and belief every tick.

pub mod protocol;
pub mod server;
pub mod session;

pub use protocol::{BeliefPoint, Inbound, InboundKind, Outbound, TickMessage};
pub use server::{router, serve, serve_listener, ServeError, ServerConfig};
pub use session::{Session, DEADMAN_TICKS};
