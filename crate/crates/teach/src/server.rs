//! HTTP and WebSocket front end. Each connection gets its own session and tick
//! loop; socket reads and writes run in separate tasks.

use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::Router;
use futures::{SinkExt, StreamExt};
use tokio::net::TcpListener;
use tokio::sync::mpsc;
use tokio::time::MissedTickBehavior;

use crate::session::Session;

pub const MIN_TICK_HZ: u32 = 10;
pub const MAX_TICK_HZ: u32 = 50;
pub const DEFAULT_TICK_HZ: u32 = 50;

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("tick rate {0} Hz outside [{MIN_TICK_HZ}, {MAX_TICK_HZ}]")]
    TickRate(u32),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ServerConfig {
    pub tick_hz: u32,
}

impl ServerConfig {
    pub fn new(tick_hz: u32) -> Result<Self, ServeError> {
        if !(MIN_TICK_HZ..=MAX_TICK_HZ).contains(&tick_hz) {
            return Err(ServeError::TickRate(tick_hz));
        }
        Ok(Self { tick_hz })
    }

    pub fn period(&self) -> Duration {
        Duration::from_secs_f64(1.0 / self.tick_hz as f64)
    }
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            tick_hz: DEFAULT_TICK_HZ,
        }
    }
}

#[derive(Debug)]
struct AppState {
    config: ServerConfig,
    next_id: AtomicU64,
}

pub fn router(config: ServerConfig) -> Router {
    let state = Arc::new(AppState {
        config,
        next_id: AtomicU64::new(0),
    });
    Router::new()
        .route("/healthz", get(healthz))
        .route("/session", get(session_upgrade))
        .with_state(state)
}

/// Serve on an already bound listener until the task is dropped.
pub async fn serve_listener(listener: TcpListener, config: ServerConfig) -> Result<(), ServeError> {
    axum::serve(listener, router(config)).await?;
    Ok(())
}

pub async fn serve(addr: SocketAddr, config: ServerConfig) -> Result<(), ServeError> {
    let listener = TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, tick_hz = config.tick_hz, "teach service listening");
    serve_listener(listener, config).await
}

async fn healthz() -> &'static str {
    "ok"
}

async fn session_upgrade(
    ws: WebSocketUpgrade,
    State(state): State<Arc<AppState>>,
) -> impl IntoResponse {
    let id = state.next_id.fetch_add(1, Ordering::Relaxed);
    let config = state.config;
    ws.on_upgrade(move |socket| run_connection(socket, Session::new(id), config))
}

async fn run_connection(socket: WebSocket, mut session: Session, config: ServerConfig) {
    let (mut sink, mut stream) = socket.split();
    let (in_tx, mut in_rx) = mpsc::channel::<String>(64);
    let (out_tx, mut out_rx) = mpsc::channel::<String>(256);

    let reader = tokio::spawn(async move {
        while let Some(Ok(msg)) = stream.next().await {
            match msg {
                Message::Text(text) => {
                    if in_tx.send(text.to_string()).await.is_err() {
                        break;
                    }
                }
                Message::Close(_) => break,
                _ => {}
            }
        }
    });
    let writer = tokio::spawn(async move {
        while let Some(text) = out_rx.recv().await {
            if sink.send(Message::Text(text.into())).await.is_err() {
                break;
            }
        }
        let _ = sink.close().await;
    });

    let mut clock = tokio::time::interval(config.period());
    clock.set_missed_tick_behavior(MissedTickBehavior::Delay);
    tracing::debug!(session = session.id(), "session opened");
    // the loop is the only writer of session state
    loop {
        let outgoing = tokio::select! {
            inbound = in_rx.recv() => match inbound {
                Some(text) => vec![session.handle_text(&text)],
                None => break,
            },
            _ = clock.tick() => session.tick(),
        };
        for msg in outgoing {
            if out_tx.send(msg.to_json()).await.is_err() {
                break;
            }
        }
    }
    tracing::debug!(session = session.id(), "session closed");
    drop(out_tx);
    reader.abort();
    let _ = writer.await;
}
