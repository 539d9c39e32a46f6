use thiserror::Error;

/// Errors raised by the inference core, the simulator and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid goal grid: {0}")]
    InvalidGrid(String),

    #[error("likelihood vector has {got} entries but the grid has {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("likelihood at index {index} is not finite and nonnegative: {value}")]
    InvalidLikelihood { index: usize, value: f64 },

    #[error("degenerate posterior: the observation has zero likelihood under every goal")]
    DegeneratePosterior,

    #[error("invalid observation: {0}")]
    InvalidObservation(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("simulation config error: {0}")]
    SimConfig(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("malformed trace: {0}")]
    Trace(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by an invalid configuration rather than a runtime failure.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidGrid(_)
                | Error::InvalidParams(_)
                | Error::SimConfig(_)
                | Error::Config(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
