use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite value: {0}")]
    Numeric(String),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Simulation blew up at the given step of the recursion (burn-in included).
    #[error("trajectory diverged at step {step}")]
    SimulationDiverged { step: usize },

    /// Training produced a non-finite loss.
    #[error("training diverged at epoch {epoch}, batch {batch}")]
    TrainingDiverged { epoch: usize, batch: usize },

    /// Effective sample size too small for the bound machinery to be defined.
    #[error("sample size too small: {0}")]
    TooSmallN(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
