//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(
        "integration singularity at step {step} (t = {time}): bodies {pair:?} at distance {radius:.3e}"
    )]
    IntegrationSingularity {
        step: usize,
        time: f64,
        pair: (usize, usize),
        radius: f64,
    },

    #[error("non-finite state at step {step} (t = {time})")]
    NonFiniteState { step: usize, time: f64 },

    #[error("insufficient data: {rows} points for dimension {dim} (need at least dim + 1)")]
    InsufficientData { rows: usize, dim: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("training diverged at step {step}: loss = {loss}")]
    Divergence { step: usize, loss: f64 },

    #[error("runaway chain at step {step}: |x| = {norm:.3e} exceeds {limit:.1e}")]
    RunawayChain { step: usize, norm: f64, limit: f64 },

    #[error("no local maximum found over [{lo}, {hi}]: response is flat (spread {spread:.3})")]
    NoMaxFound { lo: f64, hi: f64, spread: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid formula: {0}")]
    InvalidFormula(String),

    #[error("mixed systems: {a} vs {b}")]
    MixedSystems { a: String, b: String },

    #[error("degenerate gauge fixing: {0}")]
    DegenerateGauge(String),

    #[error("empty result: {0}")]
    EmptyResult(String),

    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
