use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("algebra: {0}")]
    Algebra(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid medium: {0}")]
    InvalidMedium(String),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("Neumann iteration diverged after {iterations} iterations (contraction factor {contraction:.4})")]
    Divergence { iterations: usize, contraction: f64 },
    #[error("resonant grid: clamped fraction {fraction:.3e} exceeds threshold {threshold:.3e}")]
    ResonantGrid { fraction: f64, threshold: f64 },
    #[error("Neumann iteration did not reach tolerance within {iterations} iterations (residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("study aborted: {failed} of {total} samples failed")]
    StudyAborted { failed: usize, total: usize },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
