use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("index {index} outside window [{lo}, {hi}]")]
    WindowBounds { index: i64, lo: i64, hi: i64 },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("support leaves the window: coefficient at {index} shifted by {power} lands at {target}, below {lo}")]
    Truncation { index: i64, power: u64, target: i64, lo: i64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("invariant failure: {0}")]
    Invariant(String),
    #[error("construction error: {0}")]
    Construction(String),
    #[error("resource limit reached at depth {depth_reached}: {reason}")]
    Resource { depth_reached: usize, reason: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
