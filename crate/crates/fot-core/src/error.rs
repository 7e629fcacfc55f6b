use thiserror::Error;

#[derive(Debug, Error)]
pub enum FotError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("empty sequence passed to aggregation")]
    EmptySequence,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("unsupported specification: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("search space too large: {0}")]
    SearchSpaceExceeded(String),
    #[error("linear program error: {0}")]
    Lp(String),
    #[error("invalid witness: {0}")]
    Witness(String),
    #[error("lcm overflow while building schedule horizon")]
    LcmOverflow,
    #[error("Lipschitz ball precondition violated: {0}")]
    BallRadius(String),
    #[error("column generation did not terminate within {0} pricing rounds")]
    ColgenStalled(usize),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, FotError>;
