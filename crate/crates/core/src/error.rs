use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("result escapes the weight cutoff {cutoff}: {context}")]
    Truncated { cutoff: u32, context: String },
    #[error("not reachable from generators: {0}")]
    NotReachable(String),
    #[error("span deficient at weight {weight}: achieved {achieved} of {target}")]
    SpanDeficient { weight: u32, target: usize, achieved: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
