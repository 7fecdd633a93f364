use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The map (or one of its derivatives) is undefined at the requested point.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An operation was called on inputs that do not satisfy its precondition
    /// (for example an uncertified box handed to the horseshoe builder).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A sampled path was too coarse to bracket the crossings it must contain.
    #[error("path refinement failed: {0}")]
    Refinement(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}
