//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Arguments violate an operation precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A configuration value is out of range or inconsistent.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// The (symmetrized) graph has no edges for some vertex, or a threshold
    /// left a vertex with an empty potential-neighbor set.
    #[error("disconnected graph: {0}")]
    DisconnectedGraph(String),

    /// A vertex with zero degree makes the normalized Laplacian undefined.
    #[error("degenerate graph: {0}")]
    DegenerateGraph(String),

    /// A cache or state object was used with mismatched inputs.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// Non-finite values were produced during training.
    #[error("numeric failure: {0}")]
    NumericFailure(String),

    /// Dataset layout or content error; the message names the offending file.
    #[error("data error: {0}")]
    Data(String),

    /// Malformed binary container.
    #[error("format error: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
