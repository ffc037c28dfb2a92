use std::io;

use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A scalar argument lies outside the domain of the operation.
    #[error("parameter domain: {0}")]
    Domain(String),

    /// A pool contains duplicate molecules where distinct contents are required.
    #[error("pool molecules are not pairwise distinct (index {first} and {second} are equal)")]
    NotDistinct { first: usize, second: usize },

    /// An input violates a structural precondition (e.g. missing tags).
    #[error("contract violation: {0}")]
    Contract(String),

    /// The Chebyshev tail bound has a nonpositive denominator for these inputs.
    #[error("tail bound undefined: xi - e^c/M = {margin} <= 0 (M too small for this delta)")]
    BoundUndefined { margin: f64 },

    /// A size guard or storage capacity would be exceeded.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A codec configuration is not usable.
    #[error("invalid codec config: {0}")]
    Config(String),

    #[error("division by zero in GF(2^{width})")]
    DivisionByZero { width: u32 },

    /// Fewer distinct molecule positions were observed than the code dimension.
    #[error("insufficient coverage: need {needed} distinct positions, have {have} (deficit {deficit})")]
    InsufficientCoverage { needed: usize, have: usize, deficit: usize },

    /// Two samples carry the same index but different content.
    #[error("corruption detected: conflicting samples for position {position}")]
    CorruptionDetected { position: u64 },

    /// A file or header could not be parsed.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
