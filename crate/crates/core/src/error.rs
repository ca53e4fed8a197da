//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A code table entry does not fit the declared dimensions, or a column
    /// of the polynomial parity-check matrix is all zero.
    #[error("malformed code: {0}")]
    MalformedCode(String),

    /// The declared rate is impossible (k >= n).
    #[error("invalid rate: n = {n}, k = {k} (need k < n)")]
    InvalidRate { n: usize, k: usize },

    /// Codeword length incompatible with the code.
    #[error("invalid length: {0}")]
    InvalidLength(String),

    /// Trellis construction emptied a level; the parity-check matrix does
    /// not describe a non-trivial terminated code.
    #[error("inconsistent code: {0}")]
    InconsistentCode(String),

    /// A bit vector has the wrong length for the operation.
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A received trace cannot be explained by any path inside the drift
    /// window (e.g. |R - N| > N, or zero total probability).
    #[error("undecodable trace: {0}")]
    UndecodableTrace(String),

    /// Posterior combining encountered a zero prior with non-zero evidence.
    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
