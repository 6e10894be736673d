use thiserror::Error;

/// Errors raised by the library. Every index mentioned in a message is
/// 1-based.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Malformed grid input, located by 1-based line and column (token).
    #[error("parse error at line {line}, column {column}: {message}")]
    Grid {
        line: usize,
        column: usize,
        message: String,
    },

    /// Malformed JSON input, located by a JSON path such as `stars[3][1]`.
    #[error("parse error at {path}: {message}")]
    Json { path: String, message: String },

    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A size or scale guard rejected the input.
    #[error("size guard: {0}")]
    Size(String),

    /// A 64-bit / 128-bit arithmetic guard rejected the input.
    #[error("arithmetic range guard: {0}")]
    Range(String),

    /// Exhaustive enumeration was requested on too many state nodes.
    #[error("capacity error: {n} state nodes exceed the enumeration limit of {limit}; use the flow-based decision instead")]
    Capacity { n: usize, limit: usize },

    /// A flow assignment does not match the arcs of the network it is used with.
    #[error("arc-set mismatch: {0}")]
    ArcMismatch(String),

    /// Two networks were not built from the same (graph, k, q).
    #[error("provenance mismatch: {0}")]
    Provenance(String),

    /// A certificate could not be produced (the decision itself is still valid).
    #[error("certificate unavailable: {0}")]
    CertificateUnavailable(String),

    /// A self-check inside the library failed.
    #[error("internal consistency error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
