use thiserror::Error;

/// Errors produced by the core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("cannot parse {what}: {detail}")]
    Parse { what: &'static str, detail: String },

    #[error("instance too large: {edges} edges exceeds the enumeration bound {bound}")]
    SizeLimit { edges: usize, bound: usize },

    #[error("graph contains a cycle")]
    CycleDetected,

    #[error("iteration did not converge after {iterations} steps (last residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("regime mismatch: {0}")]
    Regime(String),

    #[error("not a matching: {0}")]
    InvalidMatching(String),

    #[error("inconsistent message field: {0}")]
    Inconsistent(String),

    #[error("the map t -> phi_hat(1 - phi_hat(1 - t)) is the identity on a subinterval")]
    Degenerate,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
