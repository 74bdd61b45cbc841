use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("net profit condition violated: E[S_1] = {mean} is not below the premium rate c = {premium}")]
    NetProfit { mean: f64, premium: f64 },

    #[error("{op}: argument outside the domain ({detail})")]
    Domain { op: &'static str, detail: String },

    #[error("grid mismatch: ({0:?}) vs ({1:?})")]
    GridMismatch(crate::grid::Grid, crate::grid::Grid),

    #[error("geometric series does not converge (ratio {0} >= 1)")]
    Divergent(f64),

    #[error("not supported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}

pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain { op, detail: detail.into() }
}
