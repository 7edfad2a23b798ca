use thiserror::Error;

/// Errors produced by the accounting routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the requested quantity.
    #[error("domain error: {0}")]
    Domain(String),

    /// The query is well-formed but has no finite answer (or the search
    /// found no admissible point).
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// A monotone inversion was asked for a target outside the range
    /// spanned by the function on the search interval.
    #[error("target {target} outside the range [{lo_value}, {hi_value}] of the function on the search interval")]
    OutOfRange {
        target: f64,
        lo_value: f64,
        hi_value: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
