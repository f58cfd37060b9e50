use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("value {value} outside range [{lo}, {hi}]: {what}")]
    Range {
        what: String,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("construction error: {0}")]
    Construction(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("precondition violated by `{label}`: {reason}")]
    Precondition { label: String, reason: String },

    #[error("solver error: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn range_error(what: &str, value: f64, lo: f64, hi: f64) -> Error {
    Error::Range {
        what: what.to_string(),
        value,
        lo,
        hi,
    }
}
