use thiserror::Error;

/// Errors raised anywhere in the crate.
///
/// Variants map one-to-one onto the failure classes of the query calculus so
/// that callers (and the CLI exit-code table) can react to the class rather
/// than to a message string.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("structural error: {0}")]
    Structural(String),

    #[error("capacity exceeded: {what} ({requested} > {cap})")]
    Capacity {
        what: &'static str,
        requested: u128,
        cap: u128,
    },

    #[error("no convergence after {iterations} iterations; root bracketed in [{lo}, {hi}]")]
    Convergence { iterations: usize, lo: f64, hi: f64 },

    #[error("numeric degeneracy: {0}")]
    NumericDegeneracy(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::NumericDegeneracy(msg.into())
    }

    /// Prefix the message of a point-level error with the index of the
    /// offending data point.
    pub fn at_point(self, index: usize) -> Self {
        match self {
            Error::Domain(m) => Error::Domain(format!("point {index}: {m}")),
            Error::NumericDegeneracy(m) => Error::NumericDegeneracy(format!("point {index}: {m}")),
            Error::InvariantViolation(m) => {
                Error::InvariantViolation(format!("point {index}: {m}"))
            }
            Error::Data(m) => Error::Data(format!("point {index}: {m}")),
            other => other,
        }
    }
}
