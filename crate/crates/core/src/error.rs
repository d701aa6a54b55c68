use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    /// The asymmetric lifetime closed form is 0/0 at p = 1/2.
    #[error("p = {0} is within the singular band around 1/2; use the symmetric lifetime")]
    SingularP(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("channel lifetime is zero; the per-transfer fee is undefined")]
    DegenerateLifetime,

    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e}")]
    QuadratureFailure { estimate: f64, error: f64 },

    #[error("no sign change of the surplus on [{lo:e}, {hi:e}]")]
    BracketFailure { lo: f64, hi: f64 },

    #[error("root finder did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad user input rather than numerical trouble.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. } | Error::Config(_) | Error::Json { .. } | Error::Io { .. }
        )
    }
}
