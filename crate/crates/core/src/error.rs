use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("empty input")]
    EmptyInput,

    #[error("line {line}: non-numeric token {token:?}")]
    Parse { line: usize, token: String },

    #[error("{location}: non-finite value {value}")]
    NonFinite { location: String, value: f64 },

    #[error("raw64 input length {len} is not a multiple of 8 bytes")]
    Truncated { len: usize },

    /// A parameter violates a precondition. `param` names the offending
    /// parameter so front ends can map it back to a flag.
    #[error("invalid {param}: {message}")]
    Config {
        param: &'static str,
        message: String,
    },

    #[error("unstable AR coefficients: {0}")]
    Unstable(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

impl Error {
    pub(crate) fn config(param: &'static str, message: impl Into<String>) -> Self {
        Error::Config {
            param,
            message: message.into(),
        }
    }

    /// True for errors caused by bad parameters rather than bad files.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config { .. } | Error::Unstable(_) | Error::Contract(_) | Error::Dimension(_)
        )
    }
}
