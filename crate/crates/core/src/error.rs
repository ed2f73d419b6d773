use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed config: {0}")]
    Parse(String),

    #[error("unknown parameter key `{0}`")]
    UnknownKey(String),

    #[error("value for `{key}` needs a unit suffix (got `{value}`)")]
    MissingUnit { key: String, value: String },

    #[error("cannot interpret `{value}` for `{key}`: {reason}")]
    BadValue {
        key: String,
        value: String,
        reason: String,
    },

    #[error("parameter set failed validation: {0}")]
    Invalid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "quadrature did not converge after {nodes} nodes per axis (last {last}, previous {previous})"
    )]
    NonConvergence {
        nodes: usize,
        last: f64,
        previous: f64,
    },

    #[error("register too large: {0}")]
    Dimension(String),
}

pub(crate) fn invalid_arg(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
