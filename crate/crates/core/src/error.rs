use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A record parsed but breaks a data-model invariant.
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cloud is empty")]
    EmptyCloud,

    #[error("degenerate XY hull (area {area}); density is undefined")]
    DegenerateHull { area: f64 },

    #[error("{what}: expected {expected} entries, got {actual}")]
    Misaligned {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("could not place {requested} trees at spacing {min_spacing} m after {attempts} attempts (placed {placed})")]
    PlacementInfeasible {
        requested: usize,
        placed: usize,
        min_spacing: f64,
        attempts: usize,
    },

    #[error("{0} is undefined without matched trees")]
    NoMatches(&'static str),

    #[error("{0}")]
    Undefined(&'static str),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
