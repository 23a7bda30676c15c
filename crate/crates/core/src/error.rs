use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no nontrivial fixed point for k = {k} (requires k >= 2)")]
    NoFixedPoint { k: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("state norm deviates from one by {deviation:e}")]
    NormViolation { deviation: f64 },

    #[error("Kraus channel total probability deviates from one by {deviation:e}")]
    ChannelCompleteness { deviation: f64 },

    #[error("config error in {field}: {reason}")]
    Config { field: String, reason: String },

    #[error("metadata mismatch against prior run: {0}")]
    MetadataMismatch(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("linear algebra failure: {0}")]
    LinAlg(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
