use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty corpus")]
    EmptyCorpus,

    #[error("malformed row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },

    #[error("series {id} contains a non-finite value")]
    NonFinite { id: String },

    #[error("series too short to split: {len} observations, horizon {h}")]
    TooShort { len: usize, h: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unfittable: {0}")]
    Unfittable(String),

    #[error("no candidate models")]
    NoCandidates,

    #[error("no usable series")]
    NoUsableSeries,

    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("pool mismatch: table has {table:?}, requested {requested:?}")]
    PoolMismatch { table: Vec<String>, requested: Vec<String> },

    #[error("undefined MASE: in-sample seasonal naive scale is zero")]
    UndefinedScale,

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
