use std::io;

use thiserror::Error;

/// Errors raised across the processing chain.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid radar parameters: {0}")]
    InvalidParams(String),

    #[error("non-finite sample at {0}")]
    NonFinite(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("detection outside map: range bin {range_bin}, doppler bin {doppler_bin}")]
    OutOfMap { range_bin: usize, doppler_bin: usize },

    #[error("series too short: length {len}, need at least {needed}")]
    SeriesTooShort { len: usize, needed: usize },

    #[error("buffer has no present frames")]
    EmptyBuffer,

    #[error("track {0} is not confirmed")]
    Unconfirmed(u64),

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("feature mode mismatch: model expects {expected}, vector is {actual}")]
    ModeMismatch { expected: String, actual: String },

    #[error("streams misaligned: {0}")]
    Misaligned(String),

    #[error("bad cube file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
