use std::path::PathBuf;

use crate::raster_io::BandId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed manifest: {reason}")]
    Manifest { path: PathBuf, reason: String },
    #[error("malformed file: {0}")]
    Format(String),
    #[error("unsupported PGM variant: {0}")]
    UnsupportedPgm(String),
    #[error("unknown band id {0:?}")]
    UnknownBand(String),
    #[error("duplicate band id {0}")]
    DuplicateBand(BandId),
    #[error("missing band {0}")]
    MissingBand(BandId),
    #[error("dimension/extent mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("training diverged: {0}")]
    Diverged(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
