use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by every stage of the alignment pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: file contains no data rows")]
    EmptyFile { path: PathBuf },

    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("dimension mismatch: {left} channels vs {right} channels")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid channel selection: {0}")]
    InvalidSelection(String),

    #[error("empty input set")]
    EmptySet,

    #[error("invalid warping window: {0}")]
    InvalidWindow(String),

    #[error("invalid dilation map: {0}")]
    InvalidDilation(String),

    #[error("invalid frame schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("need at least {needed} scored trials, found {found}")]
    NotEnoughScored { needed: usize, found: usize },

    #[error("polynomial fit is rank deficient: {distinct} distinct x values, need at least 4")]
    RankDeficient { distinct: usize },

    #[error("encoder `{program}` could not be started ({source}); install ffmpeg or pass --encoder <path>")]
    EncoderMissing {
        program: String,
        #[source]
        source: std::io::Error,
    },

    #[error("encoder `{program}` failed with {status}: {stderr}")]
    EncoderFailed {
        program: String,
        status: String,
        stderr: String,
    },

    #[error("video has {video_frames} frames but the schedule needs {required}")]
    FrameCountMismatch { video_frames: usize, required: usize },

    #[error("{0}")]
    Usage(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
