use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: cannot read file: {source}")]
    Unreadable {
        path: PathBuf,
        #[source]
        source: hound::Error,
    },

    #[error("{path}: unsupported encoding: {reason}")]
    UnsupportedEncoding { path: PathBuf, reason: String },

    #[error("{path}: unsupported sample rate {rate} Hz (expected 44100 or 48000)")]
    UnsupportedSampleRateFile { path: PathBuf, rate: u32 },

    #[error("unsupported sample rate {0} Hz (expected 44100 or 48000)")]
    UnsupportedSampleRate(u32),

    #[error("{path}: cannot write file: {source}")]
    Unwritable {
        path: PathBuf,
        #[source]
        source: hound::Error,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },

    #[error("sample rate mismatch: {expected} Hz vs {found} Hz")]
    SampleRateMismatch { expected: u32, found: u32 },

    #[error("clip of {samples} samples is shorter than one 400 ms gating block")]
    ClipTooShort { samples: usize },

    #[error("cannot normalize silence")]
    CannotNormalizeSilence,

    #[error("loudness is unmeasurable (silent signal)")]
    SilentSignal,

    #[error("centre frequency {fc} Hz is not below Nyquist ({nyquist} Hz)")]
    AboveNyquist { fc: f64, nyquist: f64 },

    #[error("invalid filter design: {0}")]
    InvalidFilter(String),

    #[error("parameter vector length {len} is not {expected}")]
    LengthMismatch { len: usize, expected: usize },

    #[error("invalid bounds: {0}")]
    InvalidBounds(String),

    #[error("invalid session: {0}")]
    InvalidSession(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
