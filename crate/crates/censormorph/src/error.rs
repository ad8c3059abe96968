//! Crate-wide error type.

use crate::lcdm::Hemisphere;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate manifest entry for subject '{subject_id}' ({hemisphere})")]
    DuplicateEntry {
        subject_id: String,
        hemisphere: Hemisphere,
    },
    #[error("manifest contains no entries")]
    EmptyManifest,
    #[error("file contains no values: {0}")]
    EmptyFile(String),
    #[error("invalid range: lo ({lo}) must be below hi ({hi})")]
    InvalidRange { lo: f64, hi: f64 },
    #[error("hemisphere mismatch: expected {expected}, found {found}")]
    HemisphereMismatch {
        expected: Hemisphere,
        found: Hemisphere,
    },
    #[error("empty collection: {0}")]
    EmptyCollection(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("at least two groups are required (got {0})")]
    TooFewGroups(usize),
    #[error("group {0} is empty")]
    EmptyGroup(usize),
    #[error("insufficient group size: {0}")]
    InsufficientGroupSize(String),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("sample variance is zero")]
    ZeroVariance,
    #[error("p-value out of [0, 1]: {0}")]
    OutOfRange(f64),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("sample has zero spread (constant or degenerate quartiles)")]
    ZeroSpread,
    #[error("bandwidth must be positive and finite (got {0})")]
    InvalidBandwidth(f64),
    #[error("eta {eta} out of range: {reason}")]
    EtaOutOfRange { eta: u32, reason: String },
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("invalid counts: successes {successes} out of {trials} trials")]
    InvalidCounts { successes: u64, trials: u64 },
    #[error("configuration error: {0}")]
    ConfigError(String),
    #[error("analysis requires at least two groups per hemisphere (found only '{0}')")]
    SingleGroup(String),
}

impl Error {
    /// Process exit code the CLI maps this error to:
    /// 1 usage, 2 data, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        use Error::*;
        match self {
            InvalidRange { .. }
            | InvalidBandwidth(_)
            | EtaOutOfRange { .. }
            | InvalidParams(_)
            | ConfigError(_) => 1,
            Io(_)
            | Parse { .. }
            | DuplicateEntry { .. }
            | EmptyManifest
            | EmptyFile(_)
            | HemisphereMismatch { .. }
            | EmptyCollection(_)
            | SingleGroup(_) => 2,
            _ => 3,
        }
    }
}
