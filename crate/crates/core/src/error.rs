use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Io,
    Domain,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("delay {delay_s:e} s rounds to fewer than one sample of {sample_period_s:e} s")]
    DelayTooSmall { delay_s: f64, sample_period_s: f64 },

    #[error("phase path of {len} samples is too short for delay index {k}")]
    PathTooShort { len: usize, k: usize },

    #[error("trace of {len} samples is too short, need at least {required}")]
    TraceTooShort { len: usize, required: usize },

    #[error("power spectrum is empty")]
    EmptyPsd,

    #[error("code {code} is not a valid {bits}-bit ADC code")]
    InvalidBin { code: i32, bits: u8 },

    #[error("phase-noise variance must be positive, got {0}")]
    NonPositiveVariance(f64),

    #[error("trace is empty")]
    EmptyTrace,

    #[error("quantum variance {sigma_q2} is outside [0, A²/2 = {limit})")]
    VarianceOutOfRange { sigma_q2: f64, limit: f64 },

    #[error("classical variance {classical} exceeds measured variance {measured}")]
    ClassicalExceedsMeasured { measured: f64, classical: f64 },

    #[error("bit block has length {actual}, expected {expected}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("{len} bits supplied, statistic needs at least {min}")]
    TooFewBits { len: usize, min: usize },

    #[error("metadata for `{path}`: {reason}")]
    Metadata { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Stable kebab-case identifier for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid-parameter",
            Error::DelayTooSmall { .. } => "delay-too-small",
            Error::PathTooShort { .. } => "path-too-short",
            Error::TraceTooShort { .. } => "trace-too-short",
            Error::EmptyPsd => "empty-psd",
            Error::InvalidBin { .. } => "invalid-bin",
            Error::NonPositiveVariance(_) => "non-positive-variance",
            Error::EmptyTrace => "empty-trace",
            Error::VarianceOutOfRange { .. } => "variance-out-of-range",
            Error::ClassicalExceedsMeasured { .. } => "classical-exceeds-measured",
            Error::LengthMismatch { .. } => "length-mismatch",
            Error::TooFewBits { .. } => "too-few-bits",
            Error::Metadata { .. } => "missing-metadata",
            Error::Io(_) => "io",
            Error::Json(_) => "malformed-json",
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidParameter { .. }
            | Error::DelayTooSmall { .. }
            | Error::InvalidBin { .. }
            | Error::LengthMismatch { .. } => ErrorClass::Validation,
            Error::Io(_) | Error::Json(_) | Error::Metadata { .. } => ErrorClass::Io,
            _ => ErrorClass::Domain,
        }
    }
}
