use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid coil geometry: {0}")]
    InvalidCoil(String),

    #[error("invalid plate parameters: {0}")]
    InvalidPlate(String),

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("frequencies must be strictly increasing and positive (index {index}, {freq} Hz)")]
    BadFrequencies { index: usize, freq: f64 },

    #[error("spectrum length mismatch: {freqs} frequencies, {values} values")]
    LengthMismatch { freqs: usize, values: usize },

    #[error("spectra are sampled on different frequency grids")]
    GridMismatch,

    #[error("reflection coefficient would overflow (2|alpha1|t = {exponent})")]
    Overflow { exponent: f64 },

    #[error("forward model produced a non-finite value at {freq} Hz")]
    NonFinite { freq: f64 },

    #[error("every Jacobian column is below the rank threshold")]
    TotalDegeneracy,

    #[error("reduced normal matrix is singular (condition estimate {condition:e})")]
    Singular { condition: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("line {line}: malformed header, expected `{expected}`, found `{found}`")]
    MalformedHeader {
        line: usize,
        expected: String,
        found: String,
    },

    #[error("line {line}: expected {expected} fields, found {found}")]
    FieldCount {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("line {line}: cannot parse `{value}` in column `{column}`")]
    ParseNumber {
        line: usize,
        column: String,
        value: String,
    },

    #[error("line {line}: non-finite value in column `{column}`")]
    NotFinite { line: usize, column: String },

    #[error("line {line}: frequency {freq} Hz does not increase on the previous row")]
    NonMonotone { line: usize, freq: f64 },

    #[error("line {line}: frequency must be positive, found {freq} Hz")]
    NonPositiveFrequency { line: usize, freq: f64 },

    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },

    #[error("config field `{field}`: {reason}")]
    ConfigField { field: String, reason: String },

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn arg(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}
