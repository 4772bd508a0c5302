use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid system size {n}: need at least {min} qubits")]
    InvalidSize { n: usize, min: usize },

    #[error("dense representation of {n} qubits exceeds the limit of {max}")]
    SizeLimit { n: usize, max: usize },

    #[error("factor {factor} on qubit {qubit} is not a Pauli; expand XY-angle factors first")]
    UnsupportedFactor { qubit: usize, factor: String },

    #[error("invalid qubit pair (control {control}, target {target}) on {n} qubits")]
    InvalidQubits {
        control: usize,
        target: usize,
        n: usize,
    },

    #[error("dimension mismatch: expected {expected} qubits, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NonHermitian { deviation: f64 },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("at least one shot is required")]
    ZeroShots,

    #[error("incomplete data: no measurements for setting \"{setting}\"")]
    IncompleteData { setting: String },

    #[error("unknown setting name \"{0}\"")]
    UnknownSetting(String),

    #[error("phase estimate is degenerate (both off-diagonal expectations consistent with zero); fallback {fallback}")]
    DegeneratePhase { fallback: f64 },

    #[error("angle estimate is degenerate (all inputs consistent with zero); fallback {fallback}")]
    DegenerateAngle { fallback: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config field `{field}` (line {line}): {message}")]
    Config {
        field: String,
        line: usize,
        message: String,
    },

    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
