use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("mode index {index} out of range for {dim} modes")]
    ModeOutOfRange { index: usize, dim: usize },
    #[error("coupler needs two distinct modes, got ({0}, {0})")]
    SameModes(usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("matrix must have at least 2 modes, got {0}")]
    TooFewModes(usize),
    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),
    #[error("reflectivity {0} outside [0, 1]")]
    InvalidReflectivity(f64),
    #[error("noise level {0} outside [0, 1]")]
    NoiseLevelOutOfRange(f64),
    #[error("non-finite value: {0}")]
    NonFinite(&'static str),
    #[error("post-selection success probability {0:e} below threshold")]
    DegeneratePostSelection(f64),
    #[error("outcome probabilities not normalized (sum {0})")]
    Unnormalized(f64),
    #[error("zero total counts in basis {0}")]
    ZeroCounts(&'static str),
    #[error("singular extrapolation: noise levels coincide ({0})")]
    SingularExtrapolation(f64),
    #[error("invalid noise levels: {0}")]
    InvalidNoiseLevels(String),
    #[error("invalid optimizer configuration: {0}")]
    InvalidSpsaConfig(String),
    #[error("cannot restart from an empty trace")]
    EmptyTrace,
    #[error("invalid shot scale {0}")]
    InvalidShotScale(f64),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
