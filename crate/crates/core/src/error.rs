use thiserror::Error;

/// Failures reported by the laboratory's numerical modules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension n = {0}: at least 2 is required")]
    InvalidDimension(u32),

    #[error("invalid exponent {name} = {value}: must be > 1")]
    InvalidExponent { name: &'static str, value: f64 },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid quadrature: {0}")]
    InvalidQuadrature(String),

    #[error("unsupported derivative order {requested} (cutoff supports up to {supported})")]
    UnsupportedOrder { requested: u8, supported: u8 },

    #[error("unsupported dimension n = {0} for this operation")]
    UnsupportedDimension(u32),

    #[error("initial data is identically zero")]
    TrivialData,

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("test function does not vanish by the end of the run: {0}")]
    Support(String),

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("sweep failed: {0}")]
    SweepFailed(String),

    #[error("sweeps are not comparable: {0}")]
    IncomparableSweeps(String),

    #[error("lemma hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
