use thiserror::Error;

use crate::hilbert::Particle;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("direction is not a unit vector (norm {norm})")]
    InvalidDirection { norm: f64 },

    #[error("{what} is not normalized (norm² = {norm_sqr})")]
    NotNormalized { what: &'static str, norm_sqr: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("operator is not Hermitian (max asymmetry {max_err:e})")]
    NotHermitian { max_err: f64 },

    #[error("expectation value has imaginary residue {residue:e}")]
    ImaginaryExpectation { residue: f64 },

    #[error("reference basis is not orthonormal (max deviation {max_err:e})")]
    BasisNotOrthonormal { max_err: f64 },

    #[error("label {label} (index {eta_index}) has overlap {overlap:e} with the state; the c-valued spin is undefined there")]
    ZeroSupport {
        eta_index: usize,
        label: String,
        overlap: f64,
    },

    #[error("invalid basis label index {0}")]
    InvalidEtaIndex(usize),

    #[error("invalid ξ distribution: {0}")]
    InvalidXiDistribution(String),

    #[error("invalid game configuration: {0}")]
    InvalidConfig(String),

    #[error("pair {pair_index} has no valid rounds in the transcript")]
    InsufficientData { pair_index: usize },

    #[error("no menu direction reproduces s̃ = {s_tilde} for particle {particle}")]
    InferenceFailure { particle: Particle, s_tilde: f64 },

    #[error(
        "s̃ = {s_tilde} is matched by several menu slots {candidates:?} for particle {particle}"
    )]
    AmbiguousInference {
        particle: Particle,
        s_tilde: f64,
        candidates: Vec<usize>,
    },

    #[error("protocol violation: {0}")]
    ProtocolViolation(String),

    #[error("particle {0} was already measured in this round")]
    DoubleMeasurement(Particle),

    #[error("no table entry for slot {slot}, eta {eta_index}, xi index {xi_index}")]
    UnknownTableKey {
        slot: usize,
        eta_index: usize,
        xi_index: usize,
    },

    #[error("hidden support of {size} values exceeds the search cap of {cap}")]
    HiddenSupportTooLarge { size: usize, cap: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("linear program failed: {0}")]
    Optimization(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("serialization error: {0}")]
    Serialization(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
