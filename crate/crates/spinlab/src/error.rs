//! Error type shared by every module of the crate.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Every failure mode reported by the library and the command-line driver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A matrix that must be Hermitian failed the symmetry check.
    #[error("matrix is not Hermitian (max |M - M^dagger| = {deviation:e})")]
    NonHermitianInput { deviation: f64 },

    /// Operand dimensions do not agree.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// Subsystem dimensions or indices are inconsistent with the matrix.
    #[error("bad subsystem specification: {0}")]
    BadSubsystemSpec(String),

    /// A matrix violates a density-matrix invariant.
    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    /// A state vector violates the normalization invariant.
    #[error("invalid state vector: {0}")]
    InvalidState(String),

    /// A scalar argument lies outside its admissible interval.
    #[error("value {value} outside [{min}, {max}]")]
    OutOfRange { value: f64, min: f64, max: f64 },

    /// The partial transpose is positive, so no witness of projector form exists.
    #[error("partial transpose has no negative eigenvalue (state is PPT)")]
    NoNegativeEigenvalue,

    /// Witness family coefficients do not satisfy a^2 + b^2 = 1.
    #[error("coefficients not normalized: a^2 + b^2 = {0}")]
    NotNormalized(f64),

    /// The operation is only defined for one of the protocol's initial states.
    #[error("operation requires initial state {required}")]
    WrongInitialState { required: &'static str },

    /// The closed form does not apply to the requested parameters.
    #[error("wrong regime: {0}")]
    WrongRegime(String),

    /// The requested oracle problem exceeds the supported size.
    #[error("problem too large: {0}")]
    TooLarge(String),

    /// An index argument is outside its valid range.
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    /// The central momentum cannot propagate through the field region.
    #[error("evanescent regime: k0^2 = {k0_sq} does not exceed 2 B_z = {two_b}")]
    EvanescentRegime { k0_sq: f64, two_b: f64 },

    /// A chain specification is malformed.
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    /// The requested geometry has no analytic spectrum.
    #[error("no closed-form spectrum for {0}")]
    NoClosedForm(String),

    /// The operation needs a different chain geometry.
    #[error("wrong geometry: {0}")]
    WrongGeometry(String),

    /// Non-uniform chain parameters do not partition the chain.
    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    /// A command-line or config-file parameter is missing or malformed.
    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },

    /// A module error raised while running a named experiment.
    #[error("{experiment}: {source}")]
    Experiment {
        experiment: String,
        source: Box<Error>,
    },

    /// Writing an output artifact failed.
    #[error("I/O error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
