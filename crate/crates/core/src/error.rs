use thiserror::Error;

/// Errors raised by the library. The CLI maps [`Error::is_numerical`]
/// failures to exit code 2 and everything else to exit code 1.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("index structure violation: {0}")]
    StructureViolation(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("zero tangent vector")]
    ZeroVector,
    #[error("unsupported point: {0}")]
    UnsupportedPoint(String),
    #[error("unsupported space: {0}")]
    UnsupportedSpace(String),
    #[error("invalid space: {0}")]
    InvalidSpace(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("dimension too large: {0}")]
    DimensionTooLarge(String),
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),
    #[error("invalid pinch: {0}")]
    InvalidPinch(String),
    #[error("epsilon out of range: {0}")]
    EpsOutOfRange(String),
    #[error("invalid Xi: {0}")]
    InvalidXi(String),
    #[error("alpha outside (x*, pi/2): {0}")]
    AlphaOutOfWindow(f64),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("negative discriminant: {0}")]
    NegativeDiscriminant(f64),
    #[error("matrix is not unimodular: {0}")]
    NotUnimodular(String),
    #[error("invalid flow configuration: {0}")]
    InvalidConfig(String),
    #[error("unstable time step: {0}")]
    UnstableStep(String),
    #[error("flow left the graphical regime: {0}")]
    NonGraphical(String),
    #[error("infeasible (k, l): {0}")]
    InfeasibleKL(String),
    #[error("empty series")]
    EmptySeries,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures of a numerical computation on valid input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::UnstableStep(_) | Error::NonGraphical(_) | Error::NegativeDiscriminant(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
