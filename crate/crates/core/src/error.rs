use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("precision must be at least 1")]
    ZeroPrecision,

    #[error("zero has no unit part")]
    ZeroInput,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows} rows, row of length {cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("invalid divisor profile: {0}")]
    InvalidProfile(String),

    #[error("sublattice has infinite index (zero elementary divisor)")]
    InfiniteIndex,

    #[error("elementary divisor {0} is not a power of the prime")]
    ForeignDivisor(String),

    #[error("elementary divisor exponent {exponent} exceeds level {level}")]
    ExponentAboveLevel { exponent: u32, level: u32 },

    #[error("value {value} out of range: {what}")]
    OutOfRange { what: &'static str, value: i64 },

    #[error("no segment of slope {0} in the Newton polygon")]
    SlopeAbsent(String),

    #[error("slope {slope} has multiplicity {length}, expected a simple slope")]
    SlopeNotSimple { slope: String, length: usize },

    #[error("no unit root modulo p of the rescaled polynomial")]
    NoUnitRoot,

    #[error("residual root is not simple modulo p")]
    RootNotSimple,

    #[error("no kernel vector with a unit coordinate at precision {0}")]
    NoUnitEigenvector(u32),

    #[error("vector has no coordinate that is a unit mod p")]
    NotPrimitive,

    #[error("vector is not an eigenvector mod p^{precision}: coordinate {coordinate} disagrees")]
    InconsistentEigenvalue { coordinate: usize, precision: u32 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
