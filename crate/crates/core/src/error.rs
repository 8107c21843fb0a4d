use num_bigint::BigUint;
use thiserror::Error;

/// Errors raised by the solver toolkit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{base} is not coprime to {modulus}; use a power track instead")]
    NotCoprime { base: u64, modulus: u64 },

    #[error("{0} is not a prime power")]
    NotPrimePower(u64),

    #[error("modulus must be at least {min}, got {got}")]
    ModulusTooSmall { min: u64, got: u64 },

    #[error("invalid smoothness spec: {0}")]
    InvalidSmoothness(String),

    #[error("sieve pool exhausted before reaching the target; largest achievable n = {largest}")]
    PoolExhausted { largest: BigUint },

    #[error("invalid equation: {0}")]
    InvalidEquation(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("variable `{var}` occurs in {occurrences} terms, expected exactly one")]
    VariableNotInOneTerm { var: String, occurrences: usize },

    #[error("assignment is missing variable `{0}`")]
    PartialAssignment(String),

    #[error("invalid residue for `{var}`: need 0 <= {residue} < {order}")]
    InvalidResidue { var: String, residue: u64, order: u64 },

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("working set of {size} exceeds the ceiling of {ceiling}")]
    ResourceLimit { size: u128, ceiling: u128 },

    #[error("invalid region step: {0}")]
    InvalidRegion(String),

    #[error("prime-power factor {0} is too large for the congruence engine")]
    FactorTooLarge(String),
}

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse { line, column, message: message.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
