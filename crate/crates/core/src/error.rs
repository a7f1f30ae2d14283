use std::fmt;

use thiserror::Error;

use crate::rational::ParseRationalError;

/// A violated mathematical precondition of a statistic. These are distinct
/// from malformed input: the input parsed fine but the quantity is undefined
/// (or the claim does not apply) for it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Precondition {
    EmptySet,
    ZeroInMultiplicativeSet,
    ZeroDilation,
    ZeroFiberScalar,
    ZeroIterationCount,
    NotPrime(u64),
    ModulusMismatch(u64, u64),
    NotDivisor { d: u64, p: u64 },
    OrderTooSmall { k: u32, min: u32 },
    EmptyCandidates,
    Other(String),
}

impl fmt::Display for Precondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precondition::EmptySet => write!(f, "input sets must be non-empty"),
            Precondition::ZeroInMultiplicativeSet => {
                write!(f, "0 ∉ A is required for multiplicative statistics")
            }
            Precondition::ZeroDilation => write!(f, "dilation factor u must be non-zero"),
            Precondition::ZeroFiberScalar => write!(f, "fiber scalar λ must be non-zero"),
            Precondition::ZeroIterationCount => write!(f, "k ≥ 1 is required for kA"),
            Precondition::NotPrime(p) => write!(f, "modulus {p} is not prime"),
            Precondition::ModulusMismatch(p, q) => write!(f, "sets live in different fields F_{p} and F_{q}"),
            Precondition::NotDivisor { d, p } => write!(f, "subgroup order {d} does not divide p − 1 = {}", p - 1),
            Precondition::OrderTooSmall { k, min } => write!(f, "order k = {k} is below the minimum {min}"),
            Precondition::EmptyCandidates => write!(f, "candidate family for M(A) must be non-empty"),
            Precondition::Other(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("precondition violated: {0}")]
    Precondition(Precondition),
    #[error("budget exceeded: {what} needs {needed}, limit {limit}")]
    Budget { what: String, needed: u128, limit: u128 },
    #[error("invalid argument: {0}")]
    Invalid(String),
}

impl From<ParseRationalError> for Error {
    fn from(e: ParseRationalError) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<Precondition> for Error {
    fn from(p: Precondition) -> Self {
        Error::Precondition(p)
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn budget(what: impl Into<String>, needed: u128, limit: u128) -> Result<()> {
    if needed > limit {
        Err(Error::Budget { what: what.into(), needed, limit })
    } else {
        Ok(())
    }
}
