use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("zero input: {0}")]
    Zero(&'static str),
    #[error("invalid lift: {0}")]
    InvalidLift(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("not a morphism: the maximal minors of the Sylvester-Macaulay matrix have gcd 0")]
    NotMorphism,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("not an endomorphism (m = {m}, M = {codomain})")]
    NotEndomorphism { m: usize, codomain: usize },
    #[error("cannot factor: cofactor {0} is beyond the supported range")]
    FactorTooLarge(String),
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
