use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
  #[error("{0} is not prime")]
  NotPrime(u64),
  #[error("polynomial coefficient rings cannot be nested")]
  NestedPolynomial,
  #[error("linear algebra is not supported over {0}")]
  UnsupportedRing(String),
  #[error("no field monomorphization for p = {0}")]
  UnsupportedPrime(u64),
  #[error("coefficient ring mismatch: expected {expected}, found {found}")]
  RingMismatch { expected: String, found: String },
  #[error("shape mismatch: {0}")]
  Shape(String),
  #[error("composite of consecutive maps is nonzero: {0}")]
  NotComposable(String),
  #[error("smith normal form requires integer coefficients, got {0}")]
  NotIntegers(String),
  #[error("invariant violated: {0}")]
  Invariant(String),
  #[error("degree {degree} outside the admissible range {range}")]
  DegreeOutOfRange { degree: i64, range: String },
  #[error("truncation too small: {0}")]
  InsufficientTruncation(String),
  #[error("truncation is unsound: {0}")]
  UnsoundTruncation(String),
  #[error("wrong mixed-structure flag: expected {expected}")]
  WrongFlag { expected: &'static str },
  #[error("unbounded input: {0}")]
  Unbounded(String),
  #[error("window mismatch: {0}")]
  WindowMismatch(String),
  #[error("unsupported comparison: {0}")]
  UnsupportedComparison(String),
  #[error("parse error: {0}")]
  Parse(String),
  #[error("bad parameters: {0}")]
  BadParameters(String),
  #[error("foliation is not smooth: {0}")]
  NotSmooth(String),
  #[error("groupoid axiom failed: {0}")]
  GroupoidAxiom(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
