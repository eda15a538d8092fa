//! Coefficient rings.
//!
//! Every matrix, complex and pipeline in the crate is generic over a [`Scalar`].
//! Three families implement it: the integers ([`Integer`]), the rationals
//! ([`Rational`]) and the prime fields [`Fp<P>`]. The runtime descriptor
//! [`Coefficients`] names a ring; [`with_scalar!`](crate::with_scalar) turns a
//! descriptor into a concrete type.

use std::fmt;
use std::hash::Hash;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactlin::{self, CohomologyGroup, SparseMat, SparseVec};

pub type Integer = BigInt;
pub type Rational = BigRational;

/// Descriptor of a base ring.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Coefficients {
  Integers,
  Rationals,
  PrimeField(u64),
  /// Polynomial ring over a non-polynomial base; supports bookkeeping only.
  Polynomial {
    base: Box<Coefficients>,
    variables: Vec<String>,
  },
}

impl Coefficients {
  pub fn prime_field(p: u64) -> Result<Self> {
    if is_prime(p) {
      Ok(Coefficients::PrimeField(p))
    } else {
      Err(Error::NotPrime(p))
    }
  }

  pub fn polynomial(base: Coefficients, variables: Vec<String>) -> Result<Self> {
    if matches!(base, Coefficients::Polynomial { .. }) {
      return Err(Error::NestedPolynomial);
    }
    for (i, v) in variables.iter().enumerate() {
      if v.is_empty() || variables[..i].contains(v) {
        return Err(Error::Parse(format!("bad variable list {variables:?}")));
      }
    }
    Ok(Coefficients::Polynomial { base: Box::new(base), variables })
  }

  pub fn is_field(&self) -> bool {
    matches!(self, Coefficients::Rationals | Coefficients::PrimeField(_))
  }

  pub fn characteristic(&self) -> u64 {
    match self {
      Coefficients::Integers | Coefficients::Rationals => 0,
      Coefficients::PrimeField(p) => *p,
      Coefficients::Polynomial { base, .. } => base.characteristic(),
    }
  }

  /// Linear algebra (rank, kernels, cohomology) is available over ℤ, ℚ and 𝔽_p only.
  pub fn check_linear_algebra(&self) -> Result<()> {
    match self {
      Coefficients::Polynomial { .. } => Err(Error::UnsupportedRing(self.to_string())),
      Coefficients::PrimeField(p) if !is_prime(*p) => Err(Error::NotPrime(*p)),
      _ => Ok(()),
    }
  }
}

impl fmt::Display for Coefficients {
  fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match self {
      Coefficients::Integers => write!(f, "Z"),
      Coefficients::Rationals => write!(f, "Q"),
      Coefficients::PrimeField(p) => write!(f, "F{p}"),
      Coefficients::Polynomial { base, variables } => write!(f, "{base}[{}]", variables.join(",")),
    }
  }
}

pub fn is_prime(p: u64) -> bool {
  if p < 2 {
    return false;
  }
  let mut d = 2u64;
  while d * d <= p {
    if p.is_multiple_of(d) {
      return false;
    }
    d += 1;
  }
  true
}

/// Exact coefficient ring.
///
/// The linear-algebra hooks are associated functions so that the integer
/// implementation can route through Smith normal form while fields use
/// Gaussian elimination.
pub trait Scalar:
  Clone
  + fmt::Debug
  + fmt::Display
  + PartialEq
  + Eq
  + Hash
  + Zero
  + One
  + Add<Output = Self>
  + Sub<Output = Self>
  + Mul<Output = Self>
  + Neg<Output = Self>
  + AddAssign
  + Send
  + Sync
  + 'static
{
  fn coefficients() -> Coefficients;
  fn from_i64(n: i64) -> Self;
  fn from_integer(n: &BigInt) -> Self;
  fn try_inverse(&self) -> Option<Self>;
  /// The element as an integer, when it is one.
  fn as_integer(&self) -> Option<BigInt>;

  fn is_unit(&self) -> bool {
    self.try_inverse().is_some()
  }

  fn rank(m: &SparseMat<Self>) -> usize;
  fn kernel_basis(m: &SparseMat<Self>) -> Vec<SparseVec<Self>>;
  /// Some `x` with `m·x = b`, or `None` when the system has no solution in the ring.
  fn solve(m: &SparseMat<Self>, b: &SparseVec<Self>) -> Option<SparseVec<Self>>;
  /// `X` with `m·X = b`, one column at a time.
  fn solve_columns(m: &SparseMat<Self>, b: &SparseMat<Self>) -> Option<SparseMat<Self>> {
    let cols = b.columns().iter().map(|c| Self::solve(m, c)).collect::<Option<Vec<_>>>()?;
    Some(SparseMat::from_columns(m.cols(), cols))
  }
  /// `ker(d_out) / im(d_in)`.
  fn subquotient(d_in: &SparseMat<Self>, d_out: &SparseMat<Self>) -> Result<CohomologyGroup>;
  /// For `m: S^k → S^n`, a projection `P: S^n → S^c` with kernel `im(m)` and a
  /// section `T` with `P·T = 1`, when the cokernel is free.
  fn cokernel(m: &SparseMat<Self>) -> Option<(SparseMat<Self>, SparseMat<Self>)>;
}

/// Scalars in which every nonzero element is invertible.
pub trait Field: Scalar + Div<Output = Self> {
  fn inverse(&self) -> Self {
    self.try_inverse().expect("division by zero in a field")
  }
}

impl Scalar for BigInt {
  fn coefficients() -> Coefficients {
    Coefficients::Integers
  }
  fn from_i64(n: i64) -> Self {
    BigInt::from(n)
  }
  fn from_integer(n: &BigInt) -> Self {
    n.clone()
  }
  fn try_inverse(&self) -> Option<Self> {
    if self.abs().is_one() {
      Some(self.clone())
    } else {
      None
    }
  }
  fn as_integer(&self) -> Option<BigInt> {
    Some(self.clone())
  }
  fn rank(m: &SparseMat<Self>) -> usize {
    exactlin::integer::rank(m)
  }
  fn kernel_basis(m: &SparseMat<Self>) -> Vec<SparseVec<Self>> {
    exactlin::integer::kernel_basis(m)
  }
  fn solve(m: &SparseMat<Self>, b: &SparseVec<Self>) -> Option<SparseVec<Self>> {
    exactlin::integer::solve(m, b)
  }
  fn solve_columns(m: &SparseMat<Self>, b: &SparseMat<Self>) -> Option<SparseMat<Self>> {
    exactlin::integer::solve_columns(m, b)
  }
  fn subquotient(d_in: &SparseMat<Self>, d_out: &SparseMat<Self>) -> Result<CohomologyGroup> {
    exactlin::integer::subquotient(d_in, d_out)
  }
  fn cokernel(m: &SparseMat<Self>) -> Option<(SparseMat<Self>, SparseMat<Self>)> {
    exactlin::integer::cokernel(m)
  }
}

impl Scalar for BigRational {
  fn coefficients() -> Coefficients {
    Coefficients::Rationals
  }
  fn from_i64(n: i64) -> Self {
    BigRational::from_integer(BigInt::from(n))
  }
  fn from_integer(n: &BigInt) -> Self {
    BigRational::from_integer(n.clone())
  }
  fn try_inverse(&self) -> Option<Self> {
    if self.is_zero() {
      None
    } else {
      Some(self.recip())
    }
  }
  fn as_integer(&self) -> Option<BigInt> {
    if self.is_integer() {
      Some(self.to_integer())
    } else {
      None
    }
  }
  fn rank(m: &SparseMat<Self>) -> usize {
    exactlin::field::rank(m)
  }
  fn kernel_basis(m: &SparseMat<Self>) -> Vec<SparseVec<Self>> {
    exactlin::field::kernel_basis(m)
  }
  fn solve(m: &SparseMat<Self>, b: &SparseVec<Self>) -> Option<SparseVec<Self>> {
    exactlin::field::solve(m, b)
  }
  fn subquotient(d_in: &SparseMat<Self>, d_out: &SparseMat<Self>) -> Result<CohomologyGroup> {
    exactlin::field::subquotient(d_in, d_out)
  }
  fn cokernel(m: &SparseMat<Self>) -> Option<(SparseMat<Self>, SparseMat<Self>)> {
    exactlin::field::cokernel(m)
  }
}

impl Field for BigRational {}

/// Element of the prime field 𝔽_P, stored as its least nonnegative residue.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Fp<const P: u64>(u64);

impl<const P: u64> Fp<P> {
  const PRIME_CHECK: () = assert!(P >= 2 && const_is_prime(P), "Fp modulus must be prime");

  pub fn new(v: u64) -> Self {
    #[allow(clippy::let_unit_value)]
    let _ = Self::PRIME_CHECK;
    Fp(v % P)
  }

  pub fn value(self) -> u64 {
    self.0
  }

  pub fn pow(self, mut e: u64) -> Self {
    let mut base = self;
    let mut acc = Fp::new(1);
    while e > 0 {
      if e & 1 == 1 {
        acc = acc * base;
      }
      base = base * base;
      e >>= 1;
    }
    acc
  }
}

const fn const_is_prime(p: u64) -> bool {
  if p < 2 {
    return false;
  }
  let mut d = 2u64;
  while d * d <= p {
    if p.is_multiple_of(d) {
      return false;
    }
    d += 1;
  }
  true
}

impl<const P: u64> fmt::Debug for Fp<P> {
  fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    write!(f, "{} (mod {P})", self.0)
  }
}

impl<const P: u64> fmt::Display for Fp<P> {
  fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    write!(f, "{}", self.0)
  }
}

impl<const P: u64> Add for Fp<P> {
  type Output = Self;
  fn add(self, rhs: Self) -> Self {
    Fp(((self.0 as u128 + rhs.0 as u128) % P as u128) as u64)
  }
}

impl<const P: u64> AddAssign for Fp<P> {
  fn add_assign(&mut self, rhs: Self) {
    *self = *self + rhs;
  }
}

impl<const P: u64> Sub for Fp<P> {
  type Output = Self;
  fn sub(self, rhs: Self) -> Self {
    self + (-rhs)
  }
}

impl<const P: u64> Neg for Fp<P> {
  type Output = Self;
  fn neg(self) -> Self {
    if self.0 == 0 {
      self
    } else {
      Fp(P - self.0)
    }
  }
}

impl<const P: u64> Mul for Fp<P> {
  type Output = Self;
  fn mul(self, rhs: Self) -> Self {
    Fp(((self.0 as u128 * rhs.0 as u128) % P as u128) as u64)
  }
}

impl<const P: u64> Div for Fp<P> {
  type Output = Self;
  #[allow(clippy::suspicious_arithmetic_impl)]
  fn div(self, rhs: Self) -> Self {
    self * rhs.inverse()
  }
}

impl<const P: u64> Zero for Fp<P> {
  fn zero() -> Self {
    Fp(0)
  }
  fn is_zero(&self) -> bool {
    self.0 == 0
  }
}

impl<const P: u64> One for Fp<P> {
  fn one() -> Self {
    Fp::new(1)
  }
}

impl<const P: u64> Scalar for Fp<P> {
  fn coefficients() -> Coefficients {
    Coefficients::PrimeField(P)
  }
  fn from_i64(n: i64) -> Self {
    Fp::new(n.rem_euclid(P as i64) as u64)
  }
  fn from_integer(n: &BigInt) -> Self {
    let r = n.mod_floor_u64(P);
    Fp::new(r)
  }
  fn try_inverse(&self) -> Option<Self> {
    if self.0 == 0 {
      None
    } else {
      Some(self.pow(P - 2))
    }
  }
  fn as_integer(&self) -> Option<BigInt> {
    None
  }
  fn rank(m: &SparseMat<Self>) -> usize {
    exactlin::field::rank(m)
  }
  fn kernel_basis(m: &SparseMat<Self>) -> Vec<SparseVec<Self>> {
    exactlin::field::kernel_basis(m)
  }
  fn solve(m: &SparseMat<Self>, b: &SparseVec<Self>) -> Option<SparseVec<Self>> {
    exactlin::field::solve(m, b)
  }
  fn subquotient(d_in: &SparseMat<Self>, d_out: &SparseMat<Self>) -> Result<CohomologyGroup> {
    exactlin::field::subquotient(d_in, d_out)
  }
  fn cokernel(m: &SparseMat<Self>) -> Option<(SparseMat<Self>, SparseMat<Self>)> {
    exactlin::field::cokernel(m)
  }
}

impl<const P: u64> Field for Fp<P> {}

trait ModFloorU64 {
  fn mod_floor_u64(&self, p: u64) -> u64;
}

impl ModFloorU64 for BigInt {
  fn mod_floor_u64(&self, p: u64) -> u64 {
    let m = BigInt::from(p);
    let r = ((self % &m) + &m) % &m;
    r.to_u64().expect("residue fits in u64")
  }
}

/// Primes for which [`with_scalar!`](crate::with_scalar) has a monomorphized field.
pub const DISPATCH_PRIMES: [u64; 25] =
  [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97];

/// Run a generic body with `$S` bound to the scalar type named by a [`Coefficients`] value.
///
/// Evaluates to `Result<T>`; polynomial rings and primes outside
/// [`DISPATCH_PRIMES`] produce an error.
#[macro_export]
macro_rules! with_scalar {
  ($coeffs:expr, $S:ident => $body:expr) => {{
    match $coeffs {
      $crate::Coefficients::Integers => {
        #[allow(dead_code)]
        type $S = $crate::Integer;
        Ok($body)
      }
      $crate::Coefficients::Rationals => {
        #[allow(dead_code)]
        type $S = $crate::Rational;
        Ok($body)
      }
      $crate::Coefficients::PrimeField(p) => {
        $crate::__with_prime!(*p, $S => $body;
          2 3 5 7 11 13 17 19 23 29 31 37 41 43 47 53 59 61 67 71 73 79 83 89 97)
      }
      c @ $crate::Coefficients::Polynomial { .. } => Err($crate::Error::UnsupportedRing(c.to_string())),
    }
  }};
}

#[doc(hidden)]
#[macro_export]
macro_rules! __with_prime {
  ($p:expr, $S:ident => $body:expr; $($q:literal)*) => {{
    match $p {
      $(
        $q => {
          #[allow(dead_code)]
          type $S = $crate::Fp<$q>;
          Ok($body)
        }
      )*
      other => Err($crate::Error::UnsupportedPrime(other)),
    }
  }};
}

#[cfg(test)]
mod tests {
  use super::*;

  #[test]
  fn fp_arithmetic() {
    type F7 = Fp<7>;
    let a = F7::new(3);
    let b = F7::new(5);
    assert_eq!((a + b).value(), 1);
    assert_eq!((a - b).value(), 5);
    assert_eq!((a * b).value(), 1);
    assert_eq!((a / b) * b, a);
    assert_eq!(F7::from_i64(-1).value(), 6);
    assert_eq!(F7::from_integer(&BigInt::from(-15)).value(), 6);
    assert!(F7::zero().try_inverse().is_none());
  }

  #[test]
  fn integer_units() {
    assert!(BigInt::from(-1).is_unit());
    assert!(!BigInt::from(2).is_unit());
  }

  #[test]
  fn descriptor_validation() {
    assert!(Coefficients::prime_field(4).is_err());
    assert_eq!(Coefficients::prime_field(5).unwrap(), Coefficients::PrimeField(5));
    let poly = Coefficients::polynomial(Coefficients::Rationals, vec!["x".into(), "y".into()]).unwrap();
    assert_eq!(poly.to_string(), "Q[x,y]");
    assert!(Coefficients::polynomial(poly.clone(), vec!["z".into()]).is_err());
    assert!(poly.check_linear_algebra().is_err());
    assert_eq!(poly.characteristic(), 0);
  }

  #[test]
  fn dispatch() {
    let r: Result<Coefficients> = with_scalar!(&Coefficients::PrimeField(13), S => S::coefficients());
    assert_eq!(r.unwrap(), Coefficients::PrimeField(13));
    let r: Result<Coefficients> = with_scalar!(&Coefficients::PrimeField(101), S => S::coefficients());
    assert!(matches!(r, Err(Error::UnsupportedPrime(101))));
    let poly = Coefficients::polynomial(Coefficients::Integers, vec!["x".into()]).unwrap();
    let r: Result<Coefficients> = with_scalar!(&poly, S => S::coefficients());
    assert!(matches!(r, Err(Error::UnsupportedRing(_))));
  }
}
