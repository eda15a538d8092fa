//! Sparse multivariate polynomials with exact coefficients.
//!
//! Used for symmetric powers of free modules, truncated power series in the
//! Čech–Alexander tower and formal group laws.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::scalar::Scalar;

/// Exponent vector.
pub type Monomial = Vec<u32>;

pub fn degree(m: &[u32]) -> u32 {
  m.iter().sum()
}

/// All monomials of total degree `deg` in `nvars` variables, in graded-lex
/// order (larger exponent on earlier variables first).
pub fn monomials_of_degree(nvars: usize, deg: u32) -> Vec<Monomial> {
  let mut out = Vec::new();
  let mut cur = vec![0u32; nvars];
  fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
    if i + 1 == cur.len() {
      cur[i] = left;
      out.push(cur.clone());
      return;
    }
    for e in (0..=left).rev() {
      cur[i] = e;
      rec(i + 1, left - e, cur, out);
    }
    cur[i] = 0;
  }
  if nvars == 0 {
    if deg == 0 {
      out.push(Vec::new());
    }
    return out;
  }
  rec(0, deg, &mut cur, &mut out);
  out
}

/// Binomial coefficient as `u128`; panics on overflow.
pub fn binomial(n: u64, k: u64) -> u128 {
  if k > n {
    return 0;
  }
  let k = k.min(n - k);
  let mut acc: u128 = 1;
  for i in 0..k {
    acc = acc * (n - i) as u128 / (i + 1) as u128;
  }
  acc
}

/// Lookup table from monomial to position in a fixed list.
#[derive(Clone, Debug)]
pub struct MonomialIndex {
  list: Vec<Monomial>,
  pos: HashMap<Monomial, usize>,
}

impl MonomialIndex {
  pub fn new(list: Vec<Monomial>) -> Self {
    let pos = list.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
    MonomialIndex { list, pos }
  }

  pub fn len(&self) -> usize {
    self.list.len()
  }

  pub fn is_empty(&self) -> bool {
    self.list.is_empty()
  }

  pub fn get(&self, m: &[u32]) -> Option<usize> {
    self.pos.get(m).copied()
  }

  pub fn monomial(&self, i: usize) -> &Monomial {
    &self.list[i]
  }

  pub fn monomials(&self) -> &[Monomial] {
    &self.list
  }
}

/// Polynomial in a fixed number of variables.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly<S> {
  nvars: usize,
  terms: BTreeMap<Monomial, S>,
}

impl<S: Scalar> Poly<S> {
  pub fn zero(nvars: usize) -> Self {
    Poly { nvars, terms: BTreeMap::new() }
  }

  pub fn constant(nvars: usize, c: S) -> Self {
    let mut p = Poly::zero(nvars);
    p.add_term(vec![0; nvars], c);
    p
  }

  pub fn one(nvars: usize) -> Self {
    Self::constant(nvars, S::one())
  }

  pub fn var(nvars: usize, i: usize) -> Self {
    let mut m = vec![0; nvars];
    m[i] = 1;
    Self::monomial(m, S::one())
  }

  pub fn monomial(m: Monomial, c: S) -> Self {
    let mut p = Poly::zero(m.len());
    p.add_term(m, c);
    p
  }

  pub fn nvars(&self) -> usize {
    self.nvars
  }

  pub fn is_zero(&self) -> bool {
    self.terms.is_empty()
  }

  pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &S)> {
    self.terms.iter()
  }

  pub fn coeff(&self, m: &[u32]) -> S {
    self.terms.get(m).cloned().unwrap_or_else(S::zero)
  }

  pub fn add_term(&mut self, m: Monomial, c: S) {
    debug_assert_eq!(m.len(), self.nvars);
    if c.is_zero() {
      return;
    }
    match self.terms.get_mut(&m) {
      Some(v) => {
        *v += c;
        if v.is_zero() {
          self.terms.remove(&m);
        }
      }
      None => {
        self.terms.insert(m, c);
      }
    }
  }

  pub fn add(&self, other: &Self) -> Self {
    let mut out = self.clone();
    for (m, c) in &other.terms {
      out.add_term(m.clone(), c.clone());
    }
    out
  }

  pub fn sub(&self, other: &Self) -> Self {
    self.add(&other.scale(&-S::one()))
  }

  pub fn scale(&self, c: &S) -> Self {
    let mut out = Poly::zero(self.nvars);
    for (m, v) in &self.terms {
      out.add_term(m.clone(), c.clone() * v.clone());
    }
    out
  }

  /// Product, dropping monomials rejected by `keep`.
  pub fn mul_truncated(&self, other: &Self, keep: &impl Fn(&[u32]) -> bool) -> Self {
    let mut out = Poly::zero(self.nvars);
    for (a, x) in &self.terms {
      for (b, y) in &other.terms {
        let m: Monomial = a.iter().zip(b).map(|(i, j)| i + j).collect();
        if keep(&m) {
          out.add_term(m, x.clone() * y.clone());
        }
      }
    }
    out
  }

  pub fn mul(&self, other: &Self) -> Self {
    self.mul_truncated(other, &|_| true)
  }

  pub fn pow_truncated(&self, e: u32, keep: &impl Fn(&[u32]) -> bool) -> Self {
    let mut acc = Poly::one(self.nvars);
    for _ in 0..e {
      acc = acc.mul_truncated(self, keep);
    }
    acc
  }

  /// Keep only monomials accepted by `keep`.
  pub fn truncate(&self, keep: &impl Fn(&[u32]) -> bool) -> Self {
    Poly {
      nvars: self.nvars,
      terms: self.terms.iter().filter(|(m, _)| keep(m)).map(|(m, c)| (m.clone(), c.clone())).collect(),
    }
  }

  /// Substitute `images[i]` for variable `i`; all images share a variable count.
  /// Intermediate products are truncated by `keep`, which must describe an ideal
  /// complement (a monomial rejected stays rejected after multiplication).
  pub fn substitute(&self, images: &[Poly<S>], keep: &impl Fn(&[u32]) -> bool) -> Self {
    self.substitute_into(images, images.first().map_or(0, |p| p.nvars), keep)
  }

  /// [`Poly::substitute`] into a ring with `nv` variables (needed when there are no images).
  pub fn substitute_into(&self, images: &[Poly<S>], nv: usize, keep: &impl Fn(&[u32]) -> bool) -> Self {
    assert_eq!(images.len(), self.nvars, "one image per variable");
    assert!(images.iter().all(|p| p.nvars == nv), "images live in the target ring");
    let mut powers: Vec<Vec<Poly<S>>> =
      images.iter().map(|p| vec![Poly::one(nv), p.truncate(keep)]).collect();
    let mut out = Poly::zero(nv);
    for (m, c) in &self.terms {
      let mut term = Poly::constant(nv, c.clone());
      for (i, e) in m.iter().enumerate() {
        if *e == 0 {
          continue;
        }
        while powers[i].len() <= *e as usize {
          let next = powers[i].last().expect("nonempty").mul_truncated(&powers[i][1], keep);
          powers[i].push(next);
        }
        term = term.mul_truncated(&powers[i][*e as usize], keep);
        if term.is_zero() {
          break;
        }
      }
      out = out.add(&term);
    }
    out
  }

  /// Map the coefficients through a ring map.
  pub fn map_coeffs<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Poly<T> {
    let mut out = Poly::zero(self.nvars);
    for (m, c) in &self.terms {
      out.add_term(m.clone(), f(c));
    }
    out
  }

  /// Formal partial derivative.
  pub fn derivative(&self, i: usize) -> Self {
    let mut out = Poly::zero(self.nvars);
    for (m, c) in &self.terms {
      if m[i] > 0 {
        let mut d = m.clone();
        d[i] -= 1;
        out.add_term(d, S::from_i64(m[i] as i64) * c.clone());
      }
    }
    out
  }

  /// Re-embed into `nvars` variables, sending variable `i` to `positions[i]`.
  pub fn embed(&self, nvars: usize, positions: &[usize]) -> Self {
    let mut out = Poly::zero(nvars);
    for (m, c) in &self.terms {
      let mut n = vec![0; nvars];
      for (i, e) in m.iter().enumerate() {
        n[positions[i]] += e;
      }
      out.add_term(n, c.clone());
    }
    out
  }

  pub fn total_degree(&self) -> Option<u32> {
    self.terms.keys().map(|m| degree(m)).max()
  }

  /// Human-readable form with the given variable names, terms in monomial order.
  pub fn render(&self, names: &[String]) -> String {
    if self.terms.is_empty() {
      return "0".into();
    }
    let mut terms: Vec<(&Monomial, &S)> = self.terms.iter().collect();
    terms.sort_by(|(a, _), (b, _)| degree(a).cmp(&degree(b)).then_with(|| b.cmp(a)));
    let mut out = String::new();
    for (k, (m, c)) in terms.into_iter().enumerate() {
      let vars: Vec<String> = m
        .iter()
        .zip(names)
        .filter(|(e, _)| **e > 0)
        .map(|(e, n)| if *e == 1 { n.clone() } else { format!("{n}^{e}") })
        .collect();
      let negated = -c.clone();
      let (negative, c) = if !c.is_one() && (negated.is_one() || c.to_string().starts_with('-')) {
        (true, negated)
      } else {
        (false, c.clone())
      };
      let body = match (vars.is_empty(), c.is_one()) {
        (true, _) => format!("{c}"),
        (false, true) => vars.join("*"),
        (false, false) => format!("{c}*{}", vars.join("*")),
      };
      out.push_str(match (k, negative) {
        (0, false) => "",
        (0, true) => "-",
        (_, false) => " + ",
        (_, true) => " - ",
      });
      out.push_str(&body);
    }
    out
  }
}

impl<S: Scalar> fmt::Debug for Poly<S> {
  fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if self.terms.is_empty() {
      return write!(f, "0");
    }
    let parts: Vec<String> = self.terms.iter().map(|(m, c)| format!("{c}*{m:?}")).collect();
    write!(f, "{}", parts.join(" + "))
  }
}

#[cfg(test)]
mod tests {
  use super::*;
  use crate::scalar::{Integer, Scalar};

  #[test]
  fn monomial_counts() {
    for n in 1..5 {
      for d in 0..5 {
        assert_eq!(monomials_of_degree(n, d).len() as u128, binomial((n as u64) + d as u64 - 1, d as u64));
      }
    }
    assert_eq!(monomials_of_degree(2, 2), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
  }

  #[test]
  fn binomial_expansion_by_substitution() {
    // (x + y)^3 via substituting x ↦ x + y into x^3
    let x3 = Poly::<Integer>::monomial(vec![3], Integer::from(1));
    let xy = Poly::var(2, 0).add(&Poly::var(2, 1));
    let e = x3.substitute(&[xy], &|_| true);
    for k in 0..=3u32 {
      assert_eq!(e.coeff(&[3 - k, k]), Integer::from_i64(binomial(3, k as u64) as i64));
    }
    let t = x3.substitute(&[Poly::var(2, 0).add(&Poly::var(2, 1))], &|m| m[1] < 2);
    assert_eq!(t.coeff(&[1, 2]), Integer::from(0));
    assert_eq!(t.coeff(&[2, 1]), Integer::from(3));
  }
}
