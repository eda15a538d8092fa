//! Čech–Alexander towers of polynomial algebras, algebraic de Rham complexes
//! and the graded comparison of the tower with symmetric powers of `Ω¹`.
//!
//! Level `n` of the tower is the completion of `A^{⊗(n+1)}` along the
//! diagonal, written `A[[ξ⁽¹⁾, …, ξ⁽ⁿ⁾]]` where `ξ⁽ᵏ⁾ = x⁽ᵏ⁾ - x⁽⁰⁾`. All maps
//! preserve the total degree in `(x, ξ)`, so truncating at total degree `≤ D`
//! keeps a direct summand; the ξ-adic precision cuts `ξ`-degree `< prec`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::complexes::{CochainComplex, CohomologyBasis, CohomologyTable, QisVerdict};
use crate::error::{Error, Result};
use crate::exactlin::{SparseMat, SparseVec};
use crate::graded_mixed::{tate_realization, Flag, GradedComplex, MixedComplex};
use crate::poly::{degree, monomials_of_degree, Monomial, MonomialIndex, Poly};
use crate::scalar::{Coefficients, Scalar};
use crate::simplicial::{sym_power_matrix, ConormalizedCochains, CosimplicialModule, Monotone};

/// Base ring named by the algebra grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BaseRing {
  Z,
  Q,
  Fp,
}

/// Parsed algebra description such as `Q[x,y]`, `Z[x]` or `Fp[x]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraSpec {
  pub base: BaseRing,
  pub vars: Vec<String>,
}

impl AlgebraSpec {
  pub fn parse(s: &str) -> Result<Self> {
    let s = s.trim();
    let open = s.find('[').ok_or_else(|| Error::Parse(format!("missing '[' in {s:?}")))?;
    if !s.ends_with(']') {
      return Err(Error::Parse(format!("missing ']' in {s:?}")));
    }
    let base = match &s[..open] {
      "Z" => BaseRing::Z,
      "Q" => BaseRing::Q,
      "Fp" => BaseRing::Fp,
      other => return Err(Error::Parse(format!("unknown base ring {other:?}"))),
    };
    let inner = &s[open + 1..s.len() - 1];
    let vars: Vec<String> = if inner.trim().is_empty() {
      Vec::new()
    } else {
      inner.split(',').map(|v| v.trim().to_string()).collect()
    };
    for (i, v) in vars.iter().enumerate() {
      let ok = v.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
        && v.chars().all(|c| c.is_alphanumeric() || c == '_');
      if !ok {
        return Err(Error::Parse(format!("bad variable name {v:?}")));
      }
      if vars[..i].contains(v) {
        return Err(Error::Parse(format!("repeated variable {v:?}")));
      }
    }
    Ok(AlgebraSpec { base, vars })
  }

  pub fn coefficients(&self, p: Option<u64>) -> Result<Coefficients> {
    match (self.base, p) {
      (BaseRing::Z, None) => Ok(Coefficients::Integers),
      (BaseRing::Q, None) => Ok(Coefficients::Rationals),
      (BaseRing::Fp, Some(p)) => Coefficients::prime_field(p),
      (BaseRing::Fp, None) => Err(Error::Parse("Fp needs a prime".into())),
      (_, Some(_)) => Err(Error::Parse("a prime is only meaningful for Fp".into())),
    }
  }
}

/// `k[x₁, …, x_d]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmoothAffine {
  pub vars: Vec<String>,
}

impl SmoothAffine {
  pub fn new(vars: &[&str]) -> Self {
    SmoothAffine { vars: vars.iter().map(|v| v.to_string()).collect() }
  }

  pub fn point() -> Self {
    SmoothAffine { vars: Vec::new() }
  }

  pub fn dim(&self) -> usize {
    self.vars.len()
  }
}

/// `A[ξ₁..ξ_m]` truncated at total degree `≤ bound` and `ξ`-degree `< prec`.
#[derive(Clone, Debug)]
pub struct AdicAlgebra {
  pub nx: usize,
  pub nxi: usize,
  pub prec: u32,
  pub bound: u32,
  index: MonomialIndex,
}

impl AdicAlgebra {
  pub fn new(nx: usize, nxi: usize, prec: u32, bound: u32) -> Self {
    let mut list = Vec::new();
    for t in 0..=bound {
      list.extend(monomials_of_degree(nx + nxi, t).into_iter().filter(|m| degree(&m[nx..]) < prec));
    }
    AdicAlgebra { nx, nxi, prec, bound, index: MonomialIndex::new(list) }
  }

  pub fn nvars(&self) -> usize {
    self.nx + self.nxi
  }

  pub fn rank(&self) -> usize {
    self.index.len()
  }

  pub fn basis(&self) -> &[Monomial] {
    self.index.monomials()
  }

  pub fn keep(&self, m: &[u32]) -> bool {
    degree(m) <= self.bound && degree(&m[self.nx..]) < self.prec
  }

  pub fn xi_degree(&self, m: &[u32]) -> u32 {
    degree(&m[self.nx..])
  }

  pub fn vector<S: Scalar>(&self, p: &Poly<S>) -> SparseVec<S> {
    let mut v: SparseVec<S> = p
      .terms()
      .filter(|(m, _)| self.keep(m))
      .map(|(m, c)| (self.index.get(m).expect("kept monomial"), c.clone()))
      .collect();
    v.sort_by_key(|(i, _)| *i);
    v
  }

  pub fn poly<S: Scalar>(&self, v: &SparseVec<S>) -> Poly<S> {
    let mut p = Poly::zero(self.nvars());
    for (i, c) in v {
      p.add_term(self.index.monomial(*i).clone(), c.clone());
    }
    p
  }

  pub fn mul<S: Scalar>(&self, a: &Poly<S>, b: &Poly<S>) -> Poly<S> {
    a.mul_truncated(b, &|m| self.keep(m))
  }

  /// Matrix of the algebra map sending variable `i` to `images[i]` (in `target`).
  pub fn map_matrix<S: Scalar>(&self, target: &AdicAlgebra, images: &[Poly<S>]) -> SparseMat<S> {
    let keep = |m: &[u32]| target.keep(m);
    let columns = self
      .basis()
      .iter()
      .map(|m| {
        target.vector(&Poly::monomial(m.clone(), S::one()).substitute_into(images, target.nvars(), &keep))
      })
      .collect();
    SparseMat::from_columns(target.rank(), columns)
  }
}

/// Čech–Alexander tower truncated at level `levels`.
#[derive(Clone, Debug)]
pub struct CechAlexanderTower<S> {
  pub algebra: SmoothAffine,
  pub levels: Vec<AdicAlgebra>,
  pub module: CosimplicialModule<S>,
  pub prec: u32,
  pub bound: u32,
}

/// Images of the generators of level `m` under `θ : [m] → [n]`, as polynomials
/// on level `n`: `x⁽ʲ⁾ ↦ x⁽θ(j)⁾`.
pub fn structure_images<S: Scalar>(d: usize, theta: &Monotone) -> Vec<Poly<S>> {
  let (m, n) = (theta.source(), theta.target);
  let nv = d * (n + 1);
  // coordinate v of factor j on level n: x_v + ξ⁽ʲ⁾_v (with ξ⁽⁰⁾ = 0)
  let factor = |j: usize, v: usize| {
    let mut p = Poly::var(nv, v);
    if j > 0 {
      p = p.add(&Poly::var(nv, d * j + v));
    }
    p
  };
  let mut out = Vec::with_capacity(d * (m + 1));
  for v in 0..d {
    out.push(factor(theta.values[0], v));
  }
  for k in 1..=m {
    for v in 0..d {
      out.push(factor(theta.values[k], v).sub(&factor(theta.values[0], v)));
    }
  }
  out
}

pub fn cech_alexander<S: Scalar>(
  x: &SmoothAffine,
  levels: usize,
  prec: u32,
  bound: u32,
) -> Result<CechAlexanderTower<S>> {
  if prec < 2 || levels < 1 {
    return Err(Error::BadParameters(format!(
      "need prec ≥ 2 and at least one level, got prec {prec}, levels {levels}"
    )));
  }
  let d = x.dim();
  let algebras: Vec<AdicAlgebra> = (0..=levels).map(|n| AdicAlgebra::new(d, d * n, prec, bound)).collect();
  let op = |theta: &Monotone| {
    algebras[theta.source()].map_matrix(&algebras[theta.target], &structure_images::<S>(d, theta))
  };
  let module = CosimplicialModule::from_fn(
    algebras.iter().map(AdicAlgebra::rank).collect(),
    |n, i| op(&Monotone::coface(n + 1, i)),
    |n, i| op(&Monotone::codegeneracy(n - 1, i)),
  )?;
  Ok(CechAlexanderTower { algebra: x.clone(), levels: algebras, module, prec, bound })
}

impl<S: Scalar> CechAlexanderTower<S> {
  pub fn trunc(&self) -> usize {
    self.levels.len() - 1
  }

  /// `prec > D`: every homogeneous piece of total degree `≤ D` is kept whole.
  pub fn is_sound(&self) -> bool {
    self.prec > self.bound
  }

  /// Normalized cochains; degrees `≤ N - 1` are trusted when the truncation is sound.
  pub fn cochains(&self) -> Result<ConormalizedCochains<S>> {
    let mut c = self.module.normalize()?;
    let top = self.trunc() as i64;
    let sound = self.is_sound();
    c.complex = c.complex.with_completeness(|n| sound && n <= top, sound, false);
    Ok(c)
  }

  /// Degree-0 kernel of `d⁰ - d¹`: elements `f` with `f(x) = f(x + ξ)` at this truncation.
  pub fn invariants(&self) -> Vec<Poly<S>> {
    let d = self.module.coface(0, 0).sub(self.module.coface(0, 1));
    S::kernel_basis(&d).iter().map(|v| self.levels[0].poly(v)).collect()
  }
}

/// Cohomology of the tower with the `prec > D` trust rule.
pub fn inf_cohomology<S: Scalar>(tower: &CechAlexanderTower<S>) -> Result<CohomologyTable> {
  tower.cochains()?.complex.cohomology()
}

/// Explicit witness for `Gr^w(level n) ≅ Sym^w_A((Ω¹)^{⊕n})`.
#[derive(Clone, Debug, Serialize)]
pub struct GradedWitness {
  pub level: usize,
  pub weight: u32,
  /// A-rank of the ξ-degree-`w` slice.
  pub gr_rank: usize,
  /// A-rank of `Sym^w` of a free module of rank `n · d`.
  pub sym_rank: usize,
  /// `(ξ-monomial, dx-monomial)` pairs.
  pub bijection: Vec<(String, String)>,
  /// Every coface out of level `n` (and into it) acts on the slice as `Sym^w` of its linear part.
  pub cofaces_compatible: bool,
}

fn monomial_label(m: &[u32], names: &[String]) -> String {
  let parts: Vec<String> = m
    .iter()
    .zip(names)
    .filter(|(e, _)| **e > 0)
    .map(|(e, n)| if *e == 1 { n.clone() } else { format!("{n}^{e}") })
    .collect();
  if parts.is_empty() {
    "1".into()
  } else {
    parts.join("*")
  }
}

fn xi_names(x: &SmoothAffine, n: usize) -> (Vec<String>, Vec<String>) {
  let mut xi = Vec::new();
  let mut dx = Vec::new();
  for k in 1..=n {
    for v in &x.vars {
      xi.push(format!("ξ{k}_{v}"));
      dx.push(format!("d{v}⁽{k}⁾"));
    }
  }
  (xi, dx)
}

/// Linear part of `θ` on the ξ-variables.
fn linear_part<S: Scalar>(d: usize, theta: &Monotone) -> SparseMat<S> {
  let (m, n) = (theta.source(), theta.target);
  let mut entries = Vec::new();
  for k in 1..=m {
    for v in 0..d {
      let col = d * (k - 1) + v;
      let (a, b) = (theta.values[k], theta.values[0]);
      if a > 0 {
        entries.push((d * (a - 1) + v, col, S::one()));
      }
      if b > 0 {
        entries.push((d * (b - 1) + v, col, -S::one()));
      }
    }
  }
  SparseMat::from_triplets(d * n, d * m, entries)
}

/// Compare the ξ-degree-`w` slice of level `n` with `Sym^w` of `(Ω¹)^{⊕n}` and
/// check that every coface and codegeneracy touching level `n` acts on the
/// slice through `Sym^w` of its linear part.
pub fn graded_compare<S: Scalar>(tower: &CechAlexanderTower<S>, n: usize, w: u32) -> Result<GradedWitness> {
  if w >= tower.prec || w > tower.bound {
    return Err(Error::BadParameters(format!("weight {w} needs prec > {w} and D ≥ {w}")));
  }
  if n > tower.trunc() {
    return Err(Error::BadParameters(format!("level {n} beyond the tower's {} levels", tower.trunc())));
  }
  let x = &tower.algebra;
  let d = x.dim();
  let (xi, dx) = xi_names(x, n);
  let xi_mons = monomials_of_degree(d * n, w);
  let bijection = xi_mons.iter().map(|m| (monomial_label(m, &xi), monomial_label(m, &dx))).collect();
  let top = tower.trunc();
  let mut maps = Vec::new();
  if n > 0 {
    maps.extend((0..=n).map(|i| Monotone::coface(n, i)));
    maps.extend((0..n).map(|i| Monotone::codegeneracy(n - 1, i)));
  }
  if n < top {
    maps.extend((0..n + 2).map(|i| Monotone::coface(n + 1, i)));
    maps.extend((0..=n).map(|i| Monotone::codegeneracy(n, i)));
  }
  let compatible = maps.iter().all(|theta| {
    let (src, tgt) = (&tower.levels[theta.source()], &tower.levels[theta.target]);
    slice_compatible(src, tgt, &tower.module.operator(theta), &linear_part::<S>(d, theta), w)
  });
  Ok(GradedWitness {
    level: n,
    weight: w,
    gr_rank: xi_mons.len(),
    sym_rank: sym_rank(n * d, w),
    bijection,
    cofaces_compatible: compatible,
  })
}

/// Whether `op : src → tgt` sends `a·m` (`a` an x-monomial, `m` a ξ-monomial of
/// degree `w`) to `a·Sym^w(lin)(m)` modulo ξ-degree `> w`.
pub fn slice_compatible<S: Scalar>(
  src: &AdicAlgebra,
  tgt: &AdicAlgebra,
  op: &SparseMat<S>,
  lin: &SparseMat<S>,
  w: u32,
) -> bool {
  if w > src.bound {
    return true;
  }
  let src_idx = MonomialIndex::new(monomials_of_degree(src.nxi, w));
  let tgt_idx = MonomialIndex::new(monomials_of_degree(tgt.nxi, w));
  let predicted = sym_power_matrix(lin, &src_idx, &tgt_idx);
  for t in 0..=src.bound - w {
    for a in monomials_of_degree(src.nx, t) {
      for (j, m) in src_idx.monomials().iter().enumerate() {
        let mut full = a.clone();
        full.extend(m);
        let Some(col) = src.index.get(&full) else { continue };
        let slice: BTreeMap<Monomial, S> = op
          .mul_vec(&[(col, S::one())])
          .into_iter()
          .map(|(i, c)| (tgt.index.monomial(i).clone(), c))
          .filter(|(mm, _)| tgt.xi_degree(mm) == w)
          .collect();
        let expected: BTreeMap<Monomial, S> = predicted
          .column(j)
          .iter()
          .map(|(i, c)| {
            let mut mm = a.clone();
            mm.extend(tgt_idx.monomial(*i));
            (mm, c.clone())
          })
          .collect();
        if slice != expected {
          return false;
        }
      }
    }
  }
  true
}

/// Rank of `Sym^w` of a free module of rank `m`.
pub fn sym_rank(m: usize, w: u32) -> usize {
  match (m, w) {
    (0, 0) => 1,
    (0, _) => 0,
    _ => crate::poly::binomial(m as u64 + w as u64 - 1, w as u64) as usize,
  }
}

/// Witness on the smallest tower that certifies level `n`, weight `w`.
pub fn graded_witness<S: Scalar>(x: &SmoothAffine, n: usize, w: u32) -> Result<GradedWitness> {
  let tower = cech_alexander::<S>(x, n + 1, w + 2, w + 1)?;
  graded_compare(&tower, n, w)
}

/// Truncated algebraic de Rham complex as a mixed complex: weight `w` is
/// `Ω^w` (coefficient degree `+ w ≤ bound`) in cohomological degree `-w`,
/// `ε` the de Rham differential. Realizing it gives the usual de Rham complex.
pub fn de_rham_mixed<S: Scalar>(x: &SmoothAffine, bound: u32) -> Result<MixedComplex<S>> {
  let d = x.dim();
  let forms: Vec<Vec<(Monomial, Vec<usize>)>> = (0..=d).map(|w| form_basis(d, w, bound)).collect();
  let index: Vec<BTreeMap<(Monomial, Vec<usize>), usize>> =
    forms.iter().map(|l| l.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect()).collect();
  let mut pieces = BTreeMap::new();
  let mut eps = BTreeMap::new();
  for w in 0..=d {
    let mut c = CochainComplex::concentrated(-(w as i64), forms[w].len());
    c = c.with_labels(-(w as i64), forms[w].iter().map(|(m, i)| form_label(x, m, i)).collect());
    pieces.insert(w as i64, c);
    if w < d {
      let mut entries = Vec::new();
      for (col, (m, set)) in forms[w].iter().enumerate() {
        for j in 0..d {
          if m[j] == 0 || set.contains(&j) {
            continue;
          }
          let mut dm = m.clone();
          dm[j] -= 1;
          let mut s = set.clone();
          let pos = s.iter().filter(|i| **i < j).count();
          s.insert(pos, j);
          let sign = if pos % 2 == 0 { S::one() } else { -S::one() };
          entries.push((index[w + 1][&(dm, s)], col, S::from_i64(m[j] as i64) * sign));
        }
      }
      eps.insert(
        (w as i64, -(w as i64)),
        SparseMat::from_triplets(forms[w + 1].len(), forms[w].len(), entries),
      );
    }
  }
  MixedComplex::new(GradedComplex::new(pieces), eps, Flag::Minus)
}

fn form_basis(d: usize, w: usize, bound: u32) -> Vec<(Monomial, Vec<usize>)> {
  let mut out = Vec::new();
  if w as u32 > bound {
    return out;
  }
  let sets = subsets(d, w);
  for t in 0..=bound - w as u32 {
    for m in monomials_of_degree(d, t) {
      for s in &sets {
        out.push((m.clone(), s.clone()));
      }
    }
  }
  out
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
  if k == 0 {
    return vec![Vec::new()];
  }
  if n < k {
    return Vec::new();
  }
  let mut out = Vec::new();
  for first in 0..n {
    for rest in subsets(n - first - 1, k - 1) {
      let mut s = vec![first];
      s.extend(rest.iter().map(|r| r + first + 1));
      out.push(s);
    }
  }
  out
}

fn form_label(x: &SmoothAffine, m: &[u32], set: &[usize]) -> String {
  let coeff = monomial_label(m, &x.vars);
  if set.is_empty() {
    return coeff;
  }
  let wedge: Vec<String> = set.iter().map(|i| format!("d{}", x.vars[*i])).collect();
  format!("{coeff} {}", wedge.join("^"))
}

/// De Rham complex in degrees `0..=d` with its cohomology (every degree trusted:
/// the truncation is a direct summand).
#[derive(Clone, Debug)]
pub struct DeRham<S> {
  pub mixed: MixedComplex<S>,
  pub complex: CochainComplex<S>,
  pub table: CohomologyTable,
}

pub fn de_rham<S: Scalar>(x: &SmoothAffine, bound: u32) -> Result<DeRham<S>> {
  let mixed = de_rham_mixed::<S>(x, bound)?;
  let d = x.dim() as i64;
  let mut complex = tate_realization(&mixed, 0, d)?;
  for w in 0..=d {
    if let Some(l) = mixed.graded.piece(w).labels(-w) {
      complex = complex.with_labels(w, l.to_vec());
    }
  }
  let table = complex.cohomology()?;
  Ok(DeRham { mixed, complex, table })
}

impl<S: Scalar> DeRham<S> {
  /// Representatives of a basis of `H^n` (requires free cohomology).
  pub fn classes(&self, n: i64) -> Result<Vec<String>> {
    let basis = CohomologyBasis::new(&self.complex, n)?;
    let labels = self.complex.labels(n).map(<[String]>::to_vec).unwrap_or_default();
    Ok(basis.generators.iter().map(|g| vector_label(g, &labels)).collect())
  }
}

fn vector_label<S: Scalar>(v: &SparseVec<S>, labels: &[String]) -> String {
  let parts: Vec<String> = v
    .iter()
    .map(|(i, c)| {
      let l = labels.get(*i).cloned().unwrap_or_else(|| format!("e{i}"));
      if c.is_one() {
        l
      } else {
        format!("{c}*{l}")
      }
    })
    .collect();
  parts.join(" + ")
}

/// `inf_cohomology` against `de_rham`, over ℚ only.
pub fn compare_inf_derham<S: Scalar>(
  x: &SmoothAffine,
  levels: usize,
  prec: u32,
  bound: u32,
) -> Result<QisVerdict> {
  if S::coefficients() != Coefficients::Rationals {
    return Err(Error::UnsupportedComparison(format!(
      "infinitesimal and de Rham cohomology are only compared over Q, not {}",
      S::coefficients()
    )));
  }
  let tower = cech_alexander::<S>(x, levels, prec, bound)?;
  let inf = inf_cohomology(&tower)?;
  let dr = de_rham::<S>(x, bound)?.table;
  Ok(QisVerdict::from_tables(inf, dr))
}

impl fmt::Display for GradedWitness {
  fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    write!(f, "Gr^{}(level {}) rank {} vs Sym rank {}", self.weight, self.level, self.gr_rank, self.sym_rank)
  }
}
