//! Bounded cochain complexes of free modules, bicomplexes and cohomology tables.
//!
//! Conventions: differentials raise degree by one; homological degree `k` is
//! stored as cohomological degree `-k`; `(C[n])^i = C^{i+n}` with differential
//! multiplied by `(-1)^n`; a bicomplex cell `(q, p)` sits in total degree `q - p`
//! and the total differential is `d_h + (-1)^q d_v`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactlin::{CohomologyGroup, SparseMat, SparseVec};
use crate::scalar::{Coefficients, Scalar};

/// Bounded cochain complex of finite free modules living in degrees `lo..=hi`.
///
/// `complete[i]` records whether degree `lo + i` carries the full module of the
/// untruncated object; `exact_below` / `exact_above` say whether the zero
/// modules outside the window are genuine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CochainComplex<S> {
  lo: i64,
  ranks: Vec<usize>,
  diffs: Vec<SparseMat<S>>,
  complete: Vec<bool>,
  exact_below: bool,
  exact_above: bool,
  labels: BTreeMap<i64, Vec<String>>,
}

impl<S: Scalar> CochainComplex<S> {
  /// `diffs[i]` maps degree `lo + i` to `lo + i + 1`. Checks shapes and `d² = 0`.
  pub fn new(lo: i64, ranks: Vec<usize>, diffs: Vec<SparseMat<S>>) -> Result<Self> {
    if ranks.is_empty() {
      return Ok(Self::zero());
    }
    if diffs.len() + 1 != ranks.len() {
      return Err(Error::Shape(format!(
        "{} modules need {} differentials, got {}",
        ranks.len(),
        ranks.len() - 1,
        diffs.len()
      )));
    }
    for (i, d) in diffs.iter().enumerate() {
      if d.cols() != ranks[i] || d.rows() != ranks[i + 1] {
        return Err(Error::Shape(format!(
          "d^{} is {}x{}, expected {}x{}",
          lo + i as i64,
          d.rows(),
          d.cols(),
          ranks[i + 1],
          ranks[i]
        )));
      }
    }
    for (i, w) in diffs.windows(2).enumerate() {
      if !w[1].mul(&w[0]).is_zero() {
        return Err(Error::NotComposable(format!("d^{} d^{} != 0", lo + i as i64 + 1, lo + i as i64)));
      }
    }
    let n = ranks.len();
    Ok(CochainComplex {
      lo,
      ranks,
      diffs,
      complete: vec![true; n],
      exact_below: true,
      exact_above: true,
      labels: BTreeMap::new(),
    })
  }

  pub fn zero() -> Self {
    CochainComplex {
      lo: 0,
      ranks: Vec::new(),
      diffs: Vec::new(),
      complete: Vec::new(),
      exact_below: true,
      exact_above: true,
      labels: BTreeMap::new(),
    }
  }

  /// Free module of the given rank in a single degree.
  pub fn concentrated(degree: i64, rank: usize) -> Self {
    CochainComplex::new(degree, vec![rank], Vec::new()).expect("single module")
  }

  /// The ring itself in degree `degree`.
  pub fn unit(degree: i64) -> Self {
    Self::concentrated(degree, 1)
  }

  /// Two-term complex `S^cols --m--> S^rows` in degrees `degree, degree + 1`.
  pub fn two_term(degree: i64, m: SparseMat<S>) -> Self {
    CochainComplex::new(degree, vec![m.cols(), m.rows()], vec![m]).expect("two-term complex")
  }

  /// Declare which degrees hold complete modules. Degrees outside the window are
  /// governed by `exact_below` and `exact_above`.
  pub fn with_completeness(
    mut self,
    complete: impl Fn(i64) -> bool,
    exact_below: bool,
    exact_above: bool,
  ) -> Self {
    for i in 0..self.ranks.len() {
      self.complete[i] = complete(self.lo + i as i64);
    }
    self.exact_below = exact_below;
    self.exact_above = exact_above;
    self
  }

  pub fn with_labels(mut self, degree: i64, labels: Vec<String>) -> Self {
    assert_eq!(labels.len(), self.rank(degree), "label count");
    self.labels.insert(degree, labels);
    self
  }

  pub fn labels(&self, degree: i64) -> Option<&[String]> {
    self.labels.get(&degree).map(Vec::as_slice)
  }

  pub fn ring(&self) -> Coefficients {
    S::coefficients()
  }

  /// Degree window `(lo, hi)`; `None` for the empty complex.
  pub fn window(&self) -> Option<(i64, i64)> {
    if self.ranks.is_empty() {
      None
    } else {
      Some((self.lo, self.lo + self.ranks.len() as i64 - 1))
    }
  }

  pub fn lo(&self) -> i64 {
    self.lo
  }

  pub fn hi(&self) -> i64 {
    self.lo + self.ranks.len() as i64 - 1
  }

  fn index(&self, n: i64) -> Option<usize> {
    let i = n - self.lo;
    (i >= 0 && (i as usize) < self.ranks.len()).then_some(i as usize)
  }

  pub fn rank(&self, n: i64) -> usize {
    self.index(n).map_or(0, |i| self.ranks[i])
  }

  pub fn ranks(&self) -> &[usize] {
    &self.ranks
  }

  /// `d^n : C^n → C^{n+1}`, zero outside the window.
  pub fn d(&self, n: i64) -> SparseMat<S> {
    match (self.index(n), self.index(n + 1)) {
      (Some(i), Some(_)) => self.diffs[i].clone(),
      _ => SparseMat::zero(self.rank(n + 1), self.rank(n)),
    }
  }

  pub fn is_complete(&self, n: i64) -> bool {
    match self.index(n) {
      Some(i) => self.complete[i],
      None if self.ranks.is_empty() => self.exact_below && self.exact_above,
      None if n < self.lo => self.exact_below,
      None => self.exact_above,
    }
  }

  pub fn exactness(&self) -> (bool, bool) {
    (self.exact_below, self.exact_above)
  }

  pub fn is_trusted(&self, n: i64) -> bool {
    self.is_complete(n - 1) && self.is_complete(n) && self.is_complete(n + 1)
  }

  pub fn total_rank(&self) -> usize {
    self.ranks.iter().sum()
  }

  /// Recheck `d² = 0` on the stored differentials.
  pub fn verify(&self) -> Result<()> {
    for (i, w) in self.diffs.windows(2).enumerate() {
      if !w[1].mul(&w[0]).is_zero() {
        return Err(Error::Invariant(format!("d² != 0 at degree {}", self.lo + i as i64)));
      }
    }
    Ok(())
  }

  /// Reassemble on the window `lo..=hi`, padding with zero modules. Degrees
  /// dropped by the restriction must carry no data.
  pub fn on_window(&self, lo: i64, hi: i64) -> Result<Self> {
    if let Some((a, b)) = self.window() {
      for n in a..=b {
        if (n < lo || n > hi) && self.rank(n) != 0 {
          return Err(Error::DegreeOutOfRange { degree: n, range: format!("[{lo}, {hi}]") });
        }
      }
    }
    if hi < lo {
      return Ok(Self::zero());
    }
    let ranks = (lo..=hi).map(|n| self.rank(n)).collect();
    let diffs = (lo..hi).map(|n| self.d(n)).collect();
    let mut out = CochainComplex::new(lo, ranks, diffs)?;
    for n in lo..=hi {
      out.complete[(n - lo) as usize] = self.is_complete(n);
    }
    out.exact_below = self.exact_below;
    out.exact_above = self.exact_above;
    out.labels = self.labels.clone();
    Ok(out)
  }

  /// Drop complete zero modules at both ends of the window.
  pub fn trimmed(&self) -> Self {
    let Some((mut lo, mut hi)) = self.window() else { return self.clone() };
    let edge = |n: i64| self.rank(n) == 0 && self.is_complete(n);
    while lo <= hi && edge(lo) && self.exact_below {
      lo += 1;
    }
    while hi >= lo && edge(hi) && self.exact_above {
      hi -= 1;
    }
    if hi < lo {
      return Self::zero();
    }
    self.on_window(lo, hi).expect("only zero modules dropped")
  }

  /// `(C[n])^i = C^{i+n}`, differential multiplied by `(-1)^n`.
  pub fn shift(&self, n: i64) -> Self {
    let sign = if n.rem_euclid(2) == 0 { S::one() } else { -S::one() };
    CochainComplex {
      lo: self.lo - n,
      ranks: self.ranks.clone(),
      diffs: self.diffs.iter().map(|d| d.scaled(&sign)).collect(),
      complete: self.complete.clone(),
      exact_below: self.exact_below,
      exact_above: self.exact_above,
      labels: self.labels.iter().map(|(k, v)| (k - n, v.clone())).collect(),
    }
  }

  /// Degreewise direct sum; the basis of `C ⊕ D` in each degree lists `C` first.
  pub fn direct_sum(&self, other: &Self) -> Self {
    let (lo, hi) = match (self.window(), other.window()) {
      (None, _) => return other.clone(),
      (_, None) => return self.clone(),
      (Some((a, b)), Some((c, d))) => (a.min(c), b.max(d)),
    };
    let ranks = (lo..=hi).map(|n| self.rank(n) + other.rank(n)).collect();
    let diffs = (lo..hi).map(|n| self.d(n).direct_sum(&other.d(n))).collect();
    let mut out = CochainComplex::new(lo, ranks, diffs).expect("direct sum of complexes");
    for n in lo..=hi {
      out.complete[(n - lo) as usize] = self.is_complete(n) && other.is_complete(n);
    }
    out.exact_below = self.exact_below && other.exact_below;
    out.exact_above = self.exact_above && other.exact_above;
    out
  }

  /// Offsets of the blocks `C^i ⊗ D^{n-i}` inside `(C ⊗ D)^n`, by increasing `i`.
  pub fn tensor_offsets(&self, other: &Self, n: i64) -> Vec<(i64, usize)> {
    let mut out = Vec::new();
    let Some((a, b)) = self.window() else { return out };
    let mut off = 0;
    for i in a..=b {
      let r = self.rank(i) * other.rank(n - i);
      if r > 0 {
        out.push((i, off));
      }
      off += r;
    }
    out
  }

  /// Tensor product with the Koszul sign `d(x⊗y) = dx⊗y + (-1)^{|x|} x⊗dy`.
  pub fn tensor(&self, other: &Self) -> Self {
    let (Some((a, b)), Some((c, d))) = (self.window(), other.window()) else {
      return Self::zero();
    };
    let (lo, hi) = (a + c, b + d);
    let block_rank = |i: i64, n: i64| self.rank(i) * other.rank(n - i);
    let ranks: Vec<usize> = (lo..=hi).map(|n| (a..=b).map(|i| block_rank(i, n)).sum()).collect();
    let offsets = |n: i64| -> BTreeMap<i64, usize> {
      let mut off = 0;
      let mut m = BTreeMap::new();
      for i in a..=b {
        m.insert(i, off);
        off += block_rank(i, n);
      }
      m
    };
    let mut diffs = Vec::new();
    for n in lo..hi {
      let src = offsets(n);
      let tgt = offsets(n + 1);
      let mut blocks = Vec::new();
      for i in a..=b {
        let j = n - i;
        if block_rank(i, n) == 0 {
          continue;
        }
        if self.rank(i + 1) > 0 {
          blocks.push((tgt[&(i + 1)], src[&i], self.d(i).kron(&SparseMat::identity(other.rank(j)))));
        }
        if other.rank(j + 1) > 0 {
          let sign = if i.rem_euclid(2) == 0 { S::one() } else { -S::one() };
          blocks.push((tgt[&i], src[&i], SparseMat::identity(self.rank(i)).kron(&other.d(j)).scaled(&sign)));
        }
      }
      let rows = ranks[(n + 1 - lo) as usize];
      let cols = ranks[(n - lo) as usize];
      diffs.push(SparseMat::from_blocks(rows, cols, blocks.iter().map(|(r, c, m)| (*r, *c, m))));
    }
    let mut out = CochainComplex::new(lo, ranks, diffs).expect("tensor product satisfies d² = 0");
    for n in lo..=hi {
      out.complete[(n - lo) as usize] = self.tensor_degree_complete(other, n);
    }
    out.exact_below = self.exact_below && other.exact_below;
    out.exact_above = self.exact_above && other.exact_above;
    out
  }

  /// Whether every block `C^i ⊗ D^{n-i}` is known in full (a block is known when
  /// one factor is a complete zero module or both factors are complete).
  fn tensor_degree_complete(&self, other: &Self, n: i64) -> bool {
    let (a, b) = (self.lo, self.hi());
    let (c, d) = (other.lo, other.hi());
    let block = |i: i64| {
      let j = n - i;
      let zero_c = self.is_complete(i) && self.rank(i) == 0;
      let zero_d = other.is_complete(j) && other.rank(j) == 0;
      zero_c || zero_d || (self.is_complete(i) && other.is_complete(j))
    };
    // beyond the window of C, the block is unknown only if C is not exact there
    // and D is not a known zero there
    let tail_low = self.exact_below || (other.exact_above && n - a + 1 > d);
    let tail_high = self.exact_above || (other.exact_below && n - b - 1 < c);
    tail_low && tail_high && (a - 1..=b + 1).all(block) && (n - d - 1..=n - c + 1).all(block)
  }

  /// Cohomology in every degree of the window, with trust flags.
  pub fn cohomology(&self) -> Result<CohomologyTable> {
    let Some((lo, hi)) = self.window() else {
      return Ok(CohomologyTable { ring: S::coefficients(), entries: Vec::new() });
    };
    let mut entries = Vec::with_capacity(self.ranks.len());
    for n in lo..=hi {
      let group = S::subquotient(&self.d(n - 1), &self.d(n))?;
      entries.push(TableEntry { degree: n, group, trusted: self.is_trusted(n) });
    }
    Ok(CohomologyTable { ring: S::coefficients(), entries })
  }

  /// Change of scalars along `f`, which must be a ring map.
  pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T + Copy) -> CochainComplex<T> {
    CochainComplex {
      lo: self.lo,
      ranks: self.ranks.clone(),
      diffs: self.diffs.iter().map(|d| d.map(f)).collect(),
      complete: self.complete.clone(),
      exact_below: self.exact_below,
      exact_above: self.exact_above,
      labels: self.labels.clone(),
    }
  }
}

/// A degreewise map of complexes `source → target`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainMap<S> {
  pub source: CochainComplex<S>,
  pub target: CochainComplex<S>,
  components: BTreeMap<i64, SparseMat<S>>,
}

impl<S: Scalar> ChainMap<S> {
  /// Components not listed are zero. Checks shapes and `d f = f d`.
  pub fn new(
    source: CochainComplex<S>,
    target: CochainComplex<S>,
    components: BTreeMap<i64, SparseMat<S>>,
  ) -> Result<Self> {
    for (n, f) in &components {
      if f.cols() != source.rank(*n) || f.rows() != target.rank(*n) {
        return Err(Error::Shape(format!("component {n} is {}x{}", f.rows(), f.cols())));
      }
    }
    let map = ChainMap { source, target, components };
    let (lo, hi) = map.span();
    for n in lo..=hi {
      let lhs = map.target.d(n).mul(&map.at(n));
      let rhs = map.at(n + 1).mul(&map.source.d(n));
      if lhs != rhs {
        return Err(Error::Invariant(format!("not a chain map in degree {n}")));
      }
    }
    Ok(map)
  }

  pub fn identity(c: &CochainComplex<S>) -> Self {
    let components = c
      .window()
      .map_or(BTreeMap::new(), |(lo, hi)| (lo..=hi).map(|n| (n, SparseMat::identity(c.rank(n)))).collect());
    ChainMap { source: c.clone(), target: c.clone(), components }
  }

  fn span(&self) -> (i64, i64) {
    let ws = [self.source.window(), self.target.window()];
    let lo = ws.iter().flatten().map(|w| w.0).min().unwrap_or(0);
    let hi = ws.iter().flatten().map(|w| w.1).max().unwrap_or(-1);
    (lo - 1, hi)
  }

  pub fn at(&self, n: i64) -> SparseMat<S> {
    self
      .components
      .get(&n)
      .cloned()
      .unwrap_or_else(|| SparseMat::zero(self.target.rank(n), self.source.rank(n)))
  }

  pub fn compose(&self, first: &ChainMap<S>) -> Result<ChainMap<S>> {
    let mut comps = BTreeMap::new();
    let (lo, hi) = first.span();
    for n in lo..=hi + 1 {
      let g = self.at(n);
      let f = first.at(n);
      if g.cols() != f.rows() {
        return Err(Error::Shape(format!("cannot compose in degree {n}")));
      }
      comps.insert(n, g.mul(&f));
    }
    ChainMap::new(first.source.clone(), self.target.clone(), comps)
  }

  /// `cone^n = C^{n+1} ⊕ D^n` with `d(c, x) = (-d c, f c + d x)`.
  pub fn cone(&self) -> CochainComplex<S> {
    let c = &self.source;
    let d = &self.target;
    let ws = [c.window().map(|(a, b)| (a - 1, b - 1)), d.window()];
    let Some(lo) = ws.iter().flatten().map(|w| w.0).min() else {
      return CochainComplex::zero();
    };
    let hi = ws.iter().flatten().map(|w| w.1).max().expect("window");
    let ranks: Vec<usize> = (lo..=hi).map(|n| c.rank(n + 1) + d.rank(n)).collect();
    let mut diffs = Vec::new();
    for n in lo..hi {
      let (c1, c2) = (c.rank(n + 1), c.rank(n + 2));
      let neg = c.d(n + 1).neg();
      let f = self.at(n + 1);
      let dd = d.d(n);
      diffs.push(SparseMat::from_blocks(
        c2 + d.rank(n + 1),
        c1 + d.rank(n),
        [(0, 0, &neg), (c2, 0, &f), (c2, c1, &dd)],
      ));
    }
    let mut out = CochainComplex::new(lo, ranks, diffs).expect("mapping cone satisfies d² = 0");
    for n in lo..=hi {
      out.complete[(n - lo) as usize] = c.is_complete(n + 1) && d.is_complete(n);
    }
    out.exact_below = c.exact_below && d.exact_below;
    out.exact_above = c.exact_above && d.exact_above;
    out
  }
}

/// One row of a cohomology table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableEntry {
  pub degree: i64,
  pub group: CohomologyGroup,
  pub trusted: bool,
}

/// Cohomology of a truncated complex, degree by degree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohomologyTable {
  pub ring: Coefficients,
  pub entries: Vec<TableEntry>,
}

impl CohomologyTable {
  pub fn window(&self) -> Option<(i64, i64)> {
    Some((self.entries.first()?.degree, self.entries.last()?.degree))
  }

  /// Longest run of consecutive trusted degrees.
  pub fn trusted_window(&self) -> Option<(i64, i64)> {
    let mut best: Option<(i64, i64)> = None;
    let mut run: Option<(i64, i64)> = None;
    for e in &self.entries {
      if e.trusted {
        run = Some(match run {
          Some((a, _)) => (a, e.degree),
          None => (e.degree, e.degree),
        });
        if best.is_none_or(|(a, b)| b - a < run.unwrap().1 - run.unwrap().0) {
          best = run;
        }
      } else {
        run = None;
      }
    }
    best
  }

  pub fn get(&self, degree: i64) -> Option<&TableEntry> {
    self.entries.iter().find(|e| e.degree == degree)
  }

  /// The group in `degree`; zero outside the window.
  pub fn group(&self, degree: i64) -> CohomologyGroup {
    self.get(degree).map_or_else(|| CohomologyGroup::zero(self.ring.clone()), |e| e.group.clone())
  }

  pub fn is_trusted(&self, degree: i64) -> bool {
    self.get(degree).is_some_and(|e| e.trusted)
  }

  /// Free ranks by degree, for compact assertions.
  pub fn ranks(&self) -> Vec<(i64, usize)> {
    self.entries.iter().map(|e| (e.degree, e.group.free_rank)).collect()
  }

  /// Degrees with nonzero cohomology.
  pub fn support(&self) -> Vec<i64> {
    self.entries.iter().filter(|e| !e.group.is_zero()).map(|e| e.degree).collect()
  }

  /// Trusted entries agree between the two tables on the degrees both trust.
  pub fn agrees_on_trusted(&self, other: &CohomologyTable) -> bool {
    self
      .entries
      .iter()
      .filter(|e| e.trusted)
      .all(|e| !other.is_trusted(e.degree) || other.group(e.degree) == e.group)
  }
}

/// Explicit cocycle representatives for a degree whose cohomology is free.
#[derive(Clone, Debug)]
pub struct CohomologyBasis<S> {
  kernel: SparseMat<S>,
  projection: SparseMat<S>,
  pub generators: Vec<SparseVec<S>>,
}

impl<S: Scalar> CohomologyBasis<S> {
  /// Basis of `H^n(C)`; fails when the group has torsion.
  pub fn new(c: &CochainComplex<S>, n: i64) -> Result<Self> {
    let kernel = SparseMat::from_columns(c.rank(n), S::kernel_basis(&c.d(n)));
    let b = S::solve_columns(&kernel, &c.d(n - 1))
      .ok_or_else(|| Error::Invariant(format!("boundary outside the cycles in degree {n}")))?;
    let (projection, section) =
      S::cokernel(&b).ok_or_else(|| Error::Invariant(format!("H^{n} has torsion")))?;
    let generators = kernel.mul(&section).columns().to_vec();
    Ok(CohomologyBasis { kernel, projection, generators })
  }

  pub fn rank(&self) -> usize {
    self.generators.len()
  }

  /// Coordinates of the class of a cocycle; `None` if `z` is not a cocycle.
  pub fn class(&self, z: &SparseVec<S>) -> Option<SparseVec<S>> {
    let c = S::solve(&self.kernel, z)?;
    Some(self.projection.mul_vec(&c))
  }
}

/// Outcome of a window-relative equivalence check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
  Equivalent,
  NotEquivalent,
  Inconclusive,
}

/// Result of comparing two complexes along a map (or two tables).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QisVerdict {
  pub verdict: Verdict,
  pub source: CohomologyTable,
  pub target: CohomologyTable,
  pub trusted_window: Option<(i64, i64)>,
}

impl QisVerdict {
  pub fn is_equivalent(&self) -> bool {
    self.verdict == Verdict::Equivalent
  }

  /// Compare two cohomology tables without a map: groups must agree on
  /// the degrees both tables trust.
  pub fn from_tables(source: CohomologyTable, target: CohomologyTable) -> Self {
    let degrees: Vec<i64> =
      source.entries.iter().filter(|e| e.trusted && target.is_trusted(e.degree)).map(|e| e.degree).collect();
    let trusted_window = degrees.first().zip(degrees.last()).map(|(a, b)| (*a, *b));
    let verdict = if degrees.is_empty() {
      Verdict::Inconclusive
    } else if degrees.iter().all(|n| source.group(*n) == target.group(*n)) {
      Verdict::Equivalent
    } else {
      Verdict::NotEquivalent
    };
    QisVerdict { verdict, source, target, trusted_window }
  }
}

/// Decide whether `f` induces isomorphisms on cohomology in the degrees both
/// sides trust, using the mapping cone: `H^n(f)` is an isomorphism when the
/// cone is acyclic in degrees `n - 1` and `n`.
pub fn check_quasi_isomorphism<S: Scalar>(f: &ChainMap<S>) -> Result<QisVerdict> {
  let source = f.source.cohomology()?;
  let target = f.target.cohomology()?;
  let cone = f.cone();
  let cone_h = cone.cohomology()?;
  let lo = [f.source.window(), f.target.window()].iter().flatten().map(|w| w.0).min();
  let hi = [f.source.window(), f.target.window()].iter().flatten().map(|w| w.1).max();
  let (Some(lo), Some(hi)) = (lo, hi) else {
    return Ok(QisVerdict { verdict: Verdict::Equivalent, source, target, trusted_window: None });
  };
  let trusted: Vec<i64> = (lo..=hi).filter(|n| f.source.is_trusted(*n) && f.target.is_trusted(*n)).collect();
  let mut verdict = if trusted.is_empty() { Verdict::Inconclusive } else { Verdict::Equivalent };
  for n in &trusted {
    for m in [n - 1, *n] {
      let h = cone_h.group(m);
      if !h.is_zero() && cone.is_trusted(m) {
        verdict = Verdict::NotEquivalent;
      } else if !h.is_zero() && verdict == Verdict::Equivalent {
        verdict = Verdict::Inconclusive;
      }
    }
  }
  let trusted_window = trusted.first().zip(trusted.last()).map(|(a, b)| (*a, *b));
  Ok(QisVerdict { verdict, source, target, trusted_window })
}

/// Bounded bicomplex: cell `(q, p)` has horizontal `d_h: (q,p) → (q+1,p)` and
/// vertical `d_v: (q,p) → (q,p-1)` that commute.
#[derive(Clone, Debug)]
pub struct Bicomplex<S> {
  q_range: (i64, i64),
  p_range: (i64, i64),
  ranks: BTreeMap<(i64, i64), usize>,
  d_h: BTreeMap<(i64, i64), SparseMat<S>>,
  d_v: BTreeMap<(i64, i64), SparseMat<S>>,
  /// No nonzero cells beyond `q_range.1` / `p_range.1` in the untruncated object.
  pub q_exact: bool,
  pub p_exact: bool,
}

impl<S: Scalar> Bicomplex<S> {
  pub fn new(q_range: (i64, i64), p_range: (i64, i64)) -> Self {
    Bicomplex {
      q_range,
      p_range,
      ranks: BTreeMap::new(),
      d_h: BTreeMap::new(),
      d_v: BTreeMap::new(),
      q_exact: true,
      p_exact: true,
    }
  }

  pub fn q_range(&self) -> (i64, i64) {
    self.q_range
  }

  pub fn p_range(&self) -> (i64, i64) {
    self.p_range
  }

  fn in_range(&self, q: i64, p: i64) -> bool {
    q >= self.q_range.0 && q <= self.q_range.1 && p >= self.p_range.0 && p <= self.p_range.1
  }

  pub fn set_rank(&mut self, q: i64, p: i64, rank: usize) {
    assert!(self.in_range(q, p), "cell ({q}, {p}) outside the window");
    self.ranks.insert((q, p), rank);
  }

  pub fn rank(&self, q: i64, p: i64) -> usize {
    self.ranks.get(&(q, p)).copied().unwrap_or(0)
  }

  pub fn set_d_h(&mut self, q: i64, p: i64, m: SparseMat<S>) {
    self.d_h.insert((q, p), m);
  }

  pub fn set_d_v(&mut self, q: i64, p: i64, m: SparseMat<S>) {
    self.d_v.insert((q, p), m);
  }

  pub fn d_h(&self, q: i64, p: i64) -> SparseMat<S> {
    match self.d_h.get(&(q, p)) {
      Some(m) if self.in_range(q + 1, p) => m.clone(),
      _ => SparseMat::zero(self.rank(q + 1, p), self.rank(q, p)),
    }
  }

  pub fn d_v(&self, q: i64, p: i64) -> SparseMat<S> {
    match self.d_v.get(&(q, p)) {
      Some(m) if self.in_range(q, p - 1) => m.clone(),
      _ => SparseMat::zero(self.rank(q, p - 1), self.rank(q, p)),
    }
  }

  /// Shapes, `d_h² = 0`, `d_v² = 0`, `d_h d_v = d_v d_h`.
  pub fn verify(&self) -> Result<()> {
    for q in self.q_range.0..=self.q_range.1 {
      for p in self.p_range.0..=self.p_range.1 {
        let (h, v) = (self.d_h(q, p), self.d_v(q, p));
        if h.cols() != self.rank(q, p) || h.rows() != self.rank(q + 1, p) {
          return Err(Error::Shape(format!("d_h at ({q},{p})")));
        }
        if v.cols() != self.rank(q, p) || v.rows() != self.rank(q, p - 1) {
          return Err(Error::Shape(format!("d_v at ({q},{p})")));
        }
        if !self.d_h(q + 1, p).mul(&h).is_zero() {
          return Err(Error::Invariant(format!("d_h² != 0 at ({q},{p})")));
        }
        if !self.d_v(q, p - 1).mul(&v).is_zero() {
          return Err(Error::Invariant(format!("d_v² != 0 at ({q},{p})")));
        }
        if self.d_v(q + 1, p).mul(&h) != self.d_h(q, p - 1).mul(&v) {
          return Err(Error::Invariant(format!("d_h and d_v do not commute at ({q},{p})")));
        }
      }
    }
    Ok(())
  }

  /// Cells `(q, p)` with `q - p = n`, ordered by increasing `q`, with offsets.
  pub fn total_cells(&self, n: i64) -> Vec<((i64, i64), usize)> {
    let mut off = 0;
    let mut out = Vec::new();
    for q in self.q_range.0..=self.q_range.1 {
      let p = q - n;
      if p < self.p_range.0 || p > self.p_range.1 {
        continue;
      }
      out.push(((q, p), off));
      off += self.rank(q, p);
    }
    out
  }

  pub fn total_rank(&self, n: i64) -> usize {
    self.total_cells(n).iter().map(|((q, p), _)| self.rank(*q, *p)).sum()
  }

  /// Whether `Tot^n` contains every cell of the untruncated object.
  pub fn total_degree_complete(&self, n: i64) -> bool {
    let (q_hi, p_hi) = (self.q_range.1, self.p_range.1);
    match (self.q_exact, self.p_exact) {
      (true, true) => true,
      (false, true) => n <= q_hi - p_hi,
      (true, false) => n >= q_hi - p_hi,
      (false, false) => false,
    }
  }

  /// Degree range covered by the total complex.
  pub fn total_range(&self) -> (i64, i64) {
    (self.q_range.0 - self.p_range.1, self.q_range.1 - self.p_range.0)
  }
}

/// Product-total complex: `Tot^n = ⊕_{q-p=n} B_{q,p}`, `d = d_h + (-1)^q d_v`.
pub fn tot_product<S: Scalar>(b: &Bicomplex<S>) -> Result<CochainComplex<S>> {
  b.verify()?;
  let (lo, hi) = b.total_range();
  if hi < lo {
    return Ok(CochainComplex::zero());
  }
  let ranks: Vec<usize> = (lo..=hi).map(|n| b.total_rank(n)).collect();
  let mut diffs = Vec::new();
  for n in lo..hi {
    let tgt: BTreeMap<(i64, i64), usize> = b.total_cells(n + 1).into_iter().collect();
    let mut blocks = Vec::new();
    for ((q, p), off) in b.total_cells(n) {
      if b.rank(q, p) == 0 {
        continue;
      }
      if let Some(t) = tgt.get(&(q + 1, p)) {
        blocks.push((*t, off, b.d_h(q, p)));
      }
      if let Some(t) = tgt.get(&(q, p - 1)) {
        let sign = if q.rem_euclid(2) == 0 { S::one() } else { -S::one() };
        blocks.push((*t, off, b.d_v(q, p).scaled(&sign)));
      }
    }
    let rows = ranks[(n + 1 - lo) as usize];
    let cols = ranks[(n - lo) as usize];
    diffs.push(SparseMat::from_blocks(rows, cols, blocks.iter().map(|(r, c, m)| (*r, *c, m))));
  }
  let out = CochainComplex::new(lo, ranks, diffs)
    .map_err(|e| Error::Invariant(format!("total complex: {e}")))?
    .with_completeness(
      |n| b.total_degree_complete(n),
      b.total_degree_complete(lo - 1),
      b.total_degree_complete(hi + 1),
    );
  out.verify()?;
  Ok(out)
}

/// Cellwise map of bicomplexes with the same windows, totalized.
pub fn tot_product_map<S: Scalar>(
  source: &Bicomplex<S>,
  target: &Bicomplex<S>,
  cells: &BTreeMap<(i64, i64), SparseMat<S>>,
) -> Result<ChainMap<S>> {
  let ts = tot_product(source)?;
  let tt = tot_product(target)?;
  let lo = source.total_range().0.min(target.total_range().0);
  let hi = source.total_range().1.max(target.total_range().1);
  let mut comps = BTreeMap::new();
  for n in lo..=hi {
    let tgt: BTreeMap<(i64, i64), usize> = target.total_cells(n).into_iter().collect();
    let mut blocks = Vec::new();
    for ((q, p), off) in source.total_cells(n) {
      if let (Some(m), Some(t)) = (cells.get(&(q, p)), tgt.get(&(q, p))) {
        blocks.push((*t, off, m.clone()));
      }
    }
    comps
      .insert(n, SparseMat::from_blocks(tt.rank(n), ts.rank(n), blocks.iter().map(|(r, c, m)| (*r, *c, m))));
  }
  ChainMap::new(ts, tt, comps)
}

#[cfg(test)]
mod tests {
  use super::*;
  use crate::scalar::{Fp, Integer, Rational};

  type Z = Integer;

  fn zmat(rows: &[&[i64]]) -> SparseMat<Z> {
    SparseMat::from_i64_rows(rows)
  }

  #[test]
  fn shift_examples() {
    let z = CochainComplex::<Z>::unit(0);
    assert_eq!(z.shift(-2).window(), Some((2, 2)));
    let c = CochainComplex::two_term(0, zmat(&[&[2]]));
    let s = c.shift(1);
    assert_eq!(s.window(), Some((-1, 0)));
    assert_eq!(s.d(-1), zmat(&[&[-2]]));
    assert_eq!(s.shift(-1), c);
  }

  #[test]
  fn tensor_examples() {
    let a = CochainComplex::<Z>::unit(2);
    let t = a.tensor(&a);
    assert_eq!((t.window(), t.rank(4)), (Some((4, 4)), 1));
    let c = CochainComplex::two_term(0, zmat(&[&[1]]));
    let cc = c.tensor(&c);
    assert_eq!(cc.ranks(), &[1, 2, 1]);
    assert!(cc.cohomology().unwrap().support().is_empty());
    let unit = CochainComplex::<Z>::unit(0);
    assert_eq!(c.tensor(&unit), c);
  }

  #[test]
  fn cohomology_examples() {
    let c = CochainComplex::two_term(0, zmat(&[&[2]]));
    let h = c.cohomology().unwrap();
    assert!(h.group(0).is_zero());
    assert_eq!(h.group(1).torsion, vec![2]);
    let z = CochainComplex::<Z>::new(0, vec![2, 3], vec![SparseMat::zero(3, 2)]).unwrap();
    assert_eq!(z.cohomology().unwrap().ranks(), vec![(0, 2), (1, 3)]);
  }

  #[test]
  fn truncated_de_rham_of_the_line() {
    // Ω⁰ = span{x^0..x^10}, Ω¹ = span{x^0 dx..x^9 dx}, d x^k = k x^{k-1} dx
    let d = SparseMat::<Rational>::from_triplets(
      10,
      11,
      (1..=10).map(|k| (k - 1, k, Rational::from_i64(k as i64))),
    );
    let h = CochainComplex::two_term(0, d).cohomology().unwrap();
    assert_eq!(h.ranks(), vec![(0, 1), (1, 0)]);
  }

  #[test]
  fn tot_product_examples() {
    let mut b = Bicomplex::<Z>::new((0, 0), (0, 0));
    b.set_rank(0, 0, 1);
    assert_eq!(tot_product(&b).unwrap().ranks(), &[1]);

    let mut strip = Bicomplex::<Z>::new((0, 1), (0, 0));
    strip.set_rank(0, 0, 1);
    strip.set_rank(1, 0, 1);
    strip.set_d_h(0, 0, SparseMat::identity(1));
    assert!(tot_product(&strip).unwrap().cohomology().unwrap().support().is_empty());

    let mut sq = Bicomplex::<Z>::new((0, 1), (0, 1));
    for q in 0..2 {
      for p in 0..2 {
        sq.set_rank(q, p, 1);
      }
    }
    for p in 0..2 {
      sq.set_d_h(0, p, SparseMat::identity(1));
    }
    for q in 0..2 {
      sq.set_d_v(q, 1, SparseMat::identity(1));
    }
    let t = tot_product(&sq).unwrap();
    assert_eq!(t.ranks(), &[1, 2, 1]);
    assert!(t.cohomology().unwrap().support().is_empty());
  }

  #[test]
  fn single_row_bicomplex_is_its_row() {
    let row = CochainComplex::new(0, vec![1, 2, 1], vec![zmat(&[&[1], &[-1]]), zmat(&[&[1, 1]])]).unwrap();
    let mut b = Bicomplex::<Z>::new((0, 2), (0, 0));
    for q in 0..3 {
      b.set_rank(q, 0, row.rank(q));
      b.set_d_h(q, 0, row.d(q));
    }
    assert_eq!(tot_product(&b).unwrap(), row);
  }

  #[test]
  fn cone_detects_isomorphisms() {
    let c = CochainComplex::<Z>::unit(0);
    let id = ChainMap::identity(&c);
    assert!(check_quasi_isomorphism(&id).unwrap().is_equivalent());
    let zero = ChainMap::new(c.clone(), CochainComplex::zero(), BTreeMap::new()).unwrap();
    assert_eq!(check_quasi_isomorphism(&zero).unwrap().verdict, Verdict::NotEquivalent);
    let two = ChainMap::new(c.clone(), c.clone(), [(0, zmat(&[&[2]]))].into()).unwrap();
    assert_eq!(check_quasi_isomorphism(&two).unwrap().verdict, Verdict::NotEquivalent);
    let two_q = ChainMap::new(
      c.map_scalars(|x| Rational::from_integer(x.clone())),
      c.map_scalars(|x| Rational::from_integer(x.clone())),
      [(0, SparseMat::from_i64_rows(&[&[2]]))].into(),
    )
    .unwrap();
    assert!(check_quasi_isomorphism(&two_q).unwrap().is_equivalent());
  }

  #[test]
  fn truncation_flags() {
    let c = CochainComplex::<Z>::new(0, vec![1, 1, 1], vec![SparseMat::zero(1, 1), SparseMat::zero(1, 1)])
      .unwrap()
      .with_completeness(|n| n < 2, true, false);
    let h = c.cohomology().unwrap();
    assert_eq!(h.trusted_window(), Some((0, 0)));
    assert!(!h.is_trusted(2));
  }

  fn brute_rank<const P: u64>(m: &SparseMat<Fp<P>>) -> usize {
    // count the image by enumerating all inputs
    let n = m.cols();
    let mut image = std::collections::BTreeSet::new();
    let total = (P as usize).pow(n as u32);
    for code in 0..total {
      let mut c = code;
      let v: Vec<(usize, Fp<P>)> = (0..n)
        .map(|i| {
          let a = (c % P as usize) as u64;
          c /= P as usize;
          (i, Fp::new(a))
        })
        .filter(|(_, a)| a.value() != 0)
        .collect();
      image.insert(m.mul_vec(&v).iter().map(|(i, a)| (*i, a.value())).collect::<Vec<_>>());
    }
    let mut k = 0;
    while (P as usize).pow(k) < image.len() {
      k += 1;
    }
    k as usize
  }

  fn random_complex<const P: u64>(rng: &mut impl rand::Rng) -> CochainComplex<Fp<P>> {
    use crate::scalar::Scalar as _;
    let len = rng.gen_range(1..=4usize);
    let mut ranks = vec![rng.gen_range(0..=3usize)];
    let mut diffs: Vec<SparseMat<Fp<P>>> = Vec::new();
    for i in 1..len {
      let r = rng.gen_range(0..=3usize);
      let prev = diffs.last();
      // d = random combination of maps vanishing on im(previous)
      let m = loop {
        let cand = SparseMat::from_triplets(
          r,
          ranks[i - 1],
          (0..r)
            .flat_map(|a| (0..ranks[i - 1]).map(move |b| (a, b)))
            .map(|(a, b)| (a, b, Fp::new(rng.gen_range(0..P)))),
        );
        if prev.is_none_or(|p| cand.mul(p).is_zero()) {
          break cand;
        }
        if rng.gen_bool(0.3) {
          break SparseMat::zero(r, ranks[i - 1]);
        }
      };
      let _ = Fp::<P>::coefficients();
      diffs.push(m);
      ranks.push(r);
    }
    CochainComplex::new(0, ranks, diffs).unwrap()
  }

  fn brute_check<const P: u64>(seed: u64) {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..80 {
      let c = random_complex::<P>(&mut rng);
      let h = c.cohomology().unwrap();
      for n in c.lo()..=c.hi() {
        let dim = c.rank(n) - brute_rank(&c.d(n)) - brute_rank(&c.d(n - 1));
        assert_eq!(h.group(n).free_rank, dim);
      }
    }
  }

  #[test]
  fn cohomology_matches_brute_force() {
    brute_check::<2>(11);
    brute_check::<3>(12);
    brute_check::<5>(13);
  }

  #[test]
  fn tensor_associative_after_reindexing() {
    // the (i, j, k) lexicographic bases of (A⊗B)⊗C and A⊗(B⊗C) coincide
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
      let a = random_complex::<3>(&mut rng);
      let b = random_complex::<3>(&mut rng);
      let c = random_complex::<3>(&mut rng);
      let l = a.tensor(&b).tensor(&c);
      let r = a.tensor(&b.tensor(&c));
      assert_eq!(l.window(), r.window());
      let Some((lo, hi)) = l.window() else { continue };
      for n in lo..=hi {
        let perm = tensor_assoc_perm(&a, &b, &c, n);
        let perm1 = tensor_assoc_perm(&a, &b, &c, n + 1);
        assert_eq!(l.rank(n), perm.len());
        // l-basis index → r-basis index
        let pl = SparseMat::from_triplets(
          perm.len(),
          perm.len(),
          perm.iter().enumerate().map(|(i, j)| (*j, i, Fp::new(1))),
        );
        let pl1 = SparseMat::from_triplets(
          perm1.len(),
          perm1.len(),
          perm1.iter().enumerate().map(|(i, j)| (*j, i, Fp::new(1))),
        );
        assert_eq!(pl1.mul(&l.d(n)), r.d(n).mul(&pl));
      }
    }
  }

  /// For each basis element of ((A⊗B)⊗C)^n, its index in (A⊗(B⊗C))^n.
  fn tensor_assoc_perm<const P: u64>(
    a: &CochainComplex<Fp<P>>,
    b: &CochainComplex<Fp<P>>,
    c: &CochainComplex<Fp<P>>,
    n: i64,
  ) -> Vec<usize> {
    let ab = a.tensor(b);
    let bc = b.tensor(c);
    let mut left = Vec::new();
    for (k, _) in ab.tensor_offsets(c, n) {
      // block (A⊗B)^k ⊗ C^{n-k}; (A⊗B)^k is ordered by (i, a, b)
      for (i, _) in a.tensor_offsets(b, k) {
        for x in 0..a.rank(i) {
          for y in 0..b.rank(k - i) {
            for z in 0..c.rank(n - k) {
              left.push((i, k - i, n - k, x, y, z));
            }
          }
        }
      }
    }
    let mut right = Vec::new();
    for (i, _) in a.tensor_offsets(&bc, n) {
      for x in 0..a.rank(i) {
        for (j, _) in b.tensor_offsets(c, n - i) {
          for y in 0..b.rank(j) {
            for z in 0..c.rank(n - i - j) {
              right.push((i, j, n - i - j, x, y, z));
            }
          }
        }
      }
    }
    left.iter().map(|t| right.iter().position(|u| u == t).unwrap()).collect()
  }
}
