//! Truncated cosimplicial-simplicial modules and rings.
//!
//! A cell `(q, p)` has cosimplicial index `q` (covariant, cohomological) and
//! simplicial index `p` (contravariant, homological). `Tot^π` normalizes both
//! directions and totalizes with `Tot^n = ⊕_{q-p=n}`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::complexes::{
  check_quasi_isomorphism, tot_product, tot_product_map, Bicomplex, ChainMap, CochainComplex,
  CohomologyTable, QisVerdict,
};
use crate::error::{Error, Result};
use crate::exactlin::sparse::{axpy, collect_vec};
use crate::exactlin::{SparseMat, SparseVec};
use crate::poly::{monomials_of_degree, MonomialIndex, Poly};
use crate::scalar::Scalar;
use crate::simplicial::{
  codenormalize, denormalize, dual, ConormalizedCochains, CosimplicialModule, FiniteSimplicialSet, Monotone,
  Normalization, NormalizedChains, SimplicialModule, SymmetricPowers,
};

/// Truncated cosimplicial-simplicial module: `rows[q]` is the simplicial module
/// `A^q_*`, `cols[p]` the cosimplicial module `A^*_p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsModule<S> {
  rows: Vec<SimplicialModule<S>>,
  cols: Vec<CosimplicialModule<S>>,
}

impl<S: Scalar> CsModule<S> {
  /// Shapes and ranks are checked; identities and commutation by [`Self::verify`].
  pub fn new(rows: Vec<SimplicialModule<S>>, cols: Vec<CosimplicialModule<S>>) -> Result<Self> {
    if rows.is_empty() || cols.is_empty() {
      return Err(Error::Shape("empty cs-module".into()));
    }
    let (q_top, p_top) = (rows.len() - 1, cols.len() - 1);
    for (q, row) in rows.iter().enumerate() {
      if row.trunc() != p_top {
        return Err(Error::Shape(format!("row {q} has truncation {}, expected {p_top}", row.trunc())));
      }
      for (p, col) in cols.iter().enumerate() {
        if col.trunc() != q_top {
          return Err(Error::Shape(format!("column {p} has truncation {}, expected {q_top}", col.trunc())));
        }
        if row.rank(p) != col.rank(q) {
          return Err(Error::Shape(format!("cell ({q},{p}) rank disagrees between directions")));
        }
      }
    }
    Ok(CsModule { rows, cols })
  }

  /// Cell `(q, p) = X^q ⊗ M_p`, basis index `x * rank(M_p) + m`.
  pub fn external(x: &CosimplicialModule<S>, m: &SimplicialModule<S>) -> Self {
    let (q_top, p_top) = (x.trunc(), m.trunc());
    let rows = (0..=q_top)
      .map(|q| {
        let id = SparseMat::identity(x.rank(q));
        let mut row = SimplicialModule::from_fn(
          m.ranks().iter().map(|r| r * x.rank(q)).collect(),
          |n, i| id.kron(m.face(n, i)),
          |n, i| id.kron(m.degeneracy(n, i)),
        )
        .expect("external product row");
        if let Some(a) = m.amplitude() {
          row = row.with_amplitude(a);
        }
        row
      })
      .collect();
    let cols = (0..=p_top)
      .map(|p| {
        let id = SparseMat::identity(m.rank(p));
        let mut col = CosimplicialModule::from_fn(
          x.ranks().iter().map(|r| r * m.rank(p)).collect(),
          |n, i| x.coface(n, i).kron(&id),
          |n, i| x.codegeneracy(n, i).kron(&id),
        )
        .expect("external product column");
        if let Some(a) = x.amplitude() {
          col = col.with_amplitude(a);
        }
        col
      })
      .collect();
    CsModule::new(rows, cols).expect("external product")
  }

  pub fn constant(rank: usize, q_trunc: usize, p_trunc: usize) -> Self {
    Self::external(&CosimplicialModule::constant(rank, q_trunc), &SimplicialModule::constant(1, p_trunc))
  }

  pub fn simplicially_constant(x: &CosimplicialModule<S>, p_trunc: usize) -> Self {
    Self::external(x, &SimplicialModule::constant(1, p_trunc))
  }

  pub fn cosimplicially_constant(m: &SimplicialModule<S>, q_trunc: usize) -> Self {
    Self::external(&CosimplicialModule::constant(1, q_trunc), m)
  }

  pub fn zero(q_trunc: usize, p_trunc: usize) -> Self {
    Self::constant(0, q_trunc, p_trunc)
  }

  pub fn q_trunc(&self) -> usize {
    self.rows.len() - 1
  }

  pub fn p_trunc(&self) -> usize {
    self.cols.len() - 1
  }

  pub fn rank(&self, q: usize, p: usize) -> usize {
    self.rows[q].rank(p)
  }

  pub fn row(&self, q: usize) -> &SimplicialModule<S> {
    &self.rows[q]
  }

  pub fn col(&self, p: usize) -> &CosimplicialModule<S> {
    &self.cols[p]
  }

  /// Normalized chains vanish above the truncation in every row.
  pub fn p_exact(&self) -> bool {
    self.rows.iter().all(|r| r.amplitude().is_some_and(|a| a <= self.p_trunc()))
  }

  /// Conormalized cochains vanish above the truncation in every column.
  pub fn q_exact(&self) -> bool {
    self.cols.iter().all(|c| c.amplitude().is_some_and(|a| a <= self.q_trunc()))
  }

  /// Simplicial and cosimplicial identities, and strict commutation of the two directions.
  pub fn verify(&self) -> Result<()> {
    for row in &self.rows {
      row.verify()?;
    }
    for col in &self.cols {
      col.verify()?;
    }
    let (q_top, p_top) = (self.q_trunc(), self.p_trunc());
    let fail = |what: String| Err(Error::Invariant(format!("directions do not commute: {what}")));
    for q in 0..=q_top {
      for p in 0..=p_top {
        for i in 0..self.cols[p].coface_count(q) {
          let up = self.cols[p].coface(q, i);
          for j in 0..self.rows[q].face_count(p) {
            let down = self.cols[p - 1].coface(q, i).mul(self.rows[q].face(p, j));
            if self.rows[q + 1].face(p, j).mul(up) != down {
              return fail(format!("d^{i} d_{j} at ({q},{p})"));
            }
          }
          if p < p_top {
            for j in 0..=p {
              let lhs = self.rows[q + 1].degeneracy(p, j).mul(up);
              let rhs = self.cols[p + 1].coface(q, i).mul(self.rows[q].degeneracy(p, j));
              if lhs != rhs {
                return fail(format!("d^{i} s_{j} at ({q},{p})"));
              }
            }
          }
        }
        for i in 0..q {
          let down_q = self.cols[p].codegeneracy(q, i);
          for j in 0..self.rows[q].face_count(p) {
            if self.rows[q - 1].face(p, j).mul(down_q)
              != self.cols[p - 1].codegeneracy(q, i).mul(self.rows[q].face(p, j))
            {
              return fail(format!("s^{i} d_{j} at ({q},{p})"));
            }
          }
          if p < p_top {
            for j in 0..=p {
              let lhs = self.rows[q - 1].degeneracy(p, j).mul(down_q);
              let rhs = self.cols[p + 1].codegeneracy(q, i).mul(self.rows[q].degeneracy(p, j));
              if lhs != rhs {
                return fail(format!("s^{i} s_{j} at ({q},{p})"));
              }
            }
          }
        }
      }
    }
    Ok(())
  }

  pub fn direct_sum(&self, other: &Self) -> Result<Self> {
    self.check_same_window(other)?;
    let rows = self.rows.iter().zip(&other.rows).map(|(a, b)| a.direct_sum(b)).collect();
    let cols = self.cols.iter().zip(&other.cols).map(|(a, b)| a.direct_sum(b)).collect();
    CsModule::new(rows, cols)
  }

  /// Levelwise tensor product in both directions; basis index `a * rank' + b`.
  pub fn tensor(&self, other: &Self) -> Result<Self> {
    self.check_same_window(other)?;
    let rows = self.rows.iter().zip(&other.rows).map(|(a, b)| a.tensor(b)).collect();
    let cols = self.cols.iter().zip(&other.cols).map(|(a, b)| a.tensor(b)).collect();
    CsModule::new(rows, cols)
  }

  fn check_same_window(&self, other: &Self) -> Result<()> {
    if (self.q_trunc(), self.p_trunc()) != (other.q_trunc(), other.p_trunc()) {
      return Err(Error::WindowMismatch(format!(
        "truncations ({}, {}) and ({}, {})",
        self.q_trunc(),
        self.p_trunc(),
        other.q_trunc(),
        other.p_trunc()
      )));
    }
    Ok(())
  }

  /// Levelwise `Sym^w` in both directions, on monomial bases.
  pub fn sym_power(&self, w: usize) -> Result<Self> {
    let rows = self
      .rows
      .iter()
      .map(|r| Ok(SymmetricPowers::new(r.clone(), w)?.piece(w).clone()))
      .collect::<Result<Vec<_>>>()?;
    let cols = self.cols.iter().map(|c| c.sym_power(w)).collect();
    CsModule::new(rows, cols)
  }

  /// Cellwise matrices of a map into `target`, checked against all structure maps.
  pub fn check_map(&self, target: &Self, cells: &CellMap<S>) -> Result<()> {
    self.check_same_window(target)?;
    for q in 0..=self.q_trunc() {
      for p in 0..=self.p_trunc() {
        let f = cells.at(q, p);
        if f.cols() != self.rank(q, p) || f.rows() != target.rank(q, p) {
          return Err(Error::Shape(format!("map at cell ({q},{p})")));
        }
        for j in 0..self.rows[q].face_count(p) {
          if target.rows[q].face(p, j).mul(f) != cells.at(q, p - 1).mul(self.rows[q].face(p, j)) {
            return Err(Error::Invariant(format!("map does not commute with d_{j} at ({q},{p})")));
          }
        }
        if p < self.p_trunc() {
          for j in 0..=p {
            if target.rows[q].degeneracy(p, j).mul(f) != cells.at(q, p + 1).mul(self.rows[q].degeneracy(p, j))
            {
              return Err(Error::Invariant(format!("map does not commute with s_{j} at ({q},{p})")));
            }
          }
        }
        for i in 0..self.cols[p].coface_count(q) {
          if target.cols[p].coface(q, i).mul(f) != cells.at(q + 1, p).mul(self.cols[p].coface(q, i)) {
            return Err(Error::Invariant(format!("map does not commute with d^{i} at ({q},{p})")));
          }
        }
        for i in 0..q {
          if target.cols[p].codegeneracy(q, i).mul(f)
            != cells.at(q - 1, p).mul(self.cols[p].codegeneracy(q, i))
          {
            return Err(Error::Invariant(format!("map does not commute with s^{i} at ({q},{p})")));
          }
        }
      }
    }
    Ok(())
  }
}

/// Cellwise matrices `cells[q][p]` of a map of cs-modules.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellMap<S> {
  pub cells: Vec<Vec<SparseMat<S>>>,
}

impl<S: Scalar> CellMap<S> {
  pub fn from_fn(q_trunc: usize, p_trunc: usize, f: impl Fn(usize, usize) -> SparseMat<S>) -> Self {
    CellMap { cells: (0..=q_trunc).map(|q| (0..=p_trunc).map(|p| f(q, p)).collect()).collect() }
  }

  pub fn identity(a: &CsModule<S>) -> Self {
    Self::from_fn(a.q_trunc(), a.p_trunc(), |q, p| SparseMat::identity(a.rank(q, p)))
  }

  pub fn at(&self, q: usize, p: usize) -> &SparseMat<S> {
    &self.cells[q][p]
  }

  pub fn compose(&self, first: &CellMap<S>) -> Self {
    CellMap {
      cells: self
        .cells
        .iter()
        .zip(&first.cells)
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.mul(y)).collect())
        .collect(),
    }
  }
}

/// Both normalizations of a cs-module and the resulting bicomplex.
#[derive(Clone, Debug)]
pub struct Totalization<S> {
  rows: Vec<NormalizedChains<S>>,
  cols: Vec<ConormalizedCochains<S>>,
  pub bicomplex: Bicomplex<S>,
  pub complex: CochainComplex<S>,
}

/// Normalize along `p`, then conormalize along `q`, assemble and totalize.
pub fn totalize<S: Scalar>(a: &CsModule<S>) -> Result<Totalization<S>> {
  let (q_top, p_top) = (a.q_trunc(), a.p_trunc());
  let mode = if a.rows.iter().all(SimplicialModule::has_monomial_degeneracies) {
    Normalization::DegeneracyQuotient
  } else {
    Normalization::Kernel
  };
  let rows: Vec<NormalizedChains<S>> =
    a.rows.iter().map(|r| r.normalize_with(mode)).collect::<Result<_>>()?;
  let dim = |q: usize, p: usize| rows[q].complex.rank(-(p as i64));
  let mut cols = Vec::with_capacity(p_top + 1);
  for p in 0..=p_top {
    let col = &a.cols[p];
    let cofaces = (0..q_top)
      .map(|q| {
        (0..q + 2).map(|i| rows[q].induced(&rows[q + 1], p, col.coface(q, i))).collect::<Result<Vec<_>>>()
      })
      .collect::<Result<Vec<_>>>()?;
    let codegens = (0..=q_top)
      .map(|q| {
        (0..q).map(|i| rows[q].induced(&rows[q - 1], p, col.codegeneracy(q, i))).collect::<Result<Vec<_>>>()
      })
      .collect::<Result<Vec<_>>>()?;
    let mut m = CosimplicialModule::new((0..=q_top).map(|q| dim(q, p)).collect(), cofaces, codegens)?;
    if let Some(amp) = col.amplitude() {
      m = m.with_amplitude(amp);
    }
    cols.push(m.normalize()?);
  }
  let mut b = Bicomplex::new((0, q_top as i64), (0, p_top as i64));
  b.q_exact = a.q_exact();
  b.p_exact = a.p_exact();
  for q in 0..=q_top {
    for p in 0..=p_top {
      let (qi, pi) = (q as i64, p as i64);
      b.set_rank(qi, pi, cols[p].complex.rank(qi));
      if q < q_top {
        b.set_d_h(qi, pi, cols[p].complex.d(qi));
      }
      if p > 0 {
        let boundary = rows[q].boundary(p);
        b.set_d_v(qi, pi, cols[p].induced(&cols[p - 1], q, &boundary)?);
      }
    }
  }
  let complex = tot_product(&b)?;
  Ok(Totalization { rows, cols, bicomplex: b, complex })
}

pub fn tot_pi<S: Scalar>(a: &CsModule<S>) -> Result<CochainComplex<S>> {
  Ok(totalize(a)?.complex)
}

/// `Tot^π` of a map of cs-modules, as a chain map of the two totalizations.
pub fn tot_pi_map<S: Scalar>(
  source: &Totalization<S>,
  target: &Totalization<S>,
  f: &CellMap<S>,
) -> Result<ChainMap<S>> {
  let (q_range, p_range) = (source.bicomplex.q_range(), source.bicomplex.p_range());
  if (q_range, p_range) != (target.bicomplex.q_range(), target.bicomplex.p_range()) {
    return Err(Error::WindowMismatch("totalizations of different truncations".into()));
  }
  let mut cells = BTreeMap::new();
  for q in 0..=q_range.1 as usize {
    for p in 0..=p_range.1 as usize {
      let on_rows = source.rows[q].induced(&target.rows[q], p, f.at(q, p))?;
      cells.insert((q as i64, p as i64), source.cols[p].induced(&target.cols[p], q, &on_rows)?);
    }
  }
  tot_product_map(&source.bicomplex, &target.bicomplex, &cells)
}

/// Whether `f : A → B` induces an isomorphism on `Tot^π` cohomology in the
/// degrees both sides trust.
pub fn is_completed_qis<S: Scalar>(
  source: &CsModule<S>,
  target: &CsModule<S>,
  f: &CellMap<S>,
) -> Result<QisVerdict> {
  source.check_map(target, f)?;
  let (ts, tt) = (totalize(source)?, totalize(target)?);
  check_quasi_isomorphism(&tot_pi_map(&ts, &tt, f)?)
}

/// `(A^K)^q_p = (A^q_p)^{K_q}`; block `k` of cell `(q, p)` is the copy indexed by
/// the `k`-th simplex of `K_q`.
pub fn cotensor<S: Scalar>(a: &CsModule<S>, k: &FiniteSimplicialSet) -> Result<CsModule<S>> {
  let (q_top, p_top) = (a.q_trunc(), a.p_trunc());
  if k.trunc() < q_top + 1 {
    return Err(Error::InsufficientTruncation(format!(
      "{} must be truncated at level ≥ {}",
      k.name,
      q_top + 1
    )));
  }
  let rows = (0..=q_top)
    .map(|q| {
      let id = SparseMat::identity(k.count(q));
      let row = &a.rows[q];
      let mut out = SimplicialModule::from_fn(
        row.ranks().iter().map(|r| r * k.count(q)).collect(),
        |n, i| id.kron(row.face(n, i)),
        |n, i| id.kron(row.degeneracy(n, i)),
      )?;
      if let Some(amp) = row.amplitude() {
        out = out.with_amplitude(amp);
      }
      Ok(out)
    })
    .collect::<Result<Vec<_>>>()?;
  let cols = (0..=p_top)
    .map(|p| {
      let col = &a.cols[p];
      let r = |q: usize| col.rank(q);
      let coface = |n: usize, i: usize| {
        let m = col.coface(n, i);
        let blocks: Vec<(usize, usize)> =
          (0..k.count(n + 1)).map(|kk| (kk * r(n + 1), k.face(n + 1, i, kk) * r(n))).collect();
        SparseMat::from_blocks(
          k.count(n + 1) * r(n + 1),
          k.count(n) * r(n),
          blocks.iter().map(|(ro, co)| (*ro, *co, m)),
        )
      };
      let codegen = |n: usize, i: usize| {
        let m = col.codegeneracy(n, i);
        let blocks: Vec<(usize, usize)> =
          (0..k.count(n - 1)).map(|kk| (kk * r(n - 1), k.degeneracy(n - 1, i, kk) * r(n))).collect();
        SparseMat::from_blocks(
          k.count(n - 1) * r(n - 1),
          k.count(n) * r(n),
          blocks.iter().map(|(ro, co)| (*ro, *co, m)),
        )
      };
      let mut out =
        CosimplicialModule::from_fn((0..=q_top).map(|q| r(q) * k.count(q)).collect(), coface, codegen)?;
      if let Some(amp) = col.amplitude() {
        out = out.with_amplitude(amp + k.dimension());
      }
      Ok(out)
    })
    .collect::<Result<Vec<_>>>()?;
  CsModule::new(rows, cols)
}

/// `A^K → A^L` induced by a simplicial map `L → K` given on simplices.
pub fn cotensor_restriction<S: Scalar>(
  a: &CsModule<S>,
  k: &FiniteSimplicialSet,
  l: &FiniteSimplicialSet,
  along: impl Fn(usize, usize) -> usize,
) -> CellMap<S> {
  CellMap::from_fn(a.q_trunc(), a.p_trunc(), |q, p| {
    let r = a.rank(q, p);
    let id = SparseMat::identity(r);
    let blocks: Vec<(usize, usize)> = (0..l.count(q)).map(|s| (s * r, along(q, s) * r)).collect();
    SparseMat::from_blocks(l.count(q) * r, k.count(q) * r, blocks.iter().map(|(ro, co)| (*ro, *co, &id)))
  })
}

/// Constant-map morphism `A → A^K` (restriction along `K → Δ⁰`).
pub fn constant_map<S: Scalar>(a: &CsModule<S>, k: &FiniteSimplicialSet) -> CellMap<S> {
  let point = FiniteSimplicialSet::delta0(k.trunc());
  cotensor_restriction(a, &point, k, |_, _| 0)
}

/// Finite-limit cotensor `Tot^π(A)^K = Tot^π(A) ⊗ N^*(K)`.
pub fn complex_cotensor<S: Scalar>(
  e: &CochainComplex<S>,
  k: &FiniteSimplicialSet,
) -> Result<CochainComplex<S>> {
  Ok(e.tensor(&k.cochains()?))
}

/// Both sides of the comparison `Tot^π(A^K) ≃ Tot^π(A)^K`.
pub fn cotensor_comparison<S: Scalar>(a: &CsModule<S>, k: &FiniteSimplicialSet) -> Result<QisVerdict> {
  let left = tot_pi(&cotensor(a, k)?)?.cohomology()?;
  let right = complex_cotensor(&tot_pi(a)?, k)?.cohomology()?;
  Ok(QisVerdict::from_tables(left, right))
}

/// Levelwise surjectivity of every cell of a map.
pub fn is_levelwise_surjective<S: Scalar>(f: &CellMap<S>) -> bool {
  f.cells.iter().flatten().all(|m| m.rows() == 0 || S::cokernel(m).is_some_and(|(proj, _)| proj.rows() == 0))
}

/// `A → A^{Δ¹} → A^{∂Δ¹} = A × A`.
#[derive(Clone, Debug)]
pub struct PathObject<S> {
  pub path: CsModule<S>,
  pub ends: CsModule<S>,
  pub constant: CellMap<S>,
  pub restriction: CellMap<S>,
}

/// Outcome of checking the path-object contract.
#[derive(Clone, Debug)]
pub struct PathReport {
  pub constant_verdict: QisVerdict,
  pub restriction_surjective: bool,
  pub composite_is_diagonal: bool,
}

impl PathReport {
  pub fn passed(&self) -> bool {
    self.constant_verdict.is_equivalent() && self.restriction_surjective && self.composite_is_diagonal
  }
}

pub fn path_object<S: Scalar>(a: &CsModule<S>) -> Result<PathObject<S>> {
  let top = a.q_trunc() + 1;
  let interval = FiniteSimplicialSet::delta1(top);
  let boundary = FiniteSimplicialSet::boundary_delta1(top);
  let path = cotensor(a, &interval)?;
  let ends = cotensor(a, &boundary)?;
  let constant = constant_map(a, &interval);
  let restriction = cotensor_restriction(a, &interval, &boundary, |q, s| {
    interval.find(q, boundary.simplex(q, s)).expect("∂Δ¹ ⊂ Δ¹")
  });
  Ok(PathObject { path, ends, constant, restriction })
}

impl<S: Scalar> PathObject<S> {
  pub fn check(&self, a: &CsModule<S>) -> Result<PathReport> {
    let constant_verdict = is_completed_qis(a, &self.path, &self.constant)?;
    self.path.check_map(&self.ends, &self.restriction)?;
    let restriction_surjective = is_levelwise_surjective(&self.restriction);
    let diagonal = constant_map(a, &FiniteSimplicialSet::boundary_delta1(a.q_trunc() + 1));
    let composite_is_diagonal = self.restriction.compose(&self.constant) == diagonal;
    Ok(PathReport { constant_verdict, restriction_surjective, composite_is_diagonal })
  }
}

/// Normalized chains `N_*(Δ^n)` in degrees `-n..=0`; degree `-j` has the
/// `(j+1)`-element subsets of `[n]` in lexicographic order.
pub fn simplex_chains<S: Scalar>(n: usize) -> CochainComplex<S> {
  let faces: Vec<Vec<Vec<usize>>> = (0..=n).map(|j| subsets(n + 1, j + 1)).collect();
  let index: Vec<HashMap<&Vec<usize>, usize>> =
    faces.iter().map(|l| l.iter().enumerate().map(|(i, s)| (s, i)).collect()).collect();
  // d^{-j}: degree -j → -j+1 is the boundary N_j → N_{j-1}
  let diffs = (1..=n)
    .rev()
    .map(|j| {
      let entries = faces[j].iter().enumerate().flat_map(|(c, s)| {
        let index = &index;
        (0..s.len()).map(move |i| {
          let mut t = s.clone();
          t.remove(i);
          (index[j - 1][&t], c, if i % 2 == 0 { S::one() } else { -S::one() })
        })
      });
      SparseMat::from_triplets(faces[j - 1].len(), faces[j].len(), entries)
    })
    .collect();
  CochainComplex::new(-(n as i64), (0..=n).rev().map(|j| faces[j].len()).collect(), diffs)
    .expect("simplex chains")
}

/// Pushforward `N_j(Δ^m) → N_j(Δ^n)` along `θ : [m] → [n]` (degenerate images vanish).
pub fn simplex_pushforward<S: Scalar>(theta: &Monotone, j: usize) -> SparseMat<S> {
  let src = subsets(theta.source() + 1, j + 1);
  let tgt = subsets(theta.target + 1, j + 1);
  let pos: HashMap<&Vec<usize>, usize> = tgt.iter().enumerate().map(|(i, s)| (s, i)).collect();
  let entries = src.iter().enumerate().filter_map(|(c, s)| {
    let image: Vec<usize> = s.iter().map(|v| theta.values[*v]).collect();
    image.windows(2).all(|w| w[0] < w[1]).then(|| (pos[&image], c, S::one()))
  });
  SparseMat::from_triplets(tgt.len(), src.len(), entries)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
  let mut out = Vec::new();
  fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == k {
      out.push(cur.clone());
      return;
    }
    for v in start..n {
      cur.push(v);
      rec(v + 1, n, k, cur, out);
      cur.pop();
    }
  }
  rec(0, n, k, &mut Vec::new(), &mut out);
  out
}

/// Map `(C ⊗ D)^n → (C' ⊗ D')^n` induced by degreewise maps `f_c`, `f_d`.
fn tensor_map<S: Scalar>(
  c: (&CochainComplex<S>, &CochainComplex<S>),
  d: (&CochainComplex<S>, &CochainComplex<S>),
  f_c: &dyn Fn(i64) -> SparseMat<S>,
  f_d: &dyn Fn(i64) -> SparseMat<S>,
  n: i64,
) -> SparseMat<S> {
  let src: Vec<(i64, usize)> = c.0.tensor_offsets(d.0, n);
  let tgt: HashMap<i64, usize> = c.1.tensor_offsets(d.1, n).into_iter().collect();
  let rows: usize = c.1.window().map_or(0, |(a, b)| (a..=b).map(|i| c.1.rank(i) * d.1.rank(n - i)).sum());
  let cols: usize = c.0.window().map_or(0, |(a, b)| (a..=b).map(|i| c.0.rank(i) * d.0.rank(n - i)).sum());
  let blocks: Vec<(usize, usize, SparseMat<S>)> =
    src.iter().filter_map(|(i, off)| tgt.get(i).map(|t| (*t, *off, f_c(*i).kron(&f_d(n - i))))).collect();
  SparseMat::from_blocks(rows, cols, blocks.iter().map(|(r, o, m)| (*r, *o, m)))
}

/// The cs-module `φ(E)`: cell `(q, p)` is `(N_*(Δ^q) ⊗ N^*(Δ^p) ⊗ E)^0 / Im d^{-1}`.
///
/// `N_*(Δ^q)` is covariant in `q` and `N^*(Δ^p)` contravariant in `p`, so the
/// cosimplicial index is the one carried by chains.
pub fn phi<S: Scalar>(e: &CochainComplex<S>, q_trunc: usize, p_trunc: usize) -> Result<CsModule<S>> {
  if e.window().is_none() {
    return Ok(CsModule::zero(q_trunc, p_trunc));
  }
  let chains: Vec<CochainComplex<S>> = (0..=q_trunc + 1).map(simplex_chains).collect();
  let cochains: Vec<CochainComplex<S>> =
    (0..=p_trunc + 1).map(|p| dual(&simplex_chains::<S>(p))).collect::<Result<_>>()?;
  let pairs: Vec<Vec<CochainComplex<S>>> =
    (0..=q_trunc).map(|q| (0..=p_trunc).map(|p| chains[q].tensor(&cochains[p])).collect()).collect();
  let mut quotients: Vec<Vec<(SparseMat<S>, SparseMat<S>)>> = Vec::new();
  for q in 0..=q_trunc {
    let mut row = Vec::new();
    for p in 0..=p_trunc {
      let w = pairs[q][p].tensor(e);
      let d = w.d(-1);
      row.push(S::cokernel(&d).ok_or_else(|| Error::Invariant(format!("φ cell ({q},{p}) is not free")))?);
    }
    quotients.push(row);
  }
  let id_e = |i: i64| SparseMat::identity(e.rank(i));
  // level map on W^0 induced by maps on N_*(Δ^q) and N^*(Δ^p)
  let on_w = |src: (usize, usize),
              tgt: (usize, usize),
              fa: &dyn Fn(i64) -> SparseMat<S>,
              fb: &dyn Fn(i64) -> SparseMat<S>| {
    let f_pair =
      |i: i64| tensor_map((&chains[src.0], &chains[tgt.0]), (&cochains[src.1], &cochains[tgt.1]), fa, fb, i);
    let m = tensor_map((&pairs[src.0][src.1], &pairs[tgt.0][tgt.1]), (e, e), &f_pair, &id_e, 0);
    let (proj, _) = &quotients[tgt.0][tgt.1];
    let (_, section) = &quotients[src.0][src.1];
    proj.mul(&m).mul(section)
  };
  let rank = |q: usize, p: usize| quotients[q][p].0.rows();
  let rows = (0..=q_trunc)
    .map(|q| {
      let id_a = |i: i64| SparseMat::identity(chains[q].rank(i));
      let face = |n: usize, i: usize| {
        let theta = Monotone::coface(n, i);
        let fb = |k: i64| simplex_pushforward::<S>(&theta, k as usize).transpose();
        on_w((q, n), (q, n - 1), &id_a, &fb)
      };
      let degen = |n: usize, i: usize| {
        let theta = Monotone::codegeneracy(n, i);
        let fb = |k: i64| simplex_pushforward::<S>(&theta, k as usize).transpose();
        on_w((q, n), (q, n + 1), &id_a, &fb)
      };
      SimplicialModule::from_fn((0..=p_trunc).map(|p| rank(q, p)).collect(), face, degen)
    })
    .collect::<Result<Vec<_>>>()?;
  let cols = (0..=p_trunc)
    .map(|p| {
      let id_b = |k: i64| SparseMat::identity(cochains[p].rank(k));
      let coface = |n: usize, i: usize| {
        let theta = Monotone::coface(n + 1, i);
        let fa = |j: i64| simplex_pushforward::<S>(&theta, (-j) as usize);
        on_w((n, p), (n + 1, p), &fa, &id_b)
      };
      let codegen = |n: usize, i: usize| {
        let theta = Monotone::codegeneracy(n - 1, i);
        let fa = |j: i64| simplex_pushforward::<S>(&theta, (-j) as usize);
        on_w((n, p), (n - 1, p), &fa, &id_b)
      };
      CosimplicialModule::from_fn((0..=q_trunc).map(|q| rank(q, p)).collect(), coface, codegen)
    })
    .collect::<Result<Vec<_>>>()?;
  CsModule::new(rows, cols)
}

/// Cellwise multiplication of a weight-graded cs-ring.
pub trait CellProduct<S>: fmt::Debug + Send + Sync {
  /// Product of `x` in weight `a` and `y` in weight `b` at cell `(q, p)`;
  /// `None` when weight `a + b` is not materialized.
  fn mul(
    &self,
    a: i64,
    b: i64,
    q: usize,
    p: usize,
    x: &SparseVec<S>,
    y: &SparseVec<S>,
  ) -> Option<SparseVec<S>>;
}

/// Weight-graded cs-ring: a cs-module per weight and a cellwise product.
#[derive(Clone, Debug)]
pub struct CsRing<S> {
  pieces: BTreeMap<i64, CsModule<S>>,
  product: Arc<dyn CellProduct<S>>,
}

impl<S: Scalar> CsRing<S> {
  pub fn new(pieces: BTreeMap<i64, CsModule<S>>, product: Arc<dyn CellProduct<S>>) -> Result<Self> {
    let mut windows = pieces.values().map(|m| (m.q_trunc(), m.p_trunc()));
    if let Some(first) = windows.next() {
      if windows.any(|w| w != first) {
        return Err(Error::WindowMismatch("weight pieces with different truncations".into()));
      }
    }
    Ok(CsRing { pieces, product })
  }

  pub fn weights(&self) -> Vec<i64> {
    self.pieces.keys().copied().collect()
  }

  pub fn piece(&self, w: i64) -> Option<&CsModule<S>> {
    self.pieces.get(&w)
  }

  pub fn pieces(&self) -> &BTreeMap<i64, CsModule<S>> {
    &self.pieces
  }

  pub fn product(&self) -> Arc<dyn CellProduct<S>> {
    self.product.clone()
  }

  pub fn window(&self) -> Option<(usize, usize)> {
    self.pieces.values().next().map(|m| (m.q_trunc(), m.p_trunc()))
  }

  pub fn multiply(
    &self,
    a: i64,
    b: i64,
    q: usize,
    p: usize,
    x: &SparseVec<S>,
    y: &SparseVec<S>,
  ) -> Option<SparseVec<S>> {
    self.product.mul(a, b, q, p, x, y)
  }

  /// `Tot^π` of one weight piece.
  pub fn tot_pi(&self, w: i64) -> Result<CochainComplex<S>> {
    match self.pieces.get(&w) {
      Some(m) => tot_pi(m),
      None => Ok(CochainComplex::zero()),
    }
  }

  /// Check that every structure map is multiplicative on basis vectors, for
  /// all pairs of materialized weights whose sum is materialized.
  pub fn verify_multiplicative(&self) -> Result<()> {
    let Some((q_top, p_top)) = self.window() else { return Ok(()) };
    for (a, ma) in &self.pieces {
      for (b, mb) in &self.pieces {
        let Some(mc) = self.pieces.get(&(a + b)) else { continue };
        for q in 0..=q_top {
          for p in 0..=p_top {
            for i in 0..ma.rank(q, p) {
              for j in 0..mb.rank(q, p) {
                let (x, y) = (vec![(i, S::one())], vec![(j, S::one())]);
                let Some(xy) = self.multiply(*a, *b, q, p, &x, &y) else { continue };
                let check = |fa: &SparseMat<S>,
                             fb: &SparseMat<S>,
                             fc: &SparseMat<S>,
                             q2: usize,
                             p2: usize,
                             what: &str| {
                  let lhs = fc.mul_vec(&xy);
                  let rhs =
                    self.multiply(*a, *b, q2, p2, &fa.mul_vec(&x), &fb.mul_vec(&y)).unwrap_or_default();
                  if lhs != rhs {
                    return Err(Error::Invariant(format!(
                      "{what} is not multiplicative at ({q},{p}) in weights {a},{b}"
                    )));
                  }
                  Ok(())
                };
                for k in 0..ma.row(q).face_count(p) {
                  check(ma.row(q).face(p, k), mb.row(q).face(p, k), mc.row(q).face(p, k), q, p - 1, "face")?;
                }
                for k in 0..ma.col(p).coface_count(q) {
                  check(
                    ma.col(p).coface(q, k),
                    mb.col(p).coface(q, k),
                    mc.col(p).coface(q, k),
                    q + 1,
                    p,
                    "coface",
                  )?;
                }
              }
            }
          }
        }
      }
    }
    Ok(())
  }
}

/// Product on levelwise symmetric algebras: weight `sign · w` is `Sym^w(V)`.
#[derive(Debug)]
pub struct SymProduct {
  sign: i64,
  nvars: Vec<Vec<usize>>,
  indices: HashMap<(usize, usize, usize), MonomialIndex>,
}

impl SymProduct {
  fn weight(&self, a: i64) -> Option<usize> {
    if a == 0 || a.signum() == self.sign {
      Some(a.unsigned_abs() as usize)
    } else {
      None
    }
  }
}

impl<S: Scalar> CellProduct<S> for SymProduct {
  fn mul(
    &self,
    a: i64,
    b: i64,
    q: usize,
    p: usize,
    x: &SparseVec<S>,
    y: &SparseVec<S>,
  ) -> Option<SparseVec<S>> {
    let (wa, wb) = (self.weight(a)?, self.weight(b)?);
    let idx = |w: usize| self.indices.get(&(q, p, w));
    let (ia, ib, ic) = (idx(wa)?, idx(wb)?, idx(wa + wb)?);
    let nv = self.nvars[q][p];
    let to_poly = |v: &SparseVec<S>, ix: &MonomialIndex| {
      let mut poly = Poly::zero(nv);
      for (i, c) in v {
        poly.add_term(ix.monomial(*i).clone(), c.clone());
      }
      poly
    };
    let prod = to_poly(x, ia).mul(&to_poly(y, ib));
    Some(collect_vec(
      prod.terms().map(|(m, c)| (ic.get(m).expect("monomial of the product weight"), c.clone())),
    ))
  }
}

/// Levelwise symmetric algebra on `V`, weights `sign · w` for `w ≤ max_weight`.
pub fn symmetric_algebra<S: Scalar>(v: &CsModule<S>, max_weight: usize, sign: i64) -> Result<CsRing<S>> {
  let (q_top, p_top) = (v.q_trunc(), v.p_trunc());
  let mut pieces = BTreeMap::new();
  for w in 0..=max_weight {
    pieces.insert(sign * w as i64, v.sym_power(w)?);
  }
  let nvars: Vec<Vec<usize>> = (0..=q_top).map(|q| (0..=p_top).map(|p| v.rank(q, p)).collect()).collect();
  let mut indices = HashMap::new();
  for q in 0..=q_top {
    for p in 0..=p_top {
      for w in 0..=max_weight {
        indices.insert((q, p, w), MonomialIndex::new(monomials_of_degree(nvars[q][p], w as u32)));
      }
    }
  }
  CsRing::new(pieces, Arc::new(SymProduct { sign, nvars, indices }))
}

/// Product on levelwise tensor algebras: weight `sign · n` is `V^{⊗n}`,
/// multiplied by concatenation.
#[derive(Debug)]
pub struct TensorProduct {
  sign: i64,
  gen_ranks: Vec<Vec<usize>>,
  max_weight: usize,
}

impl<S: Scalar> CellProduct<S> for TensorProduct {
  fn mul(
    &self,
    a: i64,
    b: i64,
    q: usize,
    p: usize,
    x: &SparseVec<S>,
    y: &SparseVec<S>,
  ) -> Option<SparseVec<S>> {
    let weight = |w: i64| (w == 0 || w.signum() == self.sign).then_some(w.unsigned_abs() as u32);
    let (wa, wb) = (weight(a)?, weight(b)?);
    if (wa + wb) as usize > self.max_weight {
      return None;
    }
    let width = self.gen_ranks[q][p].pow(wb);
    Some(collect_vec(
      x.iter().flat_map(|(i, u)| y.iter().map(move |(j, v)| (i * width + j, u.clone() * v.clone()))),
    ))
  }
}

/// Levelwise tensor algebra on `V`, weights `sign · n` for `n ≤ max_weight`.
pub fn tensor_algebra<S: Scalar>(v: &CsModule<S>, max_weight: usize, sign: i64) -> Result<CsRing<S>> {
  let mut pieces = BTreeMap::new();
  let mut power = CsModule::constant(1, v.q_trunc(), v.p_trunc());
  for n in 0..=max_weight {
    if n > 0 {
      power = power.tensor(v)?;
    }
    pieces.insert(sign * n as i64, power.clone());
  }
  let gen_ranks = (0..=v.q_trunc()).map(|q| (0..=v.p_trunc()).map(|p| v.rank(q, p)).collect()).collect();
  CsRing::new(pieces, Arc::new(TensorProduct { sign, gen_ranks, max_weight }))
}

/// `ℤ[u]`: weight `n ≥ 0` is `K(ℤ[-2])^{⊗n}`, simplicially constant.
pub fn z_u<S: Scalar>(max_weight: usize, q_trunc: usize, p_trunc: usize) -> Result<CsRing<S>> {
  let k = codenormalize(&CochainComplex::<S>::unit(2), q_trunc)?;
  tensor_algebra(&CsModule::simplicially_constant(&k, p_trunc), max_weight, 1)
}

/// `ℤ[v]`: weight `-n ≤ 0` is `Sym^n Γ(ℤ[2])`, cosimplicially constant.
pub fn z_v<S: Scalar>(max_weight: usize, q_trunc: usize, p_trunc: usize) -> Result<CsRing<S>> {
  let g = denormalize(&CochainComplex::<S>::unit(-2), p_trunc)?;
  symmetric_algebra(&CsModule::cosimplicially_constant(&g, q_trunc), max_weight, -1)
}

/// Product of a fiber product over the constant ring: positive weights from one
/// factor, negative from the other, weight 0 the ground ring.
#[derive(Debug)]
pub struct FiberProduct<S> {
  positive: Arc<dyn CellProduct<S>>,
  negative: Arc<dyn CellProduct<S>>,
}

impl<S: Scalar> CellProduct<S> for FiberProduct<S> {
  fn mul(
    &self,
    a: i64,
    b: i64,
    q: usize,
    p: usize,
    x: &SparseVec<S>,
    y: &SparseVec<S>,
  ) -> Option<SparseVec<S>> {
    if a > 0 && b < 0 || a < 0 && b > 0 {
      return Some(Vec::new());
    }
    if a > 0 || b > 0 {
      self.positive.mul(a, b, q, p, x, y)
    } else if a < 0 || b < 0 {
      self.negative.mul(a, b, q, p, x, y)
    } else {
      self.positive.mul(0, 0, q, p, x, y)
    }
  }
}

/// `ℤ⟨u,v⟩ = ℤ[v] ×_ℤ ℤ[u]`, weights `-max_weight..=max_weight`.
pub fn build_zuv<S: Scalar>(max_weight: usize, q_trunc: usize, p_trunc: usize) -> Result<CsRing<S>> {
  let u = z_u::<S>(max_weight, q_trunc, p_trunc)?;
  let v = z_v::<S>(max_weight, q_trunc, p_trunc)?;
  let mut pieces = u.pieces.clone();
  for (w, m) in &v.pieces {
    if *w < 0 {
      pieces.insert(*w, m.clone());
    }
  }
  CsRing::new(pieces, Arc::new(FiberProduct { positive: u.product.clone(), negative: v.product.clone() }))
}

/// Product on `A ⊙ B`: `(a ⊗ b)(a' ⊗ b') = aa' ⊗ bb'`.
#[derive(Debug)]
pub struct ConvolutionProduct<S> {
  left: Arc<dyn CellProduct<S>>,
  right: Arc<dyn CellProduct<S>>,
  right_ranks: BTreeMap<i64, Vec<Vec<usize>>>,
}

impl<S: Scalar> CellProduct<S> for ConvolutionProduct<S> {
  fn mul(
    &self,
    a: i64,
    b: i64,
    q: usize,
    p: usize,
    x: &SparseVec<S>,
    y: &SparseVec<S>,
  ) -> Option<SparseVec<S>> {
    let r = |w: i64| self.right_ranks.get(&w).map(|g| g[q][p]);
    let (ra, rb, rc) = (r(a)?, r(b)?, r(a + b)?);
    let mut acc: SparseVec<S> = Vec::new();
    for (i, u) in x {
      for (j, v) in y {
        let left = self.left.mul(a, b, q, p, &vec![(i / ra, S::one())], &vec![(j / rb, S::one())])?;
        let right = self.right.mul(a, b, q, p, &vec![(i % ra, S::one())], &vec![(j % rb, S::one())])?;
        let term = collect_vec(
          left.iter().flat_map(|(l, s)| right.iter().map(move |(m, t)| (l * rc + m, s.clone() * t.clone()))),
        );
        acc = axpy(&acc, &(u.clone() * v.clone()), &term);
      }
    }
    Some(acc)
  }
}

/// `(A ⊙ B)^{(n)} = A^{(n)} ⊗ B^{(n)}` levelwise in both directions, on the
/// weights present in both.
pub fn convolve<S: Scalar>(a: &CsRing<S>, b: &CsRing<S>) -> Result<CsRing<S>> {
  let mut pieces = BTreeMap::new();
  let mut right_ranks = BTreeMap::new();
  for (w, ma) in &a.pieces {
    if let Some(mb) = b.pieces.get(w) {
      pieces.insert(*w, ma.tensor(mb)?);
      right_ranks.insert(
        *w,
        (0..=mb.q_trunc()).map(|q| (0..=mb.p_trunc()).map(|p| mb.rank(q, p)).collect()).collect(),
      );
    }
  }
  CsRing::new(
    pieces,
    Arc::new(ConvolutionProduct { left: a.product.clone(), right: b.product.clone(), right_ranks }),
  )
}

/// Product on `A × B`: the first `rank A^{(w)}` coordinates of a cell belong to `A`.
#[derive(Debug)]
pub struct PairProduct<S> {
  left: Arc<dyn CellProduct<S>>,
  right: Arc<dyn CellProduct<S>>,
  left_ranks: BTreeMap<i64, Vec<Vec<usize>>>,
}

impl<S: Scalar> CellProduct<S> for PairProduct<S> {
  fn mul(
    &self,
    a: i64,
    b: i64,
    q: usize,
    p: usize,
    x: &SparseVec<S>,
    y: &SparseVec<S>,
  ) -> Option<SparseVec<S>> {
    let r = |w: i64| self.left_ranks.get(&w).map_or(0, |g| g[q][p]);
    let (ra, rb, rc) = (r(a), r(b), r(a + b));
    let split = |v: &SparseVec<S>, at: usize| -> (SparseVec<S>, SparseVec<S>) {
      let left = v.iter().filter(|(i, _)| *i < at).cloned().collect();
      let right = v.iter().filter(|(i, _)| *i >= at).map(|(i, c)| (i - at, c.clone())).collect();
      (left, right)
    };
    let ((xl, xr), (yl, yr)) = (split(x, ra), split(y, rb));
    let mut out =
      if xl.is_empty() || yl.is_empty() { Vec::new() } else { self.left.mul(a, b, q, p, &xl, &yl)? };
    if !xr.is_empty() && !yr.is_empty() {
      let right = self.right.mul(a, b, q, p, &xr, &yr)?;
      out.extend(right.into_iter().map(|(i, c)| (i + rc, c)));
    }
    Some(out)
  }
}

/// `A × B`, weight by weight; a weight missing on one side contributes zero there.
pub fn product_ring<S: Scalar>(a: &CsRing<S>, b: &CsRing<S>) -> Result<CsRing<S>> {
  let (Some((qa, pa)), Some((qb, pb))) = (a.window(), b.window()) else {
    return Err(Error::WindowMismatch("product of an empty ring".into()));
  };
  if (qa, pa) != (qb, pb) {
    return Err(Error::WindowMismatch("factors with different truncations".into()));
  }
  let zero = CsModule::zero(qa, pa);
  let mut pieces = BTreeMap::new();
  let mut left_ranks = BTreeMap::new();
  for w in a.pieces.keys().chain(b.pieces.keys()) {
    let ma = a.pieces.get(w).unwrap_or(&zero);
    let mb = b.pieces.get(w).unwrap_or(&zero);
    pieces.insert(*w, ma.direct_sum(mb)?);
    left_ranks.insert(*w, (0..=qa).map(|q| (0..=pa).map(|p| ma.rank(q, p)).collect()).collect());
  }
  CsRing::new(pieces, Arc::new(PairProduct { left: a.product.clone(), right: b.product.clone(), left_ranks }))
}

/// `RS(A) = A ⊙ ℤ⟨u,v⟩`.
pub fn red_shift_cs<S: Scalar>(a: &CsRing<S>) -> Result<CsRing<S>> {
  let Some((q_top, p_top)) = a.window() else { return Ok(a.clone()) };
  let bound = a.weights().iter().map(|w| w.unsigned_abs() as usize).max().unwrap_or(0);
  convolve(a, &build_zuv(bound, q_top, p_top)?)
}

/// Weight-graded polynomial ring `k[t]` (t in weight 1), constant in both directions.
pub fn constant_polynomial<S: Scalar>(
  max_weight: usize,
  q_trunc: usize,
  p_trunc: usize,
) -> Result<CsRing<S>> {
  symmetric_algebra(&CsModule::constant(1, q_trunc, p_trunc), max_weight, 1)
}

/// `Sym^Δ(E) = L φ(E)`, weights `0..=max_weight`.
pub fn sym_delta<S: Scalar>(
  e: &CochainComplex<S>,
  max_weight: usize,
  q_trunc: usize,
  p_trunc: usize,
) -> Result<CsRing<S>> {
  symmetric_algebra(&phi(e, q_trunc, p_trunc)?, max_weight, 1)
}

/// Product ring `A × B` of two cs-modules of the same weight, componentwise.
#[derive(Debug)]
pub struct ProductRing<S> {
  inner: Arc<dyn CellProduct<S>>,
  ranks: BTreeMap<i64, Vec<Vec<usize>>>,
  copies: Vec<usize>,
}

impl<S: Scalar> CellProduct<S> for ProductRing<S> {
  fn mul(
    &self,
    a: i64,
    b: i64,
    q: usize,
    p: usize,
    x: &SparseVec<S>,
    y: &SparseVec<S>,
  ) -> Option<SparseVec<S>> {
    let r = |w: i64| self.ranks.get(&w).map(|g| g[q][p]);
    let (ra, rb, rc) = (r(a)?, r(b)?, r(a + b)?);
    let mut out: SparseVec<S> = Vec::new();
    for k in 0..self.copies[q] {
      let part = |v: &SparseVec<S>, width: usize| -> SparseVec<S> {
        v.iter().filter(|(i, _)| i / width == k).map(|(i, c)| (i % width, c.clone())).collect()
      };
      let prod = self.inner.mul(a, b, q, p, &part(x, ra), &part(y, rb))?;
      out = axpy(&out, &S::one(), &prod.iter().map(|(i, c)| (k * rc + i, c.clone())).collect::<Vec<_>>());
    }
    Some(out)
  }
}

/// `A^K` as a ring: componentwise product over the simplices of `K_q`.
pub fn cotensor_ring<S: Scalar>(a: &CsRing<S>, k: &FiniteSimplicialSet) -> Result<CsRing<S>> {
  let mut pieces = BTreeMap::new();
  let mut ranks = BTreeMap::new();
  for (w, m) in &a.pieces {
    pieces.insert(*w, cotensor(m, k)?);
    ranks.insert(*w, (0..=m.q_trunc()).map(|q| (0..=m.p_trunc()).map(|p| m.rank(q, p)).collect()).collect());
  }
  let copies = (0..=k.trunc()).map(|q| k.count(q)).collect();
  CsRing::new(pieces, Arc::new(ProductRing { inner: a.product.clone(), ranks, copies }))
}

/// Path-object checks for every weight piece of a ring, plus multiplicativity
/// of the constant and restriction maps on basis vectors.
pub fn ring_path_object<S: Scalar>(a: &CsRing<S>) -> Result<BTreeMap<i64, PathReport>> {
  let Some((q_top, _)) = a.window() else { return Ok(BTreeMap::new()) };
  let interval = FiniteSimplicialSet::delta1(q_top + 1);
  let path_ring = cotensor_ring(a, &interval)?;
  path_ring.verify_multiplicative()?;
  let mut out = BTreeMap::new();
  for (w, m) in &a.pieces {
    let po = path_object(m)?;
    out.insert(*w, po.check(m)?);
  }
  Ok(out)
}

/// Cohomology of `Tot^π` for every weight piece.
pub fn weight_cohomology<S: Scalar>(a: &CsRing<S>) -> Result<BTreeMap<i64, CohomologyTable>> {
  a.pieces.iter().map(|(w, m)| Ok((*w, tot_pi(m)?.cohomology()?))).collect()
}

#[cfg(test)]
mod tests {
  use super::*;
  use crate::scalar::{Fp, Integer, Rational};

  type Z = Integer;

  #[test]
  fn constant_totalizes_to_ring() {
    let a = CsModule::<Z>::constant(1, 2, 2);
    a.verify().unwrap();
    let h = tot_pi(&a).unwrap().cohomology().unwrap();
    assert_eq!(h.support(), vec![0]);
    assert!(h.is_trusted(0));
  }

  #[test]
  fn simplex_chains_are_contractible() {
    for n in 0..4 {
      let h = simplex_chains::<Z>(n).cohomology().unwrap();
      assert_eq!(h.ranks().iter().map(|(_, r)| r).sum::<usize>(), 1);
      assert_eq!(h.group(0).free_rank, 1);
    }
  }

  #[test]
  fn u_and_v_weight_pieces() {
    let u = z_u::<Z>(2, 5, 1).unwrap();
    for n in 0..=2 {
      let h = u.tot_pi(n).unwrap().cohomology().unwrap();
      assert_eq!(h.support(), vec![2 * n], "weight {n}");
      assert!(h.is_trusted(2 * n));
      assert_eq!(h.group(2 * n).torsion, Vec::<u64>::new());
    }
    let v = z_v::<Z>(2, 1, 5).unwrap();
    for n in 0..=2i64 {
      let h = v.tot_pi(-n).unwrap().cohomology().unwrap();
      assert_eq!(h.support(), vec![-2 * n], "weight {}", -n);
      assert!(h.is_trusted(-2 * n));
    }
  }

  #[test]
  fn cotensor_sizes() {
    let a = CsModule::<Z>::constant(1, 2, 1);
    let k = FiniteSimplicialSet::delta1(3);
    let ak = cotensor(&a, &k).unwrap();
    ak.verify().unwrap();
    for q in 0..=2 {
      assert_eq!(ak.rank(q, 0), q + 2);
    }
    let b = cotensor(&a, &FiniteSimplicialSet::boundary_delta1(3)).unwrap();
    assert_eq!(b, a.direct_sum(&a).unwrap());
    assert_eq!(cotensor(&a, &FiniteSimplicialSet::delta0(3)).unwrap(), a);
  }

  #[test]
  fn path_object_of_u() {
    let u = z_u::<Z>(1, 4, 0).unwrap();
    let m = u.piece(1).unwrap();
    let po = path_object(m).unwrap();
    po.path.verify().unwrap();
    let r = po.check(m).unwrap();
    assert!(r.passed(), "{:?}", r.constant_verdict.verdict);
  }

  #[test]
  fn phi_of_unit() {
    let e = CochainComplex::<Rational>::unit(0);
    let a = phi(&e, 2, 2).unwrap();
    a.verify().unwrap();
    assert_eq!(a.rank(0, 0), 1);
    let e1 = CochainComplex::<Rational>::unit(1);
    let b = phi(&e1, 2, 1).unwrap();
    b.verify().unwrap();
    assert_eq!(b.rank(1, 0), 1);
  }

  #[test]
  fn zuv_product_of_opposite_weights_vanishes() {
    let r = build_zuv::<Fp<3>>(1, 3, 3).unwrap();
    let (u, v) = (r.piece(1).unwrap(), r.piece(-1).unwrap());
    let (q, p) = (2, 2);
    assert!(u.rank(q, p) > 0 && v.rank(q, p) > 0);
    let prod = r.multiply(1, -1, q, p, &vec![(0, Fp::new(1))], &vec![(0, Fp::new(1))]).unwrap();
    assert!(prod.is_empty());
  }
}
