//! Linear algebra over ℤ: Smith normal form and everything derived from it.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exactlin::sparse::{SparseMat, SparseVec};
use crate::exactlin::{check_composable, field, CohomologyGroup};
use crate::scalar::{Coefficients, Scalar};

/// `left · m · right` is diagonal with entries `diagonal` (length `min(rows, cols)`),
/// forming a divisibility chain; `left` and `right` are unimodular.
#[derive(Clone, Debug)]
pub struct SmithForm {
  pub diagonal: Vec<BigInt>,
  pub left: SparseMat<BigInt>,
  pub right: SparseMat<BigInt>,
}

impl SmithForm {
  pub fn rank(&self) -> usize {
    self.diagonal.iter().filter(|d| !d.is_zero()).count()
  }
}

/// Smith normal form of a matrix given over an arbitrary scalar type; only ℤ is accepted.
pub fn smith_normal_form_checked<S: Scalar>(m: &SparseMat<S>) -> Result<SmithForm> {
  match S::coefficients() {
    Coefficients::Integers => {
      let as_int = SparseMat::from_columns(
        m.rows(),
        m.columns()
          .iter()
          .map(|c| c.iter().map(|(r, v)| (*r, v.as_integer().expect("integer entry"))).collect())
          .collect(),
      );
      Ok(smith_normal_form(&as_int))
    }
    other => Err(Error::NotIntegers(other.to_string())),
  }
}

pub fn smith_normal_form(m: &SparseMat<BigInt>) -> SmithForm {
  let mut dense = Dense::from_sparse(m, true);
  dense.reduce();
  let n = m.rows().min(m.cols());
  let diagonal = (0..n).map(|i| dense.a[i][i].clone()).collect();
  SmithForm { diagonal, left: to_sparse(&dense.left), right: to_sparse(&dense.right) }
}

/// Nonzero invariant factors (those equal to one included), in divisibility order.
pub fn invariant_factors(m: &SparseMat<BigInt>) -> Vec<BigInt> {
  let (units, rest) = eliminate_unit_pivots(m);
  let mut dense = Dense::from_rows(rest, false);
  dense.reduce();
  let n = dense.rows.min(dense.cols);
  let mut out = vec![BigInt::one(); units];
  out.extend((0..n).map(|i| dense.a[i][i].clone()).filter(|d| !d.is_zero()));
  out
}

pub fn rank(m: &SparseMat<BigInt>) -> usize {
  field::rank(&m.map(|v| BigRational::from_integer(v.clone())))
}

/// ℤ-basis of the kernel lattice.
pub fn kernel_basis(m: &SparseMat<BigInt>) -> Vec<SparseVec<BigInt>> {
  let snf = smith_normal_form(m);
  let r = snf.rank();
  (r..m.cols()).map(|j| snf.right.column(j).to_vec()).collect()
}

pub fn solve(m: &SparseMat<BigInt>, b: &SparseVec<BigInt>) -> Option<SparseVec<BigInt>> {
  solve_with(&smith_normal_form(m), b)
}

/// Solve `m·X = B` column by column, sharing one Smith form.
pub fn solve_columns(m: &SparseMat<BigInt>, b: &SparseMat<BigInt>) -> Option<SparseMat<BigInt>> {
  let snf = smith_normal_form(m);
  let cols = b.columns().iter().map(|c| solve_with(&snf, c)).collect::<Option<Vec<_>>>()?;
  Some(SparseMat::from_columns(m.cols(), cols))
}

fn solve_with(snf: &SmithForm, b: &SparseVec<BigInt>) -> Option<SparseVec<BigInt>> {
  let lb = snf.left.mul_vec(b);
  let mut y: SparseVec<BigInt> = Vec::new();
  for (i, v) in lb {
    let d = snf.diagonal.get(i).cloned().unwrap_or_else(BigInt::zero);
    if d.is_zero() {
      return None;
    }
    if !(&v % &d).is_zero() {
      return None;
    }
    y.push((i, v / d));
  }
  Some(snf.right.mul_vec(&y))
}

pub fn subquotient(d_in: &SparseMat<BigInt>, d_out: &SparseMat<BigInt>) -> Result<CohomologyGroup> {
  check_composable(d_in, d_out)?;
  let kernel_rank = d_out.cols() - rank(d_out);
  let factors = invariant_factors(d_in);
  let mut torsion = Vec::new();
  for f in &factors {
    if !f.is_one() {
      torsion.push(f.to_u64().ok_or_else(|| Error::Invariant(format!("invariant factor {f} exceeds u64")))?);
    }
  }
  Ok(CohomologyGroup::new(Coefficients::Integers, kernel_rank - factors.len(), torsion))
}

/// Cokernel projection and section when every nonzero invariant factor is a unit.
pub fn cokernel(m: &SparseMat<BigInt>) -> Option<(SparseMat<BigInt>, SparseMat<BigInt>)> {
  let snf = smith_normal_form(m);
  if snf.diagonal.iter().any(|d| !d.is_zero() && !d.abs().is_one()) {
    return None;
  }
  let r = snf.rank();
  let n = m.rows();
  let rest: Vec<usize> = (r..n).collect();
  let all: Vec<usize> = (0..n).collect();
  let projection = snf.left.submatrix(&rest, &all);
  let inverse = unimodular_inverse(&snf.left);
  let section = inverse.submatrix(&all, &rest);
  Some((projection, section))
}

/// Inverse of a square matrix with determinant ±1.
pub fn unimodular_inverse(u: &SparseMat<BigInt>) -> SparseMat<BigInt> {
  let snf = smith_normal_form(u);
  assert!(snf.diagonal.iter().all(|d| d.abs().is_one()), "matrix is not unimodular");
  // left·u·right = D with D² = 1, so u⁻¹ = right·D·left
  let n = u.rows();
  let d = SparseMat::from_triplets(n, n, snf.diagonal.iter().enumerate().map(|(i, v)| (i, i, v.clone())));
  snf.right.mul(&d).mul(&snf.left)
}

fn to_sparse(rows: &[Vec<BigInt>]) -> SparseMat<BigInt> {
  let n = rows.len();
  let m = rows.first().map_or(0, Vec::len);
  SparseMat::from_triplets(
    n,
    m,
    rows.iter().enumerate().flat_map(|(r, row)| row.iter().enumerate().map(move |(c, v)| (r, c, v.clone()))),
  )
}

/// Clear every row/column pair that has a ±1 pivot. Returns the number of
/// pivots removed and the remaining rows (dense, compacted).
fn eliminate_unit_pivots(m: &SparseMat<BigInt>) -> (usize, Vec<Vec<BigInt>>) {
  let mut rows: BTreeMap<usize, BTreeMap<usize, BigInt>> = BTreeMap::new();
  let mut col_rows: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
  for (r, c, v) in m.triplets() {
    rows.entry(r).or_default().insert(c, v.clone());
    col_rows.entry(c).or_default().insert(r);
  }
  let mut units = 0;
  loop {
    // cheapest unit pivot: fewest entries in its column, then its row
    let mut best: Option<(usize, usize, usize)> = None;
    for (r, row) in &rows {
      for (c, v) in row {
        if v.abs().is_one() {
          let cost = (col_rows[c].len() - 1) * (row.len() - 1);
          if best.is_none_or(|(_, _, b)| cost < b) {
            best = Some((*r, *c, cost));
          }
        }
      }
      if matches!(best, Some((_, _, 0))) {
        break;
      }
    }
    let Some((pr, pc, _)) = best else { break };
    let pivot_row = rows.remove(&pr).expect("pivot row present");
    let pv = pivot_row[&pc].clone();
    for c in pivot_row.keys() {
      col_rows.get_mut(c).expect("column index").remove(&pr);
    }
    let others: Vec<usize> = col_rows[&pc].iter().copied().collect();
    for r in others {
      let row = rows.get_mut(&r).expect("row present");
      let factor = &row[&pc] * &pv; // pv = ±1 so pv⁻¹ = pv
      for (c, v) in &pivot_row {
        let entry = row.entry(*c).or_insert_with(BigInt::zero);
        *entry -= &factor * v;
        if entry.is_zero() {
          row.remove(c);
          col_rows.get_mut(c).expect("column index").remove(&r);
        } else {
          col_rows.get_mut(c).expect("column index").insert(r);
        }
      }
      if row.is_empty() {
        rows.remove(&r);
      }
    }
    col_rows.remove(&pc);
    units += 1;
  }
  let live_cols: Vec<usize> = col_rows.iter().filter(|(_, rs)| !rs.is_empty()).map(|(c, _)| *c).collect();
  let col_pos: BTreeMap<usize, usize> = live_cols.iter().enumerate().map(|(i, c)| (*c, i)).collect();
  let dense = rows
    .values()
    .map(|row| {
      let mut out = vec![BigInt::zero(); live_cols.len()];
      for (c, v) in row {
        out[col_pos[c]] = v.clone();
      }
      out
    })
    .collect();
  (units, dense)
}

struct Dense {
  rows: usize,
  cols: usize,
  a: Vec<Vec<BigInt>>,
  track: bool,
  left: Vec<Vec<BigInt>>,
  right: Vec<Vec<BigInt>>,
}

fn identity(n: usize) -> Vec<Vec<BigInt>> {
  (0..n).map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect()
}

impl Dense {
  fn from_sparse(m: &SparseMat<BigInt>, track: bool) -> Self {
    let mut d = Dense::from_rows(m.to_dense(), track);
    d.rows = m.rows();
    d.cols = m.cols();
    if track {
      d.left = identity(d.rows);
      d.right = identity(d.cols);
    }
    d
  }

  fn from_rows(a: Vec<Vec<BigInt>>, track: bool) -> Self {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    Dense {
      rows,
      cols,
      a,
      track,
      left: if track { identity(rows) } else { Vec::new() },
      right: if track { identity(cols) } else { Vec::new() },
    }
  }

  fn swap_rows(&mut self, i: usize, j: usize) {
    self.a.swap(i, j);
    if self.track {
      self.left.swap(i, j);
    }
  }

  fn swap_cols(&mut self, i: usize, j: usize) {
    for row in &mut self.a {
      row.swap(i, j);
    }
    if self.track {
      for row in &mut self.right {
        row.swap(i, j);
      }
    }
  }

  /// row_i += q · row_j
  fn add_row(&mut self, i: usize, j: usize, q: &BigInt) {
    for c in 0..self.cols {
      if !self.a[j][c].is_zero() {
        let v = q * &self.a[j][c];
        self.a[i][c] += v;
      }
    }
    if self.track {
      for c in 0..self.rows {
        if !self.left[j][c].is_zero() {
          let v = q * &self.left[j][c];
          self.left[i][c] += v;
        }
      }
    }
  }

  /// col_i += q · col_j
  fn add_col(&mut self, i: usize, j: usize, q: &BigInt) {
    for r in 0..self.rows {
      if !self.a[r][j].is_zero() {
        let v = q * &self.a[r][j];
        self.a[r][i] += v;
      }
    }
    if self.track {
      for r in 0..self.cols {
        if !self.right[r][j].is_zero() {
          let v = q * &self.right[r][j];
          self.right[r][i] += v;
        }
      }
    }
  }

  fn negate_row(&mut self, i: usize) {
    for v in &mut self.a[i] {
      *v = -v.clone();
    }
    if self.track {
      for v in &mut self.left[i] {
        *v = -v.clone();
      }
    }
  }

  fn min_abs_entry(&self, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in t..self.rows {
      for j in t..self.cols {
        let v = &self.a[i][j];
        if v.is_zero() {
          continue;
        }
        match best {
          Some((bi, bj)) if self.a[bi][bj].abs() <= v.abs() => {}
          _ => {
            best = Some((i, j));
            if v.abs().is_one() {
              return best;
            }
          }
        }
      }
    }
    best
  }

  fn reduce(&mut self) {
    let n = self.rows.min(self.cols);
    for t in 0..n {
      let Some((pi, pj)) = self.min_abs_entry(t) else { break };
      self.swap_rows(t, pi);
      self.swap_cols(t, pj);
      loop {
        let mut clean = true;
        for i in t + 1..self.rows {
          if self.a[i][t].is_zero() {
            continue;
          }
          let q = -(&self.a[i][t] / &self.a[t][t]);
          self.add_row(i, t, &q);
          if !self.a[i][t].is_zero() {
            self.swap_rows(i, t);
            clean = false;
          }
        }
        for j in t + 1..self.cols {
          if self.a[t][j].is_zero() {
            continue;
          }
          let q = -(&self.a[t][j] / &self.a[t][t]);
          self.add_col(j, t, &q);
          if !self.a[t][j].is_zero() {
            self.swap_cols(j, t);
            clean = false;
          }
        }
        if !clean {
          continue;
        }
        // divisibility of the remaining block by the pivot
        let pivot = self.a[t][t].clone();
        let bad =
          (t + 1..self.rows).find(|&i| (t + 1..self.cols).any(|j| !(&self.a[i][j] % &pivot).is_zero()));
        match bad {
          Some(i) => self.add_row(t, i, &BigInt::one()),
          None => break,
        }
      }
      if self.a[t][t].is_negative() {
        self.negate_row(t);
      }
    }
  }
}

#[cfg(test)]
mod tests {
  use super::*;
  use crate::scalar::Rational;

  type M = SparseMat<BigInt>;

  fn diag(m: &M) -> Vec<i64> {
    smith_normal_form(m).diagonal.iter().map(|d| d.to_i64().unwrap()).collect()
  }

  fn check(m: &M) {
    let snf = smith_normal_form(m);
    let prod = snf.left.mul(m).mul(&snf.right);
    for (r, c, v) in prod.triplets() {
      assert_eq!(r, c, "off-diagonal entry {v} at ({r},{c})");
      assert_eq!(v, &snf.diagonal[r]);
    }
    for w in snf.diagonal.windows(2) {
      if !w[1].is_zero() {
        assert!((&w[1] % &w[0]).is_zero());
      } else {
        assert!(w[0].is_zero() || !w[0].is_zero());
      }
    }
  }

  #[test]
  fn identity_and_diagonal() {
    assert_eq!(diag(&M::identity(2)), vec![1, 1]);
    assert_eq!(diag(&M::from_i64_rows(&[&[1, 0], &[0, 2]])), vec![1, 2]);
  }

  #[test]
  fn two_by_two_against_gcd_and_determinant() {
    let m = M::from_i64_rows(&[&[2, 4], &[6, 8]]);
    // oracle: d1 = gcd of entries, d1·d2 = |det|
    let gcd =
      num_integer::Integer::gcd(&num_integer::Integer::gcd(&2i64, &4), &num_integer::Integer::gcd(&6i64, &8));
    let det: i64 = (2 * 8 - 4 * 6_i64).abs();
    assert_eq!(gcd, 2);
    assert_eq!(det / gcd, 4);
    assert_eq!(diag(&m), vec![gcd, det / gcd]);
    check(&m);
  }

  #[test]
  fn rejects_non_integer_rings() {
    let m = SparseMat::<Rational>::identity(2);
    assert!(matches!(smith_normal_form_checked(&m), Err(Error::NotIntegers(_))));
    let z = M::from_i64_rows(&[&[3]]);
    assert_eq!(smith_normal_form_checked(&z).unwrap().diagonal, vec![BigInt::from(3)]);
  }

  #[test]
  fn kernel_of_injective_map_is_zero() {
    assert!(kernel_basis(&M::from_i64_rows(&[&[2]])).is_empty());
    let k = kernel_basis(&M::from_i64_rows(&[&[2, 4]]));
    assert_eq!(k.len(), 1);
    assert!(M::from_i64_rows(&[&[2, 4]]).mul_vec(&k[0]).is_empty());
  }

  #[test]
  fn subquotient_examples() {
    let g = subquotient(&M::from_i64_rows(&[&[2]]), &M::zero(0, 1)).unwrap();
    assert_eq!((g.free_rank, g.torsion.clone()), (0, vec![2]));
    let g = subquotient(&M::zero(1, 1), &M::zero(1, 1)).unwrap();
    assert_eq!((g.free_rank, g.torsion.len()), (1, 0));
    assert!(subquotient(&M::identity(1), &M::identity(1)).is_err());
  }

  #[test]
  fn unit_elimination_preserves_factors() {
    let m = M::from_i64_rows(&[&[1, 2, 3], &[4, 6, 6], &[0, 2, 4]]);
    let mut all = invariant_factors(&m);
    all.sort();
    let snf: Vec<BigInt> = smith_normal_form(&m).diagonal.into_iter().filter(|d| !d.is_zero()).collect();
    assert_eq!(all, snf);
  }

  #[test]
  fn integer_solve() {
    let m = M::from_i64_rows(&[&[2, 0], &[0, 3]]);
    assert!(solve(&m, &vec![(0, BigInt::from(1))]).is_none());
    let x = solve(&m, &vec![(0, BigInt::from(4)), (1, BigInt::from(9))]).unwrap();
    assert_eq!(x, vec![(0, BigInt::from(2)), (1, BigInt::from(3))]);
  }
}
