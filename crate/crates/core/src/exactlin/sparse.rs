use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Sparse vector: strictly increasing indices, no stored zeros.
pub type SparseVec<S> = Vec<(usize, S)>;

/// `a + c·b`.
pub fn axpy<S: Scalar>(a: &[(usize, S)], c: &S, b: &[(usize, S)]) -> SparseVec<S> {
  let mut out = Vec::with_capacity(a.len() + b.len());
  let (mut i, mut j) = (0, 0);
  while i < a.len() || j < b.len() {
    if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
      out.push(a[i].clone());
      i += 1;
    } else if i == a.len() || b[j].0 < a[i].0 {
      let v = c.clone() * b[j].1.clone();
      if !v.is_zero() {
        out.push((b[j].0, v));
      }
      j += 1;
    } else {
      let v = a[i].1.clone() + c.clone() * b[j].1.clone();
      if !v.is_zero() {
        out.push((a[i].0, v));
      }
      i += 1;
      j += 1;
    }
  }
  out
}

pub fn scale<S: Scalar>(c: &S, v: &[(usize, S)]) -> SparseVec<S> {
  if c.is_zero() {
    return Vec::new();
  }
  v.iter().map(|(i, x)| (*i, c.clone() * x.clone())).filter(|(_, x)| !x.is_zero()).collect()
}

/// Collect `(index, value)` pairs, summing duplicates and dropping zeros.
pub fn collect_vec<S: Scalar>(items: impl IntoIterator<Item = (usize, S)>) -> SparseVec<S> {
  let mut acc: BTreeMap<usize, S> = BTreeMap::new();
  for (i, v) in items {
    if v.is_zero() {
      continue;
    }
    let slot = acc.entry(i).or_insert_with(S::zero);
    *slot += v;
  }
  acc.into_iter().filter(|(_, v)| !v.is_zero()).collect()
}

pub fn vec_get<S: Scalar>(v: &[(usize, S)], i: usize) -> S {
  match v.binary_search_by_key(&i, |(k, _)| *k) {
    Ok(pos) => v[pos].1.clone(),
    Err(_) => S::zero(),
  }
}

/// Sparse matrix stored by columns.
#[derive(Clone, PartialEq, Eq)]
pub struct SparseMat<S> {
  rows: usize,
  cols: usize,
  columns: Vec<SparseVec<S>>,
}

impl<S: Scalar> SparseMat<S> {
  pub fn zero(rows: usize, cols: usize) -> Self {
    SparseMat { rows, cols, columns: vec![Vec::new(); cols] }
  }

  pub fn identity(n: usize) -> Self {
    SparseMat { rows: n, cols: n, columns: (0..n).map(|i| vec![(i, S::one())]).collect() }
  }

  /// Build from columns; entries are validated against the row count.
  pub fn from_columns(rows: usize, columns: Vec<SparseVec<S>>) -> Self {
    let columns: Vec<SparseVec<S>> = columns.into_iter().map(collect_vec).collect();
    for c in &columns {
      if let Some((r, _)) = c.last() {
        assert!(*r < rows, "row index {r} out of bounds for {rows} rows");
      }
    }
    SparseMat { rows, cols: columns.len(), columns }
  }

  pub fn from_triplets(
    rows: usize,
    cols: usize,
    entries: impl IntoIterator<Item = (usize, usize, S)>,
  ) -> Self {
    let mut buckets: Vec<Vec<(usize, S)>> = vec![Vec::new(); cols];
    for (r, c, v) in entries {
      assert!(r < rows && c < cols, "entry ({r},{c}) outside {rows}x{cols}");
      buckets[c].push((r, v));
    }
    SparseMat { rows, cols, columns: buckets.into_iter().map(collect_vec).collect() }
  }

  pub fn from_dense(rows: usize, cols: usize, data: &[Vec<S>]) -> Self {
    assert_eq!(data.len(), rows);
    Self::from_triplets(
      rows,
      cols,
      data.iter().enumerate().flat_map(|(r, row)| {
        assert_eq!(row.len(), cols);
        row.iter().enumerate().map(move |(c, v)| (r, c, v.clone()))
      }),
    )
  }

  pub fn from_i64_rows(data: &[&[i64]]) -> Self {
    let rows = data.len();
    let cols = data.first().map_or(0, |r| r.len());
    Self::from_triplets(
      rows,
      cols,
      data
        .iter()
        .enumerate()
        .flat_map(|(r, row)| row.iter().enumerate().map(move |(c, v)| (r, c, S::from_i64(*v)))),
    )
  }

  pub fn rows(&self) -> usize {
    self.rows
  }

  pub fn cols(&self) -> usize {
    self.cols
  }

  pub fn column(&self, c: usize) -> &[(usize, S)] {
    &self.columns[c]
  }

  pub fn columns(&self) -> &[SparseVec<S>] {
    &self.columns
  }

  pub fn nnz(&self) -> usize {
    self.columns.iter().map(Vec::len).sum()
  }

  pub fn is_zero(&self) -> bool {
    self.columns.iter().all(Vec::is_empty)
  }

  pub fn get(&self, r: usize, c: usize) -> S {
    vec_get(&self.columns[c], r)
  }

  pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, &S)> + '_ {
    self.columns.iter().enumerate().flat_map(|(c, col)| col.iter().map(move |(r, v)| (*r, c, v)))
  }

  pub fn to_dense(&self) -> Vec<Vec<S>> {
    let mut out = vec![vec![S::zero(); self.cols]; self.rows];
    for (r, c, v) in self.triplets() {
      out[r][c] = v.clone();
    }
    out
  }

  pub fn mul_vec(&self, v: &[(usize, S)]) -> SparseVec<S> {
    let mut acc: BTreeMap<usize, S> = BTreeMap::new();
    for (c, x) in v {
      for (r, a) in &self.columns[*c] {
        let slot = acc.entry(*r).or_insert_with(S::zero);
        *slot += a.clone() * x.clone();
      }
    }
    acc.into_iter().filter(|(_, v)| !v.is_zero()).collect()
  }

  pub fn try_mul(&self, other: &SparseMat<S>) -> Result<SparseMat<S>> {
    if self.cols != other.rows {
      return Err(Error::Shape(format!(
        "cannot multiply {}x{} by {}x{}",
        self.rows, self.cols, other.rows, other.cols
      )));
    }
    Ok(SparseMat {
      rows: self.rows,
      cols: other.cols,
      columns: other.columns.iter().map(|c| self.mul_vec(c)).collect(),
    })
  }

  /// Matrix product; panics on a shape mismatch.
  pub fn mul(&self, other: &SparseMat<S>) -> SparseMat<S> {
    self.try_mul(other).expect("matrix shapes")
  }

  pub fn add(&self, other: &SparseMat<S>) -> SparseMat<S> {
    assert_eq!((self.rows, self.cols), (other.rows, other.cols), "matrix shapes");
    SparseMat {
      rows: self.rows,
      cols: self.cols,
      columns: self.columns.iter().zip(&other.columns).map(|(a, b)| axpy(a, &S::one(), b)).collect(),
    }
  }

  pub fn sub(&self, other: &SparseMat<S>) -> SparseMat<S> {
    self.add(&other.scaled(&-S::one()))
  }

  pub fn scaled(&self, c: &S) -> SparseMat<S> {
    SparseMat {
      rows: self.rows,
      cols: self.cols,
      columns: self.columns.iter().map(|col| scale(c, col)).collect(),
    }
  }

  pub fn neg(&self) -> SparseMat<S> {
    self.scaled(&-S::one())
  }

  pub fn transpose(&self) -> SparseMat<S> {
    let mut buckets: Vec<SparseVec<S>> = vec![Vec::new(); self.rows];
    for (c, col) in self.columns.iter().enumerate() {
      for (r, v) in col {
        buckets[*r].push((c, v.clone()));
      }
    }
    SparseMat { rows: self.cols, cols: self.rows, columns: buckets }
  }

  /// Kronecker product; index `(i, k)` of the result is `i * other.rows + k`.
  pub fn kron(&self, other: &SparseMat<S>) -> SparseMat<S> {
    let rows = self.rows * other.rows;
    let cols = self.cols * other.cols;
    let mut columns = Vec::with_capacity(cols);
    for a_col in &self.columns {
      for b_col in &other.columns {
        let mut col = Vec::with_capacity(a_col.len() * b_col.len());
        for (i, a) in a_col {
          for (k, b) in b_col {
            let v = a.clone() * b.clone();
            if !v.is_zero() {
              col.push((i * other.rows + k, v));
            }
          }
        }
        columns.push(col);
      }
    }
    SparseMat { rows, cols, columns }
  }

  /// Assemble a `rows × cols` matrix from blocks placed at `(row_offset, col_offset)`.
  /// Overlapping blocks are added.
  pub fn from_blocks<'a>(
    rows: usize,
    cols: usize,
    blocks: impl IntoIterator<Item = (usize, usize, &'a SparseMat<S>)>,
  ) -> Self {
    let mut columns: Vec<Vec<(usize, S)>> = vec![Vec::new(); cols];
    for (ro, co, b) in blocks {
      assert!(ro + b.rows <= rows && co + b.cols <= cols, "block out of range");
      for (j, col) in b.columns.iter().enumerate() {
        columns[co + j].extend(col.iter().map(|(r, v)| (ro + r, v.clone())));
      }
    }
    SparseMat { rows, cols, columns: columns.into_iter().map(collect_vec).collect() }
  }

  /// Block-diagonal sum.
  pub fn direct_sum(&self, other: &SparseMat<S>) -> SparseMat<S> {
    let mut columns = self.columns.clone();
    columns.extend(other.columns.iter().map(|c| c.iter().map(|(r, v)| (r + self.rows, v.clone())).collect()));
    SparseMat { rows: self.rows + other.rows, cols: self.cols + other.cols, columns }
  }

  /// Stack `[self; other]` vertically.
  pub fn vstack(&self, other: &SparseMat<S>) -> SparseMat<S> {
    assert_eq!(self.cols, other.cols, "vstack column counts");
    let columns = self
      .columns
      .iter()
      .zip(&other.columns)
      .map(|(a, b)| a.iter().cloned().chain(b.iter().map(|(r, v)| (r + self.rows, v.clone()))).collect())
      .collect();
    SparseMat { rows: self.rows + other.rows, cols: self.cols, columns }
  }

  /// Place `[self | other]` side by side.
  pub fn hstack(&self, other: &SparseMat<S>) -> SparseMat<S> {
    assert_eq!(self.rows, other.rows, "hstack row counts");
    let mut columns = self.columns.clone();
    columns.extend(other.columns.iter().cloned());
    SparseMat { rows: self.rows, cols: self.cols + other.cols, columns }
  }

  /// Keep the listed rows and columns (in the given order).
  pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> SparseMat<S> {
    let mut row_pos = vec![usize::MAX; self.rows];
    for (new, old) in rows.iter().enumerate() {
      row_pos[*old] = new;
    }
    let columns = cols
      .iter()
      .map(|c| {
        let mut col: SparseVec<S> = self.columns[*c]
          .iter()
          .filter(|(r, _)| row_pos[*r] != usize::MAX)
          .map(|(r, v)| (row_pos[*r], v.clone()))
          .collect();
        col.sort_by_key(|(r, _)| *r);
        col
      })
      .collect();
    SparseMat { rows: rows.len(), cols: cols.len(), columns }
  }

  pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> SparseMat<T> {
    SparseMat::from_columns(
      self.rows,
      self.columns.iter().map(|c| c.iter().map(|(r, v)| (*r, f(v))).collect()).collect(),
    )
  }

  /// Columns with exactly one entry equal to one, pairwise distinct rows, or empty columns.
  pub fn is_partial_monomial_injection(&self) -> bool {
    let mut seen = vec![false; self.rows];
    for col in &self.columns {
      match col.as_slice() {
        [] => {}
        [(r, v)] if v.is_one() && !seen[*r] => seen[*r] = true,
        _ => return false,
      }
    }
    true
  }
}

impl<S: fmt::Debug> fmt::Debug for SparseMat<S> {
  fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    writeln!(f, "SparseMat {}x{}", self.rows, self.cols)?;
    if self.rows * self.cols <= 400 {
      for r in 0..self.rows {
        let cells: Vec<String> = self
          .columns
          .iter()
          .map(|c| c.iter().find(|(i, _)| *i == r).map_or_else(|| "0".to_string(), |(_, v)| format!("{v:?}")))
          .collect();
        writeln!(f, "  [{}]", cells.join(", "))?;
      }
    } else {
      writeln!(f, "  ({} nonzeros)", self.columns.iter().map(Vec::len).sum::<usize>())?;
    }
    Ok(())
  }
}

#[cfg(test)]
mod tests {
  use super::*;
  use crate::scalar::Integer;

  type M = SparseMat<Integer>;

  #[test]
  fn product_and_transpose() {
    let a = M::from_i64_rows(&[&[1, 2], &[0, 3]]);
    let b = M::from_i64_rows(&[&[4], &[5]]);
    assert_eq!(a.mul(&b), M::from_i64_rows(&[&[14], &[15]]));
    assert_eq!(a.transpose(), M::from_i64_rows(&[&[1, 0], &[2, 3]]));
    assert!(a.try_mul(&a.hstack(&b)).is_ok());
    assert!(b.try_mul(&b).is_err());
  }

  #[test]
  fn zeros_are_not_stored() {
    let a = M::from_i64_rows(&[&[1, -1]]);
    let s = a.add(&a.neg());
    assert!(s.is_zero());
    assert_eq!(s.nnz(), 0);
  }

  #[test]
  fn kron_and_sums() {
    let a = M::from_i64_rows(&[&[1, 2]]);
    let b = M::from_i64_rows(&[&[0], &[3]]);
    assert_eq!(a.kron(&b), M::from_i64_rows(&[&[0, 0], &[3, 6]]));
    let d = a.direct_sum(&b);
    assert_eq!(d, M::from_i64_rows(&[&[1, 2, 0], &[0, 0, 0], &[0, 0, 3]]));
    assert_eq!(d.submatrix(&[0, 2], &[1, 2]), M::from_i64_rows(&[&[2, 0], &[0, 3]]));
  }
}
