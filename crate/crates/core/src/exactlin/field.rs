//! Sparse Gaussian elimination over fields.

use std::collections::HashMap;

use crate::error::Result;
use crate::exactlin::sparse::{axpy, SparseMat, SparseVec};
use crate::exactlin::{check_composable, CohomologyGroup};
use crate::scalar::Field;

/// Column echelon basis of a column space, each pivot remembering how it was
/// obtained from the original columns.
pub(crate) struct Echelon<S> {
  pivots: HashMap<usize, (SparseVec<S>, SparseVec<S>)>,
  kernel: Vec<SparseVec<S>>,
}

impl<S: Field> Echelon<S> {
  pub(crate) fn new(m: &SparseMat<S>, track: bool) -> Self {
    let mut e = Echelon { pivots: HashMap::new(), kernel: Vec::new() };
    for (j, col) in m.columns().iter().enumerate() {
      let combo = if track { vec![(j, S::one())] } else { Vec::new() };
      let (v, combo) = e.reduce(col.clone(), combo, track);
      match v.first() {
        Some((lead, _)) => {
          e.pivots.insert(*lead, (v, combo));
        }
        None => {
          if track {
            e.kernel.push(combo)
          }
        }
      }
    }
    e
  }

  fn reduce(
    &self,
    mut v: SparseVec<S>,
    mut combo: SparseVec<S>,
    track: bool,
  ) -> (SparseVec<S>, SparseVec<S>) {
    // each step clears the leading entry, so the leading row strictly increases
    while let Some((lead, a)) = v.first().cloned() {
      let Some((p, pc)) = self.pivots.get(&lead) else { break };
      let c = -(a / p[0].1.clone());
      v = axpy(&v, &c, p);
      if track {
        combo = axpy(&combo, &c, pc);
      }
    }
    (v, combo)
  }

  /// Eliminate every entry sitting in a pivot row.
  fn reduce_fully(&self, mut v: SparseVec<S>) -> SparseVec<S> {
    while let Some((r, a)) = v.iter().find(|(r, _)| self.pivots.contains_key(r)).cloned() {
      let (p, _) = &self.pivots[&r];
      let c = -(a / p[0].1.clone());
      v = axpy(&v, &c, p);
    }
    v
  }

  pub(crate) fn rank(&self) -> usize {
    self.pivots.len()
  }
}

pub fn rank<S: Field>(m: &SparseMat<S>) -> usize {
  Echelon::new(m, false).rank()
}

pub fn kernel_basis<S: Field>(m: &SparseMat<S>) -> Vec<SparseVec<S>> {
  Echelon::new(m, true).kernel
}

pub fn solve<S: Field>(m: &SparseMat<S>, b: &SparseVec<S>) -> Option<SparseVec<S>> {
  let e = Echelon::new(m, true);
  let mut v = b.clone();
  let mut x: SparseVec<S> = Vec::new();
  while let Some((lead, a)) = v.first().cloned() {
    let (p, pc) = e.pivots.get(&lead)?;
    let c = a / p[0].1.clone();
    v = axpy(&v, &-c.clone(), p);
    x = axpy(&x, &c, pc);
  }
  Some(x)
}

/// Projection onto the non-pivot coordinates after full reduction, and the
/// coordinate section.
pub fn cokernel<S: Field>(m: &SparseMat<S>) -> Option<(SparseMat<S>, SparseMat<S>)> {
  let e = Echelon::new(m, false);
  let n = m.rows();
  let free_rows: Vec<usize> = (0..n).filter(|r| !e.pivots.contains_key(r)).collect();
  let mut pos = vec![usize::MAX; n];
  for (i, r) in free_rows.iter().enumerate() {
    pos[*r] = i;
  }
  let columns = (0..n)
    .map(|r| {
      let v = e.reduce_fully(vec![(r, S::one())]);
      v.into_iter().map(|(i, x)| (pos[i], x)).collect()
    })
    .collect();
  let projection = SparseMat::from_columns(free_rows.len(), columns);
  let section = SparseMat::from_triplets(
    n,
    free_rows.len(),
    free_rows.iter().enumerate().map(|(j, r)| (*r, j, S::one())),
  );
  Some((projection, section))
}

pub fn subquotient<S: Field>(d_in: &SparseMat<S>, d_out: &SparseMat<S>) -> Result<CohomologyGroup> {
  check_composable(d_in, d_out)?;
  let n = d_out.cols();
  let kernel_dim = n - rank(d_out);
  let image_dim = rank(d_in);
  Ok(CohomologyGroup::free(S::coefficients(), kernel_dim - image_dim))
}

#[cfg(test)]
mod tests {
  use super::*;
  use crate::scalar::{Fp, Rational, Scalar};

  type F2 = Fp<2>;

  #[test]
  fn zero_matrix_kernel_over_q() {
    let m = SparseMat::<Rational>::zero(1, 1);
    let k = kernel_basis(&m);
    assert_eq!(k, vec![vec![(0, Rational::from_i64(1))]]);
  }

  #[test]
  fn f2_kernel_matches_enumeration() {
    let m = SparseMat::<F2>::from_i64_rows(&[&[1, 1]]);
    let k = kernel_basis(&m);
    assert_eq!(k.len(), 1);
    // enumerate all four vectors of F2^2
    let mut nonzero_kernel = Vec::new();
    for a in 0..2u64 {
      for b in 0..2u64 {
        if (a + b) % 2 == 0 && (a, b) != (0, 0) {
          nonzero_kernel.push((a, b));
        }
      }
    }
    assert_eq!(nonzero_kernel, vec![(1, 1)]);
    let v = &k[0];
    assert_eq!(v, &vec![(0, F2::new(1)), (1, F2::new(1))]);
  }

  #[test]
  fn solve_round_trip() {
    let m = SparseMat::<Rational>::from_i64_rows(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9]]);
    let x = vec![(0, Rational::from_i64(1)), (2, Rational::from_i64(-2))];
    let b = m.mul_vec(&x);
    let y = solve(&m, &b).unwrap();
    assert_eq!(m.mul_vec(&y), b);
    assert!(solve(&m, &vec![(0, Rational::from_i64(1))]).is_none());
  }
}
