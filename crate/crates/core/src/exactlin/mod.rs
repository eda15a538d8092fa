//! Exact linear algebra over ℤ, ℚ and 𝔽_p.

pub mod field;
pub mod integer;
pub mod sparse;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use integer::{smith_normal_form, smith_normal_form_checked, SmithForm};
pub use sparse::{SparseMat, SparseVec};

use crate::error::{Error, Result};
use crate::scalar::{Coefficients, Scalar};

/// A finitely generated module given by free rank and invariant factors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CohomologyGroup {
  pub ring: Coefficients,
  pub free_rank: usize,
  pub torsion: Vec<u64>,
}

impl CohomologyGroup {
  pub fn new(ring: Coefficients, free_rank: usize, torsion: Vec<u64>) -> Self {
    debug_assert!(torsion.iter().all(|t| *t > 1));
    debug_assert!(torsion.windows(2).all(|w| w[1] % w[0] == 0));
    CohomologyGroup { ring, free_rank, torsion }
  }

  pub fn free(ring: Coefficients, free_rank: usize) -> Self {
    CohomologyGroup { ring, free_rank, torsion: Vec::new() }
  }

  pub fn zero(ring: Coefficients) -> Self {
    Self::free(ring, 0)
  }

  pub fn is_zero(&self) -> bool {
    self.free_rank == 0 && self.torsion.is_empty()
  }
}

impl fmt::Display for CohomologyGroup {
  fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let mut parts = Vec::new();
    match self.free_rank {
      0 => {}
      1 => parts.push(self.ring.to_string()),
      r => parts.push(format!("{}^{r}", self.ring)),
    }
    parts.extend(self.torsion.iter().map(|t| format!("Z/{t}")));
    if parts.is_empty() {
      write!(f, "0")
    } else {
      write!(f, "{}", parts.join(" + "))
    }
  }
}

/// Checks that `d_in` and `d_out` can be composed and that `d_out · d_in = 0`.
pub fn check_composable<S: Scalar>(d_in: &SparseMat<S>, d_out: &SparseMat<S>) -> Result<()> {
  if d_in.rows() != d_out.cols() {
    return Err(Error::Shape(format!(
      "d_in is {}x{} but d_out is {}x{}",
      d_in.rows(),
      d_in.cols(),
      d_out.rows(),
      d_out.cols()
    )));
  }
  let prod = d_out.mul(d_in);
  if !prod.is_zero() {
    return Err(Error::NotComposable(format!("d_out·d_in has {} nonzero entries", prod.nnz())));
  }
  Ok(())
}

#[cfg(test)]
mod tests {
  use super::*;
  use crate::scalar::{Fp, Integer, Rational};

  /// Dense brute force over 𝔽_p: count kernel and image vectors by enumeration.
  fn brute_subquotient<const P: u64>(d_in: &[Vec<u64>], d_out: &[Vec<u64>], n: usize) -> usize {
    let vectors = |len: usize| -> Vec<Vec<u64>> {
      let mut out = vec![vec![]];
      for _ in 0..len {
        out = out.into_iter().flat_map(|v| (0..P).map(move |a| [v.clone(), vec![a]].concat())).collect();
      }
      out
    };
    let apply = |m: &[Vec<u64>], v: &[u64]| -> Vec<u64> {
      m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum::<u64>() % P).collect()
    };
    let kernel = vectors(n).into_iter().filter(|v| apply(d_out, v).iter().all(|x| *x == 0)).count();
    let m = d_in.first().map_or(0, Vec::len);
    let mut image: Vec<Vec<u64>> =
      vectors(m).iter().map(|v| if d_in.is_empty() { vec![0; n] } else { apply(d_in, v) }).collect();
    image.sort();
    image.dedup();
    // |ker| / |im| = P^dim
    let mut q = kernel / image.len();
    let mut dim = 0;
    while q > 1 {
      q /= P as usize;
      dim += 1;
    }
    dim
  }

  fn check_random<const P: u64>(seed: u64) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..60 {
      let a = rng.gen_range(0..=3usize);
      let n = rng.gen_range(1..=3usize);
      let b = rng.gen_range(0..=3usize);
      // d_out random, d_in built from kernel combinations so the pair composes
      let d_out_rows: Vec<Vec<u64>> = (0..b).map(|_| (0..n).map(|_| rng.gen_range(0..P)).collect()).collect();
      let d_out = SparseMat::<Fp<P>>::from_dense(
        b,
        n,
        &d_out_rows.iter().map(|r| r.iter().map(|x| Fp::new(*x)).collect()).collect::<Vec<_>>(),
      );
      let ker = crate::exactlin::field::kernel_basis(&d_out);
      let mut d_in_rows = vec![vec![0u64; a]; n];
      for j in 0..a {
        for k in &ker {
          let c = rng.gen_range(0..P);
          for (i, v) in k {
            d_in_rows[*i][j] = (d_in_rows[*i][j] + c * v.value()) % P;
          }
        }
      }
      let d_in = SparseMat::<Fp<P>>::from_dense(
        n,
        a,
        &d_in_rows.iter().map(|r| r.iter().map(|x| Fp::new(*x)).collect()).collect::<Vec<_>>(),
      );
      let got = crate::exactlin::field::subquotient(&d_in, &d_out).unwrap();
      let d_in_dense: Vec<Vec<u64>> = if a == 0 { Vec::new() } else { d_in_rows.clone() };
      assert_eq!(got.free_rank, brute_subquotient::<P>(&d_in_dense, &d_out_rows, n));
    }
  }

  #[test]
  fn subquotient_matches_brute_force() {
    check_random::<2>(1);
    check_random::<3>(2);
    check_random::<5>(3);
  }

  #[test]
  fn subquotient_examples() {
    let two = SparseMat::<Integer>::from_i64_rows(&[&[2]]);
    let h = integer::subquotient(&two, &SparseMat::zero(0, 1)).unwrap();
    assert_eq!((h.free_rank, h.torsion.clone()), (0, vec![2]));
    let h = integer::subquotient(&SparseMat::zero(1, 0), &SparseMat::zero(0, 1)).unwrap();
    assert_eq!((h.free_rank, h.torsion.is_empty()), (1, true));
    let id = SparseMat::<Rational>::identity(1);
    let h = field::subquotient(&id, &SparseMat::zero(0, 1)).unwrap();
    assert_eq!(h.free_rank, 0);
    assert!(check_composable(&id, &id).is_err());
  }

  #[test]
  fn cokernel_projection_and_section() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
    for _ in 0..50 {
      let (n, k) = (rng.gen_range(1..5usize), rng.gen_range(0..4usize));
      // integer matrices built as products with a unimodular factor so the cokernel is free
      let base = SparseMat::<Integer>::from_triplets(n, k, (0..n.min(k)).map(|i| (i, i, Integer::from(1))));
      let mut u = SparseMat::<Integer>::identity(n);
      for _ in 0..4 {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
          let e = SparseMat::from_triplets(
            n,
            n,
            (0..n).map(|i| (i, i, Integer::from(1))).chain([(a, b, Integer::from(rng.gen_range(-2..3i64)))]),
          );
          u = e.mul(&u);
        }
      }
      let m = u.mul(&base);
      let (p, t) = integer::cokernel(&m).unwrap();
      assert!(p.mul(&m).is_zero());
      assert_eq!(p.mul(&t), SparseMat::identity(p.rows()));
      assert_eq!(p.rows(), n - integer::rank(&m));
      let mq = m.map(|x| Rational::from_integer(x.clone()));
      let (p, t) = field::cokernel(&mq).unwrap();
      assert!(p.mul(&mq).is_zero());
      assert_eq!(p.mul(&t), SparseMat::identity(p.rows()));
    }
    assert!(integer::cokernel(&SparseMat::<Integer>::from_i64_rows(&[&[2]])).is_none());
  }
}
