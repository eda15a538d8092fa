//! Seeded generators shared by the integration tests.
#![allow(dead_code)]

use infol_core::complexes::CochainComplex;
use infol_core::cs_rings::CsModule;
use infol_core::simplicial::{codenormalize, denormalize};
use infol_core::{Scalar, SparseMat};
use rand::Rng;

pub fn random_matrix<S: Scalar>(rng: &mut impl Rng, rows: usize, cols: usize, bound: i64) -> SparseMat<S> {
  SparseMat::from_triplets(
    rows,
    cols,
    (0..rows)
      .flat_map(|r| (0..cols).map(move |c| (r, c)))
      .map(|(r, c)| (r, c, S::from_i64(rng.gen_range(-bound..=bound))))
      .collect::<Vec<_>>(),
  )
}

/// Random unimodular matrix with its inverse, as a product of elementary matrices.
pub fn random_unimodular<S: Scalar>(rng: &mut impl Rng, n: usize) -> (SparseMat<S>, SparseMat<S>) {
  let (mut u, mut inv) = (SparseMat::identity(n), SparseMat::identity(n));
  if n < 2 {
    return (u, inv);
  }
  for _ in 0..rng.gen_range(0..=2 * n) {
    let i = rng.gen_range(0..n);
    let j = (i + rng.gen_range(1..n)) % n;
    let c = rng.gen_range(-2..=2i64);
    let e = SparseMat::identity(n).add(&SparseMat::from_triplets(n, n, vec![(i, j, S::from_i64(c))]));
    let e_inv = SparseMat::identity(n).add(&SparseMat::from_triplets(n, n, vec![(i, j, S::from_i64(-c))]));
    u = e.mul(&u);
    inv = inv.mul(&e_inv);
  }
  (u, inv)
}

/// Random bounded complex supported in `lo..=hi`: a sum of units and
/// two-term pieces, conjugated by a random change of basis in every degree.
pub fn random_complex<S: Scalar>(rng: &mut impl Rng, lo: i64, hi: i64) -> CochainComplex<S> {
  let mut c = CochainComplex::<S>::zero();
  for _ in 0..rng.gen_range(1..=3) {
    let k = rng.gen_range(lo..=hi);
    let piece = if k < hi && rng.gen_bool(0.7) {
      let (r, s) = (rng.gen_range(1..=2), rng.gen_range(1..=2));
      CochainComplex::two_term(k, random_matrix(rng, r, s, 3))
    } else {
      CochainComplex::unit(k)
    };
    c = c.direct_sum(&piece);
  }
  let Some((a, b)) = c.window() else { return c };
  let bases: Vec<(SparseMat<S>, SparseMat<S>)> = (a..=b).map(|n| random_unimodular(rng, c.rank(n))).collect();
  let diffs = (a..b).map(|n| {
    let (i, j) = ((n - a) as usize, (n - a + 1) as usize);
    bases[j].0.mul(&c.d(n)).mul(&bases[i].1)
  });
  CochainComplex::new(a, (a..=b).map(|n| c.rank(n)).collect(), diffs.collect()).expect("conjugate complex")
}

/// Small cs-module `Γ'(C) ⊠ Γ(D)` from random complexes, optionally plus a constant summand.
pub fn random_cs_module<S: Scalar>(rng: &mut impl Rng, q_trunc: usize, p_trunc: usize) -> CsModule<S> {
  let co = random_complex::<S>(rng, 0, 1);
  let ch = random_complex::<S>(rng, -1, 0);
  let x = codenormalize(&co, q_trunc).expect("cosimplicial");
  let m = denormalize(&ch, p_trunc).expect("simplicial");
  let a = CsModule::external(&x, &m);
  if rng.gen_bool(0.3) {
    a.direct_sum(&CsModule::constant(1, q_trunc, p_trunc)).expect("same truncation")
  } else {
    a
  }
}

/// `C(n, k)` by Pascal's rule.
pub fn choose(n: usize, k: usize) -> usize {
  let mut row = vec![1usize];
  for _ in 0..n {
    let mut next = vec![1usize; row.len() + 1];
    for i in 1..row.len() {
      next[i] = row[i - 1] + row[i];
    }
    row = next;
  }
  row.get(k).copied().unwrap_or(0)
}

fn check_d_squared<S: Scalar>(c: &CochainComplex<S>, what: &str) -> Result<(), String> {
  let Some((lo, hi)) = c.window() else { return Ok(()) };
  for n in lo..hi {
    if !c.d(n + 1).mul(&c.d(n)).is_zero() {
      return Err(format!("{what}: d^{} d^{n} != 0", n + 1));
    }
  }
  Ok(())
}

/// `d² = 0` on tensor products, shifts, cones and `Tot^π` of random inputs.
pub fn d_squared_instance(rng: &mut impl Rng) -> Result<(), String> {
  use infol_core::complexes::ChainMap;
  use infol_core::cs_rings::tot_pi;
  use infol_core::Integer;
  let a = random_complex::<Integer>(rng, -2, 1);
  let b = random_complex::<Integer>(rng, -1, 2);
  check_d_squared(&a.tensor(&b), "tensor")?;
  check_d_squared(&a.shift(rng.gen_range(-3..=3)).direct_sum(&b), "shifted sum")?;
  check_d_squared(&ChainMap::identity(&a).cone(), "cone")?;
  let (q, p) = (rng.gen_range(1..=2), rng.gen_range(1..=2));
  let tot = tot_pi(&random_cs_module::<Integer>(rng, q, p)).map_err(|e| e.to_string())?;
  check_d_squared(&tot, "Tot^π")
}

/// Random monotone map `[m] → [n]`.
pub fn random_monotone(rng: &mut impl Rng, m: usize, n: usize) -> infol_core::simplicial::Monotone {
  let mut values: Vec<usize> = (0..=m).map(|_| rng.gen_range(0..=n)).collect();
  values.sort_unstable();
  infol_core::simplicial::Monotone::new(values, n)
}

/// Functoriality of `θ ↦ θ^*` and `θ ↦ θ_*` on random composable pairs, which
/// holds exactly when the (co)simplicial identities do, plus the library's own check.
pub fn simplicial_identities_instance(rng: &mut impl Rng) -> Result<(), String> {
  use infol_core::Integer;
  let trunc = 3;
  let m = denormalize(&random_complex::<Integer>(rng, -2, 0), trunc).map_err(|e| e.to_string())?;
  let x = codenormalize(&random_complex::<Integer>(rng, 0, 2), trunc).map_err(|e| e.to_string())?;
  m.verify().map_err(|e| e.to_string())?;
  x.verify().map_err(|e| e.to_string())?;
  for _ in 0..12 {
    let (l, k, n) = (rng.gen_range(0..=trunc), rng.gen_range(0..=trunc), rng.gen_range(0..=trunc));
    let phi = random_monotone(rng, l, k);
    let theta = random_monotone(rng, k, n);
    let comp = theta.after(&phi);
    if m.operator(&comp) != m.operator(&phi).mul(&m.operator(&theta)) {
      return Err(format!("simplicial functoriality fails for {theta:?} ∘ {phi:?}"));
    }
    if x.operator(&comp) != x.operator(&theta).mul(&x.operator(&phi)) {
      return Err(format!("cosimplicial functoriality fails for {theta:?} ∘ {phi:?}"));
    }
  }
  random_cs_module::<Integer>(rng, 2, 2).verify().map_err(|e| e.to_string())
}

/// `N(Γ(C)) = C` on the nose (degeneracy quotient) and up to homology (kernel
/// model), in both the simplicial and the cosimplicial direction.
pub fn dold_kan_instance(rng: &mut impl Rng) -> Result<(), String> {
  use infol_core::simplicial::Normalization;
  use infol_core::Integer;
  let c = random_complex::<Integer>(rng, -2, 0);
  let g = denormalize(&c, 4).map_err(|e| e.to_string())?;
  let quotient = g.normalize_with(Normalization::DegeneracyQuotient).map_err(|e| e.to_string())?.complex;
  for n in -2..=0 {
    if quotient.rank(n) != c.rank(n) || (n < 0 && quotient.d(n) != c.d(n)) {
      return Err(format!("N Γ differs from C in degree {n}"));
    }
  }
  let kernel = g.normalize_with(Normalization::Kernel).map_err(|e| e.to_string())?.complex;
  let (hk, hc) =
    (kernel.cohomology().map_err(|e| e.to_string())?, c.cohomology().map_err(|e| e.to_string())?);
  if (-2..=0).any(|n| hk.group(n) != hc.group(n)) {
    return Err("kernel model has different homology".into());
  }
  let d = random_complex::<Integer>(rng, 0, 2);
  let co = codenormalize(&d, 4).map_err(|e| e.to_string())?.normalize().map_err(|e| e.to_string())?.complex;
  for n in 0..=2 {
    if co.rank(n) != d.rank(n) || (n < 2 && co.d(n) != d.d(n)) {
      return Err(format!("N Γ' differs from C in degree {n}"));
    }
  }
  Ok(())
}

/// Determinant by fraction-free elimination.
pub fn bareiss_det(m: &SparseMat<num_bigint::BigInt>) -> num_bigint::BigInt {
  use num_traits::{One, Zero};
  let n = m.rows();
  assert_eq!(n, m.cols());
  let mut a = m.to_dense();
  let mut sign = num_bigint::BigInt::one();
  let mut prev = num_bigint::BigInt::one();
  for k in 0..n {
    if a[k][k].is_zero() {
      let Some(r) = (k + 1..n).find(|r| !a[*r][k].is_zero()) else { return num_bigint::BigInt::zero() };
      a.swap(k, r);
      sign = -sign;
    }
    for i in k + 1..n {
      for j in k + 1..n {
        a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
      }
    }
    prev = a[k][k].clone();
  }
  if n == 0 {
    return sign;
  }
  sign * &a[n - 1][n - 1]
}

/// Smith form: `L·M·R` is the stated diagonal, a divisibility chain, and `L`, `R`
/// have determinant ±1.
pub fn snf_instance(rng: &mut impl Rng) -> Result<(), String> {
  use infol_core::exactlin::smith_normal_form;
  use num_integer::Integer as _;
  use num_traits::{One, Signed, Zero};
  let (r, c) = (rng.gen_range(1..=5), rng.gen_range(1..=5));
  let mut m = random_matrix::<num_bigint::BigInt>(rng, r, c, 9);
  if rng.gen_bool(0.3) {
    // force rank deficiency
    let row = random_matrix(rng, 1, r, 2);
    m = m.vstack(&row.mul(&m));
  }
  let s = smith_normal_form(&m);
  let dm = s.left.mul(&m).mul(&s.right);
  for (i, j, v) in dm.triplets() {
    if i != j || *v != s.diagonal[i] {
      return Err(format!("L M R has entry {v} at ({i},{j})"));
    }
  }
  let nz: Vec<_> = s.diagonal.iter().filter(|d| !d.is_zero()).collect();
  if s.diagonal.iter().skip(nz.len()).any(|d| !d.is_zero())
    || nz.windows(2).any(|w| !w[1].is_multiple_of(w[0]))
  {
    return Err(format!("diagonal {:?} is not a divisibility chain", s.diagonal));
  }
  for u in [&s.left, &s.right] {
    if !bareiss_det(u).abs().is_one() {
      return Err("transform is not unimodular".into());
    }
  }
  Ok(())
}
