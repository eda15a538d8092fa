mod common;

use infol_core::complexes::{CochainComplex, Verdict};
use infol_core::cs_rings::*;
use infol_core::graded_mixed::{lax_monoidal_check, red_shift_compare};
use infol_core::infcoh::{cech_alexander, inf_cohomology, SmoothAffine};
use infol_core::{CohomologyGroup, Integer, Rational, Scalar, F3};
use num_traits::One;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Z = Integer;

/// Free rank and torsion order; invariant factors of a sum recombine, these do not.
fn shape(g: &CohomologyGroup) -> (usize, u64) {
  (g.free_rank, g.torsion.iter().product())
}

#[test]
fn tot_pi_is_additive() {
  let mut rng = ChaCha8Rng::seed_from_u64(31);
  for _ in 0..25 {
    let a = common::random_cs_module::<Z>(&mut rng, 2, 2);
    let b = common::random_cs_module::<Z>(&mut rng, 2, 2);
    let (ha, hb) = (tot_pi(&a).unwrap().cohomology().unwrap(), tot_pi(&b).unwrap().cohomology().unwrap());
    let hs = tot_pi(&a.direct_sum(&b).unwrap()).unwrap().cohomology().unwrap();
    for n in -3..=3 {
      let (a, b, c) = (shape(&ha.group(n)), shape(&hb.group(n)), shape(&hs.group(n)));
      assert_eq!(c, (a.0 + b.0, a.1 * b.1), "degree {n}");
      assert_eq!(hs.is_trusted(n), ha.is_trusted(n) && hb.is_trusted(n));
    }
  }
}

#[test]
fn tensor_with_constant_is_unital() {
  let mut rng = ChaCha8Rng::seed_from_u64(32);
  for _ in 0..15 {
    let a = common::random_cs_module::<Z>(&mut rng, 2, 2);
    assert_eq!(a.tensor(&CsModule::constant(1, 2, 2)).unwrap(), a);
  }
}

#[test]
fn lax_monoidal_on_polynomial_rings() {
  let a = constant_polynomial::<Z>(2, 3, 3).unwrap();
  let u = z_u::<Z>(2, 3, 3).unwrap();
  for w in 0..=2 {
    assert_eq!(lax_monoidal_check(&a, &a, w).unwrap().verdict, Verdict::Equivalent, "k[t] weight {w}");
    assert_eq!(lax_monoidal_check(&a, &u, w).unwrap().verdict, Verdict::Equivalent, "k[t], Z[u] weight {w}");
  }
}

#[test]
fn red_shift_moves_weight_w_to_degree_2w() {
  let a = constant_polynomial::<Z>(2, 3, 3).unwrap();
  let u = z_u::<Z>(2, 4, 1).unwrap();
  for w in 0..=1 {
    assert!(red_shift_compare(&a, w).unwrap().is_equivalent(), "k[t] weight {w}");
    assert!(red_shift_compare(&u, w).unwrap().is_equivalent(), "Z[u] weight {w}");
  }
  // beyond the window nothing is trusted, and that is reported rather than guessed
  assert_eq!(red_shift_compare(&a, 2).unwrap().verdict, Verdict::Inconclusive);
  let rs = red_shift_cs(&a).unwrap();
  rs.verify_multiplicative().unwrap();
  let h = rs.tot_pi(1).unwrap().cohomology().unwrap();
  assert_eq!(h.group(2).free_rank, 1);
  assert!(h.is_trusted(2));
}

#[test]
fn red_shift_preserves_products() {
  let a = constant_polynomial::<Z>(2, 2, 2).unwrap();
  let b = z_u::<Z>(2, 2, 2).unwrap();
  let ab = product_ring(&a, &b).unwrap();
  ab.verify_multiplicative().unwrap();
  let left = red_shift_cs(&ab).unwrap();
  let right = product_ring(&red_shift_cs(&a).unwrap(), &red_shift_cs(&b).unwrap()).unwrap();
  left.verify_multiplicative().unwrap();
  assert_eq!(left.weights(), right.weights());
  for w in left.weights() {
    assert_eq!(left.piece(w), right.piece(w), "weight {w}");
  }
  let (hl, hr) = (weight_cohomology(&left).unwrap(), weight_cohomology(&right).unwrap());
  for w in left.weights() {
    assert!(hl[&w].agrees_on_trusted(&hr[&w]));
  }
}

#[test]
fn product_ring_multiplies_componentwise() {
  let a = constant_polynomial::<Z>(2, 1, 1).unwrap();
  let b = constant_polynomial::<Z>(2, 1, 1).unwrap();
  let ab = product_ring(&a, &b).unwrap();
  let one = Z::one();
  // (t, 0)·(t, 0) = (t², 0); (t, 0)·(0, t) = 0
  let left_t = vec![(0, one.clone())];
  let right_t = vec![(1, one.clone())];
  assert_eq!(ab.multiply(1, 1, 0, 0, &left_t, &left_t), Some(vec![(0, one.clone())]));
  assert_eq!(ab.multiply(1, 1, 0, 0, &right_t, &right_t), Some(vec![(1, one.clone())]));
  assert_eq!(ab.multiply(1, 1, 0, 0, &left_t, &right_t), Some(vec![]));
}

#[test]
fn sym_delta_low_weights() {
  let e = CochainComplex::<Z>::unit(0);
  let s = sym_delta(&e, 2, 2, 2).unwrap();
  assert_eq!(s.piece(0), Some(&CsModule::constant(1, 2, 2)));
  let h0 = s.tot_pi(0).unwrap().cohomology().unwrap();
  assert_eq!((h0.group(0).free_rank, h0.is_trusted(0)), (1, true));
  s.verify_multiplicative().unwrap();
  // weight one is φ(E); its degree-0 value is E, though no truncation can trust it
  let h1 = s.tot_pi(1).unwrap().cohomology().unwrap();
  assert_eq!(h1.group(0).free_rank, 1);
  assert!(h1.trusted_window().is_none());
}

#[test]
fn cech_alexander_towers_are_cosimplicial() {
  for d in 1..=2 {
    let names: Vec<String> = (0..d).map(|i| format!("x{i}")).collect();
    let x = SmoothAffine::new(&names.iter().map(String::as_str).collect::<Vec<_>>());
    let t = cech_alexander::<Rational>(&x, 2, 4, 3).unwrap();
    t.module.verify().unwrap();
    let h = inf_cohomology(&t).unwrap();
    assert_eq!((h.group(0).free_rank, h.is_trusted(0)), (1, true), "dimension {d}");
    let f = cech_alexander::<F3>(&x, 2, 4, 3).unwrap();
    f.module.verify().unwrap();
  }
}

#[test]
fn cohomology_is_stable_in_the_truncation() {
  let x = SmoothAffine::new(&["x"]);
  let small = inf_cohomology(&cech_alexander::<Rational>(&x, 2, 6, 4).unwrap()).unwrap();
  let large = inf_cohomology(&cech_alexander::<Rational>(&x, 3, 8, 6).unwrap()).unwrap();
  assert!(small.agrees_on_trusted(&large));
  assert!(large.trusted_window().unwrap().1 >= small.trusted_window().unwrap().1);
}

#[test]
fn kernel_vectors_are_annihilated() {
  let mut rng = ChaCha8Rng::seed_from_u64(33);
  for _ in 0..40 {
    let (r, c) = (rand::Rng::gen_range(&mut rng, 1..=4), rand::Rng::gen_range(&mut rng, 1..=5));
    let m = common::random_matrix::<Z>(&mut rng, r, c, 4);
    for v in Z::kernel_basis(&m) {
      assert!(m.mul_vec(&v).is_empty());
    }
    let mq = m.map(|x| Rational::from_integer(x.clone()));
    assert_eq!(Rational::kernel_basis(&mq).len(), Z::kernel_basis(&m).len());
  }
}
