mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
  ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
  #![proptest_config(ProptestConfig::with_cases(200))]

  #[test]
  fn d_squared_vanishes(seed in any::<u64>()) {
    prop_assert_eq!(common::d_squared_instance(&mut rng(seed)), Ok(()));
  }

  #[test]
  fn simplicial_identities_hold(seed in any::<u64>()) {
    prop_assert_eq!(common::simplicial_identities_instance(&mut rng(seed)), Ok(()));
  }

  #[test]
  fn dold_kan_round_trip(seed in any::<u64>()) {
    prop_assert_eq!(common::dold_kan_instance(&mut rng(seed)), Ok(()));
  }

  #[test]
  fn smith_form_is_unimodular(seed in any::<u64>()) {
    prop_assert_eq!(common::snf_instance(&mut rng(seed)), Ok(()));
  }
}

#[test]
fn bareiss_matches_small_determinants() {
  use infol_core::ZMat;
  assert_eq!(common::bareiss_det(&ZMat::from_i64_rows(&[&[2, 1], &[7, 4]])), 1.into());
  assert_eq!(common::bareiss_det(&ZMat::from_i64_rows(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, 3]])), (-3).into());
  assert_eq!(common::bareiss_det(&ZMat::from_i64_rows(&[&[1, 2], &[2, 4]])), 0.into());
}
