//! Weight-graded complexes, graded mixed complexes, red-shift and Tate
//! realization, and the red-shift of cosimplicial-simplicial rings.
//!
//! Mixed operators anticommute with the internal differential: `dε + εd = 0`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::complexes::{ChainMap, CochainComplex, CohomologyBasis, CohomologyTable, QisVerdict};
use crate::cs_rings::{tot_pi, CsRing};
use crate::error::{Error, Result};
use crate::exactlin::sparse::vec_get;
use crate::exactlin::SparseMat;
use crate::scalar::Scalar;
use crate::simplicial::{
  codenormalize, cup_product, divided_power_square, CosimplicialModule, DividedSquare,
};

pub use crate::cs_rings::{build_zuv, constant_polynomial, convolve, red_shift_cs, z_u, z_v};

/// Complexes indexed by weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedComplex<S> {
  pub pieces: BTreeMap<i64, CochainComplex<S>>,
}

impl<S: Scalar> GradedComplex<S> {
  pub fn new(pieces: BTreeMap<i64, CochainComplex<S>>) -> Self {
    GradedComplex { pieces }
  }

  pub fn single(weight: i64, c: CochainComplex<S>) -> Self {
    GradedComplex { pieces: BTreeMap::from([(weight, c)]) }
  }

  pub fn piece(&self, w: i64) -> CochainComplex<S> {
    self.pieces.get(&w).cloned().unwrap_or_else(CochainComplex::zero)
  }

  pub fn weights(&self) -> Option<(i64, i64)> {
    Some((*self.pieces.keys().next()?, *self.pieces.keys().next_back()?))
  }

  pub fn cohomology(&self) -> Result<BTreeMap<i64, CohomologyTable>> {
    self.pieces.iter().map(|(w, c)| Ok((*w, c.cohomology()?))).collect()
  }
}

/// Cohomological degree of the mixed operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
  Minus,
  Plus,
}

impl Flag {
  pub fn degree(self) -> i64 {
    match self {
      Flag::Minus => -1,
      Flag::Plus => 1,
    }
  }
}

/// Graded complex with `ε_w : E^{(w)} → E^{(w+1)}` of degree `flag.degree()`.
///
/// `eps[(w, n)]` is the component out of degree `n` of weight `w`; missing
/// components are zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MixedComplex<S> {
  pub graded: GradedComplex<S>,
  eps: BTreeMap<(i64, i64), SparseMat<S>>,
  pub flag: Flag,
}

impl<S: Scalar> MixedComplex<S> {
  pub fn new(graded: GradedComplex<S>, eps: BTreeMap<(i64, i64), SparseMat<S>>, flag: Flag) -> Result<Self> {
    let out = MixedComplex { graded, eps, flag };
    out.verify()?;
    Ok(out)
  }

  /// Zero mixed structure.
  pub fn trivial(graded: GradedComplex<S>, flag: Flag) -> Self {
    MixedComplex { graded, eps: BTreeMap::new(), flag }
  }

  pub fn eps(&self, w: i64, n: i64) -> SparseMat<S> {
    let (rows, cols) = (self.graded.piece(w + 1).rank(n + self.flag.degree()), self.graded.piece(w).rank(n));
    match self.eps.get(&(w, n)) {
      Some(m) if m.rows() == rows && m.cols() == cols => m.clone(),
      _ => SparseMat::zero(rows, cols),
    }
  }

  /// Shapes, `ε² = 0` and `dε + εd = 0`.
  pub fn verify(&self) -> Result<()> {
    let e = self.flag.degree();
    for ((w, n), m) in &self.eps {
      let (src, tgt) = (self.graded.piece(*w), self.graded.piece(w + 1));
      if m.cols() != src.rank(*n) || m.rows() != tgt.rank(n + e) {
        return Err(Error::Shape(format!("ε at weight {w}, degree {n}")));
      }
      if !self.eps(w + 1, n + e).mul(m).is_zero() {
        return Err(Error::Invariant(format!("ε² != 0 at weight {w}, degree {n}")));
      }
      if !tgt.d(n + e).mul(m).add(&self.eps(*w, n + 1).mul(&src.d(*n))).is_zero() {
        return Err(Error::Invariant(format!("dε + εd != 0 at weight {w}, degree {n}")));
      }
    }
    for (w, src) in &self.graded.pieces {
      let Some((lo, hi)) = src.window() else { continue };
      for n in lo - 1..=hi {
        let lhs = self.graded.piece(w + 1).d(n + e).mul(&self.eps(*w, n));
        if !lhs.add(&self.eps(*w, n + 1).mul(&src.d(n))).is_zero() {
          return Err(Error::Invariant(format!("dε + εd != 0 at weight {w}, degree {n}")));
        }
      }
    }
    Ok(())
  }

  fn reweighted(&self, shift: impl Fn(i64) -> i64, flag: Flag) -> Self {
    let pieces = self.graded.pieces.iter().map(|(w, c)| (*w, c.shift(shift(*w)))).collect();
    let eps = self.eps.iter().map(|((w, n), m)| ((*w, n - shift(*w)), m.clone())).collect();
    MixedComplex { graded: GradedComplex::new(pieces), eps, flag }
  }
}

/// `E^{(w)} ↦ E^{(w)}[-2w]`, turning a degree `-1` mixed structure into degree `+1`.
pub fn red_shift<S: Scalar>(e: &MixedComplex<S>) -> Result<MixedComplex<S>> {
  if e.flag != Flag::Minus {
    return Err(Error::WrongFlag { expected: "minus" });
  }
  let out = e.reweighted(|w| -2 * w, Flag::Plus);
  out.verify()?;
  Ok(out)
}

pub fn red_shift_inverse<S: Scalar>(e: &MixedComplex<S>) -> Result<MixedComplex<S>> {
  if e.flag != Flag::Plus {
    return Err(Error::WrongFlag { expected: "plus" });
  }
  let out = e.reweighted(|w| 2 * w, Flag::Minus);
  out.verify()?;
  Ok(out)
}

/// Blocks of the realization in degree `n`: `(weight, offset)` by increasing weight.
fn realization_blocks<S: Scalar>(
  e: &MixedComplex<S>,
  floor: i64,
  ceiling: i64,
  n: i64,
) -> (Vec<(i64, usize)>, usize) {
  let mut off = 0;
  let mut out = Vec::new();
  for w in floor..=ceiling {
    out.push((w, off));
    off += e.graded.piece(w).rank(n);
  }
  (out, off)
}

/// Realization over the weights `floor..=ceiling`: `⊕_w E^{(w)}[-2w]` for the
/// minus flag, `⊕_w E^{(w)}` for the plus flag, with differential `d + ε`.
pub fn tate_realization<S: Scalar>(
  e: &MixedComplex<S>,
  floor: i64,
  ceiling: i64,
) -> Result<CochainComplex<S>> {
  if floor > ceiling {
    return Err(Error::BadParameters(format!("empty weight window [{floor}, {ceiling}]")));
  }
  let e = match e.flag {
    Flag::Minus => red_shift(e)?,
    Flag::Plus => e.clone(),
  };
  let pieces: Vec<CochainComplex<S>> = (floor..=ceiling).map(|w| e.graded.piece(w)).collect();
  let windows: Vec<(i64, i64)> = pieces.iter().filter_map(CochainComplex::window).collect();
  let (Some(lo), Some(hi)) = (windows.iter().map(|w| w.0).min(), windows.iter().map(|w| w.1).max()) else {
    return Ok(CochainComplex::zero());
  };
  for n in lo..=hi {
    if !e.eps(ceiling, n).is_zero() {
      return Err(Error::UnsoundTruncation(format!(
        "ε leaves the weight window at weight {ceiling}, degree {n}"
      )));
    }
  }
  let mut ranks = Vec::new();
  let mut diffs = Vec::new();
  for n in lo..=hi {
    let (src, cols) = realization_blocks(&e, floor, ceiling, n);
    ranks.push(cols);
    if n == hi {
      break;
    }
    let (tgt, rows) = realization_blocks(&e, floor, ceiling, n + 1);
    let mut blocks = Vec::new();
    for (k, (w, off)) in src.iter().enumerate() {
      blocks.push((tgt[k].1, *off, e.graded.piece(*w).d(n)));
      if *w < ceiling {
        blocks.push((tgt[k + 1].1, *off, e.eps(*w, n)));
      }
    }
    diffs.push(SparseMat::from_blocks(rows, cols, blocks.iter().map(|(r, c, m)| (*r, *c, m))));
  }
  let complete = |n: i64| pieces.iter().all(|c| c.is_complete(n));
  let (below, above) = (pieces.iter().all(|c| c.exactness().0), pieces.iter().all(|c| c.exactness().1));
  let out =
    CochainComplex::new(lo, ranks, diffs).map_err(|err| Error::Invariant(format!("realization: {err}")))?;
  Ok(out.with_completeness(complete, below, above))
}

/// Decreasing filtration `F^w ⊇ F^{w+1}` with the inclusions `F^{w+1} → F^w`.
#[derive(Clone, Debug)]
pub struct FilteredComplex<S> {
  pub stages: BTreeMap<i64, CochainComplex<S>>,
  pub inclusions: BTreeMap<i64, ChainMap<S>>,
}

impl<S: Scalar> FilteredComplex<S> {
  pub fn stage(&self, w: i64) -> CochainComplex<S> {
    let Some((lo, _)) = self.stages.first_key_value() else { return CochainComplex::zero() };
    self.stages.get(&w.max(*lo)).cloned().unwrap_or_else(CochainComplex::zero)
  }

  /// Each transition map is injective in every degree.
  pub fn is_filtration(&self) -> bool {
    self.inclusions.values().all(|f| {
      f.source.window().is_none_or(|(lo, hi)| (lo..=hi).all(|n| S::rank(&f.at(n)) == f.source.rank(n)))
    })
  }
}

/// `F^w` is the realization over weights `≥ w`.
pub fn mixed_to_filtered<S: Scalar>(e: &MixedComplex<S>) -> Result<FilteredComplex<S>> {
  let Some((lo, hi)) = e.graded.weights() else {
    return Ok(FilteredComplex { stages: BTreeMap::new(), inclusions: BTreeMap::new() });
  };
  let mut stages = BTreeMap::new();
  for w in lo..=hi {
    stages.insert(w, tate_realization(e, w, hi)?);
  }
  let realized = realized_pieces(e)?;
  let mut inclusions = BTreeMap::new();
  for w in lo..hi {
    let (small, big) = (&stages[&(w + 1)], &stages[&w]);
    let piece = realized.piece(w);
    let comps = small
      .window()
      .map_or(Vec::new(), |(a, b)| (a..=b).collect())
      .into_iter()
      .map(|n| {
        let id = SparseMat::identity(small.rank(n));
        (n, SparseMat::from_blocks(big.rank(n), small.rank(n), [(piece.rank(n), 0, &id)]))
      })
      .collect();
    inclusions.insert(w, ChainMap::new(small.clone(), big.clone(), comps)?);
  }
  Ok(FilteredComplex { stages, inclusions })
}

/// Associated graded `F^w / F^{w+1}`.
pub fn filtered_to_graded<S: Scalar>(f: &FilteredComplex<S>) -> Result<GradedComplex<S>> {
  let mut pieces = BTreeMap::new();
  for (w, stage) in &f.stages {
    let Some(inc) = f.inclusions.get(w) else {
      pieces.insert(*w, stage.clone());
      continue;
    };
    let Some((lo, hi)) = stage.window() else {
      pieces.insert(*w, CochainComplex::zero());
      continue;
    };
    let quotients = (lo..=hi)
      .map(|n| {
        S::cokernel(&inc.at(n)).ok_or_else(|| Error::Invariant(format!("gr^{w} is not free in degree {n}")))
      })
      .collect::<Result<Vec<_>>>()?;
    let ranks = quotients.iter().map(|(p, _)| p.rows()).collect();
    let diffs = (lo..hi)
      .map(|n| {
        let (proj, _) = &quotients[(n + 1 - lo) as usize];
        let (_, section) = &quotients[(n - lo) as usize];
        proj.mul(&stage.d(n)).mul(section)
      })
      .collect();
    let gr = CochainComplex::new(lo, ranks, diffs)?.with_completeness(
      |n| stage.is_complete(n),
      stage.exactness().0,
      stage.exactness().1,
    );
    pieces.insert(*w, gr.trimmed());
  }
  Ok(GradedComplex::new(pieces))
}

/// The pieces of `E` as they sit inside the realization (shifted for the minus flag).
pub fn realized_pieces<S: Scalar>(e: &MixedComplex<S>) -> Result<GradedComplex<S>> {
  Ok(match e.flag {
    Flag::Minus => red_shift(e)?.graded,
    Flag::Plus => e.graded.clone(),
  })
}

/// `v · v` against the divided square `γ₂(v)` in the free simplicial commutative
/// ring on a degree-2 generator; the returned scalar `c` has `v·v = c·γ₂`.
pub fn check_negative_weight_product<S: Scalar>(trunc: usize) -> Result<S> {
  Ok(divided_power_square::<S>(trunc)?.scalar)
}

/// Full comparison data behind [`check_negative_weight_product`].
pub fn negative_weight_square<S: Scalar>(trunc: usize) -> Result<DividedSquare<S>> {
  divided_power_square(trunc)
}

/// Weight-`n` piece of `ℤ[u]` in the cosimplicial direction: `K(S[-2])^{⊗n}`.
pub fn u_power<S: Scalar>(n: usize, trunc: usize) -> Result<CosimplicialModule<S>> {
  let k = codenormalize(&CochainComplex::<S>::unit(2), trunc)?;
  let mut out = CosimplicialModule::constant(1, trunc);
  for _ in 0..n {
    out = out.tensor(&k);
  }
  Ok(out)
}

/// Scalar `c` with `[u^p] ∪ [u^q] = c · [u^{p+q}]` for the chosen generators of
/// `H^{2p}`, `H^{2q}`, `H^{2(p+q)}` of the weight pieces of `ℤ[u]`.
///
/// The pieces are simplicially constant, so `Tot^π` is the conormalized
/// cochain complex of the cosimplicial direction.
pub fn u_product_scalar<S: Scalar>(p: usize, q: usize) -> Result<S> {
  let trunc = 2 * (p + q) + 1;
  let (a, b) = (u_power::<S>(p, trunc)?, u_power::<S>(q, trunc)?);
  let c = a.tensor(&b);
  let (na, nb, nc) = (a.normalize()?, b.normalize()?, c.normalize()?);
  let generator = |n: &crate::simplicial::ConormalizedCochains<S>, deg: usize| -> Result<_> {
    let basis = CohomologyBasis::new(&n.complex, deg as i64)?;
    if basis.rank() != 1 {
      return Err(Error::Invariant(format!("H^{deg} has rank {}", basis.rank())));
    }
    Ok((n.inclusions[deg].mul_vec(&basis.generators[0]), basis))
  };
  let (x, _) = generator(&na, 2 * p)?;
  let (y, _) = generator(&nb, 2 * q)?;
  let (_, target) = generator(&nc, 2 * (p + q))?;
  let xy = cup_product(&a, 2 * p, &x, &b, 2 * q, &y)?;
  let coords = nc
    .coordinates(2 * (p + q), &xy)
    .ok_or_else(|| Error::Invariant("cup product is not conormalized".into()))?;
  let class = target.class(&coords).ok_or_else(|| Error::Invariant("cup product is not a cocycle".into()))?;
  Ok(vec_get(&class, 0))
}

/// `Tot^π((A ⊙ B)^{(w)})` against `Tot^π(A^{(w)}) ⊗ Tot^π(B^{(w)})`.
pub fn lax_monoidal_check<S: Scalar>(a: &CsRing<S>, b: &CsRing<S>, w: i64) -> Result<QisVerdict> {
  let ab = convolve(a, b)?;
  let left = ab.tot_pi(w)?.cohomology()?;
  let right = a.tot_pi(w)?.tensor(&b.tot_pi(w)?).cohomology()?;
  Ok(QisVerdict::from_tables(left, right))
}

/// `Tot^π(RS(A))^{(w)}` against `Tot^π(A^{(w)})[-2w]`.
pub fn red_shift_compare<S: Scalar>(a: &CsRing<S>, w: i64) -> Result<QisVerdict> {
  let rs = red_shift_cs(a)?;
  let left = rs.tot_pi(w)?.cohomology()?;
  let right = match a.piece(w) {
    Some(m) => tot_pi(m)?.shift(-2 * w).cohomology()?,
    None => CochainComplex::<S>::zero().cohomology()?,
  };
  Ok(QisVerdict::from_tables(left, right))
}

#[cfg(test)]
mod tests {
  use super::*;
  use crate::scalar::{Fp, Integer, Rational};

  type Z = Integer;

  fn sample() -> MixedComplex<Z> {
    // weight 0: Z in degree 0, weight 1: Z in degree -1, ε = 1
    let graded =
      GradedComplex::new(BTreeMap::from([(0, CochainComplex::unit(0)), (1, CochainComplex::unit(-1))]));
    MixedComplex::new(graded, BTreeMap::from([((0, 0), SparseMat::identity(1))]), Flag::Minus).unwrap()
  }

  #[test]
  fn red_shift_round_trip() {
    let e = sample();
    let r = red_shift(&e).unwrap();
    assert_eq!(r.flag, Flag::Plus);
    assert_eq!(r.graded.piece(1).window(), Some((1, 1)));
    assert_eq!(red_shift_inverse(&r).unwrap(), e);
    assert!(red_shift(&r).is_err());
  }

  #[test]
  fn weight_one_unit_moves_to_degree_two() {
    let e = MixedComplex::trivial(GradedComplex::single(1, CochainComplex::<Z>::unit(0)), Flag::Minus);
    assert_eq!(red_shift(&e).unwrap().graded.piece(1).window(), Some((2, 2)));
  }

  #[test]
  fn realization_is_acyclic_and_filtration_round_trips() {
    let e = sample();
    let t = tate_realization(&e, 0, 1).unwrap();
    assert!(t.cohomology().unwrap().support().is_empty());
    assert_eq!(tate_realization(&red_shift(&e).unwrap(), 0, 1).unwrap(), t);
    assert!(matches!(tate_realization(&e, 0, 0), Err(Error::UnsoundTruncation(_))));
    let f = mixed_to_filtered(&e).unwrap();
    assert!(f.is_filtration());
    assert_eq!(filtered_to_graded(&f).unwrap(), realized_pieces(&e).unwrap());
  }

  #[test]
  fn negative_weight_square() {
    assert_eq!(check_negative_weight_product::<Z>(5).unwrap(), Z::from(2));
    assert_eq!(check_negative_weight_product::<Rational>(5).unwrap(), Rational::from_i64(2));
    assert_eq!(check_negative_weight_product::<Fp<2>>(5).unwrap(), Fp::new(0));
    assert!(check_negative_weight_product::<Fp<3>>(5).unwrap().is_unit());
  }

  #[test]
  fn u_products_are_units() {
    for (p, q) in [(1, 1), (1, 2), (0, 2)] {
      let c = u_product_scalar::<Z>(p, q).unwrap();
      assert!(c.is_unit(), "({p},{q}) gives {c}");
    }
  }
}
