//! Smooth infinitesimal derived foliations through their formal groupoids.
//!
//! A smooth foliation of rank `r` on `X = Spec k[x₁..x_d]` is stored as the
//! cosimplicial algebra of functions on the nerve of a formal groupoid,
//! written in Segal coordinates: level `n` is `A[[t⁽¹⁾, …, t⁽ⁿ⁾]]` where
//! `t⁽ᵏ⁾` (a block of `r` variables) is the fiber coordinate of the `k`-th
//! arrow, based at the source of that arrow. The `t`-adic filtration is the
//! filtration of `Ĉ_inf`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::complexes::{ChainMap, CochainComplex, CohomologyTable};
use crate::error::{Error, Result};
use crate::exactlin::SparseMat;
use crate::graded_mixed::FilteredComplex;
use crate::infcoh::{
  cech_alexander, graded_compare, slice_compatible, structure_images, sym_rank, AdicAlgebra, GradedWitness,
  SmoothAffine,
};
use crate::poly::{degree, monomials_of_degree, Poly};
use crate::scalar::Scalar;
use crate::simplicial::{CosimplicialModule, Monotone};

type Images<S> = Vec<Poly<S>>;

fn vars<S: Scalar>(nvars: usize, range: std::ops::Range<usize>) -> Images<S> {
  range.map(|i| Poly::var(nvars, i)).collect()
}

fn substitute_all<S: Scalar>(
  ps: &[Poly<S>],
  images: &[Poly<S>],
  nv: usize,
  keep: &impl Fn(&[u32]) -> bool,
) -> Images<S> {
  ps.iter().map(|p| p.substitute_into(images, nv, keep)).collect()
}

/// Cosimplicial algebra of a truncated groupoid nerve, stored as generator images.
#[derive(Clone, Debug, PartialEq)]
pub struct NerveTower<S: Scalar> {
  pub dim: usize,
  pub rank: usize,
  pub prec: u32,
  pub bound: u32,
  /// `cofaces[n][i]`: images of the level-`n` generators on level `n + 1`.
  cofaces: Vec<Vec<Images<S>>>,
  /// `codegens[n][i]`: images of the level-`n` generators on level `n - 1`.
  codegens: Vec<Vec<Images<S>>>,
}

impl<S: Scalar> NerveTower<S> {
  pub fn from_fn(
    dim: usize,
    rank: usize,
    levels: usize,
    prec: u32,
    bound: u32,
    images: impl Fn(&Monotone) -> Images<S>,
  ) -> Self {
    let cofaces =
      (0..levels).map(|n| (0..n + 2).map(|i| images(&Monotone::coface(n + 1, i))).collect()).collect();
    let codegens = (0..=levels)
      .map(|n| {
        if n == 0 {
          Vec::new()
        } else {
          (0..n).map(|i| images(&Monotone::codegeneracy(n - 1, i))).collect()
        }
      })
      .collect();
    NerveTower { dim, rank, prec, bound, cofaces, codegens }
  }

  pub fn trunc(&self) -> usize {
    self.cofaces.len()
  }

  pub fn nvars(&self, n: usize) -> usize {
    self.dim + self.rank * n
  }

  fn keep(&self) -> impl Fn(&[u32]) -> bool + '_ {
    move |m: &[u32]| degree(&m[self.dim..]) < self.prec
  }

  pub fn coface(&self, n: usize, i: usize) -> &[Poly<S>] {
    &self.cofaces[n][i]
  }

  pub fn codegeneracy(&self, n: usize, i: usize) -> &[Poly<S>] {
    &self.codegens[n][i]
  }

  /// Images of the level-`m` generators under `θ : [m] → [n]`, through its
  /// factorization into codegeneracies and cofaces.
  pub fn images(&self, theta: &Monotone) -> Images<S> {
    let (m, n) = (theta.source(), theta.target);
    if theta.is_identity() {
      return vars(self.nvars(n), 0..self.nvars(n));
    }
    let keep = self.keep();
    if let Some(j) = theta.values.windows(2).position(|w| w[0] == w[1]) {
      let mut rest = theta.values.clone();
      rest.remove(j + 1);
      let psi = self.images(&Monotone::new(rest, n));
      return substitute_all(&self.codegens[m][j], &psi, self.nvars(n), &keep);
    }
    let s = (0..=n).find(|v| !theta.values.contains(v)).expect("non-identity injection misses a value");
    let psi = Monotone::new(theta.values.iter().map(|v| if *v < s { *v } else { v - 1 }).collect(), n - 1);
    substitute_all(&self.images(&psi), &self.cofaces[n - 1][s], self.nvars(n), &keep)
  }

  pub fn algebra(&self, n: usize) -> AdicAlgebra {
    AdicAlgebra::new(self.dim, self.rank * n, self.prec, self.bound)
  }

  pub fn module(&self) -> Result<CosimplicialModule<S>> {
    let algebras: Vec<AdicAlgebra> = (0..=self.trunc()).map(|n| self.algebra(n)).collect();
    CosimplicialModule::from_fn(
      algebras.iter().map(AdicAlgebra::rank).collect(),
      |n, i| algebras[n].map_matrix(&algebras[n + 1], &self.cofaces[n][i]),
      |n, i| algebras[n].map_matrix(&algebras[n - 1], &self.codegens[n][i]),
    )
  }

  /// All structure maps send generators to polynomials homogeneous of degree one.
  pub fn is_graded(&self) -> bool {
    self
      .cofaces
      .iter()
      .chain(&self.codegens)
      .flatten()
      .flatten()
      .all(|p| p.terms().all(|(m, _)| degree(m) == 1))
  }

  /// Truncation keeps a direct summand and no `t`-cutoff hides a class.
  pub fn is_sound(&self) -> bool {
    self.prec > self.bound && self.is_graded()
  }

  /// Linear part of `θ` on the fiber coordinates (rows: level `n`, columns: level `m`).
  pub fn linear_part(&self, theta: &Monotone) -> Result<SparseMat<S>> {
    let (m, n) = (theta.source(), theta.target);
    let (d, r) = (self.dim, self.rank);
    let images = self.images(theta);
    let mut entries = Vec::new();
    for (col, p) in images[d..].iter().enumerate() {
      for (mono, c) in p.terms() {
        if degree(&mono[d..]) != 1 {
          continue;
        }
        if degree(&mono[..d]) != 0 {
          return Err(Error::NotSmooth(format!("linear part of {:?} depends on the base", theta.values)));
        }
        let row = mono[d..].iter().position(|e| *e == 1).expect("degree one");
        entries.push((row, col, c.clone()));
      }
    }
    Ok(SparseMat::from_triplets(r * n, r * m, entries))
  }

  /// Unnormalized cochains `Σ (-1)^i d^i`, with the infcoh trust rule.
  pub fn cochains(&self) -> Result<CochainComplex<S>> {
    let module = self.module()?;
    let top = self.trunc();
    let diffs = (0..top)
      .map(|n| {
        (0..n + 2).fold(SparseMat::zero(module.rank(n + 1), module.rank(n)), |acc, i| {
          if i % 2 == 0 {
            acc.add(module.coface(n, i))
          } else {
            acc.sub(module.coface(n, i))
          }
        })
      })
      .collect();
    let sound = self.is_sound();
    Ok(CochainComplex::new(0, module.ranks().to_vec(), diffs)?.with_completeness(
      |n| sound && n <= top as i64,
      sound,
      false,
    ))
  }
}

/// A formal groupoid on `X` with `r`-dimensional fibers, in coordinates based at the source.
#[derive(Clone, Debug, PartialEq)]
pub struct FormalGroupoid<S: Scalar> {
  pub base: SmoothAffine,
  pub rank: usize,
  pub prec: u32,
  /// Images of `x` on arrows (variables `x, t`).
  pub source: Images<S>,
  pub target: Images<S>,
  /// Images of `(x, t)` on `X`.
  pub unit: Images<S>,
  /// Images of `t` on composable pairs (variables `x, t₁, t₂`): first `t₁`, then `t₂`.
  pub composition: Images<S>,
  /// Images of `(x, t)` on arrows.
  pub inverse: Images<S>,
}

impl<S: Scalar> FormalGroupoid<S> {
  /// Completes `target` and `composition` with the canonical source and unit
  /// and the inverse solved order by order, then checks the axioms.
  pub fn new(
    base: SmoothAffine,
    rank: usize,
    prec: u32,
    target: Images<S>,
    composition: Images<S>,
  ) -> Result<Self> {
    let d = base.dim();
    let n1 = d + rank;
    let mut unit = vars(d, 0..d);
    unit.extend((0..rank).map(|_| Poly::zero(d)));
    let mut g = FormalGroupoid {
      base,
      rank,
      prec,
      source: vars(n1, 0..d),
      target,
      unit,
      composition,
      inverse: Vec::new(),
    };
    g.inverse = g.solve_inverse();
    g.verify()?;
    Ok(g)
  }

  fn keep(&self) -> impl Fn(&[u32]) -> bool + '_ {
    let d = self.base.dim();
    move |m: &[u32]| degree(&m[d..]) < self.prec
  }

  /// Fiber block `k` (0-based) in a ring with `blocks` blocks.
  fn block(&self, blocks: usize, k: usize) -> Images<S> {
    let (d, r) = (self.base.dim(), self.rank);
    vars(d + r * blocks, d + r * k..d + r * (k + 1))
  }

  fn compose(&self, base: &[Poly<S>], first: &[Poly<S>], second: &[Poly<S>]) -> Images<S> {
    let mut args = base.to_vec();
    args.extend_from_slice(first);
    args.extend_from_slice(second);
    substitute_all(&self.composition, &args, args.first().map_or(0, Poly::nvars), &self.keep())
  }

  fn move_along(&self, base: &[Poly<S>], arrow: &[Poly<S>]) -> Images<S> {
    let mut args = base.to_vec();
    args.extend_from_slice(arrow);
    substitute_all(&self.target, &args, args.first().map_or(0, Poly::nvars), &self.keep())
  }

  fn solve_inverse(&self) -> Images<S> {
    let (d, r) = (self.base.dim(), self.rank);
    let n1 = d + r;
    let x = vars(n1, 0..d);
    let t = self.block(1, 0);
    let keep = self.keep();
    let mut s: Images<S> = t.iter().map(|p| p.scale(&-S::one())).collect();
    for _ in 0..self.prec {
      let err = self.compose(&x, &t, &s);
      s = s.iter().zip(&err).map(|(a, e)| a.sub(e).truncate(&keep)).collect();
    }
    let mut inv = self.move_along(&x, &t);
    inv.extend(s);
    inv
  }

  /// Groupoid axioms on generators, exact at the working precision.
  pub fn verify(&self) -> Result<()> {
    let (d, r) = (self.base.dim(), self.rank);
    let fail = |what: &str| Err(Error::GroupoidAxiom(what.to_string()));
    let counts = [
      (self.source.len(), d),
      (self.target.len(), d),
      (self.unit.len(), d + r),
      (self.composition.len(), r),
      (self.inverse.len(), d + r),
    ];
    if counts.iter().any(|(a, b)| a != b) {
      return Err(Error::Shape("structure map with the wrong number of generator images".into()));
    }
    let keep = self.keep();
    let n1 = d + r;
    if self.source != vars(n1, 0..d) {
      return fail("source is not the base projection");
    }
    let x0: Images<S> = vars(d, 0..d);
    if substitute_all(&self.target, &self.unit, d, &keep) != x0
      || self.unit[..d] != x0[..]
      || self.unit[d..].iter().any(|p| !p.is_zero())
    {
      return fail("unit");
    }
    // formal smoothness: target ≡ x mod t, composition ≡ t₁ + t₂ to first order
    let n2 = d + 2 * r;
    let (x2, t1, t2) = (vars(n2, 0..d), self.block(2, 0), self.block(2, 1));
    let lin: Images<S> = t1.iter().zip(&t2).map(|(a, b)| a.add(b)).collect();
    for (c, l) in self.composition.iter().zip(&lin) {
      let first_order = c.truncate(&|m: &[u32]| degree(m) == 1);
      if first_order != *l {
        return Err(Error::GroupoidAxiom(
          "composition is not t₁ + t₂ to first order (rank detection)".into(),
        ));
      }
    }
    for (v, p) in self.target.iter().enumerate() {
      if p.truncate(&|m: &[u32]| degree(&m[d..]) == 0) != Poly::var(n1, v) {
        return fail("target is not the identity modulo t");
      }
    }
    let zero2: Images<S> = (0..r).map(|_| Poly::zero(n2)).collect();
    if self.compose(&x2, &t1, &zero2) != t1 || self.compose(&x2, &zero2, &t2) != t2 {
      return fail("unit law for composition");
    }
    if self.move_along(&x2, &self.compose(&x2, &t1, &t2)) != self.move_along(&self.move_along(&x2, &t1), &t2)
    {
      return fail("target of a composite");
    }
    let n3 = d + 3 * r;
    let (x3, s1, s2, s3) = (vars(n3, 0..d), self.block(3, 0), self.block(3, 1), self.block(3, 2));
    let y1 = self.move_along(&x3, &s1);
    let lhs = self.compose(&x3, &self.compose(&x3, &s1, &s2), &s3);
    let rhs = self.compose(&x3, &s1, &self.compose(&y1, &s2, &s3));
    if lhs != rhs {
      return fail("associativity");
    }
    let x1 = vars(n1, 0..d);
    let t = self.block(1, 0);
    let (inv_x, inv_t) = self.inverse.split_at(d);
    if inv_x != &self.move_along(&x1, &t)[..] {
      return fail("inverse does not start at the target");
    }
    if self.compose(&x1, &t, inv_t).iter().any(|p| !p.is_zero()) {
      return fail("inverse is not a right inverse");
    }
    if self.move_along(inv_x, inv_t) != x1 {
      return fail("inverse does not return to the source");
    }
    if self.compose(inv_x, inv_t, &t).iter().any(|p| !p.is_zero()) {
      return fail("inverse is not a left inverse");
    }
    Ok(())
  }

  /// Images of the level-`m` nerve generators under `θ` on level `n`.
  pub fn nerve_images(&self, theta: &Monotone) -> Images<S> {
    let (d, n) = (self.base.dim(), theta.target);
    let nv = d + self.rank * n;
    let mut points = vec![vars::<S>(nv, 0..d)];
    for j in 1..=n {
      let arrow = self.block(n, j - 1);
      points.push(self.move_along(&points[j - 1], &arrow));
    }
    let mut out = points[theta.values[0]].clone();
    for k in 1..theta.values.len() {
      let (a, b) = (theta.values[k - 1], theta.values[k]);
      if a == b {
        out.extend((0..self.rank).map(|_| Poly::zero(nv)));
        continue;
      }
      let mut c = self.block(n, a);
      for j in a + 2..=b {
        c = self.compose(&points[a], &c, &self.block(n, j - 1));
      }
      out.extend(c);
    }
    out
  }

  pub fn describe(&self) -> GroupoidDescription {
    let (d, r) = (self.base.dim(), self.rank);
    let fiber = |k: Option<usize>| -> Vec<String> {
      (0..r)
        .map(|j| match (k, r) {
          (None, 1) => "t".to_string(),
          (None, _) => format!("t_{}", self.base.vars.get(j).cloned().unwrap_or_else(|| j.to_string())),
          (Some(k), 1) => format!("t{k}"),
          (Some(k), _) => format!("t{k}_{}", self.base.vars.get(j).cloned().unwrap_or_else(|| j.to_string())),
        })
        .collect()
    };
    let x = self.base.vars.clone();
    let one: Vec<String> = x.iter().cloned().chain(fiber(None)).collect();
    let two: Vec<String> = x.iter().cloned().chain(fiber(Some(1))).chain(fiber(Some(2))).collect();
    let render = |ps: &[Poly<S>], names: &[String]| ps.iter().map(|p| p.render(names)).collect();
    let _ = d;
    GroupoidDescription {
      base: x.clone(),
      rank: r,
      prec: self.prec,
      source: render(&self.source, &one),
      target: render(&self.target, &one),
      unit: render(&self.unit, &x),
      composition: render(&self.composition, &two),
      inverse: render(&self.inverse, &one),
    }
  }
}

/// Structure maps as generator-image lists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GroupoidDescription {
  pub base: Vec<String>,
  pub rank: usize,
  pub prec: u32,
  pub source: Vec<String>,
  pub target: Vec<String>,
  pub unit: Vec<String>,
  pub composition: Vec<String>,
  pub inverse: Vec<String>,
}

/// `X` with only identity arrows.
pub fn unit_groupoid<S: Scalar>(x: &SmoothAffine, prec: u32) -> Result<FormalGroupoid<S>> {
  FormalGroupoid::new(x.clone(), 0, prec, vars(x.dim(), 0..x.dim()), Vec::new())
}

/// Formal neighbourhood of the diagonal in `X × X`: arrows `x → x + t`.
pub fn pair_groupoid<S: Scalar>(x: &SmoothAffine, prec: u32) -> Result<FormalGroupoid<S>> {
  let d = x.dim();
  let target = (0..d).map(|v| Poly::var(2 * d, v).add(&Poly::var(2 * d, d + v))).collect();
  let composition = (0..d).map(|v| Poly::var(3 * d, d + v).add(&Poly::var(3 * d, 2 * d + v))).collect();
  FormalGroupoid::new(x.clone(), d, prec, target, composition)
}

/// `Ĝ_a` over a point: `t ↦ t₁ + t₂`.
pub fn additive_group<S: Scalar>(prec: u32) -> Result<FormalGroupoid<S>> {
  FormalGroupoid::new(SmoothAffine::point(), 1, prec, Vec::new(), vec![Poly::var(2, 0).add(&Poly::var(2, 1))])
}

/// `Ĝ_m` over a point: `t ↦ t₁ + t₂ + t₁t₂`.
pub fn multiplicative_group<S: Scalar>(prec: u32) -> Result<FormalGroupoid<S>> {
  let (a, b) = (Poly::var(2, 0), Poly::var(2, 1));
  FormalGroupoid::new(SmoothAffine::point(), 1, prec, Vec::new(), vec![a.add(&b).add(&a.mul(&b))])
}

/// `𝕍(E)`, functions `Sym(E)`; its cotangent complex is `E[1]`.
#[derive(Clone, Debug)]
pub struct LinearStackDesc<S> {
  pub base: SmoothAffine,
  pub complex: CochainComplex<S>,
}

impl<S: Scalar> LinearStackDesc<S> {
  pub fn cotangent(&self) -> CochainComplex<S> {
    self.complex.shift(1)
  }
}

/// Smooth foliation: cotangent `L` (free, degree 0) and the nerve tower of functions.
#[derive(Clone, Debug)]
pub struct FoliationData<S: Scalar> {
  pub base: SmoothAffine,
  pub cotangent: CochainComplex<S>,
  pub nerve: NerveTower<S>,
  pub gr_witness: Vec<GradedWitness>,
}

impl<S: Scalar> FoliationData<S> {
  pub fn new(base: SmoothAffine, nerve: NerveTower<S>) -> Result<Self> {
    let r = nerve.rank;
    let cotangent = if r == 0 { CochainComplex::zero() } else { CochainComplex::concentrated(0, r) };
    let gr_witness = nerve_witness(&base, &nerve)?;
    Ok(FoliationData { base, cotangent, nerve, gr_witness })
  }

  pub fn rank(&self) -> usize {
    self.nerve.rank
  }

  /// `L` is a free module in degree 0.
  pub fn is_smooth(&self) -> bool {
    self.cotangent.window().is_none_or(|(lo, hi)| (lo..=hi).all(|n| n == 0 || self.cotangent.rank(n) == 0))
  }

  /// `𝓕 = 𝕍(L[-1])`.
  pub fn stack(&self) -> LinearStackDesc<S> {
    LinearStackDesc { base: self.base.clone(), complex: self.cotangent.shift(-1) }
  }

  /// `F^w` = cochains of `t`-degree `≥ w`, for `0 ≤ w < prec`.
  pub fn functions(&self) -> Result<FilteredComplex<S>> {
    let c = self.nerve.cochains()?;
    let algebras: Vec<AdicAlgebra> = (0..=self.nerve.trunc()).map(|n| self.nerve.algebra(n)).collect();
    let top = self.nerve.prec.min(self.nerve.bound + 1);
    let selection = |w: u32| -> Vec<Vec<usize>> {
      algebras.iter().map(|a| (0..a.rank()).filter(|i| a.xi_degree(&a.basis()[*i]) >= w).collect()).collect()
    };
    let mut stages = BTreeMap::new();
    let mut kept = BTreeMap::new();
    for w in 0..top {
      let sel = selection(w);
      stages.insert(w as i64, restrict(&c, &sel)?);
      kept.insert(w, sel);
    }
    let mut inclusions = BTreeMap::new();
    for w in 0..top.saturating_sub(1) {
      let (small, big) = (&kept[&(w + 1)], &kept[&w]);
      let comps = small
        .iter()
        .enumerate()
        .map(|(n, sel)| {
          let pos: BTreeMap<usize, usize> = big[n].iter().enumerate().map(|(j, i)| (*i, j)).collect();
          let m = SparseMat::from_triplets(
            big[n].len(),
            sel.len(),
            sel.iter().enumerate().map(|(j, i)| (pos[i], j, S::one())),
          );
          (n as i64, m)
        })
        .collect();
      inclusions.insert(
        w as i64,
        ChainMap::new(stages[&((w + 1) as i64)].clone(), stages[&(w as i64)].clone(), comps)?,
      );
    }
    Ok(FilteredComplex { stages, inclusions })
  }

  /// `gr^w` = cochains of `t`-degree exactly `w`.
  pub fn graded_piece(&self, w: u32) -> Result<CochainComplex<S>> {
    let c = self.nerve.cochains()?;
    let sel: Vec<Vec<usize>> = (0..=self.nerve.trunc())
      .map(|n| {
        let a = self.nerve.algebra(n);
        (0..a.rank()).filter(|i| a.xi_degree(&a.basis()[*i]) == w).collect()
      })
      .collect();
    restrict(&c, &sel)
  }
}

fn restrict<S: Scalar>(c: &CochainComplex<S>, sel: &[Vec<usize>]) -> Result<CochainComplex<S>> {
  let diffs =
    (0..sel.len().saturating_sub(1)).map(|n| c.d(n as i64).submatrix(&sel[n + 1], &sel[n])).collect();
  let (below, above) = c.exactness();
  Ok(CochainComplex::new(0, sel.iter().map(Vec::len).collect(), diffs)?.with_completeness(
    |n| c.is_complete(n),
    below,
    above,
  ))
}

fn nerve_witness<S: Scalar>(base: &SmoothAffine, nerve: &NerveTower<S>) -> Result<Vec<GradedWitness>> {
  let (r, top) = (nerve.rank, nerve.trunc());
  let algebras: Vec<AdicAlgebra> = (0..=top).map(|n| nerve.algebra(n)).collect();
  let mut ops = BTreeMap::new();
  let mut maps = Vec::new();
  for n in 0..top {
    maps.extend((0..n + 2).map(|i| Monotone::coface(n + 1, i)));
    maps.extend((0..=n).map(|i| Monotone::codegeneracy(n, i)));
  }
  for theta in &maps {
    let op = algebras[theta.source()].map_matrix(&algebras[theta.target], &nerve.images(theta));
    ops.insert(theta.clone(), (op, nerve.linear_part(theta)?));
  }
  let mut out = Vec::new();
  let _ = base;
  for n in 1..=top {
    for w in 0..nerve.prec.min(nerve.bound + 1) {
      let names = |prefix: &str| -> Vec<String> {
        (1..=n).flat_map(|k| (0..r).map(move |j| format!("{prefix}{k}_{j}"))).collect()
      };
      let (t, e) = (names("t"), names("e"));
      let mons = monomials_of_degree(r * n, w);
      let bijection = mons
        .iter()
        .map(|m| {
          (
            Poly::<S>::monomial(m.clone(), S::one()).render(&t),
            Poly::<S>::monomial(m.clone(), S::one()).render(&e),
          )
        })
        .collect();
      let compatible = maps
        .iter()
        .filter(|th| th.source() == n || th.target == n)
        .all(|th| slice_compatible(&algebras[th.source()], &algebras[th.target], &ops[th].0, &ops[th].1, w));
      out.push(GradedWitness {
        level: n,
        weight: w,
        gr_rank: mons.len(),
        sym_rank: sym_rank(r * n, w),
        bijection,
        cofaces_compatible: compatible,
      });
    }
  }
  Ok(out)
}

/// Nerve of `G`: the cosimplicial functions on `G_n = G ×_X ⋯ ×_X G`.
pub fn differentiate<S: Scalar>(
  g: &FormalGroupoid<S>,
  levels: usize,
  bound: u32,
) -> Result<FoliationData<S>> {
  g.verify()?;
  if levels < 2 {
    return Err(Error::InsufficientTruncation(format!("the nerve needs levels ≥ 2, got {levels}")));
  }
  let nerve = NerveTower::from_fn(g.base.dim(), g.rank, levels, g.prec, bound, |theta| g.nerve_images(theta));
  FoliationData::new(g.base.clone(), nerve)
}

/// Reads the groupoid off levels `≤ 2` of the nerve.
pub fn integrate<S: Scalar>(f: &FoliationData<S>) -> Result<FormalGroupoid<S>> {
  if !f.is_smooth() {
    return Err(Error::NotSmooth("cotangent complex is not a bundle in degree 0".into()));
  }
  let t = &f.nerve;
  if t.trunc() < 2 {
    return Err(Error::InsufficientTruncation("composition lives on level 2".into()));
  }
  let (d, r) = (t.dim, t.rank);
  let n2 = t.nvars(2);
  // Segal chart: the first and second arrows of a composable pair are the level-2 coordinates
  let first = t.images(&Monotone::new(vec![0, 1], 2));
  let second = t.images(&Monotone::new(vec![1, 2], 2));
  let moved = substitute_all(t.coface(0, 0), &vars(n2, 0..d + r), n2, &t.keep());
  if first != vars(n2, 0..d + r)
    || second[..d] != moved[..]
    || second[d..] != vars::<S>(n2, d + r..d + 2 * r)[..]
  {
    return Err(Error::Invariant("nerve is not written in Segal coordinates".into()));
  }
  let composite = t.coface(1, 1);
  if composite[..d] != vars::<S>(n2, 0..d)[..] {
    return Err(Error::GroupoidAxiom("composite does not start at the source".into()));
  }
  let mut g =
    FormalGroupoid::new(f.base.clone(), r, t.prec, t.coface(0, 0).to_vec(), composite[d..].to_vec())?;
  g.source = t.coface(0, 1).to_vec();
  g.unit = t.codegeneracy(1, 0).to_vec();
  g.verify()?;
  Ok(g)
}

/// Tautological foliation: the Čech–Alexander tower of `X` in Segal coordinates
/// `t⁽ᵏ⁾ = ξ⁽ᵏ⁾ - ξ⁽ᵏ⁻¹⁾`.
pub fn tautological_foliation<S: Scalar>(
  x: &SmoothAffine,
  levels: usize,
  prec: u32,
  bound: u32,
) -> Result<FoliationData<S>> {
  let d = x.dim();
  // nerve generators in Čech–Alexander coordinates, and back
  let to_ca = |m: usize| -> Images<S> {
    let nv = d * (m + 1);
    let mut out = vars(nv, 0..d);
    for k in 1..=m {
      for v in 0..d {
        let mut p = Poly::var(nv, d * k + v);
        if k > 1 {
          p = p.sub(&Poly::var(nv, d * (k - 1) + v));
        }
        out.push(p);
      }
    }
    out
  };
  let from_ca = |n: usize| -> Images<S> {
    let nv = d * (n + 1);
    let mut out = vars(nv, 0..d);
    for k in 1..=n {
      for v in 0..d {
        out.push((1..=k).fold(Poly::zero(nv), |acc, j| acc.add(&Poly::var(nv, d * j + v))));
      }
    }
    out
  };
  let keep = |m: &[u32]| degree(&m[d..]) < prec;
  let nerve = NerveTower::from_fn(d, d, levels, prec, bound, |theta| {
    let ca = structure_images::<S>(d, theta);
    let nv = d * (theta.target + 1);
    substitute_all(&substitute_all(&to_ca(theta.source()), &ca, nv, &keep), &from_ca(theta.target), nv, &keep)
  });
  let mut f = FoliationData::new(x.clone(), nerve)?;
  if prec > bound {
    let tower = cech_alexander::<S>(x, levels, prec, bound)?;
    f.gr_witness = (1..=levels)
      .flat_map(|n| (0..prec.min(bound + 1)).map(move |w| (n, w)))
      .map(|(n, w)| graded_compare(&tower, n, w))
      .collect::<Result<_>>()?;
  }
  Ok(f)
}

/// `L = 0`: the constant tower on `A`.
pub fn zero_foliation<S: Scalar>(
  x: &SmoothAffine,
  levels: usize,
  prec: u32,
  bound: u32,
) -> Result<FoliationData<S>> {
  let d = x.dim();
  FoliationData::new(x.clone(), NerveTower::from_fn(d, 0, levels, prec, bound, |_| vars(d, 0..d)))
}

/// `Ω_X𝓕 = X ×_𝓕 X = 𝕍(L)` with its groupoid structure.
#[derive(Clone, Debug)]
pub struct LoopSpace<S: Scalar> {
  pub stack: LinearStackDesc<S>,
  pub groupoid: FormalGroupoid<S>,
  pub arrows: AdicAlgebra,
}

impl<S: Scalar> LoopSpace<S> {
  /// Functions on `Spf` of the arrows: a discrete algebra in degree 0.
  pub fn cohomology(&self) -> Result<CohomologyTable> {
    let names: Vec<String> =
      self.groupoid.describe().source.iter().cloned().chain(fiber_labels(self.groupoid.rank)).collect();
    let labels =
      self.arrows.basis().iter().map(|m| Poly::<S>::monomial(m.clone(), S::one()).render(&names)).collect();
    CochainComplex::<S>::concentrated(0, self.arrows.rank()).with_labels(0, labels).cohomology()
  }
}

fn fiber_labels(r: usize) -> Vec<String> {
  if r == 1 {
    vec!["t".into()]
  } else {
    (0..r).map(|j| format!("t_{j}")).collect()
  }
}

pub fn loop_space<S: Scalar>(f: &FoliationData<S>) -> Result<LoopSpace<S>> {
  let groupoid = integrate(f)?;
  let stack = LinearStackDesc { base: f.base.clone(), complex: f.cotangent.clone() };
  let arrows = f.nerve.algebra(1);
  Ok(LoopSpace { stack, groupoid, arrows })
}

/// Cohomology of the (normalized) nerve cochains.
pub fn foliation_cohomology<S: Scalar>(f: &FoliationData<S>) -> Result<CohomologyTable> {
  let mut c = f.nerve.module()?.normalize()?;
  let top = f.nerve.trunc() as i64;
  let sound = f.nerve.is_sound();
  c.complex = c.complex.with_completeness(|n| sound && n <= top, sound, false);
  c.complex.cohomology()
}

#[cfg(test)]
mod tests {
  use super::*;
  use crate::infcoh::inf_cohomology;
  use crate::scalar::{Fp, Rational};

  type Q = Rational;

  #[test]
  fn shipped_groupoids_satisfy_axioms() {
    let line = SmoothAffine::new(&["x"]);
    pair_groupoid::<Q>(&line, 6).unwrap();
    pair_groupoid::<Fp<3>>(&SmoothAffine::new(&["x", "y"]), 5).unwrap();
    unit_groupoid::<Q>(&line, 6).unwrap();
    additive_group::<Fp<5>>(6).unwrap();
    let gm = multiplicative_group::<Q>(6).unwrap();
    assert_eq!(gm.describe().inverse, vec!["-t + t^2 - t^3 + t^4 - t^5"]);
  }

  #[test]
  fn broken_composition_is_rejected() {
    let (a, b) = (Poly::<Q>::var(2, 0), Poly::var(2, 1));
    let bad = a.add(&b).add(&a.mul(&a).mul(&b));
    assert!(matches!(
      FormalGroupoid::new(SmoothAffine::point(), 1, 5, Vec::new(), vec![bad]),
      Err(Error::GroupoidAxiom(_))
    ));
  }

  #[test]
  fn pair_groupoid_is_the_tautological_foliation() {
    let line = SmoothAffine::new(&["x"]);
    let taut = tautological_foliation::<Q>(&line, 3, 6, 5).unwrap();
    let nerve = differentiate(&pair_groupoid::<Q>(&line, 6).unwrap(), 3, 5).unwrap();
    assert_eq!(taut.nerve, nerve.nerve);
    let g = integrate(&taut).unwrap();
    assert_eq!(g.describe().composition, vec!["t1 + t2"]);
    assert_eq!(g.describe().target, vec!["x + t"]);
  }

  #[test]
  fn tautological_cohomology_matches_infcoh() {
    let line = SmoothAffine::new(&["x"]);
    let f = tautological_foliation::<Q>(&line, 2, 8, 6).unwrap();
    let inf = inf_cohomology(&cech_alexander::<Q>(&line, 2, 8, 6).unwrap()).unwrap();
    assert!(foliation_cohomology(&f).unwrap().agrees_on_trusted(&inf));
    assert!(f.gr_witness.iter().all(|w| w.cofaces_compatible && w.gr_rank == w.sym_rank));
  }

  #[test]
  fn additive_group_cohomology_sees_frobenius() {
    let f = differentiate(&additive_group::<Fp<5>>(6).unwrap(), 3, 5).unwrap();
    let h = foliation_cohomology(&f).unwrap();
    assert_eq!((h.group(0).free_rank, h.group(1).free_rank), (1, 2));
    assert!(h.is_trusted(1));
    let loops = loop_space(&f).unwrap().cohomology().unwrap();
    assert_eq!(loops.group(0).free_rank, 6);
  }

  #[test]
  fn filtration_and_graded_pieces() {
    let line = SmoothAffine::new(&["x"]);
    let f = tautological_foliation::<Q>(&line, 2, 5, 4).unwrap();
    let fil = f.functions().unwrap();
    assert!(fil.is_filtration());
    let gr0 = f.graded_piece(0).unwrap().cohomology().unwrap();
    assert_eq!(gr0.group(0).free_rank, 5);
    assert_eq!(gr0.group(1).free_rank, 0);
  }

  #[test]
  fn loop_space_shifts_the_cotangent() {
    let plane = SmoothAffine::new(&["x", "y"]);
    let f = tautological_foliation::<Q>(&plane, 2, 3, 2).unwrap();
    let l = loop_space(&f).unwrap();
    assert_eq!(l.stack.cotangent().ranks(), f.cotangent.shift(1).ranks());
    assert_eq!(l.stack.cotangent().lo(), -1);
    assert_eq!(f.stack().cotangent().lo(), 0);
  }
}
