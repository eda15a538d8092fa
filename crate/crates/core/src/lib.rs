//! Exact computations for infinitesimal derived foliations at finite truncation.
//!
//! The crate is organised bottom-up:
//!
//! * [`exactlin`]: sparse matrices, ranks, kernels, Smith normal form.
//! * [`complexes`]: bounded cochain complexes, bicomplexes and cohomology tables.
//! * [`simplicial`]: truncated (co)simplicial modules, Dold–Kan, shuffle products,
//!   free simplicial commutative rings.
//! * [`cs_rings`]: cosimplicial-simplicial modules and rings, `Tot^π`, cotensors,
//!   `Sym^Δ`, path objects.
//! * [`graded_mixed`]: graded mixed complexes, red-shift, Tate realization, ℤ⟨u,v⟩.
//! * [`infcoh`]: Čech–Alexander towers, de Rham complexes, the graded comparison.
//! * [`foliations`]: foliation data, formal groupoids, integration.
//!
//! Everything is generic over a [`Scalar`]; the aliases below fix the common rings.

#![allow(clippy::needless_range_loop)]

pub mod complexes;
pub mod cs_rings;
pub mod error;
pub mod exactlin;
pub mod foliations;
pub mod graded_mixed;
pub mod infcoh;
pub mod poly;
pub mod scalar;
pub mod simplicial;

pub use error::{Error, Result};
pub use exactlin::{CohomologyGroup, SparseMat, SparseVec};
pub use scalar::{Coefficients, Field, Fp, Integer, Rational, Scalar};

pub type F2 = Fp<2>;
pub type F3 = Fp<3>;
pub type F5 = Fp<5>;

pub type ZMat = SparseMat<Integer>;
pub type QMat = SparseMat<Rational>;

pub type ZComplex = complexes::CochainComplex<Integer>;
pub type QComplex = complexes::CochainComplex<Rational>;
