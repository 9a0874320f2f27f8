//! Finite-window toolkit for difference-set densities and the dynamics of
//! weighted backward shifts.
//!
//! The crate is organised bottom-up:
//!
//! - [`intset`]: windowed integer sets, counting, densities, gaps.
//! - [`diffset`]: correlation sets `B_k = A ∩ (A − k)`, syndetic return sets,
//!   the greedy separated set and running return averages.
//! - [`shift`]: weight sequences held as log-potentials, sparse vectors with
//!   log-domain coefficients and closed-form powers of `B_w`.
//! - [`constructions`]: the two counterexample datasets (the block
//!   construction with a max-rule weight, and the geometric interval system
//!   with a min-rule weight).
//! - [`criteria`]: verifiers producing [`criteria::ConditionReport`]s.
//!
//! Numeric code is generic over [`Scalar`] (`f32`/`f64`); densities and
//! thresholds use exact [`Rational`]s.

pub mod constructions;
pub mod criteria;
pub mod diffset;
mod error;
pub mod intset;
mod scalar;
pub mod shift;

pub use error::{Error, Result};
pub use scalar::{parse_rational, rational_to_f64, Rational, Scalar};

pub type WeightSeqF64 = shift::WeightSeq<f64>;
pub type WeightSeqF32 = shift::WeightSeq<f32>;
pub type SparseVecF64 = shift::SparseVec<f64>;
pub type SparseVecF32 = shift::SparseVec<f32>;
pub type FhcFamilyF64 = criteria::FhcFamily<f64>;
