//! Weighted backward shifts `B_w e_n = w_n e_{n−1}` on windowed `ℓ^p` / `c₀`.
//!
//! Products of weights are never formed directly: a [`WeightSeq`] exposes the
//! log-potential `Φ`, and powers are evaluated coefficient by coefficient as
//! `ln|x_k| + Φ(k) − Φ(k − n)`.

mod io;
mod orbit;
mod vector;
mod weight;

pub use io::weight_from_json;
pub use orbit::{apply_once, apply_power, log_distance_after, orbit_log_norms, visit_set};
pub use vector::{log_norm_of, LogCoef, Space, SparseVec, VectorLiteral};
pub use weight::{Domain, LogProducts, PartialProducts, WeightSeq};
