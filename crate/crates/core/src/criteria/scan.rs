use serde_json::json;

use super::report::ConditionReport;
use crate::intset::{density_profile, linear_checkpoints, IntSet, Window};
use crate::shift::{orbit_log_norms, SparseVec, WeightSeq};
use crate::{rational_to_f64, Error, Result, Scalar};

/// Upper densities at least this high count as "near 1".
pub const UNBOUNDED_UPPER: f64 = 0.9;

/// For each threshold `c`, the set `{0 ≤ n ≤ N : ‖B^n x‖ ≥ c}` with its
/// windowed lower/upper density.
///
/// Holds (distributionally unbounded evidence) when every set keeps upper
/// density `≥ 0.9`. A positive lower density at threshold `c` instead rules
/// out `x` being distributionally irregular: its orbit is not small on a set
/// of upper density 1. The minimum lower density over thresholds is reported
/// as `min_lower_density`.
pub fn distributional_unbounded_scan<F: Scalar>(w: &WeightSeq<F>, x: &SparseVec<F>, thresholds: &[f64], n_max: i64) -> Result<ConditionReport> {
    if thresholds.is_empty() || thresholds.iter().any(|&c| !(c > 0.0)) {
        return Err(Error::Argument("thresholds must be positive and nonempty".into()));
    }
    if n_max < 1 {
        return Err(Error::Argument("N must be positive".into()));
    }
    let window = Window::unilateral(n_max);
    let ns: Vec<u64> = (0..=n_max as u64).collect();
    let norms = orbit_log_norms(w, x, &ns)?;
    let cps = linear_checkpoints(n_max, 16);
    let mut rows = Vec::new();
    let mut all_near_one = true;
    let mut min_lower = f64::INFINITY;
    for &c in thresholds {
        let lc = F::of(c.ln());
        let set = IntSet::from_fn(window, |n| norms[n as usize] >= lc)?;
        let est = density_profile(&set, &cps)?;
        let (lo, hi) = (rational_to_f64(&est.lower_est), rational_to_f64(&est.upper_est));
        all_near_one &= hi >= UNBOUNDED_UPPER;
        min_lower = min_lower.min(lo);
        rows.push(json!({"threshold": c, "count": set.len(), "lower_est": lo, "upper_est": hi}));
    }
    let id = "distributional-unbounded";
    let rep = if all_near_one {
        ConditionReport::holds(id)
    } else {
        ConditionReport::inconclusive(id, "large-norm sets do not keep upper density near 1")
    };
    Ok(rep.with("thresholds", rows).with("min_lower_density", min_lower).with("n_max", n_max).with("upper_level", UNBOUNDED_UPPER))
}
