use serde_json::json;

use super::report::{ConditionReport, Witness, MAX_WITNESSES};
use crate::constructions::s5::{S5State, S5Weight};
use crate::{rational_to_f64, Error, Rational, Result};

/// Dense cross-checks run only up to this `b_r`.
const DENSE_LIMIT: i64 = 1 << 25;

/// `F_p = {n : w₁⋯w_n > 2^p}` for the max-rule weight of `state`:
/// `#F_p(b_r) ≤ a_r + b_r·Σ_{p<q≤depth} (2q+1)/b_q` at every `r`, and the
/// resulting lower-density ceiling `a_r/b_r + Σ_{q>p} (2q+1)/b_q`.
///
/// Counts are exact (interval-union merge). For `b_r ≤ 2^25` they are
/// cross-checked densely, together with the classification: every
/// `n ∈ F_p ∩ [0, b_r]` is `≤ a_r` or lies in `b_q·N + [−q, q]`, `q > p`.
pub fn lower_density_obstruction(state: &S5State, p: usize) -> Result<ConditionReport> {
    if p == 0 || p > state.depth {
        return Err(Error::Argument(format!("p must lie in 1..={}", state.depth)));
    }
    let w = S5Weight::new(state);
    let tail: Rational = (p + 1..=state.depth)
        .map(|q| Rational::new(2 * q as i128 + 1, state.b(q) as i128))
        .fold(Rational::from_integer(0), |a, b| a + b);
    let mut wit = Vec::new();
    let mut rows = Vec::new();
    let mut ceiling = Rational::from_integer(1);
    for r in 1..=state.depth {
        let (ar, br) = (state.a(r), state.b(r));
        let count = w.count_above(p, br);
        let bound = Rational::from_integer(ar as i128) + tail * br as i128;
        if Rational::from_integer(count as i128) > bound {
            wit.push(Witness::new("#F_p(b_r) above bound", vec![p as i64, r as i64], count as f64, rational_to_f64(&bound)));
        }
        ceiling = Rational::new(ar as i128, br as i128) + tail;
        let mut row = json!({
            "r": r,
            "count": count,
            "bound": rational_to_f64(&bound),
            "ratio": count as f64 / br as f64,
            "ceiling": rational_to_f64(&ceiling),
        });
        if br <= DENSE_LIMIT {
            let (dense, misplaced) = dense_classification(state, &w, p, r);
            row["dense_count"] = json!(dense);
            if dense != count {
                wit.push(Witness::new("interval count disagrees with dense count", vec![p as i64, r as i64], count as f64, dense as f64));
            }
            if let Some(n) = misplaced {
                wit.push(Witness::new("n ∈ F_p above a_r outside b_q·N + [−q, q]", vec![p as i64, r as i64, n], n as f64, ar as f64));
            }
        }
        rows.push(row);
    }
    let reference: f64 = (p + 1..=state.depth).map(|q| 1.0 / (q * q) as f64).sum::<f64>() + 1.0 / state.depth as f64;
    wit.truncate(MAX_WITNESSES);
    Ok(ConditionReport::from_witnesses("lower-density-obstruction", wit)
        .with("p", p)
        .with("rows", rows)
        .with("ceiling", rational_to_f64(&ceiling))
        .with("ceiling_exact", ceiling.to_string())
        .with("reference_ceiling", reference))
}

/// Dense `#F_p(b_r)` and the first member of `F_p ∩ (a_r, b_r]` not covered
/// by any `b_q·N + [−q, q]` with `p < q ≤ depth`.
fn dense_classification(state: &S5State, w: &S5Weight, p: usize, r: usize) -> (u64, Option<i64>) {
    let (ar, br) = (state.a(r), state.b(r));
    let mut count = 0u64;
    let mut misplaced = None;
    for n in 1..=br {
        if w.k(n) <= p as i64 {
            continue;
        }
        count += 1;
        if n > ar && misplaced.is_none() {
            let covered = (p + 1..=state.depth).any(|q| {
                let (bq, q) = (state.b(q), q as i64);
                let k = (n + bq / 2).div_euclid(bq);
                k >= 1 && (n - k * bq).abs() <= q
            });
            if !covered {
                misplaced = Some(n);
            }
        }
    }
    (count, misplaced)
}
