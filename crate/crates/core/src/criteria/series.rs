use rayon::prelude::*;
use serde_json::json;

use super::report::{ConditionReport, Witness, MAX_WITNESSES};
use crate::intset::{CountingSet, IntSet};
use crate::shift::{Domain, WeightSeq};
use crate::{Error, Result, Scalar};

/// Last dyadic increment below this counts as convergence on the window.
pub const CONVERGENCE_INCREMENT: f64 = 1e-6;
/// Partial sums above this with non-decreasing increments count as divergence.
pub const DIVERGENCE_SUM: f64 = 1e3;

/// Running sum with dyadic checkpoints `1, 2, 4, …, n_max` (plus `n_max`).
fn dyadic_sums(n_max: i64, term: impl Fn(i64) -> f64) -> Vec<(i64, f64)> {
    let mut out = Vec::new();
    let (mut s, mut c, mut next) = (0.0f64, 0.0f64, 1i64);
    for n in 1..=n_max {
        // Kahan summation keeps the geometric tail visible below 1e-9
        let y = term(n) - c;
        let t = s + y;
        c = (t - s) - y;
        s = t;
        if n == next || n == n_max {
            out.push((n, s));
            next = next.saturating_mul(2);
        }
    }
    out
}

enum SeriesVerdict {
    Converges,
    Diverges,
    Unknown,
}

fn classify(sums: &[(i64, f64)]) -> (SeriesVerdict, f64) {
    let incs: Vec<f64> = sums.windows(2).map(|p| p[1].1 - p[0].1).collect();
    let last_inc = incs.last().copied().unwrap_or(f64::INFINITY);
    let total = sums.last().map_or(0.0, |s| s.1);
    if !total.is_finite() || (total > DIVERGENCE_SUM && incs.len() >= 3 && incs[incs.len() - 3..].windows(2).all(|p| p[1] >= p[0])) {
        (SeriesVerdict::Diverges, last_inc)
    } else if last_inc.abs() < CONVERGENCE_INCREMENT {
        (SeriesVerdict::Converges, last_inc)
    } else {
        (SeriesVerdict::Unknown, last_inc)
    }
}

/// Partial sums of `Σ_{n≥1} (w₁⋯w_n)^{−p}` and, for bilateral weights,
/// `Σ_{n<0} (w_{n+1}⋯w₀)^p`, at dyadic checkpoints up to `n_max` (clipped
/// to the window). Both terms are `exp(−p·Φ(n))`.
pub fn lp_series_test<F: Scalar>(w: &WeightSeq<F>, p: f64, n_max: i64) -> Result<ConditionReport> {
    if !(p >= 1.0) {
        return Err(Error::Argument(format!("p must be ≥ 1, got {p}")));
    }
    let win = w.window();
    let mut sides = vec![("positive", n_max.min(win.hi), 1i64)];
    if w.domain() == Domain::Bilateral {
        sides.push(("negative", n_max.min(-win.lo), -1));
    }
    let mut rep_w = Vec::new();
    let mut all_converge = true;
    let mut details = Vec::new();
    for (name, n, sign) in sides {
        if n < 1 {
            all_converge = false;
            continue;
        }
        let sums = dyadic_sums(n, |k| (-(w.potential(sign * k).unwrap().as_f64()) * p).exp());
        let (verdict, last_inc) = classify(&sums);
        let total = sums.last().unwrap().1;
        match verdict {
            SeriesVerdict::Diverges => {
                rep_w.push(Witness::new(format!("{name} partial sum"), vec![sign * n], total, DIVERGENCE_SUM));
                all_converge = false;
            }
            SeriesVerdict::Unknown => all_converge = false,
            SeriesVerdict::Converges => {}
        }
        details.push(json!({"side": name, "n": n, "partial_sums": sums, "last_increment": last_inc}));
    }
    let id = "lp-series";
    let rep = if !rep_w.is_empty() {
        ConditionReport::from_witnesses(id, rep_w)
    } else if all_converge {
        ConditionReport::holds(id)
    } else {
        ConditionReport::inconclusive(id, "dyadic increments neither below the convergence tolerance nor growing past the divergence threshold")
    };
    Ok(rep
        .with("p", p)
        .with("sides", details)
        .with("convergence_increment", CONVERGENCE_INCREMENT)
        .with("divergence_sum", DIVERGENCE_SUM))
}

/// One-sided constraint sums for `n ∈ A`:
/// backward `Σ_{m∈A, m<n} (w_{m−n+1}⋯w₀)^p` and forward
/// `Σ_{m∈A, m>n} (w₁⋯w_{m−n})^{−p}`; each term is `exp(−p·Φ(m−n))`.
/// Either exceeding 1 rules out `A` as a visit set of `e₀`. Pairs whose
/// difference leaves the weight window are skipped and counted.
///
/// A witness `[n, m]` names the shortest prefix (forward: `m` ascending from
/// `n`; backward: `m` descending) whose partial sum already exceeds 1.
pub fn necessary_condition_witness<F: Scalar>(w: &WeightSeq<F>, a: &IntSet, p: f64) -> Result<ConditionReport> {
    if !(p >= 1.0) {
        return Err(Error::Argument(format!("p must be ≥ 1, got {p}")));
    }
    let members: Vec<i64> = a.members().collect();
    let win = w.window();
    let bilateral = w.domain() == Domain::Bilateral;
    let term = |d: i64| (-(w.potential(d).unwrap().as_f64()) * p).exp();
    struct Row {
        n: i64,
        forward: f64,
        backward: f64,
        fw_witness: Option<i64>,
        bw_witness: Option<i64>,
        skipped: u64,
    }
    let rows: Vec<Row> = members
        .par_iter()
        .enumerate()
        .map(|(i, &n)| {
            let mut r = Row { n, forward: 0.0, backward: 0.0, fw_witness: None, bw_witness: None, skipped: 0 };
            for &m in &members[i + 1..] {
                if m - n > win.hi {
                    r.skipped += 1;
                    continue;
                }
                r.forward += term(m - n);
                if r.forward > 1.0 && r.fw_witness.is_none() {
                    r.fw_witness = Some(m);
                }
            }
            if bilateral {
                for &m in members[..i].iter().rev() {
                    if m - n < win.lo {
                        r.skipped += 1;
                        continue;
                    }
                    r.backward += term(m - n);
                    if r.backward > 1.0 && r.bw_witness.is_none() {
                        r.bw_witness = Some(m);
                    }
                }
            }
            r
        })
        .collect();
    let mut wit = Vec::new();
    let (mut max_fw, mut max_bw, mut skipped) = (0.0f64, 0.0f64, 0u64);
    for r in &rows {
        max_fw = max_fw.max(r.forward);
        max_bw = max_bw.max(r.backward);
        skipped += r.skipped;
        if wit.len() < MAX_WITNESSES {
            if let Some(m) = r.fw_witness {
                wit.push(Witness::new("forward", vec![r.n, m], prefix_sum(w, a, p, r.n, m)?, 1.0));
            }
            if let Some(m) = r.bw_witness {
                wit.push(Witness::new("backward", vec![r.n, m], prefix_sum(w, a, p, r.n, m)?, 1.0));
            }
        }
    }
    let mut rep = ConditionReport::from_witnesses("necessary-condition", wit)
        .with("p", p)
        .with("members", members.len())
        .with("max_forward_sum", max_fw)
        .with("max_backward_sum", max_bw)
        .with("skipped_pairs", skipped);
    if !bilateral {
        rep = rep.note("unilateral weight: backward sums do not apply");
    }
    Ok(rep)
}

/// `Σ exp(−p·Φ(m' − n))` over `m' ∈ A` strictly between `n` and `m`
/// inclusive of `m` — the quantity a witness `[n, m]` claims exceeds 1.
pub fn prefix_sum<F: Scalar>(w: &WeightSeq<F>, a: &IntSet, p: f64, n: i64, m: i64) -> Result<f64> {
    let (lo, hi) = if m > n { (n + 1, m) } else { (m, n - 1) };
    let mut s = 0.0;
    let mut x = a.next_member(lo);
    while let Some(k) = x.filter(|&k| k <= hi) {
        s += (-(w.potential(k - n)?.as_f64()) * p).exp();
        x = a.next_member(k + 1);
    }
    Ok(s)
}

/// Re-evaluates a necessary-condition witness in isolation.
pub fn recheck_necessary_witness<F: Scalar>(w: &WeightSeq<F>, a: &IntSet, p: f64, witness: &Witness) -> Result<bool> {
    let [n, m] = witness.indices[..] else {
        return Err(Error::Argument("witness must carry [n, m]".into()));
    };
    if !a.contains(n) || !a.contains(m) {
        return Ok(false);
    }
    Ok(prefix_sum(w, a, p, n, m)? > 1.0)
}
