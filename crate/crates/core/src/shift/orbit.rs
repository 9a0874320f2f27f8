use rayon::prelude::*;

use super::vector::{log_norm_of, LogCoef, SparseVec};
use super::weight::{Domain, WeightSeq};
use crate::intset::{IntSet, Window};
use crate::{Error, Result, Scalar};

/// Where `B_w^n` sends the coefficient at `k`: `Some((k − n, ln factor))`,
/// `None` when it is annihilated (unilateral, `k − n < 0`).
fn image<F: Scalar>(w: &WeightSeq<F>, k: i64, n: u64) -> Result<Option<(i64, F)>> {
    let win = w.window();
    win.check(k)?;
    let s = k - n as i64;
    if s < win.lo {
        return match w.domain() {
            Domain::Unilateral => Ok(None),
            Domain::Bilateral => Err(Error::Truncation { index: k, power: n, target: s, lo: win.lo }),
        };
    }
    Ok(Some((s, w.log_product(s, k)?)))
}

/// `B_w^n x` in closed form: `(B^n x)_s = w_{s+1}⋯w_{s+n}·x_{s+n}`.
pub fn apply_power<F: Scalar>(w: &WeightSeq<F>, x: &SparseVec<F>, n: u64) -> Result<SparseVec<F>> {
    let mut out = SparseVec::zero(x.space());
    for (k, c) in x.log_entries() {
        if let Some((s, lf)) = image(w, k, n)? {
            out.add_coef(s, c.scale_log(lf));
        }
    }
    Ok(out)
}

/// One application of `B_w` from the per-step weights: `e_k ↦ w_k e_{k−1}`.
pub fn apply_once<F: Scalar>(w: &WeightSeq<F>, x: &SparseVec<F>) -> Result<SparseVec<F>> {
    let win = w.window();
    let mut out = SparseVec::zero(x.space());
    for (k, c) in x.log_entries() {
        win.check(k)?;
        if k == win.lo {
            match w.domain() {
                Domain::Unilateral => continue,
                Domain::Bilateral => return Err(Error::Truncation { index: k, power: 1, target: k - 1, lo: win.lo }),
            }
        }
        out.add_coef(k - 1, c.scale_log(w.log_weight(k)?));
    }
    Ok(out)
}

/// `ln ‖B_w^n x − target‖` without materialising `B_w^n x`.
pub fn log_distance_after<F: Scalar>(w: &WeightSeq<F>, x: &SparseVec<F>, n: u64, target: &[(i64, LogCoef<F>)]) -> Result<F> {
    let mut hit = vec![false; target.len()];
    let mut terms: Vec<F> = Vec::with_capacity(x.len() + target.len());
    let start = if w.domain() == Domain::Unilateral { n as i64 } else { i64::MIN };
    for (k, c) in x.log_entries().filter(|(k, _)| *k >= start) {
        let Some((s, lf)) = image(w, k, n)? else { continue };
        let c = c.scale_log(lf);
        match target.binary_search_by_key(&s, |e| e.0) {
            Ok(i) => {
                hit[i] = true;
                if let Some(d) = c.add(target[i].1.neg()) {
                    terms.push(d.ln_abs);
                }
            }
            Err(_) => terms.push(c.ln_abs),
        }
    }
    for (i, (_, c)) in target.iter().enumerate() {
        if !hit[i] {
            terms.push(c.ln_abs);
        }
    }
    Ok(log_norm_of(x.space(), terms.into_iter()))
}

/// `{0 ≤ n ≤ N : ‖B_w^n x − target‖ < tol}` on the window `[0, N]`.
pub fn visit_set<F: Scalar>(w: &WeightSeq<F>, x: &SparseVec<F>, target: &SparseVec<F>, tol: F, n_max: u64) -> Result<IntSet> {
    if !(tol > F::zero()) {
        return Err(Error::Argument(format!("tolerance must be positive, got {tol}")));
    }
    let t: Vec<(i64, LogCoef<F>)> = target.log_entries().collect();
    let ln_tol = tol.ln();
    const CHUNK: u64 = 4096;
    let chunks: Vec<u64> = (0..=n_max / CHUNK).collect();
    let hits: Vec<Vec<i64>> = chunks
        .par_iter()
        .map(|&c| {
            let mut v = Vec::new();
            for n in c * CHUNK..=((c + 1) * CHUNK - 1).min(n_max) {
                if log_distance_after(w, x, n, &t)? < ln_tol {
                    v.push(n as i64);
                }
            }
            Ok(v)
        })
        .collect::<Result<_>>()?;
    IntSet::from_members(Window::unilateral(n_max as i64), hits.into_iter().flatten())
}

/// `ln ‖B_w^n x‖` for each requested `n`.
pub fn orbit_log_norms<F: Scalar>(w: &WeightSeq<F>, x: &SparseVec<F>, ns: &[u64]) -> Result<Vec<F>> {
    ns.par_iter().map(|&n| log_distance_after(w, x, n, &[])).collect()
}
