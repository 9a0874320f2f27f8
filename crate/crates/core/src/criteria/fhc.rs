use std::collections::BTreeMap;

use rayon::prelude::*;
use serde_json::json;

use super::conditions::FhcFamily;
use super::report::{ConditionReport, Witness, MAX_WITNESSES};
use crate::shift::{log_distance_after, Domain, LogCoef, Space, SparseVec, WeightSeq};
use crate::{Error, Result, Scalar};

/// Largest `E′_p` a thinning pass will enumerate.
const MAX_THIN: u64 = 50_000_000;

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Deterministic dense targets: `y(p)` has support `[−p, p]` (`[0, p]`
/// unilaterally), coefficients on the grid `2^{−p}Z` spread by a golden-ratio
/// sequence over `[−L_p, L_p]`, `L_p = min(ρ^p, p)`.
pub fn default_dense_family<F: Scalar>(pmax: usize, rho: F, domain: Domain) -> Vec<SparseVec<F>> {
    let mut seq = 0u64;
    (1..=pmax)
        .map(|p| {
            let pi = p as i64;
            let lo = if domain == Domain::Bilateral { -pi } else { 0 };
            let cap = rho.as_f64().powi(p as i32).min(p as f64);
            let scale = (1u64 << p.min(52)) as f64;
            let entries: Vec<(i64, F)> = (lo..=pi)
                .map(|s| {
                    seq += 1;
                    let u = (seq as f64 * GOLDEN).fract();
                    let v = ((2.0 * u - 1.0) * cap * scale).round() / scale;
                    (s, F::of(v))
                })
                .collect();
            SparseVec::from_entries(entries, Space::Sup)
        })
        .collect()
}

/// `E′_p = {n ∈ E_p : w₁⋯w_n > ρ^{4p}}` and `F_p` = every `(2p+1)`-th element
/// of `E′_p`, starting with the first.
pub fn thin_family<F: Scalar>(w: &WeightSeq<F>, fam: &mut FhcFamily<F>) -> Result<()> {
    let mut f = Vec::with_capacity(fam.pmax());
    for p in 1..=fam.pmax() {
        let e = fam.family(p);
        if e.len() > MAX_THIN {
            return Err(Error::Resource { depth_reached: p - 1, reason: format!("E_{p} has {} members to thin", e.len()) });
        }
        let level = F::of(4.0 * p as f64) * fam.rho.ln();
        let mut kept = Vec::new();
        let mut i = 0usize;
        for n in e.members() {
            if w.potential(n)? > level {
                if i % (2 * p + 1) == 0 {
                    kept.push(n);
                }
                i += 1;
            }
        }
        f.push(kept);
    }
    fam.f = f;
    Ok(())
}

/// `x_{n+s} = y_p(s) / (w_{s+1}⋯w_{n+s})` for `n ∈ F_p`, `s` in the support
/// of `y(p)`. Fills `fam.y` (default targets) and `fam.f` when missing.
pub fn build_fhc_vector<F: Scalar>(w: &WeightSeq<F>, fam: &mut FhcFamily<F>) -> Result<SparseVec<F>> {
    if fam.y.is_empty() {
        fam.y = default_dense_family(fam.pmax(), fam.rho, w.domain());
    }
    if fam.y.len() < fam.pmax() {
        return Err(Error::Argument("one target vector per set is required".into()));
    }
    if fam.f.is_empty() {
        thin_family(w, fam)?;
    }
    let pi_bound = |p: usize| if w.domain() == Domain::Bilateral { -(p as i64) } else { 0 };
    let mut owner: BTreeMap<i64, (usize, i64)> = BTreeMap::new();
    let mut x = SparseVec::zero(Space::Sup);
    for p in 1..=fam.pmax() {
        let y = &fam.y[p - 1];
        if y.support().any(|s| s < pi_bound(p) || s > p as i64) {
            return Err(Error::Precondition(format!("support of y({p}) leaves its margin")));
        }
        for &n in &fam.f[p - 1] {
            for s in pi_bound(p)..=p as i64 {
                let k = n + s;
                if let Some(&(q, m)) = owner.get(&k) {
                    return Err(Error::Invariant(format!("coefficient {k} defined by n = {n} ∈ F_{p} and m = {m} ∈ F_{q}")));
                }
                owner.insert(k, (p, n));
                if let Some(c) = y.get_log(s) {
                    x.add_coef(k, c.scale_log(w.potential(s)? - w.potential(k)?));
                }
            }
        }
    }
    Ok(x)
}

/// `|x_{n+s}| ≤ ρ^{−p}` on every margin `n + s`, `n ∈ F_p`.
pub fn check_fhc_coefficients<F: Scalar>(x: &SparseVec<F>, fam: &FhcFamily<F>) -> ConditionReport {
    let mut wit = Vec::new();
    let mut worst = Vec::new();
    for p in 1..=fam.pmax() {
        let bound = -F::of_i64(p as i64) * fam.rho.ln();
        let mut max_ln = F::neg_infinity();
        for &n in &fam.f[p - 1] {
            for s in -(p as i64)..=p as i64 {
                if let Some(c) = x.get_log(n + s) {
                    max_ln = max_ln.max(c.ln_abs);
                    if c.ln_abs > bound && wit.len() < MAX_WITNESSES {
                        wit.push(Witness::new("|x_k| > ρ^-p", vec![p as i64, n, s], c.ln_abs.exp().as_f64(), bound.exp().as_f64()));
                    }
                }
            }
        }
        worst.push(json!({"p": p, "max_abs": max_ln.exp().as_f64(), "bound": bound.exp().as_f64(), "f_members": fam.f[p - 1].len()}));
    }
    ConditionReport::from_witnesses("fhc-coefficients", wit).with("per_p", worst)
}

/// Visit errors below this are rounding from `w-products · x` cancelling to
/// the target; increases among them say nothing about the profile.
pub const ROUNDOFF: f64 = 1e-12;

/// Per `p`, `max_{n ∈ F_p ∩ [0, N]} ‖B^n x − y(p)‖_∞`. Bilaterally each must
/// be `≤ ρ^{−3p}`; unilaterally the profile must be non-increasing in `p`.
pub fn verify_fhc_visits<F: Scalar>(w: &WeightSeq<F>, x: &SparseVec<F>, fam: &FhcFamily<F>, n_max: i64) -> Result<ConditionReport> {
    if x.space() != Space::Sup {
        return Err(Error::Argument("visits are measured in the sup norm".into()));
    }
    if fam.f.len() < fam.pmax() || fam.y.len() < fam.pmax() {
        return Err(Error::Precondition("family has not been thinned; build the vector first".into()));
    }
    let bilateral = w.domain() == Domain::Bilateral;
    let mut wit = Vec::new();
    let mut profile = Vec::new();
    let mut empty = Vec::new();
    let mut prev: Option<F> = None;
    for p in 1..=fam.pmax() {
        let target: Vec<(i64, LogCoef<F>)> = fam.y[p - 1].log_entries().collect();
        let ns: Vec<i64> = fam.f[p - 1].iter().copied().filter(|&n| n <= n_max).collect();
        if ns.is_empty() {
            empty.push(p);
            profile.push(json!({"p": p, "visits": 0}));
            continue;
        }
        let errs: Vec<(i64, F)> = ns
            .par_iter()
            .map(|&n| Ok((n, log_distance_after(w, x, n as u64, &target)?)))
            .collect::<Result<_>>()?;
        let (worst_n, worst) = errs.iter().copied().fold((ns[0], F::neg_infinity()), |a, b| if b.1 > a.1 { b } else { a });
        let bound = -F::of(3.0 * p as f64) * fam.rho.ln();
        profile.push(json!({"p": p, "visits": ns.len(), "max_error": worst.exp().as_f64(), "bound": bound.exp().as_f64(), "worst_n": worst_n}));
        if bilateral {
            for &(n, e) in &errs {
                if e > bound && wit.len() < MAX_WITNESSES {
                    wit.push(Witness::new("‖B^n x − y(p)‖ > ρ^-3p", vec![p as i64, n], e.exp().as_f64(), bound.exp().as_f64()));
                }
            }
        } else if let Some(pv) = prev {
            if worst > pv && worst.as_f64() > ROUNDOFF.ln() && wit.len() < MAX_WITNESSES {
                wit.push(Witness::new("visit error increases in p", vec![p as i64, worst_n], worst.exp().as_f64(), pv.exp().as_f64()));
            }
        }
        prev = Some(worst);
    }
    let mut rep = ConditionReport::from_witnesses("fhc-visits", wit).with("profile", profile).with("n_max", n_max);
    if !empty.is_empty() {
        rep = rep.note(format!("no visits on the window for p in {empty:?}"));
    }
    Ok(rep)
}

/// Re-evaluates a visit witness `[p, n]`.
pub fn recheck_visit_witness<F: Scalar>(w: &WeightSeq<F>, x: &SparseVec<F>, fam: &FhcFamily<F>, witness: &Witness) -> Result<bool> {
    let [p, n] = witness.indices[..] else {
        return Err(Error::Argument("witness must carry [p, n]".into()));
    };
    let p = p as usize;
    let target: Vec<(i64, LogCoef<F>)> = fam.y[p - 1].log_entries().collect();
    let e = log_distance_after(w, x, n as u64, &target)?;
    Ok(e > -F::of(3.0 * p as f64) * fam.rho.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::Target;
    use crate::intset::{make_ap, BlockSet, Window};

    #[test]
    fn dense_family_shape() {
        let ys = default_dense_family::<f64>(4, 2.0, Domain::Bilateral);
        for (i, y) in ys.iter().enumerate() {
            let p = (i + 1) as i64;
            assert!(y.support().all(|s| (-p..=p).contains(&s)));
            assert!(y.norm() <= (p as f64).min(2f64.powi(p as i32)) + 1e-12);
            assert!(y.log_entries().all(|(_, c)| {
                let g = c.value() * 2f64.powi(p as i32);
                (g - g.round()).abs() < 1e-9
            }));
        }
        let u = default_dense_family::<f64>(3, 2.0, Domain::Unilateral);
        assert!(u.iter().all(|y| y.support().all(|s| s >= 0)));
    }

    #[test]
    fn vector_for_doubling_weight() {
        // w ≡ 2 unilateral with well separated E_p: visits hit y(p) almost exactly.
        let win = Window::unilateral(4000);
        let e1 = BlockSet::from_intset(&make_ap(40, 0, win).unwrap());
        let e2 = BlockSet::new(win, vec![]).unwrap();
        let mut fam = FhcFamily::with_power_of_two(vec![e1, e2], 1.0, 2.0f64, Target::Fhc);
        let w = WeightSeq::constant(Domain::Unilateral, Window::unilateral(5000), 2.0f64).unwrap();
        let x = build_fhc_vector(&w, &mut fam).unwrap();
        // E′_1 drops n with 2^n ≤ 16, i.e. n = 0
        assert_eq!(fam.f[0][0], 40);
        assert_eq!(fam.f[0][1], 160);
        let n = fam.f[0][0];
        assert!((x.get(n) - fam.y[0].get(0) / 2f64.powi(n as i32)).abs() < 1e-300_f64.max(x.get(n).abs() * 1e-12));
        assert!(check_fhc_coefficients(&x, &fam).holds_on_window());
        let r = verify_fhc_visits(&w, &x, &fam, 3000).unwrap();
        assert!(r.holds_on_window(), "{r:?}");
    }

    #[test]
    fn ambiguity_is_an_invariant_failure() {
        let win = Window::unilateral(400);
        let e = BlockSet::from_intset(&make_ap(40, 0, win).unwrap());
        let mut fam = FhcFamily::with_power_of_two(vec![e.clone(), e], 1.0, 2.0f64, Target::Fhc);
        let w = WeightSeq::constant(Domain::Unilateral, Window::unilateral(500), 2.0f64).unwrap();
        assert!(matches!(build_fhc_vector(&w, &mut fam), Err(Error::Invariant(_))));
    }
}
