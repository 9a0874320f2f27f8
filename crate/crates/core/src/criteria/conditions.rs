use serde::{Deserialize, Serialize};
use serde_json::json;

use super::report::{ConditionReport, Witness, MAX_WITNESSES};
use crate::intset::{density_profile, linear_checkpoints, ApBlock, BlockSet, CountingSet, SetLiteral};
use crate::shift::{Domain, SparseVec, WeightSeq};
use crate::{Error, Result, Scalar};

/// Which density condition (a) asks for.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// Lower density (frequent hypercyclicity).
    #[default]
    Fhc,
    /// Upper density (𝒰-frequent hypercyclicity).
    UFhc,
}

/// Data for the characterisation: sets `E_p`, growth levels `M(p)`, the
/// dense targets `y(p)` and, once thinned against a weight, the sets `F_p`.
/// All vectors are indexed by `p − 1`.
#[derive(Clone, Debug)]
pub struct FhcFamily<F: Scalar> {
    pub e: Vec<BlockSet>,
    pub ln_m: Vec<F>,
    pub rho: F,
    pub target: Target,
    pub y: Vec<SparseVec<F>>,
    pub f: Vec<Vec<i64>>,
}

impl<F: Scalar> FhcFamily<F> {
    /// `M(p) = 2^{c·p}`.
    pub fn with_power_of_two(e: Vec<BlockSet>, c: f64, rho: F, target: Target) -> Self {
        let ln_m = (1..=e.len()).map(|p| F::of(c * p as f64 * std::f64::consts::LN_2)).collect();
        Self { e, ln_m, rho, target, y: Vec::new(), f: Vec::new() }
    }

    pub fn pmax(&self) -> usize {
        self.e.len()
    }

    pub fn ln_m(&self, p: usize) -> F {
        self.ln_m[p - 1]
    }

    pub fn family(&self, p: usize) -> &BlockSet {
        &self.e[p - 1]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MLiteral {
    Values(Vec<f64>),
    PowerOfTwo { power_of_two: f64 },
}

/// Family file: `{"E": [set, …], "M": [..] | {"power_of_two": c},
/// "rho": 2, "target": "fhc" | "u_fhc"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyLiteral {
    #[serde(rename = "E")]
    pub e: Vec<SetLiteral>,
    #[serde(rename = "M")]
    pub m: MLiteral,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default)]
    pub target: Target,
}

fn default_rho() -> f64 {
    2.0
}

impl FamilyLiteral {
    pub fn to_family<F: Scalar>(&self) -> Result<FhcFamily<F>> {
        let e = self.e.iter().map(|s| s.to_blockset()).collect::<Result<Vec<_>>>()?;
        if !(self.rho > 1.0) {
            return Err(Error::Argument(format!("rho must exceed 1, got {}", self.rho)));
        }
        let ln_m = match &self.m {
            MLiteral::Values(v) => {
                if v.len() != e.len() || v.iter().any(|&m| !(m > 0.0)) {
                    return Err(Error::Argument("M needs one positive value per set".into()));
                }
                v.iter().map(|&m| F::of(m.ln())).collect()
            }
            MLiteral::PowerOfTwo { power_of_two } => {
                return Ok(FhcFamily::with_power_of_two(e, *power_of_two, F::of(self.rho), self.target));
            }
        };
        Ok(FhcFamily { e, ln_m, rho: F::of(self.rho), target: self.target, y: Vec::new(), f: Vec::new() })
    }
}

/// Relative slack on float comparisons of log-products.
pub const LOG_TOLERANCE: f64 = 1e-9;
/// Default number of weight evaluations a verifier may spend on enumeration.
pub const DEFAULT_BUDGET: u64 = 50_000_000;

fn below<F: Scalar>(v: F, need: F) -> bool {
    let tol = F::of(LOG_TOLERANCE) * need.abs().max(F::one());
    v < need - tol
}

/// Smallest element `≥ lo` congruent to `r` mod `g`.
fn align_up(lo: i64, r: i64, g: i64) -> i64 {
    lo + (r - lo).rem_euclid(g)
}

/// The differences `y − x` (`x ∈ X`, `y ∈ Y`) lie in one residue class;
/// returns the superset blocks of positive and negative differences.
fn difference_parts(x: &ApBlock, y: &ApBlock) -> (Option<ApBlock>, Option<ApBlock>) {
    let step = |b: &ApBlock| if b.len() > 1 { b.step } else { 0 };
    let g = num_integer::gcd(num_integer::gcd(step(x), step(y)), y.first - x.first);
    let (lo, hi) = (y.first - x.last, y.last - x.first);
    if g == 0 {
        let d = lo;
        return match d.signum() {
            1 => (Some(ApBlock::singleton(d)), None),
            -1 => (None, Some(ApBlock::singleton(d))),
            _ => (None, None),
        };
    }
    let r = (y.first - x.first).rem_euclid(g);
    let mk = |a: i64, b: i64| {
        let first = align_up(a, r, g);
        (first <= b).then(|| ApBlock { first, last: first + (b - first) / g * g, step: g })
    };
    (mk(lo.max(1), hi), mk(lo, hi.min(-1)))
}

enum PairCheck<F> {
    Holds,
    Violation { n: i64, m: i64, t: i64, value: F },
    OverBudget,
}

/// `Φ(m − n + t) ≥ need` for all `n ∈ X`, `m ∈ Y` with `m − n` in `part`,
/// `t ∈ [0, tmax]`: closed-form floor first, then a scan of the difference
/// superset, then exact pairs.
fn check_differences<F: Scalar>(w: &WeightSeq<F>, x: &ApBlock, y: &ApBlock, part: &ApBlock, tmax: i64, need: F, budget: &mut u64) -> Result<PairCheck<F>> {
    if let Some(f) = w.floor_on(part, 0, tmax) {
        if !below(f, need) {
            return Ok(PairCheck::Holds);
        }
    }
    let scan_cost = part.len().saturating_mul(tmax as u64 + 1);
    if scan_cost <= *budget {
        *budget -= scan_cost;
        let mut all_ok = true;
        'scan: for d in part.iter() {
            for t in 0..=tmax {
                if below(w.potential(d + t)?, need) {
                    all_ok = false;
                    break 'scan;
                }
            }
        }
        if all_ok {
            return Ok(PairCheck::Holds);
        }
    }
    let pair_cost = x.len().saturating_mul(y.len()).saturating_mul(tmax as u64 + 1);
    if pair_cost > *budget {
        return Ok(PairCheck::OverBudget);
    }
    *budget -= pair_cost;
    for n in x.iter() {
        for m in y.iter() {
            let d = m - n;
            if !part.contains(d) || d == 0 {
                continue;
            }
            for t in 0..=tmax {
                let v = w.potential(d + t)?;
                if below(v, need) {
                    return Ok(PairCheck::Violation { n, m, t, value: v });
                }
            }
        }
    }
    Ok(PairCheck::Holds)
}

fn check_a<F: Scalar>(fam: &FhcFamily<F>, pmax: usize) -> Result<ConditionReport> {
    let mut rows = Vec::new();
    let mut empty = Vec::new();
    for p in 1..=pmax {
        let e = fam.family(p);
        if e.is_empty() {
            empty.push(p);
            continue;
        }
        let hi = e.window().hi;
        let est = density_profile(e, &linear_checkpoints(hi, 16))?;
        let v = match fam.target {
            Target::Fhc => est.lower_est,
            Target::UFhc => est.upper_est,
        };
        rows.push(json!({"p": p, "estimate": crate::rational_to_f64(&v), "lower_est": est.lower_est.to_string(), "upper_est": est.upper_est.to_string()}));
    }
    let rep = if empty.is_empty() {
        ConditionReport::holds("a")
    } else {
        ConditionReport::inconclusive("a", format!("empty on the window: E_p for p in {empty:?}"))
    };
    Ok(rep.with("target", fam.target).with("densities", rows))
}

/// `(E_p + J_p) ∩ (E_q + J_q) = ∅` with `J_p = [−p, p]` (bilateral) or
/// `[0, p]` (unilateral): `m − n ∉ [−q − l_p, p + l_q]`, `l_p = p` or 0.
fn check_b<F: Scalar>(fam: &FhcFamily<F>, pmax: usize, bilateral: bool, budget: &mut u64) -> ConditionReport {
    let mut wit = Vec::new();
    let mut exhausted = false;
    for p in 1..=pmax {
        for q in p + 1..=pmax {
            let (lp, lq) = if bilateral { (p as i64, q as i64) } else { (0, 0) };
            let (lo, hi) = (-(q as i64) - lp, p as i64 + lq);
            for x in fam.family(p).blocks() {
                for y in fam.family(q).blocks() {
                    if y.first - x.last > hi || y.last - x.first < lo {
                        continue;
                    }
                    if x.len() > *budget {
                        exhausted = true;
                        continue;
                    }
                    *budget -= x.len();
                    for n in x.iter() {
                        if let Some(m) = y.next_ge(n + lo).filter(|&m| m <= n + hi) {
                            if wit.len() < MAX_WITNESSES {
                                wit.push(Witness::new("margins intersect", vec![p as i64, q as i64, n, m], (m - n) as f64, 0.0));
                            }
                        }
                    }
                }
            }
        }
    }
    if wit.is_empty() && exhausted {
        return ConditionReport::inconclusive("b", "enumeration budget exhausted");
    }
    ConditionReport::from_witnesses("b", wit)
}

/// Growth of `w₁⋯w_n` along `E_p` (`E_p + [0, p]` unilaterally): the block
/// minima of `Φ` must increase along the window, and a single block must
/// already sit above 1.
fn check_c<F: Scalar>(w: &WeightSeq<F>, fam: &FhcFamily<F>, pmax: usize, bilateral: bool, budget: &mut u64) -> Result<ConditionReport> {
    let mut wit = Vec::new();
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    for p in 1..=pmax {
        let tmax = if bilateral { 0 } else { p as i64 };
        let mut minima: Vec<(i64, F)> = Vec::new();
        for b in fam.family(p).blocks() {
            let cost = b.len() * (tmax as u64 + 1);
            let min = if cost <= *budget {
                *budget -= cost;
                let mut best = (b.first, F::infinity());
                for n in b.iter() {
                    for t in 0..=tmax {
                        let v = w.potential(n + t)?;
                        if v < best.1 {
                            best = (n + t, v);
                        }
                    }
                }
                best
            } else if let Some(f) = w.floor_on(b, 0, tmax) {
                notes.push(format!("p = {p}: block at {} bounded by its closed-form floor", b.first));
                (b.first, f)
            } else {
                return Ok(ConditionReport::inconclusive("c", "enumeration budget exhausted"));
            };
            minima.push(min);
        }
        rows.push(json!({"p": p, "block_minima": minima.iter().map(|(n, v)| (n, v.as_f64())).collect::<Vec<_>>()}));
        match minima.len() {
            0 => {}
            1 => {
                if minima[0].1 <= F::zero() {
                    wit.push(Witness::new("products do not grow", vec![p as i64, minima[0].0], minima[0].1.as_f64(), 0.0));
                }
            }
            _ => {
                for pair in minima.windows(2) {
                    if pair[1].1 < pair[0].1 {
                        wit.push(Witness::new("block minimum decreases", vec![p as i64, pair[0].0, pair[1].0], pair[1].1.as_f64(), pair[0].1.as_f64()));
                    }
                }
                let (first, last) = (minima[0], *minima.last().unwrap());
                if last.1 <= first.1 {
                    wit.push(Witness::new("products do not grow", vec![p as i64, first.0, last.0], last.1.as_f64(), first.1.as_f64()));
                }
            }
        }
    }
    wit.truncate(MAX_WITNESSES);
    let mut rep = ConditionReport::from_witnesses("c", wit).with("minima", rows);
    rep.notes = notes;
    Ok(rep)
}

/// Unified (d): `Φ(d) ≥ ln M(p) + ln M(q)` for every difference `d = m − n`
/// (both signs bilaterally, since `w_{d+1}⋯w₀ ≤ 1/(M(p)M(q))` is
/// `Φ(d) ≥ ln M(p)M(q)` for `d < 0`); unilaterally `m > n` and `d + t`,
/// `t ∈ [0, q]`.
fn check_d<F: Scalar>(w: &WeightSeq<F>, fam: &FhcFamily<F>, pmax: usize, bilateral: bool, budget: &mut u64) -> Result<ConditionReport> {
    let mut wit = Vec::new();
    let mut exhausted = false;
    let mut pairs = 0u64;
    for p in 1..=pmax {
        for q in 1..=pmax {
            let need = fam.ln_m(p) + fam.ln_m(q);
            let tmax = if bilateral { 0 } else { q as i64 };
            for x in fam.family(p).blocks() {
                for y in fam.family(q).blocks() {
                    let (pos, neg) = difference_parts(x, y);
                    let parts = if bilateral { vec![pos, neg] } else { vec![pos] };
                    for part in parts.into_iter().flatten() {
                        pairs += 1;
                        match check_differences(w, x, y, &part, tmax, need, budget)? {
                            PairCheck::Holds => {}
                            PairCheck::OverBudget => exhausted = true,
                            PairCheck::Violation { n, m, t, value } => {
                                if wit.len() < MAX_WITNESSES {
                                    wit.push(Witness::new("ln w-product below ln M(p)M(q)", vec![p as i64, q as i64, n, m, t], value.as_f64(), need.as_f64()));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let rep = if wit.is_empty() && exhausted {
        ConditionReport::inconclusive("d", "enumeration budget exhausted")
    } else {
        ConditionReport::from_witnesses("d", wit)
    };
    Ok(rep.with("difference_blocks", pairs).with("tolerance", LOG_TOLERANCE))
}

/// Re-evaluates a (d) witness `[p, q, n, m, t]`.
pub fn recheck_d_witness<F: Scalar>(w: &WeightSeq<F>, fam: &FhcFamily<F>, witness: &Witness) -> Result<bool> {
    let [p, q, n, m, t] = witness.indices[..] else {
        return Err(Error::Argument("witness must carry [p, q, n, m, t]".into()));
    };
    let (p, q) = (p as usize, q as usize);
    if !fam.family(p).contains(n) || !fam.family(q).contains(m) || n == m {
        return Ok(false);
    }
    Ok(below(w.potential(m - n + t)?, fam.ln_m(p) + fam.ln_m(q)))
}

fn verify<F: Scalar>(w: &WeightSeq<F>, fam: &FhcFamily<F>, pmax: usize, budget: u64, bilateral: bool) -> Result<Vec<ConditionReport>> {
    let pmax = pmax.min(fam.pmax());
    if pmax == 0 {
        return Err(Error::Argument("family has no sets".into()));
    }
    let mut budget = budget;
    Ok(vec![
        check_a(fam, pmax)?,
        check_b(fam, pmax, bilateral, &mut budget),
        check_c(w, fam, pmax, bilateral, &mut budget)?,
        check_d(w, fam, pmax, bilateral, &mut budget)?,
    ])
}

/// Conditions (a)–(d) for an invertible bilateral shift on `c₀(Z)`.
pub fn verify_bilateral_conditions<F: Scalar>(w: &WeightSeq<F>, fam: &FhcFamily<F>, pmax: usize) -> Result<Vec<ConditionReport>> {
    verify_bilateral_conditions_with(w, fam, pmax, DEFAULT_BUDGET)
}

pub fn verify_bilateral_conditions_with<F: Scalar>(w: &WeightSeq<F>, fam: &FhcFamily<F>, pmax: usize, budget: u64) -> Result<Vec<ConditionReport>> {
    if w.domain() != Domain::Bilateral {
        return Err(Error::Precondition("bilateral conditions need a bilateral weight; use the unilateral variant".into()));
    }
    let (lo, _) = w.log_bounds()?;
    if !lo.is_finite() {
        return Err(Error::Precondition("weight is not bounded below; use the unilateral variant".into()));
    }
    verify(w, fam, pmax, budget, true)
}

/// Conditions (a)–(d) for a unilateral shift on `c₀(Z₊)`; the weight need
/// not be bounded below.
pub fn verify_unilateral_conditions<F: Scalar>(w: &WeightSeq<F>, fam: &FhcFamily<F>, pmax: usize) -> Result<Vec<ConditionReport>> {
    verify_unilateral_conditions_with(w, fam, pmax, DEFAULT_BUDGET)
}

pub fn verify_unilateral_conditions_with<F: Scalar>(w: &WeightSeq<F>, fam: &FhcFamily<F>, pmax: usize, budget: u64) -> Result<Vec<ConditionReport>> {
    if w.domain() != Domain::Unilateral {
        return Err(Error::Precondition("unilateral conditions need a unilateral weight".into()));
    }
    verify(w, fam, pmax, budget, false)
}
