//! Interval system `I_u^{a,ε} = [(1−ε)a^u, (1+ε)a^u]`, the sets
//! `E_p = ⋃_{u∈A_p} I_u^{a,ε} ∩ b_p·N`, the min-rule bilateral weight and the
//! residual set on which its negative-side products are exactly 1.
//!
//! `A_p = 2^{p−1}N \ 2^pN`, i.e. `u ∈ A_{p(u)}` with `p(u) = v₂(u) + 1`, and
//! `b_p = (4p+1)·2^{p+1}` so that `Σ (4p+1)/b_p = 1/2`.
//!
//! Endpoints are rounded inward. The negative-side log₂-products are
//! piecewise linear: each required drop `−h` is reached from 0 over the
//! whole admissible margin, so every step stays within `[−1, 1]` in log₂.

use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};

use crate::criteria::{ConditionReport, Witness, MAX_WITNESSES};
use crate::intset::{ApBlock, BlockSet, IntSet, SetLiteral, Window};
use crate::scalar::ratio_str;
use crate::shift::{Domain, LogProducts, WeightSeq};
use crate::{parse_rational, rational_to_f64, Error, Rational, Result, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct S6Config {
    #[serde(with = "ratio_str")]
    pub a: Rational,
    #[serde(with = "ratio_str")]
    pub epsilon: Rational,
    pub pmax: usize,
    /// Bilateral window; sets live in `[0, hi]`, products are needed down
    /// to `lo`.
    pub window: Window,
}

/// Inward-rounded `I_u^{a,c·ε}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Interval {
    pub lo: i64,
    pub hi: i64,
}

impl Interval {
    pub fn contains(&self, n: i64) -> bool {
        self.lo <= n && n <= self.hi
    }
}

/// `b_p = (4p+1)·2^{p+1}`.
pub fn b(p: usize) -> i64 {
    (4 * p as i64 + 1) << (p + 1)
}

/// The `p` with `u ∈ A_p`.
pub fn part(u: u32) -> usize {
    u.trailing_zeros() as usize + 1
}

/// Exponents past this would overflow the exact endpoint arithmetic.
const MAX_ENDPOINT: f64 = 1e17;

impl S6Config {
    pub fn new(a: Rational, epsilon: Rational, pmax: usize, horizon: i64) -> Result<Self> {
        let one = Rational::from_integer(1);
        if a <= one {
            return Err(Error::Argument(format!("a must exceed 1, got {a}")));
        }
        if epsilon <= Rational::from_integer(0) || epsilon * 4 >= one {
            return Err(Error::Argument(format!("epsilon must lie in (0, 1/4), got {epsilon}")));
        }
        if pmax == 0 || pmax > 40 {
            return Err(Error::Argument(format!("pmax must lie in 1..=40, got {pmax}")));
        }
        if horizon < 1 {
            return Err(Error::Argument("window must be positive".into()));
        }
        Ok(Self { a, epsilon, pmax, window: Window::bilateral(horizon) })
    }

    pub fn horizon(&self) -> i64 {
        self.window.hi.max(-self.window.lo)
    }

    /// `(2εa/(1+2ε), (1+4ε)/(1−4ε), 8εa/((1+4ε)(a−1)))`; valid when the
    /// first is `≥ 1`, the second `< a` and the third `< 1`.
    pub fn interval_inequalities(&self) -> (Rational, Rational, Rational) {
        let (a, e, one) = (self.a, self.epsilon, Rational::from_integer(1));
        (
            e * a * 2 / (one + e * 2),
            (one + e * 4) / (one - e * 4),
            e * a * 8 / ((one + e * 4) * (a - one)),
        )
    }

    pub fn check_inequalities(&self) -> ConditionReport {
        let (v1, v2, v3) = self.interval_inequalities();
        let one = Rational::from_integer(1);
        let mut w = Vec::new();
        if v1 < one {
            w.push(Witness::new("2εa/(1+2ε) < 1", vec![], rational_to_f64(&v1), 1.0));
        }
        if v2 >= self.a {
            w.push(Witness::new("(1+4ε)/(1−4ε) ≥ a", vec![], rational_to_f64(&v2), rational_to_f64(&self.a)));
        }
        if v3 >= one {
            w.push(Witness::new("8εa/((1+4ε)(a−1)) ≥ 1", vec![], rational_to_f64(&v3), 1.0));
        }
        ConditionReport::from_witnesses("interval-inequalities", w)
            .with("separation", rational_to_f64(&v1))
            .with("ratio", rational_to_f64(&v2))
            .with("density", rational_to_f64(&v3))
    }

    /// `Σ_p (4p+1)/b_p + 8εa/((1+4ε)(a−1))`; the first sum is `1/2`.
    pub fn budget(&self) -> f64 {
        let sum: f64 = (1..=60).map(|p| (4 * p + 1) as f64 / b(p) as f64).sum();
        sum + rational_to_f64(&self.interval_inequalities().2)
    }

    /// Inward-rounded `I_u^{a, c·ε}`; `None` when empty or out of range.
    pub fn interval(&self, u: u32, c: i64) -> Option<Interval> {
        let af = rational_to_f64(&self.a);
        if af.powi(u as i32) > MAX_ENDPOINT {
            return None;
        }
        let au = self.a.pow(u as i32);
        let e = self.epsilon * c as i128;
        let one = Rational::from_integer(1);
        let lo = ((one - e) * au).ceil().to_integer();
        let hi = ((one + e) * au).floor().to_integer();
        (lo <= hi).then_some(Interval { lo: lo as i64, hi: hi as i64 })
    }

    /// Exponents `u ≥ 1` whose `4ε`-interval starts inside `[1, horizon]`.
    pub fn exponents(&self) -> Vec<u32> {
        (1..64).take_while(|&u| self.interval(u, 4).is_some_and(|i| i.lo <= self.horizon())).collect()
    }

    /// `I_u^ε + [−2p(u), 2p(u)] ⊆ I_u^{2ε}`.
    pub fn retained(&self, u: u32) -> bool {
        let p = 2 * part(u) as i64;
        match (self.interval(u, 1), self.interval(u, 2)) {
            (Some(i1), Some(i2)) => i2.lo <= i1.lo - p && i1.hi + p <= i2.hi,
            _ => false,
        }
    }

    /// `p` with `b_p·N + [−2p, 2p]` meeting `[1, horizon]`.
    fn active_parts(&self) -> usize {
        (1..63).take_while(|&p| b(p) - 2 * p as i64 <= self.horizon()).last().unwrap_or(0)
    }

    pub fn to_generator(&self) -> Value {
        json!({
            "generator": "s6",
            "a": self.a.to_string(),
            "epsilon": self.epsilon.to_string(),
            "pmax": self.pmax,
        })
    }
}

/// `I_u^{2ε}` pairwise disjoint and `I_u^{2ε} − I_v^{2ε} ⊆ I_u^{4ε}` for
/// `u > v` over the exponents in the window.
pub fn check_interval_algebra(cfg: &S6Config) -> ConditionReport {
    let us = cfg.exponents();
    let mut w = Vec::new();
    let mut pairs = 0u64;
    for &u in &us {
        let (Some(iu2), Some(iu4)) = (cfg.interval(u, 2), cfg.interval(u, 4)) else { continue };
        for &v in us.iter().filter(|&&v| v < u) {
            let Some(iv2) = cfg.interval(v, 2) else { continue };
            pairs += 1;
            if iv2.hi >= iu2.lo {
                w.push(Witness::new("I_u^{2ε} ∩ I_v^{2ε} ≠ ∅", vec![u as i64, v as i64], iv2.hi as f64, iu2.lo as f64));
            }
            let (dlo, dhi) = (iu2.lo - iv2.hi, iu2.hi - iv2.lo);
            if dlo < iu4.lo || dhi > iu4.hi {
                w.push(Witness::new("I_u^{2ε} − I_v^{2ε} ⊄ I_u^{4ε}", vec![u as i64, v as i64, dlo, dhi], dlo as f64, iu4.lo as f64));
            }
        }
    }
    w.truncate(MAX_WITNESSES);
    ConditionReport::from_witnesses("interval-algebra", w).with("pairs", pairs)
}

/// The sets `E_1, …, E_pmax` on `[0, hi]`.
#[derive(Clone, Debug)]
pub struct S6Sets {
    pub config: S6Config,
    /// Exponents kept after the margin condition, ascending.
    pub retained: Vec<u32>,
    pub families: Vec<BlockSet>,
    pub warnings: Vec<String>,
}

impl S6Sets {
    pub fn family(&self, p: usize) -> &BlockSet {
        &self.families[p - 1]
    }

    pub fn to_json(&self) -> Value {
        json!({
            "config": self.config,
            "retained_exponents": self.retained,
            "E": self.families.iter().enumerate().map(|(i, e)| json!({
                "p": i + 1,
                "b_p": b(i + 1),
                "members": e.len(),
                "set": SetLiteral::from_blockset(e),
            })).collect::<Vec<_>>(),
            "warnings": self.warnings,
        })
    }
}

pub fn build_s6_sets(cfg: &S6Config) -> Result<S6Sets> {
    let ineq = cfg.check_inequalities();
    if !ineq.holds_on_window() {
        return Err(Error::Precondition(format!("interval inequalities fail: {:?}", ineq.witnesses)));
    }
    let hi = cfg.window.hi;
    let set_window = Window::unilateral(hi);
    let retained: Vec<u32> = cfg.exponents().into_iter().filter(|&u| cfg.retained(u)).collect();
    let mut families = Vec::with_capacity(cfg.pmax);
    let mut warnings = Vec::new();
    for p in 1..=cfg.pmax {
        let bp = b(p);
        let mut blocks = Vec::new();
        for &u in retained.iter().filter(|&&u| part(u) == p) {
            let i = cfg.interval(u, 1).expect("retained intervals exist");
            // whole interval plus its margin must fit
            if i.hi + 2 * p as i64 > hi {
                warnings.push(format!("I_{u} (p = {p}) extends past the window and is left out"));
                continue;
            }
            let first = (i.lo + bp - 1).div_euclid(bp) * bp;
            let last = i.hi.div_euclid(bp) * bp;
            if first <= last {
                blocks.push(ApBlock::new(first, last, bp)?);
            }
        }
        if blocks.is_empty() {
            warnings.push(format!("E_{p} is empty on the window"));
        }
        families.push(BlockSet::new(set_window, blocks)?);
    }
    Ok(S6Sets { config: *cfg, retained, families, warnings })
}

/// `|n − m| > 2·max(p, q)` for distinct members of `E_p`, `E_q`; adjacent
/// members of the merged order suffice since gaps add up.
pub fn check_separation(sets: &S6Sets) -> ConditionReport {
    let mut tagged: Vec<(i64, usize)> = sets
        .families
        .iter()
        .enumerate()
        .flat_map(|(i, e)| e.members().map(move |n| (n, i + 1)))
        .collect();
    tagged.sort_unstable();
    let mut w = Vec::new();
    let mut min_slack = i64::MAX;
    for pair in tagged.windows(2) {
        let ((n, p), (m, q)) = (pair[0], pair[1]);
        let need = 2 * p.max(q) as i64;
        min_slack = min_slack.min(m - n - need);
        if m - n <= need && w.len() < MAX_WITNESSES {
            w.push(Witness::new("|n − m| ≤ 2max(p,q)", vec![n, m, p as i64, q as i64], (m - n) as f64, need as f64));
        }
    }
    ConditionReport::from_witnesses("separation", w).with("members", tagged.len()).with("min_slack", min_slack)
}

/// One required negative-side drop: `log₂ P(k) = −h` on `[lo, hi]`, rising
/// linearly to 0 at `lo − (left+1)` and `hi + (right+1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Dip {
    lo: i64,
    hi: i64,
    left: i64,
    right: i64,
    h: f64,
}

impl Dip {
    fn value(&self, k: i64) -> f64 {
        if k < self.lo - self.left || k > self.hi + self.right {
            0.0
        } else if k < self.lo {
            -self.h * (1.0 - (self.lo - k) as f64 / (self.left + 1) as f64)
        } else if k > self.hi {
            -self.h * (1.0 - (k - self.hi) as f64 / (self.right + 1) as f64)
        } else {
            -self.h
        }
    }
}

/// Closed-form min-rule weight: `w_k = 2` for `k ≥ 1`, and
/// `log₂(w_{−k+1}⋯w₀) = min(0, b_p-dips, interval dips)`.
#[derive(Clone, Debug, PartialEq)]
pub struct S6Weight {
    config: S6Config,
    parts: usize,
    /// Per exponent `u` (retained, with `v < u` retained): its `4ε` hull and dips.
    interval_dips: Vec<(Interval, Vec<Dip>)>,
}

impl S6Weight {
    pub fn new(cfg: &S6Config) -> Result<Self> {
        let us = cfg.exponents();
        let kept: Vec<u32> = us.iter().copied().filter(|&u| cfg.retained(u)).collect();
        let mut interval_dips = Vec::new();
        for &u in &kept {
            let (iu, iu4) = (cfg.interval(u, 1).unwrap(), cfg.interval(u, 4).unwrap());
            let mut dips = Vec::new();
            for &v in kept.iter().filter(|&&v| v < u) {
                let iv = cfg.interval(v, 1).unwrap();
                let (lo, hi) = (iu.lo - iv.hi, iu.hi - iv.lo);
                let h = 2 * part(u).max(part(v)) as i64;
                let (left, right) = (lo - iu4.lo, iu4.hi - hi);
                if left + 1 < h || right + 1 < h {
                    return Err(Error::Construction(format!(
                        "drop 2^-{h} on I_{u} − I_{v} = [{lo}, {hi}] needs {h} steps inside I_{u}^(4ε) = [{}, {}]",
                        iu4.lo, iu4.hi
                    )));
                }
                dips.push(Dip { lo, hi, left, right, h: h as f64 });
            }
            if !dips.is_empty() {
                interval_dips.push((iu4, dips));
            }
        }
        Ok(Self { config: *cfg, parts: cfg.active_parts(), interval_dips })
    }

    /// `log₂(w_{−k+1}⋯w₀)` for `k ≥ 0`.
    pub fn log2_neg_product(&self, k: i64) -> f64 {
        let mut v = 0.0f64;
        for p in 1..=self.parts {
            let bp = b(p);
            let kk = (k + bp / 2).div_euclid(bp);
            let j = (k - kk * bp).abs();
            let r = 2 * p as i64;
            if kk >= 1 && j <= r {
                v = v.min(-(r as f64) * (1.0 - j as f64 / (r + 1) as f64));
            }
        }
        for (hull, dips) in &self.interval_dips {
            if hull.contains(k) {
                for d in dips {
                    v = v.min(d.value(k));
                }
            }
        }
        v
    }

    pub fn config(&self) -> &S6Config {
        &self.config
    }
}

#[derive(Debug)]
struct S6Source {
    weight: S6Weight,
}

impl<F: Scalar> LogProducts<F> for S6Source {
    fn potential(&self, n: i64) -> F {
        if n >= 0 {
            F::of_i64(n) * F::LN_2()
        } else {
            // Φ(n) = −ln(w_{n+1}⋯w₀)
            F::of(-self.weight.log2_neg_product(-n)) * F::LN_2()
        }
    }

    // direct, so that w_k = 2 is exact far from 0 rather than a difference of large potentials
    fn log_weight(&self, n: i64) -> F {
        if n >= 1 {
            F::LN_2()
        } else {
            F::of(self.weight.log2_neg_product(1 - n) - self.weight.log2_neg_product(-n)) * F::LN_2()
        }
    }

    fn generator(&self) -> Value {
        self.weight.config.to_generator()
    }
}

pub fn build_s6_weight<F: Scalar>(cfg: &S6Config) -> Result<WeightSeq<F>> {
    let weight = S6Weight::new(cfg)?;
    WeightSeq::generated(Domain::Bilateral, cfg.window, Arc::new(S6Source { weight }))
}

/// `A = [1, hi] \ (⋃_p (b_p·N + [−2p, 2p]) ∪ ⋃_u I_u^{4ε})` on `[0, hi]`.
pub fn residual_set(cfg: &S6Config) -> IntSet {
    let hi = cfg.window.hi;
    let window = Window::unilateral(hi);
    let mut holes: Vec<(i64, i64)> = cfg.exponents().into_iter().filter_map(|u| cfg.interval(u, 4)).map(|i| (i.lo, i.hi)).collect();
    for p in 1..=cfg.active_parts() {
        let (bp, r) = (b(p), 2 * p as i64);
        let mut c = bp;
        while c - r <= hi {
            holes.push((c - r, c + r));
            c += bp;
        }
    }
    holes.push((0, 0));
    let removed = crate::intset::make_interval_union(&holes.into_iter().map(|(l, h)| (l.max(0), h.min(hi))).filter(|(l, h)| l <= h).collect::<Vec<_>>(), window)
        .expect("holes are clipped to the window");
    IntSet::full(window).expect("window fits").difference(&removed).expect("same window")
}

/// Rebuilds the weight from `{"generator": "s6", "a": "60", "epsilon":
/// "1/100", "pmax": 5, "window": [−N, N]}`.
pub fn weight_from_generator<F: Scalar>(v: &Value) -> Result<WeightSeq<F>> {
    build_s6_weight(&config_from_generator(v)?)
}

pub fn config_from_generator(v: &Value) -> Result<S6Config> {
    let obj = v.as_object().ok_or_else(|| Error::Argument("generator must be an object".into()))?;
    for k in obj.keys() {
        if !matches!(k.as_str(), "generator" | "a" | "epsilon" | "pmax" | "window" | "domain") {
            return Err(Error::Argument(format!("unknown s6 generator field {k:?}")));
        }
    }
    let rat = |key: &str| -> Result<Rational> {
        match &v[key] {
            Value::String(s) => parse_rational(s),
            Value::Number(n) => parse_rational(&n.to_string()),
            _ => Err(Error::Argument(format!("s6 generator needs {key}"))),
        }
    };
    let pmax = v["pmax"].as_u64().ok_or_else(|| Error::Argument("s6 generator needs integer pmax".into()))? as usize;
    let window: Window = serde_json::from_value(v["window"].clone())?;
    if !window.is_bilateral() {
        return Err(Error::Argument(format!("s6 window must be bilateral, got {window}")));
    }
    let mut cfg = S6Config::new(rat("a")?, rat("epsilon")?, pmax, window.hi.max(1))?;
    cfg.window = window;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intset::CountingSet;

    fn cfg(n: i64) -> S6Config {
        S6Config::new(Rational::from_integer(60), Rational::new(1, 100), 5, n).unwrap()
    }

    #[test]
    fn inequalities_and_budget() {
        let c = cfg(1000);
        let (v1, v2, v3) = c.interval_inequalities();
        assert_eq!(v1, Rational::new(20, 17));
        assert_eq!(v2, Rational::new(13, 12));
        assert_eq!(v3, Rational::new(60, 767));
        assert!(c.check_inequalities().holds_on_window());
        assert!((c.budget() - (0.5 + 60.0 / 767.0)).abs() < 1e-15);
        let bad = S6Config::new(Rational::from_integer(2), Rational::new(1, 100), 3, 100).unwrap();
        assert!(bad.check_inequalities().is_violated());
        assert!(build_s6_sets(&bad).is_err());
    }

    #[test]
    fn intervals_round_inward() {
        let c = cfg(10_000);
        assert_eq!(c.interval(1, 1), Some(Interval { lo: 60, hi: 60 }));
        assert_eq!(c.interval(2, 1), Some(Interval { lo: 3564, hi: 3636 }));
        assert_eq!(c.interval(1, 4), Some(Interval { lo: 58, hi: 62 }));
        assert!(!c.retained(1));
        assert!(c.retained(2));
        assert_eq!(c.exponents(), vec![1, 2]);
        assert!(check_interval_algebra(&cfg(10_000_000)).holds_on_window());
    }

    #[test]
    fn sets_at_ten_million() {
        let s = build_s6_sets(&cfg(10_000_000)).unwrap();
        assert_eq!(s.retained, vec![2, 3]);
        assert_eq!(s.family(2).members().collect::<Vec<_>>(), vec![3600]);
        let e1 = s.family(1);
        assert_eq!(e1.min(), Some(213_840));
        assert!(e1.members().all(|n| n % 20 == 0 && (213_840..=218_160).contains(&n)));
        assert!(s.families[2..].iter().all(|e| e.is_empty()));
        assert_eq!(s.warnings.len(), 3);
        assert!(check_separation(&s).holds_on_window());
    }

    #[test]
    fn weight_profile() {
        let c = cfg(300_000);
        let w = S6Weight::new(&c).unwrap();
        assert_eq!(w.log2_neg_product(0), 0.0);
        assert_eq!(w.log2_neg_product(20), -2.0);
        assert_eq!(w.log2_neg_product(72), -4.0);
        assert_eq!(w.log2_neg_product(30), 0.0);
        // I_3 − I_2 plateau at 2^{−2·max(1,2)}
        let d = c.interval(3, 1).unwrap().lo - c.interval(2, 1).unwrap().hi;
        assert_eq!(w.log2_neg_product(d + 1), -4.0);
        let mut prev = 0.0;
        for k in 1..=300_000 {
            let v = w.log2_neg_product(k);
            assert!((v - prev).abs() <= 1.0 + 1e-12, "k={k}");
            prev = v;
        }
        let ws: WeightSeq<f64> = build_s6_weight(&c).unwrap();
        assert!((ws.potential(-72).unwrap() - 4.0 * std::f64::consts::LN_2).abs() < 1e-12);
        let back: WeightSeq<f64> = crate::shift::weight_from_json(&ws.to_json()).unwrap();
        assert_eq!(back.potential(-3600).unwrap(), ws.potential(-3600).unwrap());
    }

    #[test]
    fn residual_avoids_holes() {
        let c = cfg(100_000);
        let a = residual_set(&c);
        let w = S6Weight::new(&c).unwrap();
        assert!(!a.contains(0) && !a.contains(20) && !a.contains(60) && !a.contains(18) && a.contains(16));
        assert!(a.contains(1));
        assert!(a.members().all(|n| w.log2_neg_product(n) == 0.0));
        assert!(a.count_in(0, 100_000) as f64 / 100_001.0 > 0.35);
    }
}
