//! Block construction of sets `E_p ⊆ b_p·N` with positive upper density,
//! and the max-rule weight built on top of them.
//!
//! The induction is run with minimal choices: every free "≥" is taken at the
//! smallest integer for which the growth, support, density and separation
//! properties still hold.
//! Each step adds one progression block per family, so `E_p` is stored as a
//! short list of [`ApBlock`]s even when it has ~10⁹ members.
//!
//! The weight is kept as an exact integer exponent `k(n)` with
//! `w₁⋯w_n = 2^{k(n)}`; `k = max(k⁰, k¹, …, k^depth)` where `k⁰` follows the
//! `[a_r − r, b_r + r]` blocks and `k^p` the ramps around `b_p·N`.

use std::collections::BTreeMap;
use std::f64::consts::LN_2;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::criteria::{ConditionReport, Witness, MAX_WITNESSES};
use crate::intset::{ApBlock, BlockSet, SetLiteral, Window};
use crate::scalar::ratio_str;
use crate::shift::{Domain, LogProducts, WeightSeq};
use crate::{parse_rational, Error, Rational, Result, Scalar};

/// Multiplicative slack on the free choice of `a_{r+1}`; `1` is the
/// minimal-choice policy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthPolicy {
    #[serde(with = "ratio_str")]
    pub slack: Rational,
}

impl Default for GrowthPolicy {
    fn default() -> Self {
        Self { slack: Rational::from_integer(1) }
    }
}

/// One block of `E_p`, added at induction step `step`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct S5Block {
    pub step: usize,
    pub block: ApBlock,
}

/// Inductive state after `depth` steps. Vectors are 0-based: `a[r−1] = a_r`.
#[derive(Clone, Debug, PartialEq)]
pub struct S5State {
    pub depth: usize,
    pub policy: GrowthPolicy,
    pub a: Vec<i64>,
    pub b: Vec<i64>,
    /// `N_{p,r}` keyed by `(p, r)`.
    pub n: BTreeMap<(usize, usize), i64>,
    /// `M_{p,r}` keyed by `(p, r)`, `r ≥ 2`.
    pub m: BTreeMap<(usize, usize), i64>,
    /// `families[p−1]` = blocks of `E_p`.
    pub families: Vec<Vec<S5Block>>,
}

/// Values beyond this would risk overflow in difference arithmetic.
const LIMIT: i128 = 1 << 60;

fn fits(v: i128, depth_reached: usize, what: &str) -> Result<i64> {
    if v > LIMIT {
        Err(Error::Resource { depth_reached, reason: format!("{what} = {v} exceeds 2^60") })
    } else {
        Ok(v as i64)
    }
}

/// Runs the induction to `depth`.
pub fn build_s5(depth: usize, policy: GrowthPolicy) -> Result<S5State> {
    if depth == 0 {
        return Err(Error::Argument("depth must be at least 1".into()));
    }
    if policy.slack < Rational::from_integer(1) {
        return Err(Error::Argument(format!("slack must be ≥ 1, got {}", policy.slack)));
    }
    let mut st = S5State {
        depth: 1,
        policy,
        a: vec![1],
        b: vec![4],
        n: BTreeMap::from([((1, 1), 8)]),
        m: BTreeMap::new(),
        families: vec![vec![S5Block { step: 1, block: ApBlock { first: 8, last: 8, step: 4 } }]],
    };
    for r in 1..depth {
        let rr = r + 1;
        let (br, ri) = (st.b[r - 1] as i128, r as i128);
        let top = (1..=r).map(|p| st.family_max(p).unwrap() as i128 + p as i128).max().unwrap();
        // n ∉ [a_{r+1} − (r+2) − p, …] for every n ∈ E_p forces the "+ (r+3)".
        let base = (br + 2 * ri + 1).max(top + ri + 3);
        let slack = policy.slack;
        let a_new = (Rational::from_integer(base) * slack).ceil().to_integer();
        let a_new = fits(a_new, r, "a")?;
        let rri = rr as i128;
        let b_new = fits((rri * a_new as i128).max(rri * rri * (2 * rri + 1) + 1), r, "b")?;
        st.a.push(a_new);
        st.b.push(b_new);
        st.families.push(Vec::new());
        let mut cur_max = st.max_element() as i128;
        for p in 1..=rr {
            let bp = st.b[p - 1] as i128;
            let m = b_new as i128 + 3 * rri + cur_max;
            let c0 = (m - 1).div_euclid(bp);
            let surplus = |n: i128| (n / bp - c0) * 2 * bp - n;
            let n = if surplus(m) >= 0 { m } else { bp * (m / bp + 1).max(2 * c0) };
            let first = fits((c0 + 1) * bp, r, "block start")?;
            let last = fits(n / bp * bp, r, "N")?;
            st.families[p - 1].push(S5Block { step: rr, block: ApBlock::new(first, last, bp as i64)? });
            st.n.insert((p, rr), n as i64);
            st.m.insert((p, rr), m as i64);
            cur_max = last as i128;
        }
        st.depth = rr;
    }
    Ok(st)
}

impl S5State {
    pub fn a(&self, r: usize) -> i64 {
        self.a[r - 1]
    }

    pub fn b(&self, r: usize) -> i64 {
        self.b[r - 1]
    }

    pub fn family_blocks(&self, p: usize) -> &[S5Block] {
        &self.families[p - 1]
    }

    pub fn family_max(&self, p: usize) -> Option<i64> {
        self.families.get(p - 1)?.last().map(|b| b.block.last)
    }

    pub fn max_element(&self) -> i64 {
        self.families.iter().flat_map(|f| f.iter().map(|b| b.block.last)).max().unwrap_or(0)
    }

    /// `[0, max E + 2·depth + 2]`: room for every `n + s`, `s ≤ p`.
    pub fn window(&self) -> Window {
        Window::unilateral(self.max_element() + 2 * self.depth as i64 + 2)
    }

    /// `E_p` as a block set on [`Self::window`].
    pub fn family(&self, p: usize) -> BlockSet {
        BlockSet::new(self.window(), self.family_blocks(p).iter().map(|b| b.block).collect())
            .expect("construction blocks are ordered")
    }

    pub fn family_len(&self, p: usize) -> u64 {
        self.family_blocks(p).iter().map(|b| b.block.len()).sum()
    }

    pub fn to_json(&self) -> Value {
        let keyed = |m: &BTreeMap<(usize, usize), i64>| -> Vec<Value> {
            m.iter().map(|(&(p, r), &v)| json!({"p": p, "r": r, "value": v})).collect()
        };
        let fams: Vec<Value> = (1..=self.depth)
            .map(|p| {
                json!({
                    "p": p,
                    "b_p": self.b(p),
                    "members": self.family_len(p),
                    "set": SetLiteral::from_blockset(&self.family(p)),
                    "block_steps": self.family_blocks(p).iter().map(|b| b.step).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({
            "depth": self.depth,
            "policy": self.policy,
            "a": self.a,
            "b": self.b,
            "N": keyed(&self.n),
            "M": keyed(&self.m),
            "E": fams,
        })
    }
}

/// Growth: `a_{r+1} ≥ b_r + 2r + 1`, `b_r ≥ r·a_r`, `b_r > r²(2r+1)`.
pub fn check_growth(st: &S5State) -> ConditionReport {
    let mut w = Vec::new();
    for r in 1..=st.depth {
        let (a, b, ri) = (st.a(r) as i128, st.b(r) as i128, r as i128);
        if b < ri * a {
            w.push(Witness::new("b_r < r·a_r", vec![r as i64], b as f64, (ri * a) as f64));
        }
        if b <= ri * ri * (2 * ri + 1) {
            w.push(Witness::new("b_r ≤ r²(2r+1)", vec![r as i64], b as f64, (ri * ri * (2 * ri + 1)) as f64));
        }
        if r < st.depth && (st.a(r + 1) as i128) < b + 2 * ri + 1 {
            w.push(Witness::new("a_{r+1} < b_r + 2r + 1", vec![r as i64], st.a(r + 1) as f64, (b + 2 * ri + 1) as f64));
        }
    }
    w.truncate(MAX_WITNESSES);
    ConditionReport::from_witnesses("growth", w).with("depth", st.depth)
}

/// Support: `E_p ⊆ b_p·N`.
pub fn check_support(st: &S5State) -> ConditionReport {
    let mut w = Vec::new();
    for p in 1..=st.depth {
        let bp = st.b(p);
        for sb in st.family_blocks(p) {
            let b = sb.block;
            let ok = b.first >= bp && b.first % bp == 0 && (b.len() == 1 || b.step % bp == 0);
            if !ok {
                w.push(Witness::new("E_p ⊄ b_p·N", vec![p as i64, b.first], b.first as f64, bp as f64));
            }
        }
    }
    w.truncate(MAX_WITNESSES);
    ConditionReport::from_witnesses("support", w)
}

/// `#E_p^r(N_{p,r}) ≥ N_{p,r}/(2b_p)` for every recorded `(p, r)`.
pub fn check_density_checkpoints(st: &S5State) -> ConditionReport {
    let mut w = Vec::new();
    let mut worst = f64::INFINITY;
    for (&(p, r), &n) in &st.n {
        let count: u64 = st
            .family_blocks(p)
            .iter()
            .filter(|b| b.step <= r)
            .map(|b| b.block.count_in(0, n))
            .sum();
        let need = Rational::new(n as i128, 2 * st.b(p) as i128);
        let ratio = count as f64 * 2.0 * st.b(p) as f64 / n as f64;
        worst = worst.min(ratio);
        if Rational::from_integer(count as i128) < need {
            w.push(Witness::new("#E_p^r(N) < N/(2b_p)", vec![p as i64, r as i64, n], count as f64, n as f64 / (2 * st.b(p)) as f64));
        }
    }
    w.truncate(MAX_WITNESSES);
    ConditionReport::from_witnesses("density-checkpoints", w).with("min_count_over_required", worst).with("checkpoints", st.n.len())
}

/// Separation, block by block: for `(n, m) ∈ E_p × E_q`, `p ≠ q`, `m > n`:
/// `m − n > p`, `m − n ∉ [a_ρ − (ρ+1) − q, b_ρ + ρ + p + q]`, and
/// `n ∉ [a_ρ − (ρ+1) − p, b_ρ + 2ρ]`.
///
/// Difference ranges of whole block pairs are tested first; only pairs whose
/// hull meets a forbidden interval are enumerated, up to `budget` elements.
pub fn check_block_separation(st: &S5State, budget: u64) -> ConditionReport {
    let mut w = Vec::new();
    let mut enumerated = 0u64;
    let mut exhausted = false;
    let d = st.depth;
    // n-intervals
    for p in 1..=d {
        for sb in st.family_blocks(p) {
            for rho in 1..=d {
                let lo = st.a(rho) - (rho as i64 + 1) - p as i64;
                let hi = st.b(rho) + 2 * rho as i64;
                if let Some(n) = sb.block.next_ge(lo).filter(|&n| n <= hi) {
                    w.push(Witness::new("n ∈ [a_ρ−(ρ+1)−p, b_ρ+2ρ]", vec![p as i64, n, rho as i64], n as f64, lo as f64));
                }
            }
        }
    }
    // pair conditions
    for p in 1..=d {
        for q in 1..=d {
            if p == q {
                continue;
            }
            for x in st.family_blocks(p) {
                for y in st.family_blocks(q) {
                    let (x, y) = (x.block, y.block);
                    if y.last <= x.first {
                        continue;
                    }
                    if y.first <= x.last {
                        w.push(Witness::new("interleaved blocks", vec![p as i64, q as i64, x.first, y.first], 0.0, 0.0));
                        continue;
                    }
                    let (dlo, dhi) = (y.first - x.last, y.last - x.first);
                    if dlo <= p as i64 {
                        w.push(Witness::new("m − n ≤ p", vec![p as i64, q as i64, x.last, y.first], dlo as f64, p as f64));
                    }
                    for rho in 1..=d {
                        let jlo = st.a(rho) - (rho as i64 + 1) - q as i64;
                        let jhi = st.b(rho) + rho as i64 + (p + q) as i64;
                        if dhi < jlo || dlo > jhi {
                            continue;
                        }
                        // exact: some n ∈ x with y ∩ [n + jlo, n + jhi] ≠ ∅
                        if enumerated + x.len() > budget {
                            exhausted = true;
                            continue;
                        }
                        enumerated += x.len();
                        if let Some((n, m)) = x.iter().find_map(|n| y.next_ge(n + jlo).filter(|&m| m <= n + jhi).map(|m| (n, m))) {
                            w.push(Witness::new(
                                "m − n ∈ [a_ρ−(ρ+1)−q, b_ρ+ρ+p+q]",
                                vec![p as i64, q as i64, n, m, rho as i64],
                                (m - n) as f64,
                                jlo as f64,
                            ));
                        }
                    }
                }
            }
        }
    }
    let total = w.len();
    w.truncate(MAX_WITNESSES);
    let mut rep = ConditionReport::from_witnesses("block-separation", w).with("violations", total).with("enumerated_elements", enumerated);
    if exhausted && rep.holds_on_window() {
        rep = ConditionReport::inconclusive("block-separation", "enumeration budget exhausted").with("enumerated_elements", enumerated);
    }
    rep
}

/// Exact exponent form of the max-rule weight: `w₁⋯w_n = 2^{k(n)}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct S5Weight {
    depth: usize,
    policy: GrowthPolicy,
    b: Vec<i64>,
    /// `[max(1, a_r − r), b_r + r]`; the first block starts at 0 since the
    /// empty product at 0 is already 1.
    blocks: Vec<(i64, i64)>,
}

impl S5Weight {
    pub fn new(st: &S5State) -> Self {
        let blocks = (1..=st.depth)
            .map(|r| {
                let lo = if r == 1 { 0 } else { (st.a(r) - r as i64).max(1) };
                (lo, st.b(r) + r as i64)
            })
            .collect();
        Self { depth: st.depth, policy: st.policy, b: st.b.clone(), blocks }
    }

    /// The `w⁰` blocks `[a_r − r, b_r + r]` (first one from 0).
    pub fn unit_blocks(&self) -> &[(i64, i64)] {
        &self.blocks
    }

    /// Index of the last `w⁰` block starting at or before `n`.
    fn block_before(&self, n: i64) -> usize {
        self.blocks.partition_point(|b| b.0 <= n).saturating_sub(1)
    }

    /// Exponent of `w₁⁰⋯w_n⁰`.
    pub fn k0(&self, n: i64) -> i64 {
        let (_, hi) = self.blocks[self.block_before(n)];
        (n - hi).max(0)
    }

    /// Exponent of `w₁^p⋯w_n^p`.
    pub fn kp(&self, p: usize, n: i64) -> i64 {
        let bp = self.b[p - 1];
        let (k, rem) = (n.div_euclid(bp), n.rem_euclid(bp));
        let p = p as i64;
        if k >= 1 && rem <= p {
            p
        } else if rem >= bp - (p - 1) {
            rem - bp + p
        } else {
            0
        }
    }

    /// Exponent of `w₁⋯w_n`, `n ≥ 0`.
    pub fn k(&self, n: i64) -> i64 {
        (1..=self.depth).map(|p| self.kp(p, n)).fold(self.k0(n), i64::max)
    }

    /// Lower bound on `k(x + t)` over `x ∈ block`, `t ∈ [t_lo, t_hi]`.
    ///
    /// Combines the `w⁰` floor on the hull with the plateau `k^q = q` on
    /// `b_q·N + [0, q]` whenever the block lies in `b_q·N`.
    pub fn floor(&self, block: &ApBlock, t_lo: i64, t_hi: i64) -> i64 {
        let (lo, hi) = (block.first + t_lo, block.last + t_hi);
        let i = self.block_before(lo);
        let (blo, bhi) = self.blocks[i];
        let meets_next = self.blocks.get(i + 1).is_some_and(|nb| nb.0 <= hi);
        let mut f = if (blo <= lo && lo <= bhi) || meets_next { 0 } else { lo - bhi };
        for q in 1..=self.depth {
            let bq = self.b[q - 1];
            let aligned = block.first % bq == 0 && (block.len() == 1 || block.step % bq == 0);
            if aligned && block.first >= bq && t_lo >= 0 && t_hi <= q as i64 {
                f = f.max(q as i64);
            }
        }
        f
    }

    /// `#{1 ≤ n ≤ upto : k(n) > p}`, counted as a union of intervals: gaps of
    /// `w⁰` where `k⁰ > p`, and `[b_q j − (q−p−1), b_q j + q]` for `q > p`.
    pub fn count_above(&self, p: usize, upto: i64) -> u64 {
        let pi = p as i64;
        // gap intervals
        let mut gaps: Vec<(i64, i64)> = Vec::new();
        for (i, &(_, hi)) in self.blocks.iter().enumerate() {
            let end = self.blocks.get(i + 1).map_or(i64::MAX, |nb| nb.0 - 1);
            if hi + pi < end {
                gaps.push((hi + pi + 1, end));
            }
        }
        struct Stream {
            bq: i64,
            left: i64,
            right: i64,
            j: i64,
        }
        let mut streams: Vec<Stream> = (p + 1..=self.depth)
            .map(|q| Stream { bq: self.b[q - 1], left: q as i64 - pi - 1, right: q as i64, j: 1 })
            .collect();
        let mut gi = 0usize;
        let mut count = 0u64;
        let mut covered_to = 0i64; // everything ≤ covered_to already counted
        loop {
            // next interval by start among all streams
            let mut best: Option<(i64, i64, usize)> = None;
            if let Some(&(s, e)) = gaps.get(gi) {
                best = Some((s, e, usize::MAX));
            }
            for (k, st) in streams.iter().enumerate() {
                let s = st.bq * st.j - st.left;
                if best.is_none_or(|b| s < b.0) {
                    best = Some((s, st.bq * st.j + st.right, k));
                }
            }
            let Some((s, e, k)) = best else { break };
            if s > upto {
                break;
            }
            if k == usize::MAX {
                gi += 1;
            } else {
                streams[k].j += 1;
            }
            let (s, e) = (s.max(covered_to + 1).max(1), e.min(upto));
            if s <= e {
                count += (e - s + 1) as u64;
                covered_to = e;
            }
        }
        count
    }

    /// Enclosing bounds on `ln w_n`: increments of `k` are at most 1, and
    /// drops at most the largest renormalisation or plateau exit.
    fn log2_weight_bounds(&self) -> (i64, i64) {
        let mut drop = self.depth as i64;
        for pair in self.blocks.windows(2) {
            drop = drop.max(pair[1].0 - 1 - pair[0].1);
        }
        (-drop, 1)
    }

    pub fn generator_json(&self, window: Window) -> Value {
        json!({"generator": "s5", "depth": self.depth, "slack": self.policy.slack.to_string(), "window": window})
    }
}

#[derive(Debug)]
struct S5Source {
    weight: S5Weight,
    window: Window,
}

impl<F: Scalar> LogProducts<F> for S5Source {
    fn potential(&self, n: i64) -> F {
        F::of_i64(self.weight.k(n)) * F::LN_2()
    }

    fn floor_on(&self, block: &ApBlock, t_lo: i64, t_hi: i64) -> Option<F> {
        Some(F::of_i64(self.weight.floor(block, t_lo, t_hi)) * F::LN_2())
    }

    fn log_weight_bounds(&self) -> Option<(F, F)> {
        let (lo, hi) = self.weight.log2_weight_bounds();
        Some((F::of_i64(lo) * F::LN_2(), F::of_i64(hi) * F::LN_2()))
    }

    fn generator(&self) -> Value {
        self.weight.generator_json(self.window)
    }
}

/// The max-rule weight as a unilateral [`WeightSeq`] on `window`, which must
/// start at 0 and reach past `max E + depth`.
pub fn build_s5_weight<F: Scalar>(st: &S5State, window: Window) -> Result<WeightSeq<F>> {
    let need = st.max_element() + st.depth as i64;
    if window.lo != 0 || window.hi < need {
        return Err(Error::Argument(format!("s5 weight window must be [0, ≥{need}], got {window}")));
    }
    WeightSeq::generated(Domain::Unilateral, window, Arc::new(S5Source { weight: S5Weight::new(st), window }))
}

/// Rebuilds a weight from `{"generator": "s5", "depth": R, "slack": "1",
/// "window": [0, hi]}` (`slack` and `window` optional).
pub fn weight_from_generator<F: Scalar>(v: &Value) -> Result<WeightSeq<F>> {
    let (st, window) = state_from_generator(v)?;
    build_s5_weight(&st, window)
}

pub fn state_from_generator(v: &Value) -> Result<(S5State, Window)> {
    let obj = v.as_object().ok_or_else(|| Error::Argument("generator must be an object".into()))?;
    for k in obj.keys() {
        if !matches!(k.as_str(), "generator" | "depth" | "slack" | "window" | "domain") {
            return Err(Error::Argument(format!("unknown s5 generator field {k:?}")));
        }
    }
    let depth = v["depth"].as_u64().ok_or_else(|| Error::Argument("s5 generator needs integer depth".into()))? as usize;
    let slack = match &v["slack"] {
        Value::Null => Rational::from_integer(1),
        Value::String(s) => parse_rational(s)?,
        Value::Number(n) => parse_rational(&n.to_string())?,
        _ => return Err(Error::Argument("slack must be a string or number".into())),
    };
    let st = build_s5(depth, GrowthPolicy { slack })?;
    let window = match &v["window"] {
        Value::Null => st.window(),
        w => serde_json::from_value(w.clone())?,
    };
    Ok((st, window))
}

/// Blocks of `E_p` with the step `r` such that the block sits in
/// `[b_r + 2r + 1, a_{r+1} − (r+2) − p]` (no upper end at the last step).
fn inter_block_step(st: &S5State, p: usize, b: &ApBlock) -> Option<usize> {
    let r = (1..=st.depth).rev().find(|&r| st.b(r) + 2 * r as i64 + 1 <= b.first)?;
    let fits = r == st.depth || b.last <= st.a(r + 1) - (r as i64 + 2) - p as i64;
    fits.then_some(r)
}

/// Visit products: `w₁⋯w_{n+s} ≥ 2^r` for `n ∈ E_p` in the `r`-th inter-block
/// range and `s ∈ [0, p]`.
pub fn check_visit_products(st: &S5State, w: &S5Weight, budget: u64) -> ConditionReport {
    let mut wit = Vec::new();
    let mut enumerated = 0u64;
    let mut exhausted = false;
    let mut min_margin = i64::MAX;
    for p in 1..=st.depth {
        for sb in st.family_blocks(p) {
            let b = sb.block;
            let Some(r) = inter_block_step(st, p, &b) else {
                wit.push(Witness::new("n outside every inter-block range", vec![p as i64, b.first], b.first as f64, 0.0));
                continue;
            };
            let f = w.floor(&b, 0, p as i64);
            if f >= r as i64 {
                min_margin = min_margin.min(f - r as i64);
                continue;
            }
            if enumerated + b.len() > budget {
                exhausted = true;
                continue;
            }
            enumerated += b.len();
            for n in b.iter() {
                for s in 0..=p as i64 {
                    let k = w.k(n + s);
                    min_margin = min_margin.min(k - r as i64);
                    if k < r as i64 && wit.len() < MAX_WITNESSES {
                        wit.push(Witness::new("log2 w1..w_{n+s} < r", vec![p as i64, n, s, r as i64], k as f64, r as f64));
                    }
                }
            }
        }
    }
    finish("visit-products", wit, exhausted).with("min_log2_margin", min_margin).with("enumerated_elements", enumerated)
}

fn finish(id: &str, wit: Vec<Witness>, exhausted: bool) -> ConditionReport {
    if wit.is_empty() && exhausted {
        ConditionReport::inconclusive(id, "enumeration budget exhausted")
    } else {
        ConditionReport::from_witnesses(id, wit)
    }
}

/// Exponent floor over `{y − x + t : x ∈ X, y ∈ Y, y > x, t ∈ [0, tmax]}`
/// for block-disjoint `X < Y`, falling back to per-`x` floors.
fn difference_floor(w: &S5Weight, x: &ApBlock, y: &ApBlock, tmax: i64, need: i64, budget: &mut u64) -> Option<i64> {
    let hull = ApBlock { first: y.first - x.last, last: y.last - x.first, step: 1 };
    let f = w.floor(&hull, 0, tmax);
    if f >= need {
        return Some(f);
    }
    if *budget < x.len() {
        return None;
    }
    *budget -= x.len();
    let mut worst = i64::MAX;
    for n in x.iter() {
        let shifted = ApBlock { first: y.first - n, last: y.last - n, step: y.step };
        worst = worst.min(w.floor(&shifted, 0, tmax));
    }
    Some(worst)
}

/// Cross products: `w₁⋯w_{m−n+t} ≥ 2^{p+q}` for `(n, m) ∈ E_p × E_q`, `p ≠ q`,
/// `m > n`, `t ∈ [0, q]`.
pub fn check_cross_products(st: &S5State, w: &S5Weight, budget: u64) -> ConditionReport {
    let mut wit = Vec::new();
    let mut left = budget;
    let mut exhausted = false;
    let mut min_margin = i64::MAX;
    for p in 1..=st.depth {
        for q in 1..=st.depth {
            if p == q {
                continue;
            }
            let need = (p + q) as i64;
            for xb in st.family_blocks(p) {
                for yb in st.family_blocks(q) {
                    let (x, y) = (xb.block, yb.block);
                    if y.first <= x.last {
                        continue;
                    }
                    match difference_floor(w, &x, &y, q as i64, need, &mut left) {
                        Some(f) if f >= need => min_margin = min_margin.min(f - need),
                        Some(_) => {
                            // exact search for a witness on the smaller side
                            match exact_pair_search(w, &x, &y, q as i64, need, &mut left) {
                                Some(Some((n, m, t, k))) => {
                                    if wit.len() < MAX_WITNESSES {
                                        wit.push(Witness::new("log2 w1..w_{m−n+t} < p+q", vec![p as i64, q as i64, n, m, t], k as f64, need as f64));
                                    }
                                }
                                Some(None) => {}
                                None => exhausted = true,
                            }
                        }
                        None => exhausted = true,
                    }
                }
            }
        }
    }
    finish("cross-products", wit, exhausted).with("min_log2_margin", min_margin)
}

/// `Some(Some(witness))`, `Some(None)` if every pair passes, `None` if over
/// budget.
fn exact_pair_search(w: &S5Weight, x: &ApBlock, y: &ApBlock, tmax: i64, need: i64, budget: &mut u64) -> Option<Option<(i64, i64, i64, i64)>> {
    let cost = x.len().saturating_mul(y.len()).saturating_mul(tmax as u64 + 1);
    if cost > *budget {
        return None;
    }
    *budget -= cost;
    for n in x.iter() {
        for m in y.iter().filter(|&m| m > n) {
            for t in 0..=tmax {
                let k = w.k(m - n + t);
                if k < need {
                    return Some(Some((n, m, t, k)));
                }
            }
        }
    }
    Some(None)
}

/// Self products: `w₁⋯w_{m−n+t} ≥ 2^p` for `n < m` in the same `E_p`,
/// `t ∈ [0, p]`. Differences lie in `b_p·N`, where the `w^p` plateau gives
/// exactly `2^p`.
pub fn check_self_products(st: &S5State, w: &S5Weight, budget: u64) -> ConditionReport {
    let mut wit = Vec::new();
    let mut left = budget;
    let mut exhausted = false;
    for p in 1..=st.depth {
        let bp = st.b(p);
        let blocks = st.family_blocks(p);
        for (i, xb) in blocks.iter().enumerate() {
            for yb in &blocks[i..] {
                let (x, y) = (xb.block, yb.block);
                let aligned = [x, y].iter().all(|b| b.first % bp == 0 && (b.len() == 1 || b.step % bp == 0));
                let dhi = y.last - x.first;
                if dhi <= 0 {
                    continue;
                }
                let dlo = (y.first - x.last).max(bp);
                let dlo = (dlo + bp - 1) / bp * bp;
                if aligned {
                    if dlo > dhi {
                        continue;
                    }
                    let diffs = ApBlock { first: dlo, last: dlo + (dhi - dlo) / bp * bp, step: bp };
                    if w.floor(&diffs, 0, p as i64) >= p as i64 {
                        continue;
                    }
                }
                match exact_pair_search(w, &x, &y, p as i64, p as i64, &mut left) {
                    Some(Some((n, m, t, k))) => {
                        if wit.len() < MAX_WITNESSES {
                            wit.push(Witness::new("log2 w1..w_{m−n+t} < p", vec![p as i64, n, m, t], k as f64, p as f64));
                        }
                    }
                    Some(None) => {}
                    None => exhausted = true,
                }
            }
        }
    }
    finish("self-products", wit, exhausted)
}

/// All structural checks on a state, with the default enumeration budget.
pub fn verify_s5(st: &S5State) -> Vec<ConditionReport> {
    const BUDGET: u64 = 20_000_000;
    let w = S5Weight::new(st);
    vec![
        check_growth(st),
        check_support(st),
        check_density_checkpoints(st),
        check_block_separation(st, BUDGET),
        check_visit_products(st, &w, BUDGET),
        check_cross_products(st, &w, BUDGET),
        check_self_products(st, &w, BUDGET),
    ]
}

/// Upper density evidence for `E_p`: `#E_p(N_{p,r})/N_{p,r}` at every step.
pub fn upper_density_table(st: &S5State, p: usize) -> Vec<(usize, i64, f64)> {
    st.n.iter()
        .filter(|((pp, _), _)| *pp == p)
        .map(|(&(_, r), &n)| {
            let count: u64 = st.family_blocks(p).iter().map(|b| b.block.count_in(0, n)).sum();
            (r, n, count as f64 / n as f64)
        })
        .collect()
}

/// `ln 2`, for callers comparing exponents with float potentials.
pub const LOG2: f64 = LN_2;
