//! Correlation sets, syndetic return sets and running return averages.
//!
//! For a set `A` and a shift `k`, `B_k = A ∩ (A − k)`. Its windowed density
//! `δ_k` is measured on a single checkpoint family shared by every `k`, so
//! that all comparisons in a report are made at the same scales.
//!
//! At checkpoint `n` the count is `#{x : x, x + k ∈ A ∩ [−n, n]}`, i.e. pairs
//! with both ends inside the section. This makes `δ_k = δ_{−k}` hold exactly
//! on every window rather than only in the limit.

use std::collections::BTreeMap;
use std::sync::Mutex;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::intset::{density_profile, linear_checkpoints, shift_set, CountingSet, DensityEstimate, Gap, IntSet, Window};
use crate::scalar::ratio_str;
use crate::{Error, Rational, Result};

/// `A ∩ shift_set(A, k)`.
pub fn correlation_set(a: &IntSet, k: i64) -> IntSet {
    a.intersection(&shift_set(a, k)).expect("same window")
}

/// Number of checkpoints used when the caller does not supply any.
pub const DEFAULT_CHECKPOINTS: usize = 16;

/// Memoised `δ_k` over a fixed checkpoint family.
pub struct CorrelationScan<'a> {
    a: &'a IntSet,
    density: DensityEstimate,
    tail: Vec<i64>,
    cache: Mutex<BTreeMap<i64, Rational>>,
}

impl<'a> CorrelationScan<'a> {
    pub fn new(a: &'a IntSet, checkpoints: &[i64]) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::Degenerate("empty set: δ = 0 makes the return threshold vacuous".into()));
        }
        let density = density_profile(a, checkpoints)?;
        let tail = density.tail().iter().map(|c| c.n).collect();
        Ok(Self { a, density, tail, cache: Mutex::new(BTreeMap::new()) })
    }

    /// Uses [`DEFAULT_CHECKPOINTS`] evenly spaced checkpoints up to the
    /// window radius.
    pub fn with_default_checkpoints(a: &'a IntSet) -> Result<Self> {
        let cps = linear_checkpoints(a.window().radius(), DEFAULT_CHECKPOINTS);
        let cps: Vec<i64> = cps.into_iter().filter(|&n| n > 0).collect();
        Self::new(a, &cps)
    }

    pub fn set(&self) -> &IntSet {
        self.a
    }

    pub fn density(&self) -> &DensityEstimate {
        &self.density
    }

    /// Windowed upper density of `A`.
    pub fn delta(&self) -> Rational {
        self.density.upper_est
    }

    /// Windowed upper density of `B_k`.
    pub fn delta_k(&self, k: i64) -> Rational {
        let key = k.abs();
        if let Some(v) = self.cache.lock().unwrap().get(&key) {
            return *v;
        }
        let v = self.compute(key);
        self.cache.lock().unwrap().insert(key, v);
        v
    }

    fn compute(&self, k: i64) -> Rational {
        let w = self.a.window();
        self.tail
            .iter()
            .map(|&n| {
                let (lo, denom) = if w.is_bilateral() { (-n, 2 * n as i128 + 1) } else { (w.lo, n as i128 + 1) };
                let count = self.a.correlation_count(k, lo.max(lo - k), n.min(n - k));
                Rational::new(count as i128, denom)
            })
            .max()
            .unwrap()
    }

    /// Fills the cache for every `k` in `range`, in parallel.
    pub fn prefetch(&self, range: Window) {
        let missing: Vec<i64> = {
            let cache = self.cache.lock().unwrap();
            let lo = if range.lo <= 0 && range.hi >= 0 { 0 } else { range.lo.abs().min(range.hi.abs()) };
            let hi = range.lo.abs().max(range.hi.abs());
            (lo..=hi).filter(|k| !cache.contains_key(k)).collect()
        };
        let computed: Vec<(i64, Rational)> = missing.par_iter().map(|&k| (k, self.compute(k))).collect();
        self.cache.lock().unwrap().extend(computed);
    }

    /// `(1 − ε)·δ²`.
    pub fn threshold(&self, epsilon: Rational) -> Rational {
        let d = self.delta();
        (Rational::from_integer(1) - epsilon) * d * d
    }
}

fn check_epsilon(epsilon: Rational) -> Result<()> {
    if epsilon <= Rational::from_integer(0) || epsilon >= Rational::from_integer(1) {
        return Err(Error::Argument(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct DeltaEntry {
    pub k: i64,
    #[serde(with = "ratio_str")]
    pub delta_k: Rational,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiffSetReport {
    #[serde(with = "ratio_str")]
    pub delta: Rational,
    #[serde(with = "ratio_str")]
    pub epsilon: Rational,
    #[serde(with = "ratio_str")]
    pub threshold: Rational,
    pub k_range: Window,
    pub checkpoints: Vec<i64>,
    pub delta_k: Vec<DeltaEntry>,
    #[serde(serialize_with = "members_of")]
    pub f: IntSet,
    pub max_gap: Gap,
}

fn members_of<S: serde::Serializer>(set: &IntSet, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(set.members())
}

/// `F = {k ∈ k_range : δ_k > (1 − ε)δ²}` and its largest gap.
pub fn syndetic_return_set(a: &IntSet, epsilon: Rational, k_range: Window) -> Result<DiffSetReport> {
    let scan = CorrelationScan::with_default_checkpoints(a)?;
    syndetic_return_set_with(&scan, epsilon, k_range)
}

pub fn syndetic_return_set_with(scan: &CorrelationScan<'_>, epsilon: Rational, k_range: Window) -> Result<DiffSetReport> {
    check_epsilon(epsilon)?;
    let threshold = scan.threshold(epsilon);
    scan.prefetch(k_range);
    let delta_k: Vec<DeltaEntry> =
        (k_range.lo..=k_range.hi).map(|k| DeltaEntry { k, delta_k: scan.delta_k(k) }).collect();
    let f = IntSet::from_members(k_range, delta_k.iter().filter(|e| e.delta_k > threshold).map(|e| e.k))?;
    let max_gap = f.max_gap(k_range);
    Ok(DiffSetReport {
        delta: scan.delta(),
        epsilon,
        threshold,
        k_range,
        checkpoints: scan.density().checkpoints.iter().map(|c| c.n).collect(),
        delta_k,
        f,
        max_gap,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GreedyReport {
    pub r: Vec<i64>,
    #[serde(with = "ratio_str")]
    pub bound: Rational,
    /// `#R ≤ bound`. A failure means the windowed `δ_k` misjudged the
    /// limiting correlations; it is reported, not asserted.
    pub bound_holds: bool,
    /// The range on which `F + R` must cover: the candidate range shrunk by
    /// `max |R|` on each side.
    pub covered_range: Option<Window>,
    pub covering_holds: bool,
    /// Up to 16 uncovered points.
    pub uncovered: Vec<i64>,
}

/// Greedy maximal `R` with `δ_{k−l} ≤ (1 − ε)δ²` for all distinct `k, l ∈ R`:
/// start from 0 and scan by increasing `|k|`, `+k` before `−k`.
pub fn greedy_separated_set(a: &IntSet, epsilon: Rational, candidate_range: Window) -> Result<GreedyReport> {
    let scan = CorrelationScan::with_default_checkpoints(a)?;
    greedy_separated_set_with(&scan, epsilon, candidate_range)
}

pub fn greedy_separated_set_with(
    scan: &CorrelationScan<'_>,
    epsilon: Rational,
    candidate_range: Window,
) -> Result<GreedyReport> {
    check_epsilon(epsilon)?;
    if !candidate_range.contains(0) {
        return Err(Error::Argument(format!("candidate range {candidate_range} must contain 0")));
    }
    let threshold = scan.threshold(epsilon);
    let delta = scan.delta();
    let one = Rational::from_integer(1);
    let bound = (one - delta * (one - epsilon)) / (delta * epsilon);

    let reach = candidate_range.lo.abs().max(candidate_range.hi);
    let mut r = vec![0i64];
    for m in 1..=reach {
        for k in [m, -m] {
            if candidate_range.contains(k) && r.iter().all(|&l| scan.delta_k(k - l) <= threshold) {
                r.push(k);
            }
        }
    }
    let bound_holds = Rational::from_integer(r.len() as i128) <= bound;

    let spread = r.iter().map(|x| x.abs()).max().unwrap();
    let covered_range = candidate_range.shrink(spread);
    let mut uncovered = Vec::new();
    if let Some(cr) = covered_range {
        scan.prefetch(candidate_range);
        for x in cr.lo..=cr.hi {
            if !r.iter().any(|&l| scan.delta_k(x - l) > threshold) {
                uncovered.push(x);
                if uncovered.len() == 16 {
                    break;
                }
            }
        }
    }
    Ok(GreedyReport { r, bound, bound_holds, covered_range, covering_holds: uncovered.is_empty(), uncovered })
}

/// A finitely supported nonnegative profile `α_n`, `n ∈ [lo, lo + len)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaProfile {
    pub lo: i64,
    pub values: Vec<f64>,
}

impl AlphaProfile {
    pub fn from_fn(lo: i64, hi: i64, f: impl Fn(i64) -> f64) -> Self {
        Self { lo, values: (lo..=hi).map(f).collect() }
    }

    pub fn get(&self, n: i64) -> f64 {
        let i = n - self.lo;
        if i < 0 {
            0.0
        } else {
            self.values.get(i as usize).copied().unwrap_or(0.0)
        }
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.values.len() as i64 - 1
    }

    /// Largest `C` with `α_n ≥ C·α_{n−1}` (forward) and with
    /// `α_{n−1} ≥ C·α_n` (backward) across the profile; `None` when no term
    /// constrains it.
    fn ratio_constants(&self) -> (Option<f64>, Option<f64>) {
        let mut fwd: Option<f64> = None;
        let mut bwd: Option<f64> = None;
        for w in self.values.windows(2) {
            let (prev, cur) = (w[0], w[1]);
            if prev > 0.0 {
                let c = cur / prev;
                fwd = Some(fwd.map_or(c, |f| f.min(c)));
            }
            if cur > 0.0 {
                let c = prev / cur;
                bwd = Some(bwd.map_or(c, |b| b.min(c)));
            }
        }
        (fwd, bwd)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioDirection {
    /// `α_n ≥ C·α_{n−1}`
    Forward,
    /// `α_{n−1} ≥ C·α_n`
    Backward,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Growth {
    /// last/first ≥ 2
    Growing,
    /// last/first within 10% of 1
    Flat,
    Indeterminate,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReturnAverage {
    pub direction: RatioDirection,
    /// `None` when `α ≡ 0` (every ratio condition holds vacuously).
    pub c: Option<f64>,
    /// `β(m) = Σ_{m' ∈ A ∩ window} α_{m'−m}` for each `m ∈ A`.
    pub beta: Vec<(i64, f64)>,
    /// `(N, (1/(2N+1)) Σ_{m, m' ∈ A ∩ [−N, N]} α_{m'−m})`.
    pub averages: Vec<(i64, f64)>,
    pub growth_ratio: Option<f64>,
    pub growth: Growth,
}

impl ReturnAverage {
    pub fn beta_at(&self, m: i64) -> Option<f64> {
        self.beta.binary_search_by_key(&m, |e| e.0).ok().map(|i| self.beta[i].1)
    }
}

/// Linear convolution via FFT.
fn convolve(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len() + y.len() - 1;
    let size = n.next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let mut a: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    a.resize(size, Complex::new(0.0, 0.0));
    let mut b: Vec<Complex<f64>> = y.iter().map(|&v| Complex::new(v, 0.0)).collect();
    b.resize(size, Complex::new(0.0, 0.0));
    fwd.process(&mut a);
    fwd.process(&mut b);
    for (u, v) in a.iter_mut().zip(&b) {
        *u *= v;
    }
    inv.process(&mut a);
    let scale = 1.0 / size as f64;
    a[..n].iter().map(|c| c.re * scale).collect()
}

fn indicator(a: &IntSet, lo: i64, hi: i64) -> Vec<f64> {
    (lo..=hi).map(|x| if a.contains(x) { 1.0 } else { 0.0 }).collect()
}

/// Return sums `β` and running averages at `checkpoints` (bilateral sets).
///
/// The averages at `N` are taken over the section `A ∩ [−N, N]`: both ends
/// of each pair must lie within it, so the numbers are the finite-window
/// version of the limsup quantity and do not depend on the outer window.
pub fn weighted_return_average(a: &IntSet, alpha: &AlphaProfile, checkpoints: &[i64]) -> Result<ReturnAverage> {
    if alpha.values.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(Error::Argument("α must be finite and nonnegative".into()));
    }
    let w = a.window();
    if !w.is_bilateral() {
        return Err(Error::Argument("return averages need a bilateral set".into()));
    }
    let (fwd, bwd) = alpha.ratio_constants();
    let (direction, c) = match (fwd, bwd) {
        (None, None) => (RatioDirection::Forward, None),
        (Some(f), _) if f > 0.0 => (RatioDirection::Forward, Some(f)),
        (_, Some(b)) if b > 0.0 => (RatioDirection::Backward, Some(b)),
        (None, Some(_)) => (RatioDirection::Forward, None),
        (Some(_), None) => (RatioDirection::Backward, None),
        _ => {
            return Err(Error::Precondition(
                "α satisfies neither α_n ≥ C·α_{n−1} nor α_{n−1} ≥ C·α_n for any C > 0".into(),
            ))
        }
    };
    for &n in checkpoints {
        if n < 0 || n > w.radius() {
            return Err(Error::WindowBounds { index: n, lo: 0, hi: w.radius() });
        }
    }

    let members: Vec<i64> = a.members().collect();
    let zero = alpha.values.iter().all(|&v| v == 0.0);
    let beta = if zero || members.is_empty() {
        members.iter().map(|&m| (m, 0.0)).collect()
    } else {
        // β(m) = conv(1_A, reversed α)[m − lo + α.hi]
        let x = indicator(a, w.lo, w.hi);
        let y: Vec<f64> = alpha.values.iter().rev().copied().collect();
        let conv = convolve(&x, &y);
        members.iter().map(|&m| (m, conv[(m - w.lo + alpha.hi()) as usize].max(0.0))).collect()
    };

    let mut averages = Vec::with_capacity(checkpoints.len());
    for &n in checkpoints {
        let value = if zero {
            0.0
        } else {
            // c_d = #{(x, x+d) ⊆ A ∩ [−n, n]} via autocorrelation
            let x = indicator(a, -n, n);
            let rev: Vec<f64> = x.iter().rev().copied().collect();
            let corr = convolve(&x, &rev);
            let len = x.len() as i64;
            let mut s = 0.0;
            for d in (1 - len)..len {
                let ad = alpha.get(d);
                if ad != 0.0 {
                    s += ad * corr[(d + len - 1) as usize].round();
                }
            }
            s / (2 * n + 1) as f64
        };
        averages.push((n, value));
    }

    let (growth_ratio, growth) = match (averages.first(), averages.last()) {
        (Some(&(_, f)), Some(&(_, l))) if f > 0.0 => {
            let ratio = l / f;
            let g = if ratio >= 2.0 {
                Growth::Growing
            } else if (ratio - 1.0).abs() < 0.1 {
                Growth::Flat
            } else {
                Growth::Indeterminate
            };
            (Some(ratio), g)
        }
        (Some(&(_, f)), Some(&(_, l))) if f == 0.0 && l == 0.0 => (None, Growth::Flat),
        _ => (None, Growth::Indeterminate),
    };
    Ok(ReturnAverage { direction, c, beta, averages, growth_ratio, growth })
}
