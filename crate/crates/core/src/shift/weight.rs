use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::intset::{ApBlock, Window};
use crate::{Error, Result, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    /// Indices `≥ 0`; `B_w e₀ = 0`.
    Unilateral,
    /// All integers in the window.
    Bilateral,
}

/// A closed-form weight, described by its log-potential
/// `Φ(n) = ln(w₁⋯w_n)` for `n ≥ 0` and `Φ(n) = −ln(w_{n+1}⋯w₀)` for `n < 0`.
///
/// Then `w_{a+1}⋯w_b = exp(Φ(b) − Φ(a))` for every `a ≤ b`.
pub trait LogProducts<F: Scalar>: Send + Sync + fmt::Debug {
    fn potential(&self, n: i64) -> F;

    /// `ln w_n`.
    fn log_weight(&self, n: i64) -> F {
        self.potential(n) - self.potential(n - 1)
    }

    /// A lower bound for `Φ(x + t)` over `x ∈ block`, `t ∈ [t_lo, t_hi]`,
    /// when one is available without enumerating the block.
    fn floor_on(&self, _block: &ApBlock, _t_lo: i64, _t_hi: i64) -> Option<F> {
        None
    }

    /// `(inf ln w, sup ln w)` if known in closed form.
    fn log_weight_bounds(&self) -> Option<(F, F)> {
        None
    }

    /// JSON reference from which the weight can be rebuilt.
    fn generator(&self) -> serde_json::Value;
}

#[derive(Clone, Debug)]
enum Repr<F: Scalar> {
    /// `logw[i] = ln w_{lo+1+i}`, `potential[i] = Φ(lo + i)`.
    Dense { logw: Vec<F>, potential: Vec<F> },
    Constant { logw: F },
    Generated(Arc<dyn LogProducts<F>>),
}

/// A positive weight sequence on a window, held in the log domain.
///
/// The window `[lo, hi]` is the coordinate window: the sequence carries
/// `w_{lo+1}, …, w_hi`, which is exactly what `B_w^n` needs for vectors
/// supported in the window.
#[derive(Clone, Debug)]
pub struct WeightSeq<F: Scalar> {
    domain: Domain,
    window: Window,
    repr: Repr<F>,
}

/// Generated sequences with windows beyond this are not scanned for bounds.
const MAX_SCAN: u64 = 1 << 27;

impl<F: Scalar> WeightSeq<F> {
    fn check_window(domain: Domain, window: Window) -> Result<()> {
        match domain {
            Domain::Unilateral if window.lo != 0 => {
                Err(Error::Argument(format!("unilateral weights need a window starting at 0, got {window}")))
            }
            Domain::Bilateral if !window.contains(0) => {
                Err(Error::Argument(format!("bilateral weights need a window containing 0, got {window}")))
            }
            _ => Ok(()),
        }
    }

    /// `logw` lists `ln w_n` for `n = lo+1, …, hi`.
    pub fn from_log_weights(domain: Domain, window: Window, logw: Vec<F>) -> Result<Self> {
        Self::check_window(domain, window)?;
        if logw.len() as u64 != window.len() - 1 {
            return Err(Error::Argument(format!(
                "window {window} needs {} log-weights (indices {}..={}), got {}",
                window.len() - 1,
                window.lo + 1,
                window.hi,
                logw.len()
            )));
        }
        if let Some(i) = logw.iter().position(|v| !v.is_finite()) {
            return Err(Error::Argument(format!("weight at index {} is not a positive finite number", window.lo + 1 + i as i64)));
        }
        // Φ(lo + i) = Σ_{j ≤ lo+i} ln w_j − Σ_{j ≤ 0} ln w_j
        let mut potential = Vec::with_capacity(logw.len() + 1);
        let mut acc = F::zero();
        potential.push(acc);
        for &v in &logw {
            acc = acc + v;
            potential.push(acc);
        }
        let zero_at = potential[(-window.lo) as usize];
        for p in &mut potential {
            *p = *p - zero_at;
        }
        Ok(Self { domain, window, repr: Repr::Dense { logw, potential } })
    }

    pub fn from_weights(domain: Domain, window: Window, w: &[F]) -> Result<Self> {
        if let Some(i) = w.iter().position(|v| !(*v > F::zero())) {
            return Err(Error::Argument(format!("weight at index {} is not positive", window.lo + 1 + i as i64)));
        }
        Self::from_log_weights(domain, window, w.iter().map(|v| v.ln()).collect())
    }

    pub fn constant(domain: Domain, window: Window, w: F) -> Result<Self> {
        Self::check_window(domain, window)?;
        if !(w > F::zero()) || !w.is_finite() {
            return Err(Error::Argument(format!("constant weight must be positive and finite, got {w}")));
        }
        Ok(Self { domain, window, repr: Repr::Constant { logw: w.ln() } })
    }

    pub fn generated(domain: Domain, window: Window, source: Arc<dyn LogProducts<F>>) -> Result<Self> {
        Self::check_window(domain, window)?;
        Ok(Self { domain, window, repr: Repr::Generated(source) })
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.repr, Repr::Dense { .. })
    }

    fn potential_unchecked(&self, n: i64) -> F {
        match &self.repr {
            Repr::Dense { potential, .. } => potential[(n - self.window.lo) as usize],
            Repr::Constant { logw } => *logw * F::of_i64(n),
            Repr::Generated(src) => src.potential(n),
        }
    }

    /// `Φ(n)`.
    pub fn potential(&self, n: i64) -> Result<F> {
        self.window.check(n)?;
        Ok(self.potential_unchecked(n))
    }

    /// `ln(w_{a+1}⋯w_b)` for `a ≤ b` (negative of the reverse product if `a > b`).
    pub fn log_product(&self, a: i64, b: i64) -> Result<F> {
        Ok(self.potential(b)? - self.potential(a)?)
    }

    /// `ln w_n` for `n ∈ [lo+1, hi]`, read from the stored per-step values.
    pub fn log_weight(&self, n: i64) -> Result<F> {
        if n <= self.window.lo || n > self.window.hi {
            return Err(Error::WindowBounds { index: n, lo: self.window.lo + 1, hi: self.window.hi });
        }
        Ok(match &self.repr {
            Repr::Dense { logw, .. } => logw[(n - self.window.lo - 1) as usize],
            Repr::Constant { logw } => *logw,
            Repr::Generated(src) => src.log_weight(n),
        })
    }

    pub fn weight(&self, n: i64) -> Result<F> {
        Ok(self.log_weight(n)?.exp())
    }

    /// Lower bound on `Φ(x + t)` for `x ∈ block`, `t ∈ [t_lo, t_hi]`, without
    /// enumeration; `None` if the representation has no closed form.
    pub fn floor_on(&self, block: &ApBlock, t_lo: i64, t_hi: i64) -> Option<F> {
        if !self.window.contains(block.first + t_lo) || !self.window.contains(block.last + t_hi) {
            return None;
        }
        match &self.repr {
            Repr::Dense { .. } => None,
            Repr::Constant { logw } => {
                let lo = F::of_i64(block.first + t_lo);
                let hi = F::of_i64(block.last + t_hi);
                Some((*logw * lo).min(*logw * hi))
            }
            Repr::Generated(src) => src.floor_on(block, t_lo, t_hi),
        }
    }

    /// `(inf ln w, sup ln w)` over the window.
    pub fn log_bounds(&self) -> Result<(F, F)> {
        match &self.repr {
            Repr::Dense { logw, .. } => Ok(min_max(logw.iter().copied())),
            Repr::Constant { logw } => Ok((*logw, *logw)),
            Repr::Generated(src) => {
                if let Some(b) = src.log_weight_bounds() {
                    return Ok(b);
                }
                if self.window.len() > MAX_SCAN {
                    return Err(Error::Resource {
                        depth_reached: 0,
                        reason: format!("weight bounds need a scan of {} indices", self.window.len()),
                    });
                }
                Ok(min_max((self.window.lo + 1..=self.window.hi).map(|n| src.log_weight(n))))
            }
        }
    }

    /// `inf w > 0` on the window (always true for finite windows; the flag
    /// reports whether a closed-form bound confirms it uniformly).
    pub fn bounded_below(&self) -> bool {
        self.log_bounds().map(|(lo, _)| lo.is_finite()).unwrap_or(false)
    }

    pub fn partial_products(&self) -> Result<PartialProducts<F>> {
        if self.window.len() > MAX_SCAN {
            return Err(Error::Resource {
                depth_reached: 0,
                reason: format!("partial-product table over {} indices", self.window.len()),
            });
        }
        let pos = (0..=self.window.hi).map(|n| self.potential_unchecked(n)).collect();
        let neg = (1..=-self.window.lo).map(|k| -self.potential_unchecked(-k)).collect();
        Ok(PartialProducts { pos, neg })
    }

    /// JSON description (`{"domain","window","logw"}` or a generator
    /// reference).
    pub fn to_json(&self) -> serde_json::Value {
        let base = serde_json::json!({"domain": self.domain, "window": self.window});
        let mut obj = base.as_object().unwrap().clone();
        match &self.repr {
            Repr::Dense { logw, .. } => {
                obj.insert("logw".into(), logw.iter().map(|v| v.as_f64()).collect::<Vec<f64>>().into());
            }
            Repr::Constant { logw } => {
                obj.insert("generator".into(), format!("constant:{}", logw.as_f64().exp()).into());
            }
            Repr::Generated(src) => {
                if let serde_json::Value::Object(m) = src.generator() {
                    obj.extend(m);
                }
            }
        }
        serde_json::Value::Object(obj)
    }
}

fn min_max<F: Scalar>(it: impl Iterator<Item = F>) -> (F, F) {
    it.fold((F::infinity(), F::neg_infinity()), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Tabulated one-sided cumulative log sums.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialProducts<F> {
    /// `pos[n] = ln(w₁⋯w_n)`, `n = 0, …, hi`.
    pub pos: Vec<F>,
    /// `neg[k−1] = ln(w_{−k+1}⋯w₀)`, `k = 1, …, −lo`.
    pub neg: Vec<F>,
}

impl<F: Scalar> PartialProducts<F> {
    /// `ln(w₁⋯w_n)`, `n ≥ 0`.
    pub fn log_w_pos(&self, n: i64) -> Option<F> {
        self.pos.get(usize::try_from(n).ok()?).copied()
    }

    /// `ln(w_{n+1}⋯w₀)`, `n < 0`.
    pub fn log_w_neg(&self, n: i64) -> Option<F> {
        if n >= 0 {
            return None;
        }
        self.neg.get((-n - 1) as usize).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_two_products() {
        let w = WeightSeq::<f64>::constant(Domain::Unilateral, Window::unilateral(50), 2.0).unwrap();
        let pp = w.partial_products().unwrap();
        for n in 0..=50 {
            assert!((pp.log_w_pos(n).unwrap() - n as f64 * std::f64::consts::LN_2).abs() < 1e-12);
        }
        assert!(pp.neg.is_empty());
        let ones = WeightSeq::<f64>::constant(Domain::Bilateral, Window::bilateral(20), 1.0).unwrap();
        let pp = ones.partial_products().unwrap();
        assert!(pp.pos.iter().chain(&pp.neg).all(|&v| v == 0.0));
    }

    #[test]
    fn dense_telescopes() {
        let win = Window::new(-4, 5).unwrap();
        let w: Vec<f64> = (0..9).map(|i| 0.5 + 0.25 * i as f64).collect();
        let seq = WeightSeq::from_weights(Domain::Bilateral, win, &w).unwrap();
        let pp = seq.partial_products().unwrap();
        // w_{-3} … w_5 = w[0] … w[8]
        let wt = |n: i64| w[(n + 3) as usize];
        assert!((pp.log_w_pos(3).unwrap() - (wt(1) * wt(2) * wt(3)).ln()).abs() < 1e-12);
        assert!((pp.log_w_neg(-2).unwrap() - (wt(-1) * wt(0)).ln()).abs() < 1e-12);
        assert!((pp.log_w_neg(-4).unwrap() - (wt(-3) * wt(-2) * wt(-1) * wt(0)).ln()).abs() < 1e-12);
        for n in win.lo + 1..=win.hi {
            let d = seq.potential(n).unwrap() - seq.potential(n - 1).unwrap();
            assert!((d - seq.log_weight(n).unwrap()).abs() < 1e-12);
        }
        assert_eq!(seq.potential(0).unwrap(), 0.0);
        assert!(seq.log_weight(win.lo).is_err());
    }

    #[test]
    fn rejects_bad_weights() {
        let win = Window::unilateral(3);
        assert!(WeightSeq::<f64>::from_weights(Domain::Unilateral, win, &[1.0, 0.0, 2.0]).is_err());
        assert!(WeightSeq::<f64>::from_weights(Domain::Unilateral, win, &[1.0, 2.0]).is_err());
        assert!(WeightSeq::<f64>::constant(Domain::Unilateral, Window::new(-1, 3).unwrap(), 2.0).is_err());
        assert!(WeightSeq::<f64>::constant(Domain::Bilateral, win, -2.0).is_err());
    }

    #[test]
    fn constant_floor_and_json() {
        let w = WeightSeq::<f64>::constant(Domain::Unilateral, Window::unilateral(100), 2.0).unwrap();
        let f = w.floor_on(&ApBlock::new(10, 50, 10).unwrap(), 0, 3).unwrap();
        assert!((f - 10.0 * std::f64::consts::LN_2).abs() < 1e-12);
        assert_eq!(w.to_json()["generator"], "constant:2");
        let (lo, hi) = w.log_bounds().unwrap();
        assert_eq!(lo, hi);
    }
}
