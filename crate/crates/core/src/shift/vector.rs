use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Scalar};

/// Norm attached to a vector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    /// `ℓ^p`, `p ≥ 1`.
    Lp(f64),
    /// `c₀` with the sup norm.
    Sup,
}

impl Space {
    pub fn lp(p: f64) -> Result<Self> {
        if p >= 1.0 && p.is_finite() {
            Ok(Space::Lp(p))
        } else {
            Err(Error::Argument(format!("ℓ^p needs p ≥ 1, got {p}")))
        }
    }
}

/// A nonzero coefficient stored as sign and `ln|c|`.
///
/// Coefficients of the hypercyclic vectors built here reach `2^{-10⁵}`, far
/// below the smallest normal `f64`, so values are only exponentiated on
/// demand.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogCoef<F> {
    pub negative: bool,
    pub ln_abs: F,
}

impl<F: Scalar> LogCoef<F> {
    pub fn from_value(v: F) -> Option<Self> {
        (v != F::zero() && v.is_finite()).then(|| Self { negative: v < F::zero(), ln_abs: v.abs().ln() })
    }

    pub fn value(self) -> F {
        let m = self.ln_abs.exp();
        if self.negative {
            -m
        } else {
            m
        }
    }

    pub fn neg(self) -> Self {
        Self { negative: !self.negative, ..self }
    }

    /// Multiplies by `exp(log_factor)`.
    pub fn scale_log(self, log_factor: F) -> Self {
        Self { ln_abs: self.ln_abs + log_factor, ..self }
    }

    /// Signed sum; `None` when the terms cancel exactly.
    pub fn add(self, other: Self) -> Option<Self> {
        let (big, small) = if self.ln_abs >= other.ln_abs { (self, other) } else { (other, self) };
        let d = (small.ln_abs - big.ln_abs).exp();
        if big.negative == small.negative {
            Some(Self { negative: big.negative, ln_abs: big.ln_abs + d.ln_1p() })
        } else if d == F::one() {
            None
        } else {
            Some(Self { negative: big.negative, ln_abs: big.ln_abs + (-d).ln_1p() })
        }
    }
}

/// Finitely supported vector indexed by integers. Zero coefficients are
/// never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseVec<F> {
    entries: BTreeMap<i64, LogCoef<F>>,
    space: Space,
}

impl<F: Scalar> SparseVec<F> {
    pub fn zero(space: Space) -> Self {
        Self { entries: BTreeMap::new(), space }
    }

    /// `e_k`.
    pub fn basis(k: i64, space: Space) -> Self {
        let mut v = Self::zero(space);
        v.entries.insert(k, LogCoef { negative: false, ln_abs: F::zero() });
        v
    }

    /// Repeated indices are summed.
    pub fn from_entries(entries: impl IntoIterator<Item = (i64, F)>, space: Space) -> Self {
        let mut v = Self::zero(space);
        for (k, c) in entries {
            if let Some(c) = LogCoef::from_value(c) {
                v.add_coef(k, c);
            }
        }
        v
    }

    pub fn from_log_entries(entries: impl IntoIterator<Item = (i64, LogCoef<F>)>, space: Space) -> Self {
        let mut v = Self::zero(space);
        for (k, c) in entries {
            if c.ln_abs.is_finite() {
                v.add_coef(k, c);
            }
        }
        v
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn with_space(mut self, space: Space) -> Self {
        self.space = space;
        self
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = i64> + '_ {
        self.entries.keys().copied()
    }

    pub fn min_index(&self) -> Option<i64> {
        self.entries.keys().next().copied()
    }

    pub fn max_index(&self) -> Option<i64> {
        self.entries.keys().next_back().copied()
    }

    pub fn log_entries(&self) -> impl DoubleEndedIterator<Item = (i64, LogCoef<F>)> + '_ {
        self.entries.iter().map(|(&k, &c)| (k, c))
    }

    pub fn get_log(&self, k: i64) -> Option<LogCoef<F>> {
        self.entries.get(&k).copied()
    }

    pub fn get(&self, k: i64) -> F {
        self.get_log(k).map_or(F::zero(), LogCoef::value)
    }

    /// Adds `c` at index `k`, returning `false` if `k` was already occupied.
    pub fn add_coef(&mut self, k: i64, c: LogCoef<F>) -> bool {
        match self.entries.get(&k).copied() {
            None => {
                self.entries.insert(k, c);
                true
            }
            Some(old) => {
                match old.add(c) {
                    Some(s) => self.entries.insert(k, s),
                    None => self.entries.remove(&k),
                };
                false
            }
        }
    }

    pub fn scale(&self, a: F) -> Self {
        match LogCoef::from_value(a) {
            None => Self::zero(self.space),
            Some(s) => Self {
                entries: self
                    .entries
                    .iter()
                    .map(|(&k, &c)| (k, LogCoef { negative: c.negative != s.negative, ln_abs: c.ln_abs + s.ln_abs }))
                    .collect(),
                space: self.space,
            },
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&k, &c) in &other.entries {
            out.add_coef(k, c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&k, &c) in &other.entries {
            out.add_coef(k, c.neg());
        }
        out
    }

    /// `ln ‖x‖` (`−∞` for the zero vector).
    pub fn log_norm(&self) -> F {
        log_norm_of(self.space, self.entries.values().map(|c| c.ln_abs))
    }

    pub fn norm(&self) -> F {
        self.log_norm().exp()
    }

    /// `ln ‖x − y‖` in `x`'s space.
    pub fn log_distance(&self, other: &Self) -> F {
        self.sub(other).log_norm()
    }

    pub fn to_literal(&self) -> VectorLiteral {
        VectorLiteral {
            space: self.space,
            entries: None,
            log_entries: Some(
                self.entries
                    .iter()
                    .map(|(&k, c)| (k, if c.negative { -1 } else { 1 }, c.ln_abs.as_f64()))
                    .collect(),
            ),
        }
    }
}

/// `ln` of the norm of a vector whose coefficient magnitudes are
/// `exp(ln_abs)`.
pub fn log_norm_of<F: Scalar>(space: Space, ln_abs: impl Iterator<Item = F>) -> F {
    match space {
        Space::Sup => ln_abs.fold(F::neg_infinity(), F::max),
        Space::Lp(p) => {
            let p = F::of(p);
            let terms: Vec<F> = ln_abs.map(|l| l * p).collect();
            let m = terms.iter().copied().fold(F::neg_infinity(), F::max);
            if m == F::neg_infinity() {
                return m;
            }
            let s: F = terms.iter().map(|&t| (t - m).exp()).sum();
            (m + s.ln()) / p
        }
    }
}

/// JSON form: `{"space": "sup" | {"lp": p}, "entries": [[k, value], …]}`,
/// or `"log_entries": [[k, sign, ln|value|], …]` for coefficients below the
/// floating-point range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorLiteral {
    pub space: Space,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entries: Option<Vec<(i64, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_entries: Option<Vec<(i64, i8, f64)>>,
}

impl VectorLiteral {
    pub fn to_vec<F: Scalar>(&self) -> Result<SparseVec<F>> {
        if let Space::Lp(p) = self.space {
            Space::lp(p)?;
        }
        let mut v = SparseVec::from_entries(
            self.entries.iter().flatten().map(|&(k, c)| (k, F::of(c))),
            self.space,
        );
        for &(k, s, l) in self.log_entries.iter().flatten() {
            if s != 1 && s != -1 {
                return Err(Error::Argument(format!("log entry sign must be ±1, got {s}")));
            }
            if l.is_finite() {
                v.add_coef(k, LogCoef { negative: s < 0, ln_abs: F::of(l) });
            }
        }
        Ok(v)
    }
}
