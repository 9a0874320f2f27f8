//! Windowed integer sets.
//!
//! Two representations share the [`CountingSet`] interface: [`IntSet`], a
//! dense bitset with a rank directory, and [`BlockSet`], a sorted union of
//! arithmetic-progression blocks for sets whose windows are far too large to
//! materialise (the deep block construction reaches indices near `3·10¹¹`).

mod bitset;
mod blocks;
mod density;
mod literal;
mod random;

pub use bitset::{make_ap, make_interval_union, shift_set, IntSet};
pub use blocks::{ApBlock, BlockSet};
pub use density::{density_profile, linear_checkpoints, Checkpoint, DensityEstimate};
pub use literal::SetLiteral;
pub use random::planted_period_set;

use std::fmt;

use serde::{Deserialize, Serialize, Serializer};

use crate::{Error, Result};

/// Inclusive integer window `[lo, hi]`.
///
/// A window with `lo < 0` is *bilateral* (a truncation of `Z`, and must contain
/// 0); otherwise it is *unilateral* (a truncation of `Z₊`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[i64; 2]", into = "[i64; 2]")]
pub struct Window {
    pub lo: i64,
    pub hi: i64,
}

impl Window {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::Argument(format!("empty window [{lo}, {hi}]")));
        }
        if lo < 0 && hi < 0 {
            return Err(Error::Argument(format!("bilateral window [{lo}, {hi}] must contain 0")));
        }
        Ok(Self { lo, hi })
    }

    /// `[-n, n]`.
    pub fn bilateral(n: i64) -> Self {
        Self { lo: -n.abs(), hi: n.abs() }
    }

    /// `[0, n]`.
    pub fn unilateral(n: i64) -> Self {
        Self { lo: 0, hi: n.max(0) }
    }

    pub fn is_bilateral(&self) -> bool {
        self.lo < 0
    }

    pub fn len(&self) -> u64 {
        (self.hi as i128 - self.lo as i128 + 1) as u64
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, x: i64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_window(&self, other: &Window) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Largest checkpoint `n` for prefix counts: `min(|lo|, hi)` bilaterally,
    /// `hi` otherwise.
    pub fn radius(&self) -> i64 {
        if self.is_bilateral() {
            (-self.lo).min(self.hi)
        } else {
            self.hi
        }
    }

    /// The window with `margin` removed from both ends, if anything is left.
    pub fn shrink(&self, margin: i64) -> Option<Window> {
        let (lo, hi) = (self.lo + margin, self.hi - margin);
        (lo <= hi).then_some(Window { lo, hi })
    }

    pub(crate) fn check(&self, index: i64) -> Result<()> {
        if self.contains(index) {
            Ok(())
        } else {
            Err(Error::WindowBounds { index, lo: self.lo, hi: self.hi })
        }
    }
}

impl TryFrom<[i64; 2]> for Window {
    type Error = Error;
    fn try_from(v: [i64; 2]) -> Result<Self> {
        Window::new(v[0], v[1])
    }
}

impl From<Window> for [i64; 2] {
    fn from(w: Window) -> Self {
        [w.lo, w.hi]
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Largest gap of a set inside a subwindow; `Infinite` when the set misses it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Gap {
    Finite(u64),
    Infinite,
}

impl Gap {
    pub fn finite(self) -> Option<u64> {
        match self {
            Gap::Finite(g) => Some(g),
            Gap::Infinite => None,
        }
    }
}

impl Serialize for Gap {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Gap::Finite(g) => s.serialize_u64(*g),
            Gap::Infinite => s.serialize_str("infinite"),
        }
    }
}

impl fmt::Display for Gap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gap::Finite(g) => write!(f, "{g}"),
            Gap::Infinite => f.write_str("infinite"),
        }
    }
}

/// Counting interface shared by the dense and block representations.
pub trait CountingSet {
    fn window(&self) -> Window;

    fn contains(&self, x: i64) -> bool;

    /// Number of members in `[lo, hi]` (clipped to the window).
    fn count_in(&self, lo: i64, hi: i64) -> u64;

    /// Smallest member `≥ x`.
    fn next_member(&self, x: i64) -> Option<i64>;

    fn cardinality(&self) -> u64 {
        let w = self.window();
        self.count_in(w.lo, w.hi)
    }

    fn is_empty(&self) -> bool {
        self.cardinality() == 0
    }

    /// `#A(n)`: members with `|a| ≤ n` on a bilateral window, `a ≤ n` otherwise.
    fn count_prefix(&self, n: i64) -> Result<u64> {
        let w = self.window();
        if n < 0 || n > w.radius() {
            return Err(Error::WindowBounds { index: n, lo: 0, hi: w.radius() });
        }
        Ok(if w.is_bilateral() { self.count_in(-n, n) } else { self.count_in(w.lo, n) })
    }

    /// Longest run of non-members in `sub`, plus one; the points just outside
    /// `sub` count as members, so boundary gaps are included.
    fn max_gap(&self, sub: Window) -> Gap {
        let mut prev = sub.lo - 1;
        let mut best = 0u64;
        let mut cur = self.next_member(sub.lo);
        let mut any = false;
        while let Some(x) = cur {
            if x > sub.hi {
                break;
            }
            any = true;
            best = best.max((x - prev) as u64);
            prev = x;
            cur = if x == i64::MAX { None } else { self.next_member(x + 1) };
        }
        if !any {
            return Gap::Infinite;
        }
        Gap::Finite(best.max((sub.hi + 1 - prev) as u64))
    }
}

/// Exact count of `{first + j·step} ∩ [lo, hi]` for `first ≤ last`.
pub(crate) fn ap_count_in(first: i64, last: i64, step: i64, lo: i64, hi: i64) -> u64 {
    let lo = lo.max(first);
    let hi = hi.min(last);
    if lo > hi {
        return 0;
    }
    // first index j with first + j·step ≥ lo, last index with ≤ hi
    let j0 = (lo - first + step - 1).div_euclid(step);
    let j1 = (hi - first).div_euclid(step);
    if j1 < j0 {
        0
    } else {
        (j1 - j0 + 1) as u64
    }
}
