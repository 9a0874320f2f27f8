use super::{CountingSet, Gap, Window};
use crate::{Error, Result};

/// Dense windowed set: one bit per window position plus a per-word rank
/// directory, so range counts are O(1).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntSet {
    window: Window,
    words: Vec<u64>,
    rank: Vec<u64>,
    truncated: u64,
}

/// Refuse dense windows beyond 2³⁴ bits (2 GiB); callers should use a
/// `BlockSet` there.
const MAX_DENSE_BITS: u64 = 1 << 34;

impl IntSet {
    pub fn empty(window: Window) -> Result<Self> {
        if window.len() > MAX_DENSE_BITS {
            return Err(Error::Resource {
                depth_reached: 0,
                reason: format!("dense set over {window} exceeds {MAX_DENSE_BITS} bits"),
            });
        }
        let nwords = window.len().div_ceil(64) as usize;
        Ok(Self::from_words(window, vec![0; nwords], 0))
    }

    pub fn full(window: Window) -> Result<Self> {
        Self::from_fn(window, |_| true)
    }

    pub fn from_fn(window: Window, mut f: impl FnMut(i64) -> bool) -> Result<Self> {
        let mut words = Self::empty(window)?.words;
        for (i, x) in (window.lo..=window.hi).enumerate() {
            if f(x) {
                words[i >> 6] |= 1 << (i & 63);
            }
        }
        Ok(Self::from_words(window, words, 0))
    }

    /// Members must lie in the window.
    pub fn from_members(window: Window, members: impl IntoIterator<Item = i64>) -> Result<Self> {
        let mut words = Self::empty(window)?.words;
        for x in members {
            window.check(x)?;
            let i = (x - window.lo) as usize;
            words[i >> 6] |= 1 << (i & 63);
        }
        Ok(Self::from_words(window, words, 0))
    }

    fn from_words(window: Window, mut words: Vec<u64>, truncated: u64) -> Self {
        let tail = (window.len() % 64) as u32;
        if tail != 0 {
            if let Some(last) = words.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
        let mut rank = Vec::with_capacity(words.len() + 1);
        let mut acc = 0u64;
        rank.push(0);
        for w in &words {
            acc += w.count_ones() as u64;
            rank.push(acc);
        }
        Self { window, words, rank, truncated }
    }

    /// Members dropped at the window boundary by the operation that produced
    /// this set (see [`shift_set`]).
    pub fn truncated(&self) -> u64 {
        self.truncated
    }

    pub fn len(&self) -> u64 {
        *self.rank.last().unwrap()
    }

    pub fn members(&self) -> impl Iterator<Item = i64> + '_ {
        let lo = self.window.lo;
        self.words.iter().enumerate().flat_map(move |(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let t = bits.trailing_zeros() as i64;
                bits &= bits - 1;
                Some(lo + ((wi as i64) << 6) + t)
            })
        })
    }

    fn bit(&self, i: i64) -> bool {
        i >= 0 && (i as u64) < self.window.len() && (self.words[(i >> 6) as usize] >> (i & 63)) & 1 == 1
    }

    /// Number of set bits at positions `< i`, for `0 ≤ i ≤ len`.
    fn rank_upto(&self, i: u64) -> u64 {
        let (w, b) = ((i >> 6) as usize, i & 63);
        if b == 0 {
            self.rank[w]
        } else {
            self.rank[w] + (self.words[w] & ((1u64 << b) - 1)).count_ones() as u64
        }
    }

    fn word_or_zero(&self, w: i64) -> u64 {
        if w < 0 || w as usize >= self.words.len() {
            0
        } else {
            self.words[w as usize]
        }
    }

    /// The 64 bits starting at bit position `start` (may lie outside).
    fn bits_from(&self, start: i64) -> u64 {
        let w = start.div_euclid(64);
        let off = start.rem_euclid(64) as u32;
        let lo = self.word_or_zero(w) >> off;
        let hi = if off == 0 { 0 } else { self.word_or_zero(w + 1) << (64 - off) };
        lo | hi
    }

    fn zip_with(&self, other: &IntSet, f: impl Fn(u64, u64) -> u64) -> Result<IntSet> {
        if self.window != other.window {
            return Err(Error::Argument(format!(
                "set windows differ: {} vs {}",
                self.window, other.window
            )));
        }
        let words = self.words.iter().zip(&other.words).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self::from_words(self.window, words, 0))
    }

    pub fn intersection(&self, other: &IntSet) -> Result<IntSet> {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn union(&self, other: &IntSet) -> Result<IntSet> {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn difference(&self, other: &IntSet) -> Result<IntSet> {
        self.zip_with(other, |a, b| a & !b)
    }

    /// `#(A ∩ (A − k) ∩ [lo, hi])` without materialising the intersection.
    pub fn correlation_count(&self, k: i64, lo: i64, hi: i64) -> u64 {
        let lo = lo.max(self.window.lo);
        let hi = hi.min(self.window.hi);
        if lo > hi {
            return 0;
        }
        let (a, b) = (lo - self.window.lo, hi - self.window.lo);
        let mut total = 0u64;
        let mut pos = a - a.rem_euclid(64);
        while pos <= b {
            let mut word = self.bits_from(pos) & self.bits_from(pos + k);
            if pos < a {
                word &= !0u64 << (a - pos);
            }
            if b - pos < 63 {
                word &= (1u64 << (b - pos + 1)) - 1;
            }
            total += word.count_ones() as u64;
            pos += 64;
        }
        total
    }

    /// Same membership re-expressed on another window (members outside are
    /// dropped and counted as truncated).
    pub fn restrict(&self, window: Window) -> Result<IntSet> {
        let mut words = Self::empty(window)?.words;
        let delta = window.lo - self.window.lo;
        for (i, w) in words.iter_mut().enumerate() {
            *w = self.bits_from(delta + ((i as i64) << 6));
        }
        let kept = Self::from_words(window, words, 0);
        let truncated = self.len() - kept.len();
        Ok(Self { truncated, ..kept })
    }
}

impl CountingSet for IntSet {
    fn window(&self) -> Window {
        self.window
    }

    fn contains(&self, x: i64) -> bool {
        self.window.contains(x) && self.bit(x - self.window.lo)
    }

    fn count_in(&self, lo: i64, hi: i64) -> u64 {
        let lo = lo.max(self.window.lo);
        let hi = hi.min(self.window.hi);
        if lo > hi {
            return 0;
        }
        let a = (lo - self.window.lo) as u64;
        let b = (hi - self.window.lo) as u64 + 1;
        self.rank_upto(b) - self.rank_upto(a)
    }

    fn next_member(&self, x: i64) -> Option<i64> {
        let start = x.max(self.window.lo);
        if start > self.window.hi {
            return None;
        }
        let i = (start - self.window.lo) as usize;
        let (mut w, b) = (i >> 6, i & 63);
        let mut word = self.words[w] & (!0u64 << b);
        loop {
            if word != 0 {
                return Some(self.window.lo + ((w as i64) << 6) + word.trailing_zeros() as i64);
            }
            w += 1;
            if w >= self.words.len() {
                return None;
            }
            word = self.words[w];
        }
    }

    fn cardinality(&self) -> u64 {
        self.len()
    }

    fn max_gap(&self, sub: Window) -> Gap {
        // Word-level scan; the default member-by-member walk is too slow for
        // the 2·10⁶-wide difference-set windows.
        let lo = sub.lo.max(self.window.lo);
        let hi = sub.hi.min(self.window.hi);
        if lo > hi || self.count_in(lo, hi) == 0 {
            return Gap::Infinite;
        }
        let mut best = 0u64;
        let mut prev = sub.lo - 1;
        let mut x = lo;
        while x <= hi {
            match self.next_member(x) {
                Some(m) if m <= hi => {
                    best = best.max((m - prev) as u64);
                    prev = m;
                    x = m + 1;
                }
                _ => break,
            }
        }
        Gap::Finite(best.max((sub.hi + 1 - prev) as u64))
    }
}

/// `{x ∈ window : x + k ∈ A}`. Members whose image leaves the window are
/// dropped, never wrapped, and recorded in [`IntSet::truncated`].
pub fn shift_set(a: &IntSet, k: i64) -> IntSet {
    let words = (0..a.words.len()).map(|i| a.bits_from(((i as i64) << 6) + k)).collect();
    let out = IntSet::from_words(a.window, words, 0);
    let truncated = a.len() - out.len();
    IntSet { truncated, ..out }
}

/// `{x ∈ window : x ≡ offset (mod b)}`.
pub fn make_ap(b: i64, offset: i64, window: Window) -> Result<IntSet> {
    if b <= 0 {
        return Err(Error::Argument(format!("progression step must be positive, got {b}")));
    }
    let r = offset.rem_euclid(b);
    IntSet::from_fn(window, |x| x.rem_euclid(b) == r)
}

/// Union of inclusive integer intervals, clipped to the window.
pub fn make_interval_union(intervals: &[(i64, i64)], window: Window) -> Result<IntSet> {
    let mut words = IntSet::empty(window)?.words;
    for &(lo, hi) in intervals {
        let (lo, hi) = (lo.max(window.lo), hi.min(window.hi));
        for x in lo..=hi {
            let i = (x - window.lo) as usize;
            words[i >> 6] |= 1 << (i & 63);
        }
    }
    Ok(IntSet::from_words(window, words, 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn members(s: &IntSet) -> Vec<i64> {
        s.members().collect()
    }

    #[test]
    fn count_prefix_examples() {
        let evens = make_ap(2, 0, Window::bilateral(100)).unwrap();
        assert_eq!(evens.count_prefix(10).unwrap(), 11);
        let empty = IntSet::empty(Window::bilateral(100)).unwrap();
        assert_eq!(empty.count_prefix(37).unwrap(), 0);
        let eight = IntSet::from_members(Window::unilateral(100), [8]).unwrap();
        assert_eq!(eight.count_prefix(8).unwrap(), 1);
        assert_eq!(eight.count_prefix(7).unwrap(), 0);
        assert!(eight.count_prefix(101).is_err());
        assert!(evens.count_prefix(-1).is_err());
    }

    #[test]
    fn shift_examples() {
        let w = Window::bilateral(10);
        let a = IntSet::from_members(w, [0, 3, 6]).unwrap();
        assert_eq!(members(&shift_set(&a, 3)), vec![-3, 0, 3]);
        let u = IntSet::from_members(Window::unilateral(10), [0, 3, 6]).unwrap();
        let s = shift_set(&u, 3);
        assert_eq!(members(&s), vec![0, 3]);
        assert_eq!(s.truncated(), 1);
        let eight = IntSet::from_members(Window::unilateral(100), [8]).unwrap();
        assert_eq!(members(&shift_set(&eight, 8)), vec![0]);
        let evens = make_ap(2, 0, Window::bilateral(50)).unwrap();
        let sh = shift_set(&evens, 2);
        assert_eq!(members(&sh), (-50..=48).step_by(2).collect::<Vec<_>>());
        assert_eq!(sh.truncated(), 1);
    }

    #[test]
    fn long_shifts_cross_words() {
        let w = Window::new(-200, 300).unwrap();
        let a = IntSet::from_fn(w, |x| x % 7 == 0 || x % 11 == 3).unwrap();
        for k in [-190, -65, -64, -1, 0, 1, 63, 64, 129, 280] {
            let s = shift_set(&a, k);
            for x in w.lo..=w.hi {
                assert_eq!(s.contains(x), a.contains(x + k), "k={k} x={x}");
            }
            assert_eq!(a.correlation_count(k, -150, 250), (-150..=250).filter(|&x| a.contains(x) && a.contains(x + k)).count() as u64);
        }
    }

    #[test]
    fn ap_and_intervals() {
        let w = Window::unilateral(20);
        assert_eq!(members(&make_ap(4, 0, w).unwrap()), vec![0, 4, 8, 12, 16, 20]);
        assert_eq!(members(&make_ap(1, 0, Window::unilateral(5)).unwrap()), vec![0, 1, 2, 3, 4, 5]);
        assert!(make_ap(0, 0, w).is_err());
        assert_eq!(members(&make_interval_union(&[(2, 4), (7, 7)], w).unwrap()), vec![2, 3, 4, 7]);
        assert_eq!(members(&make_interval_union(&[(-5, 1), (19, 40)], w).unwrap()), vec![0, 1, 19, 20]);
    }

    #[test]
    fn gaps() {
        let w = Window::bilateral(300);
        let a = make_ap(3, 0, w).unwrap();
        assert_eq!(a.max_gap(w), Gap::Finite(3));
        assert_eq!(IntSet::empty(w).unwrap().max_gap(w), Gap::Infinite);
        assert_eq!(IntSet::full(w).unwrap().max_gap(w), Gap::Finite(1));
        let b = IntSet::from_members(w, [0]).unwrap();
        assert_eq!(b.max_gap(Window::new(-5, 5).unwrap()), Gap::Finite(6));
    }

    #[test]
    fn next_member_and_members() {
        let a = IntSet::from_members(Window::new(-70, 200).unwrap(), [-70, -6, 63, 64, 200]).unwrap();
        assert_eq!(members(&a), vec![-70, -6, 63, 64, 200]);
        assert_eq!(a.next_member(-69), Some(-6));
        assert_eq!(a.next_member(65), Some(200));
        assert_eq!(a.next_member(201), None);
    }

    #[test]
    fn set_algebra_and_restrict() {
        let w = Window::bilateral(40);
        let a = make_ap(2, 0, w).unwrap();
        let b = make_ap(3, 0, w).unwrap();
        assert_eq!(a.intersection(&b).unwrap(), make_ap(6, 0, w).unwrap());
        assert_eq!(a.union(&b).unwrap().len(), 41 + 27 - 13);
        assert_eq!(a.difference(&b).unwrap().len(), 41 - 13);
        let r = a.restrict(Window::new(-3, 100).unwrap()).unwrap();
        assert_eq!(r.len(), 22);
        assert_eq!(r.truncated(), 41 - 22);
        assert!(a.intersection(&r).is_err());
    }
}
