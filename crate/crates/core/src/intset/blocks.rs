use serde::{Deserialize, Serialize};

use super::{ap_count_in, CountingSet, Gap, IntSet, Window};
use crate::{Error, Result};

/// `{first, first + step, …, last}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[i64; 3]", into = "[i64; 3]")]
pub struct ApBlock {
    pub first: i64,
    pub last: i64,
    pub step: i64,
}

impl ApBlock {
    pub fn new(first: i64, last: i64, step: i64) -> Result<Self> {
        if step < 1 || first > last || (last - first) % step != 0 {
            return Err(Error::Argument(format!(
                "malformed progression block ({first}, {last}, step {step})"
            )));
        }
        Ok(Self { first, last, step })
    }

    pub fn singleton(x: i64) -> Self {
        Self { first: x, last: x, step: 1 }
    }

    pub fn len(&self) -> u64 {
        ((self.last - self.first) / self.step) as u64 + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, x: i64) -> bool {
        self.first <= x && x <= self.last && (x - self.first) % self.step == 0
    }

    pub fn count_in(&self, lo: i64, hi: i64) -> u64 {
        ap_count_in(self.first, self.last, self.step, lo, hi)
    }

    pub fn nth(&self, i: u64) -> i64 {
        self.first + i as i64 * self.step
    }

    /// Smallest element `≥ x`.
    pub fn next_ge(&self, x: i64) -> Option<i64> {
        if x <= self.first {
            return Some(self.first);
        }
        if x > self.last {
            return None;
        }
        let j = (x - self.first + self.step - 1) / self.step;
        let y = self.first + j * self.step;
        (y <= self.last).then_some(y)
    }

    /// The sub-block inside `[lo, hi]`, if any.
    pub fn clip(&self, lo: i64, hi: i64) -> Option<ApBlock> {
        let first = self.next_ge(lo)?;
        if first > hi {
            return None;
        }
        let last = self.first + (hi.min(self.last) - self.first) / self.step * self.step;
        Some(ApBlock { first, last, step: self.step })
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> {
        let s = *self;
        (0..s.len()).map(move |i| s.nth(i))
    }
}

impl TryFrom<[i64; 3]> for ApBlock {
    type Error = Error;
    fn try_from(v: [i64; 3]) -> Result<Self> {
        ApBlock::new(v[0], v[1], v[2])
    }
}

impl From<ApBlock> for [i64; 3] {
    fn from(b: ApBlock) -> Self {
        [b.first, b.last, b.step]
    }
}

/// Sorted union of progression blocks with pairwise disjoint hulls.
///
/// Counting, membership and selection are logarithmic in the number of
/// blocks, independent of the number of members.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockSet {
    window: Window,
    blocks: Vec<ApBlock>,
    prefix: Vec<u64>,
}

impl BlockSet {
    pub fn new(window: Window, blocks: Vec<ApBlock>) -> Result<Self> {
        for pair in blocks.windows(2) {
            if pair[0].last >= pair[1].first {
                return Err(Error::Argument(format!(
                    "blocks must be sorted with disjoint hulls: {:?} then {:?}",
                    pair[0], pair[1]
                )));
            }
        }
        if let (Some(f), Some(l)) = (blocks.first(), blocks.last()) {
            window.check(f.first)?;
            window.check(l.last)?;
        }
        let mut prefix = Vec::with_capacity(blocks.len() + 1);
        let mut acc = 0u64;
        prefix.push(0);
        for b in &blocks {
            acc += b.len();
            prefix.push(acc);
        }
        Ok(Self { window, blocks, prefix })
    }

    pub fn empty(window: Window) -> Self {
        Self { window, blocks: Vec::new(), prefix: vec![0] }
    }

    /// Runs of consecutive members become unit-step blocks.
    pub fn from_intset(set: &IntSet) -> Self {
        let mut blocks: Vec<ApBlock> = Vec::new();
        for x in set.members() {
            match blocks.last_mut() {
                Some(b) if b.last + 1 == x => b.last = x,
                _ => blocks.push(ApBlock::singleton(x)),
            }
        }
        Self::new(set.window(), blocks).expect("runs of a set are sorted and disjoint")
    }

    pub fn blocks(&self) -> &[ApBlock] {
        &self.blocks
    }

    pub fn len(&self) -> u64 {
        *self.prefix.last().unwrap()
    }

    pub fn min(&self) -> Option<i64> {
        self.blocks.first().map(|b| b.first)
    }

    pub fn max(&self) -> Option<i64> {
        self.blocks.last().map(|b| b.last)
    }

    /// The `i`-th smallest member.
    pub fn nth(&self, i: u64) -> Option<i64> {
        if i >= self.len() {
            return None;
        }
        let k = self.prefix.partition_point(|&c| c <= i) - 1;
        Some(self.blocks[k].nth(i - self.prefix[k]))
    }

    pub fn members(&self) -> impl Iterator<Item = i64> + '_ {
        self.blocks.iter().flat_map(|b| b.iter())
    }

    /// Blocks clipped to `[lo, hi]`.
    pub fn blocks_in(&self, lo: i64, hi: i64) -> impl Iterator<Item = ApBlock> + '_ {
        let start = self.blocks.partition_point(|b| b.last < lo);
        self.blocks[start..].iter().take_while(move |b| b.first <= hi).filter_map(move |b| b.clip(lo, hi))
    }

    pub fn with_window(&self, window: Window) -> Result<Self> {
        Self::new(window, self.blocks.clone())
    }

    pub fn to_intset(&self) -> Result<IntSet> {
        IntSet::from_members(self.window, self.members())
    }

    /// Members in `[lo, hi]` as a dense set on that window.
    pub fn to_intset_on(&self, window: Window) -> Result<IntSet> {
        let members: Vec<i64> = self.blocks_in(window.lo, window.hi).flat_map(|b| b.iter()).collect();
        IntSet::from_members(window, members)
    }
}

impl CountingSet for BlockSet {
    fn window(&self) -> Window {
        self.window
    }

    fn contains(&self, x: i64) -> bool {
        let k = self.blocks.partition_point(|b| b.last < x);
        self.blocks.get(k).is_some_and(|b| b.contains(x))
    }

    fn count_in(&self, lo: i64, hi: i64) -> u64 {
        if lo > hi {
            return 0;
        }
        let i = self.blocks.partition_point(|b| b.last < lo);
        let j = self.blocks.partition_point(|b| b.first <= hi);
        if i >= j {
            return 0;
        }
        if j - i == 1 {
            return self.blocks[i].count_in(lo, hi);
        }
        self.blocks[i].count_in(lo, hi)
            + (self.prefix[j - 1] - self.prefix[i + 1])
            + self.blocks[j - 1].count_in(lo, hi)
    }

    fn next_member(&self, x: i64) -> Option<i64> {
        let k = self.blocks.partition_point(|b| b.last < x);
        self.blocks.get(k).and_then(|b| b.next_ge(x))
    }

    fn cardinality(&self) -> u64 {
        self.len()
    }

    fn max_gap(&self, sub: Window) -> Gap {
        let mut prev = sub.lo - 1;
        let mut best = 0u64;
        let mut any = false;
        for b in self.blocks_in(sub.lo, sub.hi) {
            any = true;
            best = best.max((b.first - prev) as u64);
            if b.len() > 1 {
                best = best.max(b.step as u64);
            }
            prev = b.last;
        }
        if !any {
            return Gap::Infinite;
        }
        Gap::Finite(best.max((sub.hi + 1 - prev) as u64))
    }
}
