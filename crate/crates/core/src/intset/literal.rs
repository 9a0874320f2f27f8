use serde::{Deserialize, Serialize};

use super::{make_ap, make_interval_union, ApBlock, BlockSet, CountingSet, IntSet, Window};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApSpec {
    pub b: i64,
    #[serde(default)]
    pub offset: i64,
}

/// JSON form of a set. Exactly one body field is present:
///
/// ```json
/// {"window": [-100, 100], "members": [0, 3, 6]}
/// {"window": [-100, 100], "ap": {"b": 3, "offset": 0}}
/// {"window": [0, 100], "intervals": [[2, 4], [7, 7]]}
/// {"window": [0, 100000], "blocks": [[8, 8, 1], [40, 96, 4]]}
/// ```
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetLiteral {
    pub window: Window,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub members: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ap: Option<ApSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intervals: Option<Vec<(i64, i64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<ApBlock>>,
}

impl SetLiteral {
    pub fn members(window: Window, members: Vec<i64>) -> Self {
        Self { window, members: Some(members), ap: None, intervals: None, blocks: None }
    }

    pub fn ap(window: Window, b: i64, offset: i64) -> Self {
        Self { window, members: None, ap: Some(ApSpec { b, offset }), intervals: None, blocks: None }
    }

    pub fn intervals(window: Window, intervals: Vec<(i64, i64)>) -> Self {
        Self { window, members: None, ap: None, intervals: Some(intervals), blocks: None }
    }

    pub fn blocks(window: Window, blocks: Vec<ApBlock>) -> Self {
        Self { window, members: None, ap: None, intervals: None, blocks: Some(blocks) }
    }

    pub fn from_intset(set: &IntSet) -> Self {
        Self::members(set.window(), set.members().collect())
    }

    pub fn from_blockset(set: &BlockSet) -> Self {
        Self::blocks(set.window(), set.blocks().to_vec())
    }

    fn body_count(&self) -> usize {
        self.members.is_some() as usize
            + self.ap.is_some() as usize
            + self.intervals.is_some() as usize
            + self.blocks.is_some() as usize
    }

    fn check_body(&self) -> Result<()> {
        match self.body_count() {
            1 => Ok(()),
            n => Err(Error::Argument(format!(
                "set literal needs exactly one of members/ap/intervals/blocks, found {n}"
            ))),
        }
    }

    pub fn to_intset(&self) -> Result<IntSet> {
        self.check_body()?;
        if let Some(m) = &self.members {
            IntSet::from_members(self.window, m.iter().copied())
        } else if let Some(ap) = &self.ap {
            make_ap(ap.b, ap.offset, self.window)
        } else if let Some(iv) = &self.intervals {
            make_interval_union(iv, self.window)
        } else {
            self.to_blockset()?.to_intset()
        }
    }

    /// Structured form; only `blocks` and `members` avoid touching every
    /// window position.
    pub fn to_blockset(&self) -> Result<BlockSet> {
        self.check_body()?;
        if let Some(b) = &self.blocks {
            return BlockSet::new(self.window, b.clone());
        }
        if let Some(m) = &self.members {
            let mut m = m.clone();
            m.sort_unstable();
            m.dedup();
            for &x in &m {
                self.window.check(x)?;
            }
            return BlockSet::new(self.window, m.into_iter().map(ApBlock::singleton).collect());
        }
        Ok(BlockSet::from_intset(&self.to_intset()?))
    }
}
