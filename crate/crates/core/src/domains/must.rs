//! Age-based LRU must analysis.
//!
//! Tracks, per block, an upper bound on its LRU age (number of distinct
//! blocks since its last access, inclusive) that holds on *every* incoming
//! path; blocks absent from the map may already be evicted.  As a
//! persistence analysis this is the degenerate baseline: at a block's first
//! access location it can never be in the must cache, so on its own the
//! domain only proves never-accessed blocks.  Its value is supplying
//! guaranteed ages to the product domain's refined conflict counting.

use std::collections::BTreeMap;

use crate::cfg::{AccessLabel, BlockId};
use crate::domain::Domain;

/// `Unreachable` is the strict bottom: no execution reaches this point.
/// `Ages` maps each guaranteed-cached block to an age bound in `1..=k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MustState {
    Unreachable,
    Ages(BTreeMap<BlockId, u32>),
}

pub struct Must {
    k: u32,
}

impl Must {
    pub fn new(k: u32) -> Self {
        Must { k }
    }

    fn update_single(&self, m: &BTreeMap<BlockId, u32>, b: BlockId) -> BTreeMap<BlockId, u32> {
        let old = m.get(&b).copied();
        let mut out = BTreeMap::new();
        for (&c, &age) in m {
            if c == b {
                continue;
            }
            // Blocks younger than b slide down one position when b moves to
            // the front; older blocks keep their position.  If b was not
            // guaranteed cached, everything may slide.
            let bumped = match old {
                Some(o) if age >= o => age,
                _ => age + 1,
            };
            if bumped <= self.k {
                out.insert(c, bumped);
            }
        }
        out.insert(b, 1);
        out
    }
}

impl Domain for Must {
    type State = MustState;

    fn name(&self) -> &'static str {
        "must"
    }

    fn bottom(&mut self) -> MustState {
        MustState::Unreachable
    }

    fn init_entry(&mut self) -> MustState {
        MustState::Ages(BTreeMap::new())
    }

    fn update(&mut self, s: &MustState, label: &AccessLabel) -> MustState {
        let m = match s {
            MustState::Unreachable => return MustState::Unreachable,
            MustState::Ages(m) => m,
        };
        match label {
            AccessLabel::Empty => s.clone(),
            AccessLabel::Single(b) => MustState::Ages(self.update_single(m, *b)),
            AccessLabel::Many(bs) => {
                let mut acc = MustState::Unreachable;
                for &b in bs {
                    let branch = MustState::Ages(self.update_single(m, b));
                    acc = self.join(&acc, &branch);
                }
                acc
            }
            AccessLabel::Unknown => {
                // The accessed block is unknown, so no block is guaranteed
                // refreshed and every bound grows by one.
                let mut out = BTreeMap::new();
                for (&c, &age) in m {
                    if age < self.k {
                        out.insert(c, age + 1);
                    }
                }
                MustState::Ages(out)
            }
        }
    }

    fn join(&mut self, a: &MustState, b: &MustState) -> MustState {
        match (a, b) {
            (MustState::Unreachable, s) | (s, MustState::Unreachable) => s.clone(),
            (MustState::Ages(ma), MustState::Ages(mb)) => {
                // Guaranteed on both paths, with the weaker bound.
                let merged = ma
                    .iter()
                    .filter_map(|(c, &age_a)| mb.get(c).map(|&age_b| (*c, age_a.max(age_b))))
                    .collect();
                MustState::Ages(merged)
            }
        }
    }

    fn classify(&mut self, s: &MustState, b: BlockId) -> bool {
        match s {
            MustState::Unreachable => true,
            MustState::Ages(m) => m.contains_key(&b),
        }
    }
}

impl MustState {
    /// The guaranteed age bound of `b`, if it is guaranteed cached.
    pub fn age(&self, b: BlockId) -> Option<u32> {
        match self {
            MustState::Unreachable => None,
            MustState::Ages(m) => m.get(&b).copied(),
        }
    }
}
