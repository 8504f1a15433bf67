//! Per-block conflict-set union.
//!
//! Tracks, per block `b`, one superset of every conflict set `b` can have
//! on any incoming path: the named blocks seen since some access to `b`,
//! plus a count of anonymous blocks from statically unknown accesses.  The
//! union across paths is where precision dies: alternating branches pour
//! their blocks into one set even though no single execution meets them
//! all.  Conversely the set never double-counts a block, which is exactly
//! what the counting domain cannot avoid.
//!
//! A completely unknown access adds one anonymous block to every tracked
//! set and is remembered in the state: afterwards, an untracked block may
//! still have been accessed, so absence no longer yields a vacuous verdict.

use std::collections::{BTreeMap, BTreeSet};

use crate::cfg::{AccessLabel, BlockId};
use crate::domain::Domain;

/// Per tracked block: (named blocks in the superset, including the block
/// itself; number of additional anonymous blocks).  Absent blocks have
/// never been named in an access, which proves they were never accessed at
/// all only while `unknown_seen` is false — a completely unknown access may
/// have been an absent block's first.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BlockCsState {
    pub tracked: BTreeMap<BlockId, (BTreeSet<BlockId>, u32)>,
    pub unknown_seen: bool,
}

pub struct BlockCs {
    k: u32,
}

impl BlockCs {
    pub fn new(k: u32) -> Self {
        BlockCs { k }
    }

    fn update_single(&self, s: &BlockCsState, b: BlockId) -> BlockCsState {
        let mut out = s.clone();
        for (&c, (reals, _)) in out.tracked.iter_mut() {
            if c != b {
                reals.insert(b);
            }
        }
        out.tracked.insert(b, (BTreeSet::from([b]), 0));
        out
    }
}

impl Domain for BlockCs {
    type State = BlockCsState;

    fn name(&self) -> &'static str {
        "blockcs"
    }

    fn bottom(&mut self) -> BlockCsState {
        BlockCsState::default()
    }

    fn init_entry(&mut self) -> BlockCsState {
        BlockCsState::default()
    }

    fn update(&mut self, s: &BlockCsState, label: &AccessLabel) -> BlockCsState {
        match label {
            AccessLabel::Empty => s.clone(),
            AccessLabel::Single(b) => self.update_single(s, *b),
            AccessLabel::Many(bs) => {
                // The join materialises every member through its own
                // branch, so none of them stays vacuously absent.
                let mut acc = self.bottom();
                for &b in bs {
                    let branch = self.update_single(s, b);
                    acc = self.join(&acc, &branch);
                }
                acc
            }
            AccessLabel::Unknown => BlockCsState {
                // One more block, identity unknown; saturate at k (already
                // enough to defeat every classification).  Absent blocks
                // lose their never-accessed guarantee.
                tracked: s
                    .tracked
                    .iter()
                    .map(|(&c, (reals, anons))| (c, (reals.clone(), (anons + 1).min(self.k))))
                    .collect(),
                unknown_seen: true,
            },
        }
    }

    fn join(&mut self, a: &BlockCsState, b: &BlockCsState) -> BlockCsState {
        let mut out = a.clone();
        for (&c, (reals, anons)) in &b.tracked {
            match out.tracked.get_mut(&c) {
                None => {
                    out.tracked.insert(c, (reals.clone(), *anons));
                }
                Some((r, an)) => {
                    r.extend(reals.iter().copied());
                    *an = (*an).max(*anons);
                }
            }
        }
        out.unknown_seen |= b.unknown_seen;
        out
    }

    fn classify(&mut self, s: &BlockCsState, b: BlockId) -> bool {
        match s.tracked.get(&b) {
            None => !s.unknown_seen,
            Some((reals, anons)) => reals.len() as u32 + anons <= self.k,
        }
    }
}
