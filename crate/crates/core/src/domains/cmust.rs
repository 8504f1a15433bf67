//! Conflict-counting must analysis.
//!
//! Tracks, per block `b`, an upper bound on the size of `b`'s conflict set
//! (the distinct blocks accessed since `b`'s last access, `b` included)
//! over all incoming paths.  Every access to a different block bumps the
//! bound — the domain cannot tell whether that block was already counted,
//! which is exactly its blind spot on alternating accesses (`x` and `y` in
//! a two-branch loop age each other forever).  Bounds saturate at `k + 1`,
//! pretty-printed as unbounded.
//!
//! A completely unknown access bumps every tracked bound and is remembered
//! in the state: afterwards, a block absent from the map may still have
//! been accessed, so absence no longer proves an empty conflict set.

use std::collections::BTreeMap;

use crate::cfg::{AccessLabel, BlockId};
use crate::domain::Domain;

/// Bounds map blocks to conflict-set sizes in `1..=k+1`; `k+1` means "no
/// bound".  Absent blocks have never been *named* in an access; with
/// `unknown_seen` false that proves they were never accessed at all (the
/// state at a scope entry — the lattice bottom).  Once some path performed
/// a completely unknown access, absence proves nothing: that access may
/// have been the block's first.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CMustState {
    pub bounds: BTreeMap<BlockId, u32>,
    pub unknown_seen: bool,
}

pub struct CMust {
    k: u32,
    /// Deliberate defect switch for the differential self-test: when set,
    /// blocks sitting at bound 1 are not aged by other accesses, which is
    /// unsound (a second distinct block must raise the bound to 2).
    skip_aging_at_one: bool,
}

impl CMust {
    pub fn new(k: u32) -> Self {
        CMust { k, skip_aging_at_one: false }
    }

    /// The intentionally broken variant (registry name `cmust-off-by-one`).
    pub fn off_by_one(k: u32) -> Self {
        CMust { k, skip_aging_at_one: true }
    }

    fn infinity(&self) -> u32 {
        self.k + 1
    }

    fn update_single(&self, s: &CMustState, b: BlockId) -> CMustState {
        let mut out = CMustState { unknown_seen: s.unknown_seen, ..CMustState::default() };
        for (&c, &bound) in &s.bounds {
            if c == b {
                continue;
            }
            let aged = if self.skip_aging_at_one && bound == 1 {
                bound
            } else {
                (bound + 1).min(self.infinity())
            };
            out.bounds.insert(c, aged);
        }
        out.bounds.insert(b, 1);
        out
    }
}

impl Domain for CMust {
    type State = CMustState;

    fn name(&self) -> &'static str {
        if self.skip_aging_at_one {
            "cmust-off-by-one"
        } else {
            "cmust"
        }
    }

    fn bottom(&mut self) -> CMustState {
        CMustState::default()
    }

    fn init_entry(&mut self) -> CMustState {
        CMustState::default()
    }

    fn update(&mut self, s: &CMustState, label: &AccessLabel) -> CMustState {
        match label {
            AccessLabel::Empty => s.clone(),
            AccessLabel::Single(b) => self.update_single(s, *b),
            AccessLabel::Many(bs) => {
                // The join materialises every member at bound 1 through its
                // own branch, so none of them stays vacuously absent.
                let mut acc = self.bottom();
                for &b in bs {
                    let branch = self.update_single(s, b);
                    acc = self.join(&acc, &branch);
                }
                acc
            }
            AccessLabel::Unknown => CMustState {
                // Some block was accessed; every tracked bound may grow,
                // and absent blocks lose their never-accessed guarantee.
                bounds: s
                    .bounds
                    .iter()
                    .map(|(&c, &bound)| (c, (bound + 1).min(self.infinity())))
                    .collect(),
                unknown_seen: true,
            },
        }
    }

    fn join(&mut self, a: &CMustState, b: &CMustState) -> CMustState {
        // Pointwise maximum; absent = 0 (never accessed) is the identity.
        let mut out = a.clone();
        for (&c, &bound) in &b.bounds {
            out.bounds.entry(c).and_modify(|x| *x = (*x).max(bound)).or_insert(bound);
        }
        out.unknown_seen |= b.unknown_seen;
        out
    }

    fn classify(&mut self, s: &CMustState, b: BlockId) -> bool {
        match s.bounds.get(&b) {
            None => !s.unknown_seen, // provably never accessed: empty conflict set
            Some(&bound) => bound <= self.k,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(pairs: &[(u32, u32)]) -> CMustState {
        CMustState {
            bounds: pairs.iter().map(|&(b, a)| (BlockId(b), a)).collect(),
            unknown_seen: false,
        }
    }

    #[test]
    fn bounds_grow_and_saturate() {
        let mut d = CMust::new(2);
        let bot = d.bottom();
        let s = d.update(&bot, &AccessLabel::Single(BlockId(0)));
        assert_eq!(s, st(&[(0, 1)]));
        let s = d.update(&s, &AccessLabel::Single(BlockId(1)));
        assert_eq!(s, st(&[(0, 2), (1, 1)]));
        let s = d.update(&s, &AccessLabel::Single(BlockId(2)));
        // Block 0 saturates at k+1 = 3: no bound.
        assert_eq!(s, st(&[(0, 3), (1, 2), (2, 1)]));
        let s = d.update(&s, &AccessLabel::Single(BlockId(1)));
        assert_eq!(s, st(&[(0, 3), (1, 1), (2, 2)]));
        assert!(!d.classify(&s, BlockId(0)));
        assert!(d.classify(&s, BlockId(2)));
        assert!(d.classify(&s, BlockId(9)));
    }

    #[test]
    fn repeated_accesses_to_the_same_block_do_not_age_it() {
        let mut d = CMust::new(2);
        let s = st(&[(0, 2)]);
        assert_eq!(d.update(&s, &AccessLabel::Single(BlockId(0))), st(&[(0, 1)]));
    }

    #[test]
    fn join_is_pointwise_max_with_absent_as_zero() {
        let mut d = CMust::new(4);
        let a = st(&[(0, 1), (1, 3)]);
        let b = st(&[(1, 2), (2, 4)]);
        assert_eq!(d.join(&a, &b), st(&[(0, 1), (1, 3), (2, 4)]));
        let bot = d.bottom();
        assert_eq!(d.join(&a, &bot), a);
    }

    #[test]
    fn unknown_and_many_age_conservatively() {
        let mut d = CMust::new(3);
        let s = st(&[(0, 1), (1, 2)]);
        let unknown = d.update(&s, &AccessLabel::Unknown);
        assert_eq!(unknown, CMustState { unknown_seen: true, ..st(&[(0, 2), (1, 3)]) });
        // One of blocks 0, 2 accessed: 0 is refreshed on one branch only,
        // and 2 is materialised at bound 1 by its branch.
        let many = d.update(&s, &AccessLabel::Many(vec![BlockId(0), BlockId(2)]));
        assert_eq!(many, st(&[(0, 2), (1, 3), (2, 1)]));
    }

    #[test]
    fn unknown_accesses_revoke_vacuous_verdicts() {
        let mut d = CMust::new(3);
        let s = st(&[(0, 1)]);
        // Block 7 was provably never accessed — until an unknown access,
        // which may have been its first, makes absence inconclusive.
        assert!(d.classify(&s, BlockId(7)));
        let s = d.update(&s, &AccessLabel::Unknown);
        assert!(!d.classify(&s, BlockId(7)));
        // The flag survives joins with clean paths and later accesses...
        let j = d.join(&st(&[(2, 1)]), &s);
        assert!(j.unknown_seen);
        let s = d.update(&s, &AccessLabel::Single(BlockId(2)));
        assert!(!d.classify(&s, BlockId(7)));
        // ...and an explicit access starts a fresh, trackable bound.
        let s = d.update(&s, &AccessLabel::Single(BlockId(7)));
        assert!(d.classify(&s, BlockId(7)));
    }

    #[test]
    fn the_off_by_one_mutant_fails_to_age() {
        let mut d = CMust::off_by_one(1);
        let s = st(&[(0, 1)]);
        // Unsound: block 1's access must raise block 0's bound to 2.
        assert_eq!(d.update(&s, &AccessLabel::Single(BlockId(1))), st(&[(0, 1), (1, 1)]));
    }
}
