//! Global conflict-set union: the cheapest persistence analysis.
//!
//! One set for the whole scope — every block ever (possibly) accessed —
//! plus a counter of anonymous accesses.  A block is persistent when that
//! single set fits the cache, or when it provably was never accessed —
//! which absence from the set only proves while the anonymous counter is
//! zero.  No per-block reset exists, so precision is poor, but the cost is
//! one set union per edge.  Uniquely among the baselines, the global bound
//! also covers blocks only an unknown access may have touched, so on such
//! programs its verdicts are incomparable with the per-block domains'.

use std::collections::BTreeSet;

use crate::cfg::{AccessLabel, BlockId};
use crate::domain::Domain;

/// (All named blocks possibly accessed so far, anonymous-access count
/// saturated at k+1.)
pub type GlobalCsState = (BTreeSet<BlockId>, u32);

pub struct GlobalCs {
    k: u32,
}

impl GlobalCs {
    pub fn new(k: u32) -> Self {
        GlobalCs { k }
    }
}

impl Domain for GlobalCs {
    type State = GlobalCsState;

    fn name(&self) -> &'static str {
        "globalcs"
    }

    fn bottom(&mut self) -> GlobalCsState {
        (BTreeSet::new(), 0)
    }

    fn init_entry(&mut self) -> GlobalCsState {
        (BTreeSet::new(), 0)
    }

    fn update(&mut self, s: &GlobalCsState, label: &AccessLabel) -> GlobalCsState {
        let (reals, anons) = s;
        match label {
            AccessLabel::Empty => s.clone(),
            AccessLabel::Single(_) | AccessLabel::Many(_) => {
                let mut reals = reals.clone();
                reals.extend(label.named_blocks().iter().copied());
                (reals, *anons)
            }
            AccessLabel::Unknown => (reals.clone(), (anons + 1).min(self.k + 1)),
        }
    }

    fn join(&mut self, a: &GlobalCsState, b: &GlobalCsState) -> GlobalCsState {
        (a.0.union(&b.0).copied().collect(), a.1.max(b.1))
    }

    fn classify(&mut self, s: &GlobalCsState, b: BlockId) -> bool {
        let (reals, anons) = s;
        // A block outside the set was provably never accessed only while no
        // unknown access happened; with anonymous accesses around, it is
        // saved by the global bound alone (it would be one of the anons).
        (!reals.contains(&b) && *anons == 0) || reals.len() as u32 + anons <= self.k
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(bs: &[u32]) -> BTreeSet<BlockId> {
        bs.iter().map(|&b| BlockId(b)).collect()
    }

    #[test]
    fn one_set_for_everything() {
        let mut d = GlobalCs::new(2);
        let bot = d.bottom();
        let s = d.update(&bot, &AccessLabel::Single(BlockId(0)));
        let s = d.update(&s, &AccessLabel::Many(vec![BlockId(1), BlockId(2)]));
        assert_eq!(s, (set(&[0, 1, 2]), 0));
        // Three possible blocks exceed two ways — even for block 0, whose
        // real conflict sets may be smaller.
        assert!(!d.classify(&s, BlockId(0)));
        // Blocks outside the set are vacuously persistent.
        assert!(d.classify(&s, BlockId(9)));
    }

    #[test]
    fn anonymous_accesses_count_and_saturate() {
        let mut d = GlobalCs::new(1);
        let bot = d.bottom();
        let s = d.update(&bot, &AccessLabel::Single(BlockId(0)));
        assert!(d.classify(&s, BlockId(0)));
        let s = d.update(&s, &AccessLabel::Unknown);
        assert_eq!(s, (set(&[0]), 1));
        assert!(!d.classify(&s, BlockId(0)));
        // Block 9 may have been accessed by that unknown access, and the
        // two possible distinct blocks exceed the single way.
        assert!(!d.classify(&s, BlockId(9)));
        let worst = (0..10).fold(s, |s, _| d.update(&s, &AccessLabel::Unknown));
        assert_eq!(worst.1, 2); // k + 1
    }

    #[test]
    fn the_global_bound_covers_possibly_accessed_blocks() {
        // With three ways, {0} plus one anonymous access leaves room: even
        // a block the unknown access may have touched for the first time
        // stays cached afterwards.
        let mut d = GlobalCs::new(3);
        let s = (set(&[0]), 1);
        assert!(d.classify(&s, BlockId(0)));
        assert!(d.classify(&s, BlockId(9)));
    }

    #[test]
    fn join_is_union_and_max() {
        let mut d = GlobalCs::new(3);
        let j = d.join(&(set(&[0, 1]), 1), &(set(&[1, 2]), 0));
        assert_eq!(j, (set(&[0, 1, 2]), 1));
    }
}
