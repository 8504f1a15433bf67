//! Exact conflict-set families as explicit sets of sets.
//!
//! The transfer function is the concrete conflict-set semantics lifted to
//! sets of possibilities: an access to `b` resets `b`'s family to `{{b}}`
//! and inserts `b` into every possible conflict set of every other block;
//! a control-flow join takes the family union.  The three tiers apply
//! increasingly aggressive reductions that provably preserve every
//! classification verdict:
//!
//! * [`Tier::Full`] — no reduction; families grow without bound and serve
//!   as the ground truth for the reductions.
//! * [`Tier::Maximal`] — only maximal sets are kept (persistence depends
//!   only on the largest conflict sets).
//! * [`Tier::Bounded`] — additionally, any family containing a set larger
//!   than `k` collapses to [`BlockFamily::Top`]: once over capacity, the
//!   verdict is already fixed until the block is accessed again.
//!
//! Only `Single`/`Empty` labels are supported (checked at the API
//! boundary); the decision-diagram domain handles the uncertain labels.

use std::collections::BTreeMap;

use crate::cfg::{AccessLabel, BlockId};
use crate::domain::Domain;
use crate::family::{self, Family};

/// Representation tier (see module docs).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tier {
    Full,
    Maximal,
    Bounded,
}

/// The possible conflict sets of one block.  `Top` (bounded tier only)
/// means "some possible conflict set exceeds k".
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BlockFamily {
    Top,
    Sets(Family<BlockId>),
}

impl BlockFamily {
    pub fn sets(&self) -> Option<&Family<BlockId>> {
        match self {
            BlockFamily::Top => None,
            BlockFamily::Sets(f) => Some(f),
        }
    }
}

/// Block → family of possible conflict sets.  Absent blocks have the empty
/// family (never accessed), so the empty map is both the lattice bottom and
/// the scope-entry state.
pub type ExplicitState = BTreeMap<BlockId, BlockFamily>;

pub struct ExactExplicit {
    k: u32,
    tier: Tier,
}

impl ExactExplicit {
    pub fn new(k: u32, tier: Tier) -> Self {
        ExactExplicit { k, tier }
    }

    /// Reduce a freshly computed family according to the tier.
    fn reduce(&self, f: Family<BlockId>) -> BlockFamily {
        match self.tier {
            Tier::Full => BlockFamily::Sets(f),
            Tier::Maximal => BlockFamily::Sets(family::max_set(&f)),
            Tier::Bounded => {
                let thinned = family::max_set(&f);
                if family::exceeds(&thinned, self.k as usize) {
                    BlockFamily::Top
                } else {
                    BlockFamily::Sets(thinned)
                }
            }
        }
    }

    fn update_single(&self, s: &ExplicitState, b: BlockId) -> ExplicitState {
        let mut out = ExplicitState::new();
        for (&c, fam) in s {
            if c == b {
                continue;
            }
            let updated = match fam {
                BlockFamily::Top => BlockFamily::Top,
                BlockFamily::Sets(f) => self.reduce(family::add_to_all(f, &b)),
            };
            out.insert(c, updated);
        }
        // Accessing b wipes its history — even from Top.
        out.insert(b, BlockFamily::Sets(Family::from([std::iter::once(b).collect()])));
        out
    }
}

impl Domain for ExactExplicit {
    type State = ExplicitState;

    fn name(&self) -> &'static str {
        match self.tier {
            Tier::Full => "exact-explicit-0",
            Tier::Maximal => "exact-explicit-up",
            Tier::Bounded => "exact-explicit-k",
        }
    }

    fn bottom(&mut self) -> ExplicitState {
        ExplicitState::new()
    }

    fn init_entry(&mut self) -> ExplicitState {
        ExplicitState::new()
    }

    fn update(&mut self, s: &ExplicitState, label: &AccessLabel) -> ExplicitState {
        match label {
            AccessLabel::Empty => s.clone(),
            AccessLabel::Single(b) => self.update_single(s, *b),
            AccessLabel::Many(_) | AccessLabel::Unknown => {
                panic!("explicit exact tiers support only single-block and empty access labels")
            }
        }
    }

    fn join(&mut self, a: &ExplicitState, b: &ExplicitState) -> ExplicitState {
        let mut out = a.clone();
        for (&c, fam) in b {
            let merged = match (out.get(&c), fam) {
                (None, f) => f.clone(),
                (Some(BlockFamily::Top), _) | (_, BlockFamily::Top) => BlockFamily::Top,
                (Some(BlockFamily::Sets(fa)), BlockFamily::Sets(fb)) => {
                    // Plain union in the full tier; reductions preserve
                    // maximality (and boundedness: unions add no new sets).
                    self.reduce(fa.union(fb).cloned().collect())
                }
            };
            out.insert(c, merged);
        }
        out
    }

    fn classify(&mut self, s: &ExplicitState, b: BlockId) -> bool {
        match s.get(&b) {
            None => true, // never accessed: the only miss is the first
            Some(BlockFamily::Top) => false,
            Some(BlockFamily::Sets(f)) => family::max_cardinality(f) <= self.k as usize,
        }
    }
}
