//! The cooperative product Must × C-Must × Block-CS — the strongest of the
//! classical combinations.
//!
//! The components run side by side with one genuine interaction: when block
//! `a` is accessed and the must analysis guarantees `a` was in cache with
//! age at most `am`, every other tracked bound `c ↦ old` in the counting
//! component tightens to `min(old + 1, max(old, am))` instead of `old + 1`.
//! Why that is sound: if `a` was already in `c`'s conflict set, the set
//! gains nothing (bound stays ≤ old); otherwise `a` was last accessed
//! before `c`, so `c`'s conflict set (c included, a excluded) is contained
//! in `a`'s minus `a` itself, giving `|CS(c)| ≤ am − 1` before the access
//! and `≤ am` after.  A block is persistent if either the refined count or
//! the per-block set proves it; a must-proved block is always count-proved
//! too, so no third disjunct is needed.

use crate::cfg::{AccessLabel, BlockId};
use crate::domain::Domain;
use crate::domains::{BlockCs, BlockCsState, CMust, CMustState, Must, MustState};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductState {
    pub must: MustState,
    pub cmust: CMustState,
    pub blockcs: BlockCsState,
}

pub struct Product {
    k: u32,
    must: Must,
    cmust: CMust,
    blockcs: BlockCs,
    /// With refinement off the components run independently (kept for
    /// measuring what the cooperation buys).
    cooperate: bool,
}

impl Product {
    pub fn new(k: u32) -> Self {
        Product { k, must: Must::new(k), cmust: CMust::new(k), blockcs: BlockCs::new(k), cooperate: true }
    }

    pub fn without_cooperation(k: u32) -> Self {
        Product { cooperate: false, ..Product::new(k) }
    }

    fn update_single(&mut self, s: &ProductState, a: BlockId) -> ProductState {
        let cmust = if self.cooperate {
            let mut out =
                CMustState { unknown_seen: s.cmust.unknown_seen, ..CMustState::default() };
            let refine_to = s.must.age(a);
            for (&c, &old) in &s.cmust.bounds {
                if c == a {
                    continue;
                }
                let mut aged = (old + 1).min(self.k + 1);
                if let Some(am) = refine_to {
                    aged = aged.min(old.max(am));
                }
                out.bounds.insert(c, aged);
            }
            out.bounds.insert(a, 1);
            out
        } else {
            self.cmust.update(&s.cmust, &AccessLabel::Single(a))
        };
        ProductState {
            must: self.must.update(&s.must, &AccessLabel::Single(a)),
            cmust,
            blockcs: self.blockcs.update(&s.blockcs, &AccessLabel::Single(a)),
        }
    }
}

impl Domain for Product {
    type State = ProductState;

    fn name(&self) -> &'static str {
        "product"
    }

    fn bottom(&mut self) -> ProductState {
        ProductState {
            must: self.must.bottom(),
            cmust: self.cmust.bottom(),
            blockcs: self.blockcs.bottom(),
        }
    }

    fn init_entry(&mut self) -> ProductState {
        ProductState {
            must: self.must.init_entry(),
            cmust: self.cmust.init_entry(),
            blockcs: self.blockcs.init_entry(),
        }
    }

    fn update(&mut self, s: &ProductState, label: &AccessLabel) -> ProductState {
        match label {
            AccessLabel::Empty => s.clone(),
            AccessLabel::Single(a) => self.update_single(s, *a),
            AccessLabel::Many(bs) => {
                let mut acc = self.bottom();
                for &b in bs {
                    let branch = self.update_single(s, b);
                    acc = self.join(&acc, &branch);
                }
                acc
            }
            AccessLabel::Unknown => ProductState {
                must: self.must.update(&s.must, label),
                cmust: self.cmust.update(&s.cmust, label),
                blockcs: self.blockcs.update(&s.blockcs, label),
            },
        }
    }

    fn join(&mut self, a: &ProductState, b: &ProductState) -> ProductState {
        ProductState {
            must: self.must.join(&a.must, &b.must),
            cmust: self.cmust.join(&a.cmust, &b.cmust),
            blockcs: self.blockcs.join(&a.blockcs, &b.blockcs),
        }
    }

    fn classify(&mut self, s: &ProductState, b: BlockId) -> bool {
        self.cmust.classify(&s.cmust, b) || self.blockcs.classify(&s.blockcs, b)
    }
}
