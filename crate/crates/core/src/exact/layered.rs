//! Exact conflict-set families on decision diagrams, with anonymous-block
//! slots for uncertain accesses.
//!
//! Per block the state holds `k` slots; slot `i` is a family of conflict
//! sets, each implicitly extended by `i` distinct *anonymous* blocks — the
//! residue of `i` statically unknown accesses.  A slot-`i` set `s` fits the
//! cache iff `|s| + i ≤ k`:
//!
//! * A concrete access to `b` resets `b` to slot 0 = `{{b}}` and pushes `b`
//!   into every set of every slot of every other block (a dot product with
//!   `{{b}}`); any set now provably over capacity collapses the whole block
//!   to [`BlockSlots::Top`] — the verdict cannot recover until `b`'s next
//!   access.
//! * An access to one of a small known set `B` joins the `|B|` concrete
//!   outcomes.
//! * An uncertain access (`Unknown`, or `Many` past the associativity)
//!   shifts every tracked block's slots one to the right — one more
//!   anonymous conflict; a block whose last slot was occupied overflows to
//!   `Top`.  Every possibly-accessed block that was never tracked before is
//!   materialised at slot 0 = `{{b}}`: the access may have been its first,
//!   and forgetting that would leave the block vacuously persistent while
//!   later conflicts evict it.  For `|B| > k` the shift loses no verdict:
//!   every outcome already pays one conflict, and where the joined outcomes
//!   would stay smaller, both sides are past capacity anyway.
//!
//! An `Unknown` access may touch *any* block, so materialisation needs the
//! block universe: build the domain with [`ExactZdd::with_universe`] for
//! programs containing such labels.  (It may even touch blocks outside the
//! named universe — an array the program never names block-wise — which is
//! why the shift never caps a conflict set at the universe.)
//!
//! Families live in one [`Zdd`] manager per domain instance, so state
//! equality is slot-wise handle equality.

use std::collections::BTreeMap;

use crate::cfg::{AccessLabel, BlockId};
use crate::domain::Domain;
use crate::family::Family;
use crate::zdd::{Handle, Zdd};

/// Slots of one block: `Slots(v)` with `v.len() == k`, or the over-capacity
/// absorbing element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BlockSlots {
    Top,
    Slots(Vec<Handle>),
}

/// Block → slots.  Absent blocks were never accessed (all slots empty);
/// such entries are never materialised, keeping equality canonical.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LayeredState(pub BTreeMap<BlockId, BlockSlots>);

pub struct ExactZdd {
    k: u32,
    /// Blocks an `Unknown` access may have touched; empty when constructed
    /// with [`ExactZdd::new`].
    universe: Vec<BlockId>,
    zdd: Zdd,
}

impl ExactZdd {
    /// A domain for programs whose accesses are all precisely named
    /// (`Single`, `Empty`, `Many`).  `Unknown` labels additionally need the
    /// block universe — use [`ExactZdd::with_universe`] for those.
    pub fn new(k: u32) -> Self {
        assert!(k >= 1, "associativity must be at least 1");
        ExactZdd { k, universe: Vec::new(), zdd: Zdd::new() }
    }

    /// A domain that also knows every block the program can access, giving
    /// `Unknown` labels their meaning: any of these blocks may have been
    /// accessed, including for the first time.
    pub fn with_universe(k: u32, universe: impl IntoIterator<Item = BlockId>) -> Self {
        let mut universe: Vec<BlockId> = universe.into_iter().collect();
        universe.sort_unstable();
        universe.dedup();
        ExactZdd { universe, ..ExactZdd::new(k) }
    }

    fn ku(&self) -> usize {
        self.k as usize
    }

    fn update_single(&mut self, s: &LayeredState, b: BlockId) -> LayeredState {
        let k = self.ku();
        let sb = self.zdd.singleton_family(b.0);
        let mut out = BTreeMap::new();
        for (&c, slots) in &s.0 {
            if c == b {
                continue;
            }
            let updated = match slots {
                BlockSlots::Top => BlockSlots::Top,
                BlockSlots::Slots(v) => {
                    let mut new = Vec::with_capacity(k);
                    let mut top = false;
                    for (i, &h) in v.iter().enumerate() {
                        if h == Zdd::EMPTY {
                            new.push(Zdd::EMPTY);
                            continue;
                        }
                        let grown = self.zdd.max_dot_product(h, sb);
                        if self.zdd.max_cardinality(grown) + i > k {
                            top = true;
                            break;
                        }
                        new.push(grown);
                    }
                    if top { BlockSlots::Top } else { BlockSlots::Slots(new) }
                }
            };
            out.insert(c, updated);
        }
        let mut fresh = vec![Zdd::EMPTY; k];
        fresh[0] = sb;
        out.insert(b, BlockSlots::Slots(fresh));
        LayeredState(out)
    }

    /// Transfer for an access to some block in `possibly_accessed` (or, for
    /// `Unknown`, possibly outside it): tracked blocks gain one anonymous
    /// conflict via the slot shift; possibly-accessed blocks never tracked
    /// before gain the conflict set `{b}` — this may have been their first
    /// access.
    fn update_uncertain(&mut self, s: &LayeredState, possibly_accessed: &[BlockId]) -> LayeredState {
        let k = self.ku();
        let mut out = BTreeMap::new();
        for (&c, slots) in &s.0 {
            let shifted = match slots {
                BlockSlots::Top => BlockSlots::Top,
                BlockSlots::Slots(v) => {
                    if v[k - 1] != Zdd::EMPTY {
                        BlockSlots::Top
                    } else {
                        let mut new = Vec::with_capacity(k);
                        new.push(Zdd::EMPTY);
                        new.extend_from_slice(&v[..k - 1]);
                        BlockSlots::Slots(new)
                    }
                }
            };
            out.insert(c, shifted);
        }
        for &b in possibly_accessed {
            out.entry(b).or_insert_with(|| {
                let mut fresh = vec![Zdd::EMPTY; k];
                fresh[0] = self.zdd.singleton_family(b.0);
                BlockSlots::Slots(fresh)
            });
        }
        LayeredState(out)
    }

    /// Whether the state already proves nothing for `b` (over capacity).
    pub fn is_top(&self, s: &LayeredState, b: BlockId) -> bool {
        matches!(s.0.get(&b), Some(BlockSlots::Top))
    }

    /// The explicit slot families of `b`: `None` if `b` is `Top`, otherwise
    /// `k` families (all empty when `b` was never accessed).
    pub fn families(&self, s: &LayeredState, b: BlockId) -> Option<Vec<Family<BlockId>>> {
        let explicit = |zdd: &Zdd, h: Handle| -> Family<BlockId> {
            zdd.enumerate(h)
                .into_iter()
                .map(|set| set.into_iter().map(BlockId).collect())
                .collect()
        };
        match s.0.get(&b) {
            Some(BlockSlots::Top) => None,
            Some(BlockSlots::Slots(v)) => Some(v.iter().map(|&h| explicit(&self.zdd, h)).collect()),
            None => Some(vec![Family::new(); self.ku()]),
        }
    }

    /// Graphviz dump of all diagram nodes reachable from a state's slots.
    pub fn state_to_dot(&self, s: &LayeredState, var_name: impl Fn(u32) -> String) -> String {
        let mut roots = Vec::new();
        for (&b, slots) in &s.0 {
            if let BlockSlots::Slots(v) = slots {
                for (i, &h) in v.iter().enumerate() {
                    if h != Zdd::EMPTY {
                        roots.push((format!("{}[{}]", var_name(b.0), i), h));
                    }
                }
            }
        }
        self.zdd.to_dot(&roots, var_name)
    }
}

impl Domain for ExactZdd {
    type State = LayeredState;

    fn name(&self) -> &'static str {
        "exact"
    }

    fn bottom(&mut self) -> LayeredState {
        LayeredState::default()
    }

    fn init_entry(&mut self) -> LayeredState {
        LayeredState::default()
    }

    fn update(&mut self, s: &LayeredState, label: &AccessLabel) -> LayeredState {
        match label {
            AccessLabel::Empty => s.clone(),
            AccessLabel::Single(b) => self.update_single(s, *b),
            AccessLabel::Many(bs) => {
                if bs.len() > self.ku() {
                    self.update_uncertain(s, bs)
                } else {
                    let mut acc = self.bottom();
                    for &b in bs {
                        let branch = self.update_single(s, b);
                        acc = self.join(&acc, &branch);
                    }
                    acc
                }
            }
            AccessLabel::Unknown => {
                let universe = self.universe.clone();
                self.update_uncertain(s, &universe)
            }
        }
    }

    fn join(&mut self, a: &LayeredState, b: &LayeredState) -> LayeredState {
        let mut out = a.0.clone();
        for (&c, slots) in &b.0 {
            let merged = match (out.get(&c), slots) {
                (None, s) => s.clone(),
                (Some(BlockSlots::Top), _) | (_, BlockSlots::Top) => BlockSlots::Top,
                (Some(BlockSlots::Slots(va)), BlockSlots::Slots(vb)) => BlockSlots::Slots(
                    va.iter()
                        .zip(vb)
                        .map(|(&ha, &hb)| self.zdd.max_union(ha, hb))
                        .collect(),
                ),
            };
            out.insert(c, merged);
        }
        LayeredState(out)
    }

    fn classify(&mut self, s: &LayeredState, b: BlockId) -> bool {
        let k = self.ku();
        match s.0.get(&b) {
            None => true,
            Some(BlockSlots::Top) => false,
            Some(BlockSlots::Slots(v)) => v.iter().enumerate().all(|(i, &h)| {
                h == Zdd::EMPTY || self.zdd.max_cardinality(h) + i <= k
            }),
        }
    }

    fn zdd_node_count(&self) -> Option<usize> {
        Some(self.zdd.num_nodes())
    }
}
