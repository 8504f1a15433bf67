//! The interface every persistence domain implements, and the registry of
//! available domains.
//!
//! A domain is an abstract interpretation of access traces: per CFG node the
//! solver maintains one abstract state, updated along edges and joined at
//! merge points, until the least fixpoint is reached.  `classify` then
//! decides, per memory block, whether the state proves the next access to
//! that block can never be a second miss.
//!
//! Methods take `&mut self` because some domains own shared infrastructure
//! (the decision-diagram manager with its memo tables).  States are value
//! types compared with `==`; each domain's state equality must therefore be
//! canonical.

use crate::cfg::{AccessLabel, BlockId};

/// One persistence analysis: a join-semilattice of states with a transfer
/// function and a per-block verdict.
///
/// Transfers must be monotone for precise labels (`Single`, `Empty`).  An
/// uncertain-access transfer may step outside the lattice order — the exact
/// domain materialises possibly-first-accessed blocks, which no state above
/// bottom covers — and the worklist still terminates (states only grow, by
/// joins) and still ends on a state covering every edge flow, which is what
/// soundness rests on.
pub trait Domain {
    type State: Clone + Eq + std::fmt::Debug;

    /// Display name (matches the registry name for registered domains).
    fn name(&self) -> &'static str;

    /// The least state: joined into anything it disappears.  Used for
    /// not-yet-visited nodes.
    fn bottom(&mut self) -> Self::State;

    /// Abstraction of the empty trace: the state at a scope header on
    /// entry, before any access.
    fn init_entry(&mut self) -> Self::State;

    /// Transfer function along one edge.
    fn update(&mut self, s: &Self::State, label: &AccessLabel) -> Self::State;

    /// Least upper bound.
    fn join(&mut self, a: &Self::State, b: &Self::State) -> Self::State;

    /// Partial order, default derived from `join`.
    fn leq(&mut self, a: &Self::State, b: &Self::State) -> bool {
        self.join(a, b) == *b
    }

    /// Does `s` prove that an access to `b` performed next cannot be `b`'s
    /// second miss?  Conjoined over all locations that may access `b`.
    fn classify(&mut self, s: &Self::State, b: BlockId) -> bool;

    /// Decision-diagram node count, for domains backed by one.
    fn zdd_node_count(&self) -> Option<usize> {
        None
    }
}

/// The registered domains, as selectable from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DomainKind {
    /// Age-based must-cache analysis (classical LRU must analysis).
    Must,
    /// Conflict-counting must analysis: per block an upper bound on the
    /// number of distinct blocks since its last access.
    CMust,
    /// Per-block conflict-set union.
    BlockCs,
    /// One global conflict-set union over the whole scope.
    GlobalCs,
    /// Product of Must × C-Must × Block-CS with cooperative refinement.
    Product,
    /// Exact conflict-set families on decision diagrams (the reference
    /// implementation of record).
    Exact,
    /// Exact families, explicit sets, no reduction (raw tier).
    ExactExplicit0,
    /// Exact families, explicit sets, thinned to maximal sets.
    ExactExplicitUp,
    /// Exact families, explicit sets, maximal sets with the ≤k cutoff.
    ExactExplicitK,
    /// Deliberately broken C-Must (skips aging at bound 1).  Unregistered;
    /// exists to prove the differential harness catches unsound domains.
    CMustOffByOne,
}

impl DomainKind {
    /// Domains offered to users (excludes the intentionally broken mutant,
    /// which stays reachable by name for the differential self-test).
    pub const PUBLIC: &'static [DomainKind] = &[
        DomainKind::Must,
        DomainKind::CMust,
        DomainKind::BlockCs,
        DomainKind::GlobalCs,
        DomainKind::Product,
        DomainKind::Exact,
        DomainKind::ExactExplicit0,
        DomainKind::ExactExplicitUp,
        DomainKind::ExactExplicitK,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DomainKind::Must => "must",
            DomainKind::CMust => "cmust",
            DomainKind::BlockCs => "blockcs",
            DomainKind::GlobalCs => "globalcs",
            DomainKind::Product => "product",
            DomainKind::Exact => "exact",
            DomainKind::ExactExplicit0 => "exact-explicit-0",
            DomainKind::ExactExplicitUp => "exact-explicit-up",
            DomainKind::ExactExplicitK => "exact-explicit-k",
            DomainKind::CMustOffByOne => "cmust-off-by-one",
        }
    }

    pub fn parse(name: &str) -> Option<DomainKind> {
        let all = [
            DomainKind::Must,
            DomainKind::CMust,
            DomainKind::BlockCs,
            DomainKind::GlobalCs,
            DomainKind::Product,
            DomainKind::Exact,
            DomainKind::ExactExplicit0,
            DomainKind::ExactExplicitUp,
            DomainKind::ExactExplicitK,
            DomainKind::CMustOffByOne,
        ];
        all.into_iter().find(|k| k.name() == name)
    }

    /// Domains that enumerate explicit set families and therefore only
    /// support single-block and empty access labels.
    pub fn is_explicit_tier(self) -> bool {
        matches!(
            self,
            DomainKind::ExactExplicit0 | DomainKind::ExactExplicitUp | DomainKind::ExactExplicitK
        )
    }
}

impl std::fmt::Display for DomainKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
