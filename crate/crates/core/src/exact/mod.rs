//! The exact persistence domain: per block, the family of *all possible*
//! conflict sets (the distinct blocks accessed since that block's last
//! access, itself included).  A block is persistent where every possible
//! conflict set fits into the cache's `k` ways.
//!
//! Two implementations share this semantics:
//!
//! * [`ExactExplicit`] stores families as plain sets of sets in three
//!   refinement tiers — unreduced, thinned to maximal sets, and maximal
//!   sets with a `> k` cutoff.  It exists as the transparent reference and
//!   handles only single-block accesses.
//! * [`ExactZdd`] stores families in a shared decision-diagram manager and
//!   adds the slot structure that accounts for uncertain accesses (`Many`
//!   and `Unknown` labels) by counting anonymous conflicting blocks.
//!
//! All tiers classify identically; they differ only in representation cost.

mod explicit;
mod layered;

pub use explicit::{BlockFamily, ExactExplicit, ExplicitState, Tier};
pub use layered::{BlockSlots, ExactZdd, LayeredState};
