//! Cache persistence analysis for control-flow graphs.
//!
//! Given a program as a control-flow graph whose edges are annotated with
//! memory-block accesses, this crate decides per memory block and per
//! persistence scope (typically a loop) whether the block can miss a
//! fully-associative LRU cache of associativity `k` more than once per
//! entrance of the scope.
//!
//! The crate provides:
//!
//! * an exact analysis that tracks, per block, the family of possible
//!   conflict sets, stored as zero-suppressed decision diagrams
//!   ([`exact::ExactZdd`]) with explicit set-of-sets reference tiers
//!   ([`exact::ExactExplicit`]) next to it,
//! * the classical inexact persistence domains (`must`, `cmust`, `blockcs`,
//!   `globalcs` and their product) in [`domains`],
//! * a worklist fixpoint solver, scope/report driver, lockstep differential
//!   checker and persistence-constraint emitter in [`solver`],
//! * a brute-force ground-truth oracle based on bounded witness search in
//!   [`oracle`],
//! * test-input generators (random reducible graphs and a reduction from
//!   Hamiltonian circuits) in [`generate`].

pub mod cfg;
pub mod corpus;
pub mod domain;
pub mod domains;
pub mod exact;
pub mod family;
pub mod generate;
pub mod oracle;
pub mod solver;
pub mod zdd;

pub use cfg::{
    parse_cfg, AccessLabel, Block, BlockId, CacheConfig, Cfg, CfgBuilder, CfgError, Edge, Node,
    NodeId, Scope,
};
pub use domain::{Domain, DomainKind};
