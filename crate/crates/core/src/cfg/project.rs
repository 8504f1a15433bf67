//! Projection of a graph onto one cache set.
//!
//! A set-associative cache partitions blocks by address; replacement within
//! one set is LRU over that set's blocks only.  Analysis therefore runs once
//! per cache set on a projected graph: same nodes, edges and scopes, but
//! accesses to blocks of other sets are blanked out.  An `Unknown` access may
//! hit any set, so it survives every projection.

use super::{AccessLabel, Cfg, CacheConfig, CfgError};

/// Project `cfg` onto cache set `set` under `config`.
///
/// The block universe and all identifiers are preserved so results from
/// different sets can be reported against the original graph.  With a single
/// set the projection is the identity.
pub fn project_to_cache_set(cfg: &Cfg, config: &CacheConfig, set: u32) -> Result<Cfg, CfgError> {
    config.validate()?;
    if config.num_sets == 1 {
        return Ok(cfg.clone());
    }
    for b in cfg.block_ids() {
        if cfg.block(b).address.is_none() {
            return Err(CfgError::BlockWithoutAddress(cfg.block_name(b).to_string()));
        }
    }
    let in_set = |b: super::BlockId| {
        let addr = cfg.block(b).address.expect("checked above");
        config.set_of(addr) == set
    };

    let mut projected = cfg.clone();
    for e in &mut projected.edges {
        e.label = match std::mem::replace(&mut e.label, AccessLabel::Empty) {
            AccessLabel::Single(b) if in_set(b) => AccessLabel::Single(b),
            AccessLabel::Single(_) => AccessLabel::Empty,
            AccessLabel::Many(bs) => {
                AccessLabel::Many(bs.into_iter().filter(|&b| in_set(b)).collect()).normalize()
            }
            AccessLabel::Unknown => AccessLabel::Unknown,
            AccessLabel::Empty => AccessLabel::Empty,
        };
    }
    Ok(projected)
}

/// The block ids whose addresses map to `set`; blocks without an address
/// are reported for set 0 only (they only occur when `num_sets == 1`, where
/// every block belongs to the single set).
pub fn blocks_in_set(cfg: &Cfg, config: &CacheConfig, set: u32) -> Vec<super::BlockId> {
    cfg.block_ids()
        .filter(|&b| match cfg.block(b).address {
            Some(addr) => config.set_of(addr) == set,
            None => set == 0,
        })
        .collect()
}
