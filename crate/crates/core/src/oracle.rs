//! Ground-truth persistence decisions for small graphs, independent of every
//! abstract domain.
//!
//! A block is *not* persistent exactly when some execution path from the
//! entry makes it miss twice under concrete LRU replacement.  Such a path is
//! a [`Witness`].  The search is a breadth-first exploration of
//! (node, LRU stack, miss count) states: concrete cache behavior depends on
//! nothing else, so memoizing these states preserves completeness while
//! keeping the search finite.  A shortest witness, if any exists, has at
//! most `|V| + |V|·|E| + 2` edges — between consecutive repetitions of a
//! (node, stack) pair the segment can be excised — so bounding the search
//! there loses nothing.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::cfg::{AccessLabel, BlockId, Cfg};

/// Default cap on `|V|·|E|`; larger instances are refused (route those to
/// the explicit exact tier instead).
pub const DEFAULT_BUDGET: usize = 2000;

/// An execution on which the target block misses twice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    /// Edge indices (into `cfg.edges()`) of the path, starting at the entry.
    pub edges: Vec<usize>,
    /// Indices into the path's access trace (see [`access_trace`]) of the
    /// two misses to the target block.
    pub miss_positions: (usize, usize),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("oracle budget exceeded: |V|*|E| = {size} > {budget}")]
    BudgetExceeded { size: usize, budget: usize },
    #[error("oracle supports only single-block and empty access labels")]
    UnsupportedLabel,
}

/// Concrete fully-associative LRU simulation: one boolean (hit?) per access.
/// An access hits iff the block was accessed before and at most `k` distinct
/// blocks (including itself) occur from that previous access onward.
pub fn lru_simulate(trace: &[BlockId], k: u32) -> Vec<bool> {
    let k = k as usize;
    let mut stack: Vec<BlockId> = Vec::new(); // most recent first, len ≤ k
    trace
        .iter()
        .map(|&b| {
            let hit = match stack.iter().position(|&x| x == b) {
                Some(pos) => {
                    stack.remove(pos);
                    true // pos < k because the stack is truncated to k
                }
                None => false,
            };
            stack.insert(0, b);
            stack.truncate(k);
            hit
        })
        .collect()
}

/// The blocks accessed along a path given as edge indices.
pub fn access_trace(cfg: &Cfg, edges: &[usize]) -> Vec<BlockId> {
    edges
        .iter()
        .filter_map(|&i| match cfg.edges()[i].label {
            AccessLabel::Single(b) => Some(b),
            AccessLabel::Empty => None,
            _ => panic!("oracle paths contain only single/empty labels"),
        })
        .collect()
}

/// Search for a shortest double-miss witness for `b` at associativity `k`,
/// bounded by the shortest-witness length `|V| + |V|·|E| + 2`.
pub fn find_witness(
    cfg: &Cfg,
    b: BlockId,
    k: u32,
    budget: usize,
) -> Result<Option<Witness>, OracleError> {
    let bound = cfg.num_nodes() + cfg.num_nodes() * cfg.edges().len() + 2;
    find_witness_bounded(cfg, b, k, budget, bound)
}

/// [`find_witness`] with an explicit path-length cap (used to probe that
/// the default cap is adequate).
pub fn find_witness_bounded(
    cfg: &Cfg,
    b: BlockId,
    k: u32,
    budget: usize,
    max_len: usize,
) -> Result<Option<Witness>, OracleError> {
    let size = cfg.num_nodes() * cfg.edges().len();
    if size > budget {
        return Err(OracleError::BudgetExceeded { size, budget });
    }
    if !cfg.has_only_single_accesses() {
        return Err(OracleError::UnsupportedLabel);
    }

    // Breadth-first search; the arena keeps parent links for path recovery.
    struct Entry {
        node: crate::cfg::NodeId,
        stack: Vec<BlockId>,
        misses: u8,
        depth: usize,
        parent: Option<(usize, usize)>, // (arena index, edge index)
    }
    let mut arena = vec![Entry {
        node: cfg.entry(),
        stack: Vec::new(),
        misses: 0,
        depth: 0,
        parent: None,
    }];
    let mut seen: HashMap<(crate::cfg::NodeId, Vec<BlockId>, u8), ()> = HashMap::new();
    seen.insert((cfg.entry(), Vec::new(), 0), ());
    let mut queue = VecDeque::from([0usize]);

    while let Some(idx) = queue.pop_front() {
        if arena[idx].depth >= max_len {
            continue;
        }
        for (edge_idx, edge) in cfg.out_edges(arena[idx].node) {
            let (mut stack, mut misses) = (arena[idx].stack.clone(), arena[idx].misses);
            if let AccessLabel::Single(c) = edge.label {
                match stack.iter().position(|&x| x == c) {
                    Some(pos) => {
                        stack.remove(pos);
                    }
                    None => {
                        if c == b {
                            misses += 1;
                        }
                    }
                }
                stack.insert(0, c);
                stack.truncate(k as usize);
            }
            if misses >= 2 {
                // Goal: reconstruct the edge path and locate the two misses.
                let mut path = vec![edge_idx];
                let mut at = idx;
                while let Some((parent, via)) = arena[at].parent {
                    path.push(via);
                    at = parent;
                }
                path.reverse();
                let trace = access_trace(cfg, &path);
                let hits = lru_simulate(&trace, k);
                let miss_idx: Vec<usize> = trace
                    .iter()
                    .zip(&hits)
                    .enumerate()
                    .filter(|(_, (&blk, &hit))| blk == b && !hit)
                    .map(|(i, _)| i)
                    .collect();
                debug_assert_eq!(miss_idx.len(), 2, "goal state implies exactly two misses");
                return Ok(Some(Witness {
                    edges: path,
                    miss_positions: (miss_idx[0], miss_idx[1]),
                }));
            }
            let key = (edge.dst, stack.clone(), misses);
            if seen.contains_key(&key) {
                continue;
            }
            seen.insert(key, ());
            arena.push(Entry {
                node: edge.dst,
                stack,
                misses,
                depth: arena[idx].depth + 1,
                parent: Some((idx, edge_idx)),
            });
            queue.push_back(arena.len() - 1);
        }
    }
    Ok(None)
}

/// Persistence by exhaustive witness search: true iff no execution can make
/// `b` miss twice.
pub fn brute_force_persistent(cfg: &Cfg, b: BlockId, k: u32, budget: usize) -> Result<bool, OracleError> {
    Ok(find_witness(cfg, b, k, budget)?.is_none())
}
