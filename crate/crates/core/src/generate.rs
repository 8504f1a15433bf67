//! Test-input generators.
//!
//! Two families: the reduction that encodes Hamiltonian-circuit search as
//! a persistence question (evidence that exact persistence analysis cannot
//! be polynomial unless P = NP), and seeded random structured programs for
//! differential and oracle-based testing.

use std::collections::{BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cfg::{AccessLabel, BlockId, Cfg, CfgBuilder};

/// A simple undirected graph on vertices `0..n`, no self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedGraph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct GraphParseError {
    pub line: usize,
    pub message: String,
}

impl UndirectedGraph {
    pub fn new(n: usize) -> Self {
        UndirectedGraph { n, edges: BTreeSet::new() }
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        assert!(a != b, "self-loops are not allowed");
        assert!(a < self.n && b < self.n, "vertex out of range");
        self.edges.insert((a.min(b), a.max(b)));
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn complete(n: usize) -> Self {
        let mut g = UndirectedGraph::new(n);
        for a in 0..n {
            for b in a + 1..n {
                g.add_edge(a, b);
            }
        }
        g
    }

    /// The cycle 0-1-…-(n-1)-0 (requires `n >= 3`).
    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3);
        let mut g = UndirectedGraph::new(n);
        for a in 0..n {
            g.add_edge(a, (a + 1) % n);
        }
        g
    }

    /// The path 0-1-…-(n-1): connected but without a circuit.
    pub fn path(n: usize) -> Self {
        let mut g = UndirectedGraph::new(n);
        for a in 0..n.saturating_sub(1) {
            g.add_edge(a, a + 1);
        }
        g
    }

    pub fn random(n: usize, edge_prob: f64, rng: &mut impl Rng) -> Self {
        let mut g = UndirectedGraph::new(n);
        for a in 0..n {
            for b in a + 1..n {
                if rng.gen_bool(edge_prob) {
                    g.add_edge(a, b);
                }
            }
        }
        g
    }

    /// Parse "first non-comment line: vertex count; then one `a b` pair per
    /// line".  `#` starts a comment, blank lines are ignored.
    pub fn parse_edge_list(text: &str) -> Result<Self, GraphParseError> {
        let err = |line: usize, message: &str| GraphParseError { line, message: message.into() };
        let mut graph: Option<UndirectedGraph> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            match &mut graph {
                None => {
                    let n: usize = content
                        .parse()
                        .map_err(|_| err(line, "expected the vertex count"))?;
                    graph = Some(UndirectedGraph::new(n));
                }
                Some(g) => {
                    let mut parts = content.split_whitespace();
                    let (a, b) = match (parts.next(), parts.next(), parts.next()) {
                        (Some(a), Some(b), None) => (a, b),
                        _ => return Err(err(line, "expected two vertex numbers")),
                    };
                    let a: usize =
                        a.parse().map_err(|_| err(line, "expected a vertex number"))?;
                    let b: usize =
                        b.parse().map_err(|_| err(line, "expected a vertex number"))?;
                    if a == b {
                        return Err(err(line, "self-loops are not allowed"));
                    }
                    if a >= g.n || b >= g.n {
                        return Err(err(line, "vertex out of range"));
                    }
                    g.add_edge(a, b);
                }
            }
        }
        graph.ok_or_else(|| err(text.lines().count().max(1), "expected the vertex count"))
    }
}

/// Does the graph contain a circuit visiting every vertex exactly once?
/// By convention a two-vertex graph has one iff its edge exists (the edge
/// is traversed twice); smaller graphs have none.
pub fn brute_force_hamiltonian(g: &UndirectedGraph) -> bool {
    let n = g.num_vertices();
    assert!(n <= 10, "factorial search; keep the graph small");
    if n < 2 {
        return false;
    }
    fn extend(g: &UndirectedGraph, prev: usize, rest: &mut Vec<usize>) -> bool {
        if rest.is_empty() {
            return g.has_edge(prev, 0);
        }
        for i in 0..rest.len() {
            let v = rest[i];
            if !g.has_edge(prev, v) {
                continue;
            }
            rest.swap_remove(i);
            let found = extend(g, v, rest);
            rest.push(v);
            let last = rest.len() - 1;
            rest.swap(i, last);
            if found {
                return true;
            }
        }
        false
    }
    let mut rest: Vec<usize> = (1..n).collect();
    extend(g, 0, &mut rest)
}

/// A persistence question that is hard to answer exactly: `designated` is
/// persistent in the whole-program scope at associativity `k` iff the
/// source graph has no Hamiltonian circuit.
pub struct HamiltonianInstance {
    pub cfg: Cfg,
    pub designated: BlockId,
    pub k: u32,
}

/// Encode Hamiltonian-circuit search (vertex 0 as anchor) as a persistence
/// question.
///
/// The program walks `n - 1` layers of vertex copies: an edge into layer
/// `l`'s copy of `j` accesses block `b<j>`, the last layer closes back to
/// the anchor accessing `b0`, and one designated block `b` is accessed on
/// the single back edge.  One round therefore accesses `b`, then `n`
/// blocks drawn from `b0..b<n-1>` with repetitions allowed.  At
/// associativity `k = n` the second access of `b` misses iff those `n`
/// blocks are pairwise distinct — iff the round's vertex choices form a
/// Hamiltonian circuit.
pub fn gen_hamiltonian_cfg(g: &UndirectedGraph) -> HamiltonianInstance {
    let n = g.num_vertices();
    assert!(n >= 2, "the reduction needs at least the anchor and one other vertex");

    let node_name = |j: usize, l: usize| format!("v{j}_{l}");
    // Conceptual edge list: (src, accessed block index or designated, dst).
    enum Access {
        Block(usize),
        Designated,
    }
    let mut edges: Vec<(String, Access, String)> = Vec::new();
    for j in 1..n {
        if g.has_edge(0, j) {
            edges.push((node_name(0, 0), Access::Block(j), node_name(j, 1)));
        }
    }
    for l in 1..n - 1 {
        for j in 1..n {
            for jn in 1..n {
                if j != jn && g.has_edge(j, jn) {
                    edges.push((node_name(j, l), Access::Block(jn), node_name(jn, l + 1)));
                }
            }
        }
    }
    for j in 1..n {
        if g.has_edge(j, 0) {
            edges.push((node_name(j, n - 1), Access::Block(0), node_name(0, n)));
        }
    }
    edges.push((node_name(0, n), Access::Designated, node_name(0, 0)));

    // Keep only what a run can reach; sparse graphs leave whole layers dead.
    let entry_name = node_name(0, 0);
    let mut reachable: BTreeSet<&str> = BTreeSet::new();
    reachable.insert(&entry_name);
    let mut queue: VecDeque<&str> = VecDeque::new();
    queue.push_back(&entry_name);
    while let Some(v) = queue.pop_front() {
        for (src, _, dst) in &edges {
            if src == v && reachable.insert(dst) {
                queue.push_back(dst);
            }
        }
    }

    let mut b = CfgBuilder::new();
    let entry = b.add_node(&entry_name, None).unwrap();
    b.set_entry(entry).unwrap();
    for (src, _, dst) in &edges {
        for name in [src, dst] {
            if reachable.contains(name.as_str()) && b.node_id(name).is_none() {
                b.add_node(name, None).unwrap();
            }
        }
    }
    // Every block exists even when its edges were pruned, so verdicts are
    // comparable across instances of the same size.
    let block_ids: Vec<BlockId> = (0..n)
        .map(|j| b.declare_block(&format!("b{j}"), Some(j as u64 * 0x200)).unwrap())
        .collect();
    let designated = b.declare_block("b", Some(n as u64 * 0x200)).unwrap();
    for (src, access, dst) in &edges {
        if !reachable.contains(src.as_str()) {
            continue;
        }
        let label = match access {
            Access::Block(j) => AccessLabel::Single(block_ids[*j]),
            Access::Designated => AccessLabel::Single(designated),
        };
        let src_id = b.node_id(src).unwrap();
        let dst_id = b.node_id(dst).unwrap();
        b.add_edge(src_id, label, dst_id);
    }
    let cfg = b.finish().expect("the reduction only emits reachable nodes");
    HamiltonianInstance { cfg, designated, k: n as u32 }
}

/// Shape parameters for [`gen_random_cfg`].
#[derive(Debug, Clone, Copy)]
pub struct RandomCfgParams {
    /// Upper bound on generated nodes beyond the entry/exit pair.
    pub nodes: usize,
    /// Size of the block universe (`b0..`).
    pub blocks: usize,
    /// Probability a region becomes a loop (vs. sequence/branch/edge).
    pub loop_prob: f64,
    /// Probability an access label is a multi-block `Many`.
    pub many_rate: f64,
    /// Probability an access label is `Unknown`.
    pub unknown_rate: f64,
}

impl Default for RandomCfgParams {
    fn default() -> Self {
        RandomCfgParams { nodes: 8, blocks: 6, loop_prob: 0.3, many_rate: 0.0, unknown_rate: 0.0 }
    }
}

/// Seeded structured program generator.  Programs are built from nested
/// regions (edge, sequence, branch, loop), so they are always reducible
/// and every node is reachable.
pub fn gen_random_cfg(seed: u64, params: &RandomCfgParams) -> Cfg {
    assert!(params.blocks >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = CfgBuilder::new();
    let blocks: Vec<BlockId> = (0..params.blocks)
        .map(|i| b.declare_block(&format!("b{i}"), Some(i as u64 * 0x200)).unwrap())
        .collect();

    let entry = b.add_node("n0", None).unwrap();
    let exit = b.add_node("n1", None).unwrap();
    b.set_entry(entry).unwrap();
    let mut budget = params.nodes;
    region(&mut b, &mut rng, params, &blocks, &mut budget, entry, exit, 0);
    b.finish().expect("structured regions are always valid")
}

fn random_label(rng: &mut ChaCha8Rng, params: &RandomCfgParams, blocks: &[BlockId]) -> AccessLabel {
    let r: f64 = rng.gen();
    if r < params.unknown_rate {
        AccessLabel::Unknown
    } else if r < params.unknown_rate + params.many_rate && blocks.len() >= 2 {
        let width = rng.gen_range(2..=blocks.len().min(3));
        let mut chosen = blocks.to_vec();
        chosen.shuffle(rng);
        chosen.truncate(width);
        AccessLabel::Many(chosen)
    } else if r < params.unknown_rate + params.many_rate + 0.1 {
        AccessLabel::Empty
    } else {
        AccessLabel::Single(blocks[rng.gen_range(0..blocks.len())])
    }
}

#[allow(clippy::too_many_arguments)]
fn region(
    b: &mut CfgBuilder,
    rng: &mut ChaCha8Rng,
    params: &RandomCfgParams,
    blocks: &[BlockId],
    budget: &mut usize,
    entry: crate::cfg::NodeId,
    exit: crate::cfg::NodeId,
    depth: usize,
) {
    let choice: f64 = rng.gen();
    if *budget == 0 || depth > 8 {
        b.add_edge(entry, random_label(rng, params, blocks), exit);
    } else if choice < params.loop_prob && *budget >= 2 {
        // Loop with its own header and latch: nothing outside the loop can
        // reach the latch without passing the header, so the back edge is
        // always natural no matter how regions nest.
        let header = fresh_node(b, budget);
        let latch = fresh_node(b, budget);
        b.add_edge(entry, random_label(rng, params, blocks), header);
        region(b, rng, params, blocks, budget, header, latch, depth + 1);
        b.add_edge(latch, random_label(rng, params, blocks), header);
        b.add_edge(latch, random_label(rng, params, blocks), exit);
    } else if choice < params.loop_prob + 0.35 {
        let mid = fresh_node(b, budget);
        region(b, rng, params, blocks, budget, entry, mid, depth + 1);
        region(b, rng, params, blocks, budget, mid, exit, depth + 1);
    } else if choice < params.loop_prob + 0.6 {
        region(b, rng, params, blocks, budget, entry, exit, depth + 1);
        region(b, rng, params, blocks, budget, entry, exit, depth + 1);
    } else {
        b.add_edge(entry, random_label(rng, params, blocks), exit);
    }
}

fn fresh_node(b: &mut CfgBuilder, budget: &mut usize) -> crate::cfg::NodeId {
    *budget -= 1;
    let name = format!("n{}", b.num_nodes());
    b.add_node(&name, None).unwrap()
}

/// Replace every `Many` label by one parallel `Single` edge per block.
/// The expansion preserves per-instruction semantics of an unpredictable
/// data access: both programs admit exactly the same access traces.
pub fn expand_many_edges(cfg: &Cfg) -> Cfg {
    let mut b = CfgBuilder::new();
    for node in cfg.nodes() {
        b.add_node(&node.name, node.address).unwrap();
    }
    for block in cfg.blocks() {
        b.declare_block(&block.name, block.address).unwrap();
    }
    b.set_entry(cfg.entry()).unwrap();
    for e in cfg.edges() {
        match &e.label {
            AccessLabel::Many(bs) => {
                for &blk in bs {
                    b.add_edge(e.src, AccessLabel::Single(blk), e.dst);
                }
            }
            other => b.add_edge(e.src, other.clone(), e.dst),
        }
    }
    for s in cfg.scopes() {
        b.add_scope(&s.name, s.header, s.members.clone());
    }
    b.finish().expect("expansion preserves reachability")
}
