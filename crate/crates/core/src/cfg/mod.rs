//! Control-flow graphs with memory-access edge labels.
//!
//! A graph consists of nodes, directed edges and a designated entry node.
//! Each edge optionally performs one memory access: to a single block, to
//! one block out of a known set, or to a statically unknown block.
//! Persistence scopes name the single-entry regions (usually loops) for
//! which per-block persistence is decided.
//!
//! Graphs are immutable once validated: construction goes through
//! [`CfgBuilder`] (or [`parse_cfg`] for the textual format), which rejects
//! duplicate declarations, dangling edge endpoints, nodes unreachable from
//! the entry and malformed scopes.

mod loops;
mod parse;
mod print;
mod project;

pub use loops::detect_natural_loops;
pub use parse::parse_cfg;
pub use print::print_cfg;
pub use project::{blocks_in_set, project_to_cache_set};

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

/// Index of a node within its [`Cfg`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

/// Index of a memory block within its [`Cfg`]'s block universe.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl BlockId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b{}", self.0)
    }
}

/// Cache geometry: `associativity` ways per set, `num_sets` independent
/// sets, cache lines of `line_size` bytes.  A fully-associative cache has
/// `num_sets = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CacheConfig {
    pub associativity: u32,
    pub num_sets: u32,
    pub line_size: u32,
}

impl CacheConfig {
    pub fn fully_associative(associativity: u32) -> Self {
        CacheConfig { associativity, num_sets: 1, line_size: 16 }
    }

    /// The cache set a byte address maps to.
    pub fn set_of(&self, address: u64) -> u32 {
        ((address / u64::from(self.line_size)) % u64::from(self.num_sets)) as u32
    }

    pub fn validate(&self) -> Result<(), CfgError> {
        if self.associativity == 0 {
            return Err(CfgError::InvalidCacheConfig("associativity must be at least 1".into()));
        }
        if self.num_sets == 0 {
            return Err(CfgError::InvalidCacheConfig("number of sets must be at least 1".into()));
        }
        if self.line_size == 0 || !self.line_size.is_power_of_two() {
            return Err(CfgError::InvalidCacheConfig("line size must be a power of two".into()));
        }
        Ok(())
    }
}

/// The memory access performed by one edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AccessLabel {
    /// No access.
    Empty,
    /// One access to exactly this block.
    Single(BlockId),
    /// One access to exactly one block out of this set (two or more,
    /// sorted, duplicate-free; smaller sets normalize to `Single`/`Empty`).
    Many(Vec<BlockId>),
    /// One access to a statically unknown block.
    Unknown,
}

impl AccessLabel {
    /// Could this edge access block `b`?
    pub fn may_access(&self, b: BlockId) -> bool {
        match self {
            AccessLabel::Empty => false,
            AccessLabel::Single(x) => *x == b,
            AccessLabel::Many(xs) => xs.contains(&b),
            AccessLabel::Unknown => true,
        }
    }

    /// The blocks this label names explicitly (empty for `Empty`/`Unknown`).
    pub fn named_blocks(&self) -> &[BlockId] {
        match self {
            AccessLabel::Empty | AccessLabel::Unknown => &[],
            AccessLabel::Single(b) => std::slice::from_ref(b),
            AccessLabel::Many(bs) => bs,
        }
    }

    /// True for `Single` and `Empty`, the labels every analysis tier
    /// supports.
    pub fn is_single_or_empty(&self) -> bool {
        matches!(self, AccessLabel::Empty | AccessLabel::Single(_))
    }

    /// Sort + dedup a `Many` candidate and collapse degenerate sets.
    fn normalize(self) -> AccessLabel {
        match self {
            AccessLabel::Many(mut bs) => {
                bs.sort_unstable();
                bs.dedup();
                match bs.len() {
                    0 => AccessLabel::Empty,
                    1 => AccessLabel::Single(bs[0]),
                    _ => AccessLabel::Many(bs),
                }
            }
            other => other,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub name: String,
    pub address: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub name: String,
    pub address: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub src: NodeId,
    pub label: AccessLabel,
    pub dst: NodeId,
}

/// A persistence scope: a named single-entry region with `header` as the
/// entry point.  The header is itself a member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scope {
    pub name: String,
    pub header: NodeId,
    pub members: Vec<NodeId>,
}

impl Scope {
    pub fn member_set(&self) -> BTreeSet<NodeId> {
        self.members.iter().copied().collect()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CfgError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("duplicate node declaration: {0}")]
    DuplicateNode(String),
    #[error("duplicate block declaration: {0}")]
    DuplicateBlock(String),
    #[error("duplicate entry declaration")]
    DuplicateEntry,
    #[error("missing entry declaration")]
    MissingEntry,
    #[error("edge endpoint undeclared: {0}")]
    EdgeEndpointUndeclared(String),
    #[error("scope member undeclared: {0}")]
    ScopeMemberUndeclared(String),
    #[error("unreachable node: {0}")]
    UnreachableNode(String),
    #[error("scope {scope}: header {header} is not a member")]
    ScopeHeaderNotMember { scope: String, header: String },
    #[error("scope {scope}: member {member} is not reachable from header {header} inside the scope")]
    ScopeMemberUnreachable { scope: String, member: String, header: String },
    #[error("irreducible loop; declare scopes explicitly")]
    IrreducibleLoop,
    #[error("block without address: {0} (set-associative projection requires block addresses)")]
    BlockWithoutAddress(String),
    #[error("invalid cache configuration: {0}")]
    InvalidCacheConfig(String),
}

/// A validated control-flow graph.
///
/// Node and block identifiers are dense indices in declaration order; the
/// block universe is exactly the set of blocks mentioned anywhere in the
/// input.  Parallel edges with distinct labels are meaningful and preserved.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cfg {
    nodes: Vec<Node>,
    blocks: Vec<Block>,
    edges: Vec<Edge>,
    entry: NodeId,
    scopes: Vec<Scope>,
}

impl Cfg {
    pub fn entry(&self) -> NodeId {
        self.entry
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn scopes(&self) -> &[Scope] {
        &self.scopes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    pub fn block(&self, id: BlockId) -> &Block {
        &self.blocks[id.index()]
    }

    pub fn node_name(&self, id: NodeId) -> &str {
        &self.nodes[id.index()].name
    }

    pub fn block_name(&self, id: BlockId) -> &str {
        &self.blocks[id.index()].name
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.name == name).map(|i| NodeId(i as u32))
    }

    pub fn block_id(&self, name: &str) -> Option<BlockId> {
        self.blocks.iter().position(|b| b.name == name).map(|i| BlockId(i as u32))
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    pub fn block_ids(&self) -> impl Iterator<Item = BlockId> {
        (0..self.blocks.len() as u32).map(BlockId)
    }

    pub fn out_edges(&self, v: NodeId) -> impl Iterator<Item = (usize, &Edge)> {
        self.edges.iter().enumerate().filter(move |(_, e)| e.src == v)
    }

    /// The nodes with an outgoing edge that may access `b`.  Persistence of
    /// `b` must hold at each of them: they are exactly the program points
    /// that can be followed by an access to `b`.
    pub fn access_nodes(&self, b: BlockId) -> BTreeSet<NodeId> {
        self.edges.iter().filter(|e| e.label.may_access(b)).map(|e| e.src).collect()
    }

    /// True when every edge label is `Single` or `Empty` (the fragment the
    /// witness oracle and the explicit reference tiers support).
    pub fn has_only_single_accesses(&self) -> bool {
        self.edges.iter().all(|e| e.label.is_single_or_empty())
    }

    /// Render in the canonical textual format (see [`print_cfg`]).
    pub fn to_text(&self) -> String {
        print_cfg(self)
    }
}

/// Incremental construction of a [`Cfg`]; `finish` validates the result.
#[derive(Default)]
pub struct CfgBuilder {
    nodes: Vec<Node>,
    blocks: Vec<Block>,
    declared_blocks: Vec<bool>,
    edges: Vec<Edge>,
    entry: Option<NodeId>,
    scopes: Vec<Scope>,
    node_index: HashMap<String, NodeId>,
    block_index: HashMap<String, BlockId>,
}

impl CfgBuilder {
    pub fn new() -> Self {
        CfgBuilder::default()
    }

    pub fn add_node(&mut self, name: &str, address: Option<u64>) -> Result<NodeId, CfgError> {
        if self.node_index.contains_key(name) {
            return Err(CfgError::DuplicateNode(name.to_string()));
        }
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(Node { name: name.to_string(), address });
        self.node_index.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.node_index.get(name).copied()
    }

    pub fn block_id(&self, name: &str) -> Option<BlockId> {
        self.block_index.get(name).copied()
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Declare a block explicitly, optionally attaching an address.
    /// Declaring the same block twice is an error; blocks first seen in an
    /// edge label may still be declared afterwards.
    pub fn declare_block(&mut self, name: &str, address: Option<u64>) -> Result<BlockId, CfgError> {
        if let Some(&id) = self.block_index.get(name) {
            if self.declared_blocks[id.index()] {
                return Err(CfgError::DuplicateBlock(name.to_string()));
            }
            self.declared_blocks[id.index()] = true;
            self.blocks[id.index()].address = address;
            return Ok(id);
        }
        let id = self.intern_block(name);
        self.declared_blocks[id.index()] = true;
        self.blocks[id.index()].address = address;
        Ok(id)
    }

    /// Get-or-create a block id for a name mentioned in an edge label.
    pub fn intern_block(&mut self, name: &str) -> BlockId {
        if let Some(&id) = self.block_index.get(name) {
            return id;
        }
        let id = BlockId(self.blocks.len() as u32);
        self.blocks.push(Block { name: name.to_string(), address: None });
        self.declared_blocks.push(false);
        self.block_index.insert(name.to_string(), id);
        id
    }

    pub fn add_edge(&mut self, src: NodeId, label: AccessLabel, dst: NodeId) {
        debug_assert!(src.index() < self.nodes.len() && dst.index() < self.nodes.len());
        self.edges.push(Edge { src, label: label.normalize(), dst });
    }

    pub fn set_entry(&mut self, entry: NodeId) -> Result<(), CfgError> {
        if self.entry.is_some() {
            return Err(CfgError::DuplicateEntry);
        }
        self.entry = Some(entry);
        Ok(())
    }

    pub fn add_scope(&mut self, name: &str, header: NodeId, members: Vec<NodeId>) {
        self.scopes.push(Scope { name: name.to_string(), header, members });
    }

    pub fn finish(self) -> Result<Cfg, CfgError> {
        let entry = self.entry.ok_or(CfgError::MissingEntry)?;
        let cfg = Cfg {
            nodes: self.nodes,
            blocks: self.blocks,
            edges: self.edges,
            entry,
            scopes: self.scopes,
        };

        // Every node must be reachable from the entry.
        let reached = reachable_from(&cfg.edges, cfg.nodes.len(), entry, None);
        if let Some(unreached) = (0..cfg.nodes.len()).find(|&i| !reached[i]) {
            return Err(CfgError::UnreachableNode(cfg.nodes[unreached].name.clone()));
        }

        for scope in &cfg.scopes {
            let members = scope.member_set();
            if !members.contains(&scope.header) {
                return Err(CfgError::ScopeHeaderNotMember {
                    scope: scope.name.clone(),
                    header: cfg.node_name(scope.header).to_string(),
                });
            }
            // Members must form a region reachable from the header without
            // leaving the scope.
            let inside = reachable_from(&cfg.edges, cfg.nodes.len(), scope.header, Some(&members));
            if let Some(&m) = scope.members.iter().find(|m| !inside[m.index()]) {
                return Err(CfgError::ScopeMemberUnreachable {
                    scope: scope.name.clone(),
                    member: cfg.node_name(m).to_string(),
                    header: cfg.node_name(scope.header).to_string(),
                });
            }
        }

        Ok(cfg)
    }
}

/// BFS over the edge list; `restrict` limits traversal to a node subset.
fn reachable_from(
    edges: &[Edge],
    num_nodes: usize,
    start: NodeId,
    restrict: Option<&BTreeSet<NodeId>>,
) -> Vec<bool> {
    let inside = |n: NodeId| restrict.is_none_or(|set| set.contains(&n));
    let mut seen = vec![false; num_nodes];
    if !inside(start) {
        return seen;
    }
    seen[start.index()] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for e in edges.iter().filter(|e| e.src == v) {
            if inside(e.dst) && !seen[e.dst.index()] {
                seen[e.dst.index()] = true;
                queue.push_back(e.dst);
            }
        }
    }
    seen
}
