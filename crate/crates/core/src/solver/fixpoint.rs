//! Worklist fixpoint over a CFG or a scope-induced subgraph.
//!
//! States accumulate by joining: a node's state is installed the first time
//! the node is reached and widened by `join` afterwards; a node is requeued
//! only when its state grew.  With monotone transfer functions this
//! converges to the least fixpoint above the seeded entry state; transfers
//! that step outside the lattice order (the exact domain's uncertain-access
//! materialisation) still terminate and still settle on a solution
//! [`check_fixpoint`] accepts, because every node's last recomputation sees
//! its predecessors' final states.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, VecDeque};

use crate::cfg::{Cfg, Edge, NodeId, Scope};
use crate::domain::Domain;

/// Node visits allowed before [`solve`] reports divergence.
pub const DEFAULT_ITERATION_LIMIT: usize = 1_000_000;

/// The graph a fixpoint runs on: the whole CFG, or the subgraph induced by
/// a scope's members (edges leaving the scope are dropped, so the abstract
/// trace never escapes the scope).
pub struct FlowGraph<'a> {
    cfg: &'a Cfg,
    entry: NodeId,
    members: Option<BTreeSet<NodeId>>,
}

impl<'a> FlowGraph<'a> {
    pub fn whole(cfg: &'a Cfg) -> Self {
        FlowGraph { cfg, entry: cfg.entry(), members: None }
    }

    pub fn restricted(cfg: &'a Cfg, scope: &Scope) -> Self {
        FlowGraph { cfg, entry: scope.header, members: Some(scope.member_set()) }
    }

    pub fn cfg(&self) -> &'a Cfg {
        self.cfg
    }

    pub fn entry(&self) -> NodeId {
        self.entry
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.members.as_ref().is_none_or(|m| m.contains(&v))
    }

    /// Member nodes in id order.
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.cfg.node_ids().filter(|&v| self.contains(v))
    }

    /// Out-edges of `v` staying inside the graph, with their CFG edge index.
    pub fn out_edges(&self, v: NodeId) -> impl Iterator<Item = (usize, &'a Edge)> + '_ {
        self.cfg.out_edges(v).filter(move |(_, e)| self.contains(e.dst))
    }
}

/// Worklist ordering. Reverse postorder retires loop bodies before their
/// continuations and is the default; FIFO exists to demonstrate the
/// fixpoint is schedule-independent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Schedule {
    ReversePostorder,
    Fifo,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SolveError {
    #[error("fixpoint did not stabilise within {limit} node visits")]
    IterationLimit { limit: usize },
}

/// Per-node states after convergence, indexed by node id.  `None` means
/// the node is outside the graph or unreachable from its entry.
#[derive(Debug, Clone)]
pub struct FixpointResult<S> {
    pub states: Vec<Option<S>>,
    pub iterations: usize,
}

pub(crate) enum Worklist {
    Rpo { heap: BinaryHeap<Reverse<(usize, u32)>>, order: Vec<usize> },
    Fifo(VecDeque<u32>),
}

impl Worklist {
    pub(crate) fn new(schedule: Schedule, graph: &FlowGraph) -> Worklist {
        match schedule {
            Schedule::ReversePostorder => {
                Worklist::Rpo { heap: BinaryHeap::new(), order: rpo_index(graph) }
            }
            Schedule::Fifo => Worklist::Fifo(VecDeque::new()),
        }
    }

    pub(crate) fn push(&mut self, v: NodeId) {
        match self {
            Worklist::Rpo { heap, order } => heap.push(Reverse((order[v.index()], v.0))),
            Worklist::Fifo(q) => q.push_back(v.0),
        }
    }

    pub(crate) fn pop(&mut self) -> Option<NodeId> {
        match self {
            Worklist::Rpo { heap, .. } => heap.pop().map(|Reverse((_, v))| NodeId(v)),
            Worklist::Fifo(q) => q.pop_front().map(NodeId),
        }
    }
}

/// Position of each node in reverse postorder of a depth-first search from
/// the entry (declaration-order successors).  Unreached nodes sort last.
fn rpo_index(graph: &FlowGraph) -> Vec<usize> {
    let n = graph.cfg().num_nodes();
    let succs = |v: NodeId| -> Vec<NodeId> { graph.out_edges(v).map(|(_, e)| e.dst).collect() };
    let mut visited = vec![false; n];
    let mut postorder = Vec::new();
    let entry = graph.entry();
    visited[entry.index()] = true;
    let mut stack = vec![(entry, succs(entry), 0usize)];
    while let Some(top) = stack.last_mut() {
        if top.2 < top.1.len() {
            let w = top.1[top.2];
            top.2 += 1;
            if !visited[w.index()] {
                visited[w.index()] = true;
                let sw = succs(w);
                stack.push((w, sw, 0));
            }
        } else {
            postorder.push(top.0);
            stack.pop();
        }
    }
    let mut index = vec![usize::MAX; n];
    for (i, v) in postorder.iter().rev().enumerate() {
        index[v.index()] = i;
    }
    index
}

pub fn solve<D: Domain>(
    domain: &mut D,
    graph: &FlowGraph,
    schedule: Schedule,
) -> Result<FixpointResult<D::State>, SolveError> {
    solve_with_limit(domain, graph, schedule, DEFAULT_ITERATION_LIMIT)
}

pub fn solve_with_limit<D: Domain>(
    domain: &mut D,
    graph: &FlowGraph,
    schedule: Schedule,
    limit: usize,
) -> Result<FixpointResult<D::State>, SolveError> {
    let n = graph.cfg().num_nodes();
    let mut states: Vec<Option<D::State>> = vec![None; n];
    let mut queued = vec![false; n];
    let mut worklist = Worklist::new(schedule, graph);

    let entry = graph.entry();
    states[entry.index()] = Some(domain.init_entry());
    queued[entry.index()] = true;
    worklist.push(entry);

    let mut iterations = 0usize;
    while let Some(v) = worklist.pop() {
        queued[v.index()] = false;
        iterations += 1;
        if iterations > limit {
            return Err(SolveError::IterationLimit { limit });
        }
        let src = states[v.index()].clone().expect("queued nodes carry a state");
        for (_, e) in graph.out_edges(v) {
            let flowed = domain.update(&src, &e.label);
            let dst = e.dst.index();
            let grown = match &states[dst] {
                None => flowed,
                Some(old) => {
                    let joined = domain.join(old, &flowed);
                    if joined == *old {
                        continue;
                    }
                    joined
                }
            };
            states[dst] = Some(grown);
            if !queued[dst] {
                queued[dst] = true;
                worklist.push(e.dst);
            }
        }
    }
    Ok(FixpointResult { states, iterations })
}

/// Verify a solution is a fixpoint: the entry covers the seed and every
/// in-graph edge's flow is covered by its target state.
pub fn check_fixpoint<D: Domain>(
    domain: &mut D,
    graph: &FlowGraph,
    result: &FixpointResult<D::State>,
) -> bool {
    let seed = domain.init_entry();
    match &result.states[graph.entry().index()] {
        None => return false,
        Some(s) => {
            if !domain.leq(&seed, s) {
                return false;
            }
        }
    }
    for v in graph.nodes() {
        let Some(src) = &result.states[v.index()] else { continue };
        let src = src.clone();
        for (_, e) in graph.out_edges(v) {
            let flowed = domain.update(&src, &e.label);
            let covered = match &result.states[e.dst.index()] {
                None => false,
                Some(dst) => domain.leq(&flowed, dst),
            };
            if !covered {
                return false;
            }
        }
    }
    true
}
