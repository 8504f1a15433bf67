//! Lockstep comparison of a subject domain against the diagram-backed
//! exact domain.
//!
//! Both domains advance over one shared worklist, so every intermediate
//! state the subject ever produces is compared against the exact state for
//! the same program point — after each edge transfer, after each join, and
//! for the final per-scope verdicts.  A *violation* is a state where the
//! subject claims persistence the exact analysis refutes: for a sound
//! domain that must never happen.  A *gap* is the opposite and merely
//! measures lost precision.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::cfg::{blocks_in_set, project_to_cache_set, BlockId, CacheConfig, Cfg, NodeId, Scope};
use crate::domain::{Domain, DomainKind};
use crate::domains::{BlockCs, CMust, GlobalCs, Must, Product};
use crate::exact::{ExactExplicit, ExactZdd, Tier};
use crate::solver::fixpoint::{FlowGraph, Schedule, SolveError, Worklist, DEFAULT_ITERATION_LIMIT};
use crate::solver::scope::{block_persistent, resolve_scopes, AnalyzeError, ScopeMode};

/// One point where the two domains disagreed; recorded once per
/// (cache set, scope, block), keeping the first node encountered.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Divergence {
    pub cache_set: u32,
    pub scope: String,
    pub node: String,
    pub block: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DifferentialReport {
    pub reference: String,
    pub subject: String,
    /// Subject persistent, reference not: soundness bugs.
    pub violations: Vec<Divergence>,
    /// Reference persistent, subject not: precision losses.
    pub gaps: Vec<Divergence>,
    /// Number of state pairs compared.
    pub compared: usize,
}

#[derive(Default)]
struct Collected {
    violations: Vec<Divergence>,
    gaps: Vec<Divergence>,
    seen_violation: BTreeSet<(u32, String, String)>,
    seen_gap: BTreeSet<(u32, String, String)>,
    compared: usize,
}

#[allow(clippy::too_many_arguments)]
fn compare_states<S: Domain>(
    reference: &mut ExactZdd,
    subject: &mut S,
    state_r: &<ExactZdd as Domain>::State,
    state_s: &S::State,
    node: NodeId,
    blocks: &[BlockId],
    cfg: &Cfg,
    scope: &Scope,
    set: u32,
    out: &mut Collected,
) {
    out.compared += 1;
    for &b in blocks {
        let exact = reference.classify(state_r, b);
        let claimed = subject.classify(state_s, b);
        if exact == claimed {
            continue;
        }
        let key = (set, scope.name.clone(), cfg.block_name(b).to_string());
        let record = Divergence {
            cache_set: set,
            scope: scope.name.clone(),
            node: cfg.node_name(node).to_string(),
            block: key.2.clone(),
        };
        if claimed {
            if out.seen_violation.insert(key) {
                out.violations.push(record);
            }
        } else if out.seen_gap.insert(key) {
            out.gaps.push(record);
        }
    }
}

fn diff_scope<S: Domain>(
    mut subject: S,
    cfg: &Cfg,
    scope: &Scope,
    k: u32,
    set: u32,
    out: &mut Collected,
) -> Result<(), SolveError> {
    let mut reference = ExactZdd::with_universe(k, cfg.block_ids());
    let graph = FlowGraph::restricted(cfg, scope);
    let blocks: Vec<BlockId> = cfg.block_ids().collect();
    let n = cfg.num_nodes();

    let mut states_r: Vec<Option<<ExactZdd as Domain>::State>> = vec![None; n];
    let mut states_s: Vec<Option<S::State>> = vec![None; n];
    let mut queued = vec![false; n];
    let mut worklist = Worklist::new(Schedule::ReversePostorder, &graph);

    let entry = graph.entry();
    let seed_r = reference.init_entry();
    let seed_s = subject.init_entry();
    compare_states(&mut reference, &mut subject, &seed_r, &seed_s, entry, &blocks, cfg, scope, set, out);
    states_r[entry.index()] = Some(seed_r);
    states_s[entry.index()] = Some(seed_s);
    queued[entry.index()] = true;
    worklist.push(entry);

    let mut iterations = 0usize;
    while let Some(v) = worklist.pop() {
        queued[v.index()] = false;
        iterations += 1;
        if iterations > DEFAULT_ITERATION_LIMIT {
            return Err(SolveError::IterationLimit { limit: DEFAULT_ITERATION_LIMIT });
        }
        let src_r = states_r[v.index()].clone().expect("queued nodes carry a state");
        let src_s = states_s[v.index()].clone().expect("queued nodes carry a state");
        for (_, e) in graph.out_edges(v) {
            let flowed_r = reference.update(&src_r, &e.label);
            let flowed_s = subject.update(&src_s, &e.label);
            compare_states(
                &mut reference, &mut subject, &flowed_r, &flowed_s, e.dst, &blocks, cfg, scope,
                set, out,
            );
            let dst = e.dst.index();
            let (next_r, grew_r) = match &states_r[dst] {
                None => (flowed_r, true),
                Some(old) => {
                    let joined = reference.join(old, &flowed_r);
                    let grew = joined != *old;
                    (joined, grew)
                }
            };
            let (next_s, grew_s) = match &states_s[dst] {
                None => (flowed_s, true),
                Some(old) => {
                    let joined = subject.join(old, &flowed_s);
                    let grew = joined != *old;
                    (joined, grew)
                }
            };
            compare_states(
                &mut reference, &mut subject, &next_r, &next_s, e.dst, &blocks, cfg, scope, set,
                out,
            );
            states_r[dst] = Some(next_r);
            states_s[dst] = Some(next_s);
            if (grew_r || grew_s) && !queued[dst] {
                queued[dst] = true;
                worklist.push(e.dst);
            }
        }
    }

    // Final per-scope verdicts: the aggregation over access nodes can mask
    // or surface divergences the per-state sweep did not.
    let result_r = crate::solver::fixpoint::FixpointResult { states: states_r, iterations };
    let result_s = crate::solver::fixpoint::FixpointResult { states: states_s, iterations };
    for &b in &blocks {
        let exact = block_persistent(&mut reference, &graph, &result_r, b);
        let claimed = block_persistent(&mut subject, &graph, &result_s, b);
        out.compared += 1;
        if exact == claimed {
            continue;
        }
        let key = (set, scope.name.clone(), cfg.block_name(b).to_string());
        let record = Divergence {
            cache_set: set,
            scope: scope.name.clone(),
            node: cfg.node_name(scope.header).to_string(),
            block: key.2.clone(),
        };
        if claimed {
            if out.seen_violation.insert(key) {
                out.violations.push(record);
            }
        } else if out.seen_gap.insert(key) {
            out.gaps.push(record);
        }
    }
    Ok(())
}

/// Run `subject` in lockstep with the exact domain over every scope of
/// every non-empty cache set.
pub fn run_differential(
    cfg: &Cfg,
    config: &CacheConfig,
    subject: DomainKind,
    mode: ScopeMode,
) -> Result<DifferentialReport, AnalyzeError> {
    config.validate()?;
    if subject.is_explicit_tier() && !cfg.has_only_single_accesses() {
        return Err(AnalyzeError::ExplicitTierLabels);
    }
    if subject == DomainKind::ExactExplicit0 && cfg.num_blocks() > 12 {
        return Err(AnalyzeError::TierZeroUniverse { blocks: cfg.num_blocks() });
    }
    let scopes = resolve_scopes(cfg, mode)?;
    let k = config.associativity;

    let mut out = Collected::default();
    for set in 0..config.num_sets {
        if config.num_sets > 1 && blocks_in_set(cfg, config, set).is_empty() {
            continue;
        }
        let projected = project_to_cache_set(cfg, config, set)?;
        for scope in &scopes {
            match subject {
                DomainKind::Must => diff_scope(Must::new(k), &projected, scope, k, set, &mut out),
                DomainKind::CMust => diff_scope(CMust::new(k), &projected, scope, k, set, &mut out),
                DomainKind::BlockCs => {
                    diff_scope(BlockCs::new(k), &projected, scope, k, set, &mut out)
                }
                DomainKind::GlobalCs => {
                    diff_scope(GlobalCs::new(k), &projected, scope, k, set, &mut out)
                }
                DomainKind::Product => {
                    diff_scope(Product::new(k), &projected, scope, k, set, &mut out)
                }
                DomainKind::Exact => diff_scope(
                    ExactZdd::with_universe(k, projected.block_ids()),
                    &projected,
                    scope,
                    k,
                    set,
                    &mut out,
                ),
                DomainKind::ExactExplicit0 => diff_scope(
                    ExactExplicit::new(k, Tier::Full),
                    &projected,
                    scope,
                    k,
                    set,
                    &mut out,
                ),
                DomainKind::ExactExplicitUp => diff_scope(
                    ExactExplicit::new(k, Tier::Maximal),
                    &projected,
                    scope,
                    k,
                    set,
                    &mut out,
                ),
                DomainKind::ExactExplicitK => diff_scope(
                    ExactExplicit::new(k, Tier::Bounded),
                    &projected,
                    scope,
                    k,
                    set,
                    &mut out,
                ),
                DomainKind::CMustOffByOne => {
                    diff_scope(CMust::off_by_one(k), &projected, scope, k, set, &mut out)
                }
            }?;
        }
    }

    Ok(DifferentialReport {
        reference: DomainKind::Exact.name().to_string(),
        subject: subject.name().to_string(),
        violations: out.violations,
        gaps: out.gaps,
        compared: out.compared,
    })
}
