//! Persistence scopes and whole-program analysis.
//!
//! A block's verdict is always relative to a scope: the allowance of one
//! miss is granted per scope entrance.  The fixpoint therefore runs on the
//! scope's member-induced subgraph with the empty-trace state seeded at
//! the scope header, and a block counts as persistent iff the verdict
//! holds at every member node that may access it.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::cfg::{
    blocks_in_set, detect_natural_loops, project_to_cache_set, BlockId, CacheConfig, Cfg,
    CfgError, Scope,
};
use crate::domain::{Domain, DomainKind};
use crate::domains::{BlockCs, CMust, GlobalCs, Must, Product};
use crate::exact::{ExactExplicit, ExactZdd, Tier};
use crate::solver::fixpoint::{solve, FixpointResult, FlowGraph, Schedule, SolveError};
use crate::solver::report::{
    AnalysisReport, BlockVerdicts, DomainStat, DomainVerdict, ScopeResult, FORMAT_VERSION,
};

/// Where the persistence scopes come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScopeMode {
    /// Scopes declared in the input, and nothing else.
    Explicit,
    /// Declared scopes if any; otherwise the natural loops of the graph.
    Auto,
    /// One scope spanning the whole program.
    Whole,
}

impl ScopeMode {
    pub fn name(self) -> &'static str {
        match self {
            ScopeMode::Explicit => "explicit",
            ScopeMode::Auto => "auto",
            ScopeMode::Whole => "whole",
        }
    }

    pub fn parse(name: &str) -> Option<ScopeMode> {
        [ScopeMode::Explicit, ScopeMode::Auto, ScopeMode::Whole]
            .into_iter()
            .find(|m| m.name() == name)
    }
}

impl std::fmt::Display for ScopeMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

pub fn resolve_scopes(cfg: &Cfg, mode: ScopeMode) -> Result<Vec<Scope>, CfgError> {
    match mode {
        ScopeMode::Explicit => Ok(cfg.scopes().to_vec()),
        ScopeMode::Auto => {
            if cfg.scopes().is_empty() {
                detect_natural_loops(cfg)
            } else {
                Ok(cfg.scopes().to_vec())
            }
        }
        ScopeMode::Whole => Ok(vec![Scope {
            name: "program".to_string(),
            header: cfg.entry(),
            members: cfg.node_ids().collect(),
        }]),
    }
}

/// Verdicts of one domain for one scope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScopeOutcome {
    pub persistent: BTreeSet<BlockId>,
    pub iterations: usize,
    pub zdd_nodes: Option<usize>,
}

/// Is `b` persistent in the scope: every member node with an out-edge that
/// may access `b` carries a state proving the next access fits.  Nodes the
/// fixpoint never reached cannot execute inside the scope and are vacuous.
pub(crate) fn block_persistent<D: Domain>(
    domain: &mut D,
    graph: &FlowGraph,
    result: &FixpointResult<D::State>,
    b: BlockId,
) -> bool {
    for v in graph.nodes() {
        if !graph.out_edges(v).any(|(_, e)| e.label.may_access(b)) {
            continue;
        }
        match &result.states[v.index()] {
            None => continue,
            Some(s) => {
                if !domain.classify(s, b) {
                    return false;
                }
            }
        }
    }
    true
}

fn run_scope<D: Domain>(
    mut domain: D,
    cfg: &Cfg,
    scope: &Scope,
    schedule: Schedule,
) -> Result<ScopeOutcome, SolveError> {
    let graph = FlowGraph::restricted(cfg, scope);
    let result = solve(&mut domain, &graph, schedule)?;
    let mut persistent = BTreeSet::new();
    for b in cfg.block_ids() {
        if block_persistent(&mut domain, &graph, &result, b) {
            persistent.insert(b);
        }
    }
    Ok(ScopeOutcome { persistent, iterations: result.iterations, zdd_nodes: domain.zdd_node_count() })
}

pub fn classify_scope(
    cfg: &Cfg,
    scope: &Scope,
    kind: DomainKind,
    k: u32,
    schedule: Schedule,
) -> Result<ScopeOutcome, SolveError> {
    match kind {
        DomainKind::Must => run_scope(Must::new(k), cfg, scope, schedule),
        DomainKind::CMust => run_scope(CMust::new(k), cfg, scope, schedule),
        DomainKind::BlockCs => run_scope(BlockCs::new(k), cfg, scope, schedule),
        DomainKind::GlobalCs => run_scope(GlobalCs::new(k), cfg, scope, schedule),
        DomainKind::Product => run_scope(Product::new(k), cfg, scope, schedule),
        DomainKind::Exact => {
            run_scope(ExactZdd::with_universe(k, cfg.block_ids()), cfg, scope, schedule)
        }
        DomainKind::ExactExplicit0 => run_scope(ExactExplicit::new(k, Tier::Full), cfg, scope, schedule),
        DomainKind::ExactExplicitUp => {
            run_scope(ExactExplicit::new(k, Tier::Maximal), cfg, scope, schedule)
        }
        DomainKind::ExactExplicitK => {
            run_scope(ExactExplicit::new(k, Tier::Bounded), cfg, scope, schedule)
        }
        DomainKind::CMustOffByOne => run_scope(CMust::off_by_one(k), cfg, scope, schedule),
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum AnalyzeError {
    #[error("no analysis domain selected")]
    NoDomainSelected,
    #[error(transparent)]
    Cfg(#[from] CfgError),
    #[error(
        "raw explicit families are limited to 12 blocks, the input names {blocks}; \
         use the diagram-backed domain instead"
    )]
    TierZeroUniverse { blocks: usize },
    #[error("explicit-tier domains support only single-block and empty access labels")]
    ExplicitTierLabels,
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Analyse every selected domain over every scope of every non-empty cache
/// set; the report preserves set, scope, and domain order.
pub fn analyze_program(
    cfg: &Cfg,
    config: &CacheConfig,
    domains: &[DomainKind],
    mode: ScopeMode,
) -> Result<AnalysisReport, AnalyzeError> {
    if domains.is_empty() {
        return Err(AnalyzeError::NoDomainSelected);
    }
    let mut selected: Vec<DomainKind> = Vec::new();
    for &d in domains {
        if !selected.contains(&d) {
            selected.push(d);
        }
    }
    config.validate()?;
    if selected.iter().any(|d| d.is_explicit_tier()) && !cfg.has_only_single_accesses() {
        return Err(AnalyzeError::ExplicitTierLabels);
    }
    if selected.contains(&DomainKind::ExactExplicit0) && cfg.num_blocks() > 12 {
        return Err(AnalyzeError::TierZeroUniverse { blocks: cfg.num_blocks() });
    }
    let scopes = resolve_scopes(cfg, mode)?;
    let k = config.associativity;

    // Project the program onto each cache set once; sets without blocks are
    // skipped (unless the cache has a single set, which changes nothing).
    let mut sets: Vec<(u32, Cfg, Vec<BlockId>)> = Vec::new();
    for set in 0..config.num_sets {
        let blocks = blocks_in_set(cfg, config, set);
        if blocks.is_empty() && config.num_sets > 1 {
            continue;
        }
        let projected = project_to_cache_set(cfg, config, set)?;
        sets.push((set, projected, blocks));
    }

    let mut tasks: Vec<(usize, usize, DomainKind)> = Vec::new();
    for si in 0..sets.len() {
        for sci in 0..scopes.len() {
            for &d in &selected {
                tasks.push((si, sci, d));
            }
        }
    }
    let outcomes = tasks
        .par_iter()
        .map(|&(si, sci, d)| {
            classify_scope(&sets[si].1, &scopes[sci], d, k, Schedule::ReversePostorder)
        })
        .collect::<Result<Vec<ScopeOutcome>, SolveError>>()?;

    let mut scope_results = Vec::new();
    let mut cursor = 0;
    for (set, _, blocks) in &sets {
        for scope in &scopes {
            let per_domain = &outcomes[cursor..cursor + selected.len()];
            cursor += selected.len();
            let rows = blocks
                .iter()
                .map(|&b| BlockVerdicts {
                    block: cfg.block_name(b).to_string(),
                    verdicts: selected
                        .iter()
                        .zip(per_domain)
                        .map(|(&d, o)| DomainVerdict {
                            domain: d.name().to_string(),
                            persistent: o.persistent.contains(&b),
                        })
                        .collect(),
                })
                .collect();
            let stats = selected
                .iter()
                .zip(per_domain)
                .map(|(&d, o)| DomainStat {
                    domain: d.name().to_string(),
                    iterations: o.iterations,
                    zdd_nodes: o.zdd_nodes,
                })
                .collect();
            scope_results.push(ScopeResult {
                cache_set: *set,
                scope: scope.name.clone(),
                header: cfg.node_name(scope.header).to_string(),
                members: scope.members.iter().map(|&m| cfg.node_name(m).to_string()).collect(),
                blocks: rows,
                stats,
            });
        }
    }

    Ok(AnalysisReport {
        format_version: FORMAT_VERSION,
        associativity: k,
        num_sets: config.num_sets,
        line_size: config.line_size,
        domains: selected.iter().map(|d| d.name().to_string()).collect(),
        scopes: scope_results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfg::{AccessLabel, CfgBuilder};
    use crate::corpus;

    fn scope_verdict(cfg: &Cfg, scope: &Scope, kind: DomainKind, k: u32, block: &str) -> bool {
        let b = cfg.block_id(block).unwrap();
        let out = classify_scope(cfg, scope, kind, k, Schedule::ReversePostorder).unwrap();
        out.persistent.contains(&b)
    }

    #[test]
    fn scope_modes_resolve_as_documented() {
        let fig1 = corpus::parse("fig1"); // has a declared scope
        let fig3 = corpus::parse("fig3"); // same shape, none declared

        let explicit = resolve_scopes(&fig1, ScopeMode::Explicit).unwrap();
        assert_eq!(explicit.len(), 1);
        assert_eq!(explicit[0].name, "loop1");
        assert!(resolve_scopes(&fig3, ScopeMode::Explicit).unwrap().is_empty());

        let auto = resolve_scopes(&fig3, ScopeMode::Auto).unwrap();
        assert_eq!(auto.len(), 1);
        assert_eq!(fig3.node_name(auto[0].header), "s0");

        let whole = resolve_scopes(&fig3, ScopeMode::Whole).unwrap();
        assert_eq!(whole[0].name, "program");
        assert_eq!(whole[0].members.len(), fig3.num_nodes());
    }

    #[test]
    fn alternating_loop_splits_the_domains() {
        // Two blocks alternating in a loop, k = 2: the conflict set of
        // either block is {x, y}, so set-based domains prove persistence
        // while counting-based ones double-count and fail.
        let cfg = corpus::parse("fig1");
        let scope = cfg.scopes()[0].clone();
        for block in ["x", "y"] {
            for kind in [DomainKind::Exact, DomainKind::BlockCs, DomainKind::GlobalCs, DomainKind::Product]
            {
                assert!(scope_verdict(&cfg, &scope, kind, 2, block), "{kind} {block}");
            }
            for kind in [DomainKind::Must, DomainKind::CMust] {
                assert!(!scope_verdict(&cfg, &scope, kind, 2, block), "{kind} {block}");
            }
        }
    }

    #[test]
    fn never_accessed_blocks_are_persistent_in_every_domain() {
        let mut b = CfgBuilder::new();
        let v0 = b.add_node("v0", None).unwrap();
        let v1 = b.add_node("v1", None).unwrap();
        b.set_entry(v0).unwrap();
        let x = b.intern_block("x");
        b.declare_block("idle", None).unwrap();
        b.add_edge(v0, AccessLabel::Single(x), v1);
        b.add_edge(v1, AccessLabel::Empty, v0);
        let cfg = b.finish().unwrap();
        let scope =
            Scope { name: "all".into(), header: cfg.entry(), members: cfg.node_ids().collect() };
        for &kind in DomainKind::PUBLIC {
            assert!(scope_verdict(&cfg, &scope, kind, 1, "idle"), "{kind}");
        }
    }

    #[test]
    fn report_covers_sets_scopes_and_domains_in_order() {
        let cfg = corpus::parse("fig1");
        let config = CacheConfig { associativity: 2, num_sets: 4, line_size: 16 };
        let domains = [DomainKind::Exact, DomainKind::CMust, DomainKind::Exact];
        let report = analyze_program(&cfg, &config, &domains, ScopeMode::Auto).unwrap();
        // Duplicates collapse; x and y share cache set 0, other sets are
        // skipped as blockless.
        assert_eq!(report.domains, vec!["exact", "cmust"]);
        assert_eq!(report.scopes.len(), 1);
        let sr = &report.scopes[0];
        assert_eq!((sr.cache_set, sr.scope.as_str()), (0, "loop1"));
        assert_eq!(sr.blocks.len(), 2);
        let x = &sr.blocks[0];
        assert_eq!(x.block, "x");
        assert!(x.verdicts[0].persistent);
        assert!(!x.verdicts[1].persistent);
        assert!(sr.stats[0].zdd_nodes.is_some());
        assert!(sr.stats[1].zdd_nodes.is_none());
    }

    #[test]
    fn guards_reject_unsupported_requests() {
        let cfg = corpus::parse("fig1");
        let config = CacheConfig::fully_associative(2);
        assert_eq!(
            analyze_program(&cfg, &config, &[], ScopeMode::Auto),
            Err(AnalyzeError::NoDomainSelected)
        );

        // Unknown labels are not enumerable by the explicit tiers.
        let mut b = CfgBuilder::new();
        let v0 = b.add_node("v0", None).unwrap();
        b.set_entry(v0).unwrap();
        b.add_edge(v0, AccessLabel::Unknown, v0);
        let unknown = b.finish().unwrap();
        assert_eq!(
            analyze_program(&unknown, &config, &[DomainKind::ExactExplicit0], ScopeMode::Whole),
            Err(AnalyzeError::ExplicitTierLabels)
        );
        // ... but the diagram-backed domain handles them.
        assert!(analyze_program(&unknown, &config, &[DomainKind::Exact], ScopeMode::Whole).is_ok());

        // The raw tier refuses universes past 12 blocks.
        let mut b = CfgBuilder::new();
        let v0 = b.add_node("v0", None).unwrap();
        b.set_entry(v0).unwrap();
        for i in 0..13 {
            let blk = b.intern_block(&format!("b{i}"));
            b.add_edge(v0, AccessLabel::Single(blk), v0);
        }
        let wide = b.finish().unwrap();
        assert_eq!(
            analyze_program(&wide, &config, &[DomainKind::ExactExplicit0], ScopeMode::Whole),
            Err(AnalyzeError::TierZeroUniverse { blocks: 13 })
        );
        assert!(analyze_program(&wide, &config, &[DomainKind::ExactExplicitK], ScopeMode::Whole)
            .is_ok());
    }
}
