//! Fixpoint solving and everything built on top of it: per-scope
//! classification, whole-program reports, differential comparison of two
//! domains, and constraint emission for downstream WCET solvers.

mod constraints;
mod differential;
mod fixpoint;
mod report;
mod scope;

pub use constraints::emit_persistence_constraints;
pub use differential::{DifferentialReport, Divergence, run_differential};
pub use fixpoint::{
    check_fixpoint, solve, solve_with_limit, FixpointResult, FlowGraph, Schedule, SolveError,
    DEFAULT_ITERATION_LIMIT,
};
pub use report::{
    render_text, AnalysisReport, BlockVerdicts, DomainStat, DomainVerdict, ScopeResult,
    FORMAT_VERSION,
};
pub use scope::{
    analyze_program, classify_scope, resolve_scopes, AnalyzeError, ScopeMode, ScopeOutcome,
};
