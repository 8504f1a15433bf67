//! Emission of persistence constraints for a path-analysis ILP.
//!
//! For every block proven persistent in a scope by at least one selected
//! domain, the miss count of that block is bounded by the number of times
//! the scope is entered: `m_<block>_<scope> <= entries_<scope>;`.  Only
//! blocks explicitly named on an edge inside the scope get a constraint —
//! a block that is merely *possibly* touched by an unknown access has no
//! miss variable of its own, and a never-accessed block needs no bound.

use std::collections::BTreeSet;

use crate::cfg::{Cfg, NodeId};
use crate::solver::report::AnalysisReport;

/// Render the constraints for `report`, one per line, sorted by scope then
/// block.  `cfg` must be the program the report was computed from.
pub fn emit_persistence_constraints(report: &AnalysisReport, cfg: &Cfg) -> String {
    let mut constrained: BTreeSet<(String, String)> = BTreeSet::new();
    for sr in &report.scopes {
        let members: BTreeSet<NodeId> = sr
            .members
            .iter()
            .map(|m| cfg.node_id(m).expect("report references a node missing from the program"))
            .collect();
        for row in &sr.blocks {
            if !row.verdicts.iter().any(|v| v.persistent) {
                continue;
            }
            let b = cfg
                .block_id(&row.block)
                .expect("report references a block missing from the program");
            let named_inside = cfg.edges().iter().any(|e| {
                members.contains(&e.src)
                    && members.contains(&e.dst)
                    && e.label.named_blocks().contains(&b)
            });
            if named_inside {
                constrained.insert((sr.scope.clone(), row.block.clone()));
            }
        }
    }
    let mut out = String::new();
    for (scope, block) in constrained {
        out.push_str(&format!("m_{block}_{scope} <= entries_{scope};\n"));
    }
    out
}
