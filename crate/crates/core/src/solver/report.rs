//! The result of a whole-program analysis, serialisable as JSON and
//! renderable as text.  Field order and row order are deterministic:
//! scopes appear per cache set in resolution order, blocks in id order,
//! verdicts in the domain order the caller selected.

use serde::Serialize;

/// Bumped whenever the JSON shape changes incompatibly.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnalysisReport {
    pub format_version: u32,
    pub associativity: u32,
    pub num_sets: u32,
    pub line_size: u32,
    pub domains: Vec<String>,
    pub scopes: Vec<ScopeResult>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScopeResult {
    pub cache_set: u32,
    pub scope: String,
    pub header: String,
    pub members: Vec<String>,
    /// One row per block mapped to this cache set.
    pub blocks: Vec<BlockVerdicts>,
    pub stats: Vec<DomainStat>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockVerdicts {
    pub block: String,
    pub verdicts: Vec<DomainVerdict>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DomainVerdict {
    pub domain: String,
    pub persistent: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DomainStat {
    pub domain: String,
    /// Worklist node visits until the fixpoint stabilised.
    pub iterations: usize,
    /// Decision-diagram size after solving, for diagram-backed domains.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zdd_nodes: Option<usize>,
}

pub fn render_text(report: &AnalysisReport) -> String {
    use std::fmt::Write;

    let mut out = String::new();
    let plural = |n: u32| if n == 1 { "" } else { "s" };
    let _ = writeln!(
        out,
        "persistence analysis: associativity {}, {} cache set{}, {}-byte lines",
        report.associativity,
        report.num_sets,
        plural(report.num_sets),
        report.line_size
    );
    let _ = writeln!(out, "domains: {}", report.domains.join(", "));

    if report.scopes.is_empty() {
        let _ = writeln!(out, "\nno scopes to analyse");
        return out;
    }

    for sr in &report.scopes {
        let _ = writeln!(
            out,
            "\nscope {} (set {}): header {}, members {}",
            sr.scope,
            sr.cache_set,
            sr.header,
            sr.members.join(" ")
        );
        if sr.blocks.is_empty() {
            let _ = writeln!(out, "  no blocks mapped to this set");
        } else {
            let block_w = sr
                .blocks
                .iter()
                .map(|b| b.block.len())
                .chain(std::iter::once("block".len()))
                .max()
                .unwrap();
            let dom_w: Vec<usize> = report.domains.iter().map(|d| d.len().max(3)).collect();
            let mut line = format!("  {:block_w$}", "block");
            for (name, w) in report.domains.iter().zip(&dom_w) {
                let _ = write!(line, "  {name:w$}");
            }
            let _ = writeln!(out, "{}", line.trim_end());
            for row in &sr.blocks {
                let mut line = format!("  {:block_w$}", row.block);
                for (v, w) in row.verdicts.iter().zip(&dom_w) {
                    let _ = write!(line, "  {:w$}", if v.persistent { "yes" } else { "no" });
                }
                let _ = writeln!(out, "{}", line.trim_end());
            }
        }
        let stats: Vec<String> = sr
            .stats
            .iter()
            .map(|s| match s.zdd_nodes {
                Some(n) => format!("{} {} visits ({} zdd nodes)", s.domain, s.iterations, n),
                None => format!("{} {} visits", s.domain, s.iterations),
            })
            .collect();
        let _ = writeln!(out, "  fixpoint: {}", stats.join(", "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> AnalysisReport {
        AnalysisReport {
            format_version: FORMAT_VERSION,
            associativity: 2,
            num_sets: 1,
            line_size: 16,
            domains: vec!["exact".into(), "cmust".into()],
            scopes: vec![ScopeResult {
                cache_set: 0,
                scope: "loop1".into(),
                header: "s0".into(),
                members: vec!["s0".into(), "s1".into()],
                blocks: vec![BlockVerdicts {
                    block: "x".into(),
                    verdicts: vec![
                        DomainVerdict { domain: "exact".into(), persistent: true },
                        DomainVerdict { domain: "cmust".into(), persistent: false },
                    ],
                }],
                stats: vec![
                    DomainStat { domain: "exact".into(), iterations: 6, zdd_nodes: Some(9) },
                    DomainStat { domain: "cmust".into(), iterations: 6, zdd_nodes: None },
                ],
            }],
        }
    }

    #[test]
    fn text_layout_is_stable() {
        let text = render_text(&sample());
        let expected = "\
persistence analysis: associativity 2, 1 cache set, 16-byte lines
domains: exact, cmust

scope loop1 (set 0): header s0, members s0 s1
  block  exact  cmust
  x      yes    no
  fixpoint: exact 6 visits (9 zdd nodes), cmust 6 visits
";
        assert_eq!(text, expected);
    }

    #[test]
    fn json_shape_has_the_format_version() {
        let json = serde_json::to_value(sample()).unwrap();
        assert_eq!(json["format_version"], 1);
        assert_eq!(json["scopes"][0]["blocks"][0]["verdicts"][1]["persistent"], false);
        // zdd_nodes is omitted for domains without a diagram.
        assert!(json["scopes"][0]["stats"][1].get("zdd_nodes").is_none());
    }
}
