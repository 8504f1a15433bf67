//! Natural-loop detection via dominator analysis.
//!
//! A back edge is an edge `u -> h` whose target dominates its source; the
//! natural loop of `h` contains every node that reaches `u` without passing
//! through `h`.  Graphs whose cycles are not all of this shape (irreducible
//! control flow) are rejected: the scope machinery presumes single-entry
//! loops.

use std::collections::VecDeque;

use super::{Cfg, CfgError, NodeId, Scope};

/// Detect natural loops and return them as scopes named `loop1`, `loop2`,
/// ..., innermost (smallest) first.  Loops sharing a header are merged.
pub fn detect_natural_loops(cfg: &Cfg) -> Result<Vec<Scope>, CfgError> {
    let n = cfg.num_nodes();
    let entry = cfg.entry().index();

    let mut succs: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in cfg.edges() {
        let (s, d) = (e.src.index(), e.dst.index());
        if !succs[s].contains(&d) {
            succs[s].push(d);
            preds[d].push(s);
        }
    }

    // Postorder over the successor lists (iterative DFS, declaration order).
    let mut postorder = Vec::with_capacity(n);
    {
        let mut visited = vec![false; n];
        let mut stack = vec![(entry, 0usize)];
        visited[entry] = true;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if *next < succs[v].len() {
                let w = succs[v][*next];
                *next += 1;
                if !visited[w] {
                    visited[w] = true;
                    stack.push((w, 0));
                }
            } else {
                postorder.push(v);
                stack.pop();
            }
        }
    }
    let mut rpo_index = vec![usize::MAX; n];
    for (i, &v) in postorder.iter().rev().enumerate() {
        rpo_index[v] = i;
    }

    // Iterative immediate-dominator computation over reverse postorder.
    let mut idom: Vec<Option<usize>> = vec![None; n];
    idom[entry] = Some(entry);
    let mut changed = true;
    while changed {
        changed = false;
        for &v in postorder.iter().rev() {
            if v == entry {
                continue;
            }
            let mut new_idom: Option<usize> = None;
            for &p in &preds[v] {
                if idom[p].is_none() {
                    continue;
                }
                new_idom = Some(match new_idom {
                    None => p,
                    Some(q) => intersect(&idom, &rpo_index, p, q),
                });
            }
            if new_idom != idom[v] {
                idom[v] = new_idom;
                changed = true;
            }
        }
    }

    let dominates = |h: usize, mut u: usize| -> bool {
        loop {
            if u == h {
                return true;
            }
            if u == entry {
                return false;
            }
            u = idom[u].expect("reachable node has a dominator");
        }
    };

    // Collect back edges and grow each header's loop body backwards.
    let mut loops: Vec<(usize, Vec<bool>)> = Vec::new(); // (header, member mask)
    let mut is_back_edge = vec![false; cfg.edges().len()];
    for (i, e) in cfg.edges().iter().enumerate() {
        let (u, h) = (e.src.index(), e.dst.index());
        if dominates(h, u) {
            is_back_edge[i] = true;
            let body = match loops.iter_mut().find(|(header, _)| *header == h) {
                Some((_, body)) => body,
                None => {
                    loops.push((h, vec![false; n]));
                    &mut loops.last_mut().unwrap().1
                }
            };
            body[h] = true;
            let mut queue = VecDeque::new();
            if !body[u] {
                body[u] = true;
                queue.push_back(u);
            }
            while let Some(v) = queue.pop_front() {
                for &p in &preds[v] {
                    if !body[p] {
                        body[p] = true;
                        queue.push_back(p);
                    }
                }
            }
        }
    }

    // With all back edges removed the graph must be acyclic, otherwise some
    // cycle has no dominating header.
    let mut indeg = vec![0usize; n];
    for (i, e) in cfg.edges().iter().enumerate() {
        if !is_back_edge[i] {
            indeg[e.dst.index()] += 1;
        }
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut processed = 0;
    while let Some(v) = queue.pop_front() {
        processed += 1;
        for (i, e) in cfg.edges().iter().enumerate() {
            if !is_back_edge[i] && e.src.index() == v {
                indeg[e.dst.index()] -= 1;
                if indeg[e.dst.index()] == 0 {
                    queue.push_back(e.dst.index());
                }
            }
        }
    }
    if processed < n {
        return Err(CfgError::IrreducibleLoop);
    }

    let mut result: Vec<(usize, Vec<NodeId>)> = loops
        .into_iter()
        .map(|(h, body)| {
            let members: Vec<NodeId> =
                (0..n).filter(|&v| body[v]).map(|v| NodeId(v as u32)).collect();
            (h, members)
        })
        .collect();
    result.sort_by_key(|(h, members)| (members.len(), *h));
    Ok(result
        .into_iter()
        .enumerate()
        .map(|(i, (h, members))| Scope {
            name: format!("loop{}", i + 1),
            header: NodeId(h as u32),
            members,
        })
        .collect())
}

/// Walk two dominator chains to their common ancestor (ancestors have
/// smaller reverse-postorder indices).
fn intersect(idom: &[Option<usize>], rpo_index: &[usize], mut a: usize, mut b: usize) -> usize {
    while a != b {
        while rpo_index[a] > rpo_index[b] {
            a = idom[a].expect("processed node has a dominator");
        }
        while rpo_index[b] > rpo_index[a] {
            b = idom[b].expect("processed node has a dominator");
        }
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfg::parse_cfg;
    use crate::corpus;

    #[test]
    fn single_loop_with_its_body() {
        let cfg = parse_cfg(corpus::FIG4).unwrap();
        let loops = detect_natural_loops(&cfg).unwrap();
        assert_eq!(loops.len(), 1);
        assert_eq!(loops[0].name, "loop1");
        assert_eq!(cfg.node_name(loops[0].header), "l2");
        let names: Vec<_> = loops[0].members.iter().map(|m| cfg.node_name(*m)).collect();
        assert_eq!(names, ["l2", "l3"]);
    }

    #[test]
    fn nested_loops_innermost_first() {
        let cfg = parse_cfg(corpus::FIG6).unwrap();
        let loops = detect_natural_loops(&cfg).unwrap();
        assert_eq!(loops.len(), 2);
        assert_eq!(cfg.node_name(loops[0].header), "s2");
        assert_eq!(loops[0].members.len(), 2);
        assert_eq!(cfg.node_name(loops[1].header), "s0");
        assert_eq!(loops[1].members.len(), 4);
    }

    #[test]
    fn acyclic_graph_has_no_loops() {
        let cfg = parse_cfg("entry a;\nnode a;\nnode b;\nedge a -> b;\n").unwrap();
        assert!(detect_natural_loops(&cfg).unwrap().is_empty());
    }

    #[test]
    fn self_loop_is_its_own_scope() {
        let cfg = parse_cfg("entry a;\nnode a;\nedge a -> a access x;\n").unwrap();
        let loops = detect_natural_loops(&cfg).unwrap();
        assert_eq!(loops.len(), 1);
        assert_eq!(loops[0].members.len(), 1);
    }

    #[test]
    fn irreducible_cycles_are_rejected() {
        // Two-entry cycle: neither a nor b dominates the other.
        let cfg = parse_cfg(
            "entry e;\nnode e; node a; node b;\n\
             edge e -> a;\nedge e -> b;\nedge a -> b;\nedge b -> a;\n",
        )
        .unwrap();
        assert_eq!(detect_natural_loops(&cfg).unwrap_err(), CfgError::IrreducibleLoop);
    }
}
