//! Zero-suppressed decision diagrams (ZDDs) over `u32` variables, with the
//! antichain operations the exact persistence domain is built on: `max_set`
//! (thin a family to its maximal sets), `max_union` (union then thin) and
//! `max_dot_product` (all pairwise unions, then thin).
//!
//! A handle denotes a family of variable sets.  The representation is
//! canonical per manager: structurally equal families always share one
//! handle, so family equality is handle equality.  Two terminals exist:
//! [`Zdd::EMPTY`] is the family with no sets, [`Zdd::BASE`] the family
//! containing only the empty set.  Along every root-to-terminal path
//! variables strictly increase, and a node whose `hi` child is `EMPTY` is
//! never materialised (zero-suppression), so families with few, sparse sets
//! stay small regardless of the variable universe.
//!
//! All operations memoise on handles.  Handles stay valid for the lifetime
//! of the manager; [`Zdd::clear_op_caches`] drops only the memo tables.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::family::Family;

/// Reference to a family stored in a [`Zdd`] manager.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Handle(u32);

#[derive(Clone, Copy)]
struct NodeRec {
    var: u32,
    lo: Handle,
    hi: Handle,
}

/// Variable value reported for terminals; larger than any real variable so
/// that "smallest top variable" logic needs no special cases.
const TERMINAL_VAR: u32 = u32::MAX;

/// Manager owning the node arena, the unique table and the operation caches.
pub struct Zdd {
    nodes: Vec<NodeRec>,
    unique: HashMap<(u32, Handle, Handle), Handle>,
    union_cache: HashMap<(Handle, Handle), Handle>,
    nss_cache: HashMap<(Handle, Handle), Handle>,
    max_set_cache: HashMap<Handle, Handle>,
    max_union_cache: HashMap<(Handle, Handle), Handle>,
    mdp_cache: HashMap<(Handle, Handle), Handle>,
    max_card_cache: HashMap<Handle, usize>,
    count_cache: HashMap<Handle, u64>,
}

impl Default for Zdd {
    fn default() -> Self {
        Zdd::new()
    }
}

impl Zdd {
    /// The family with no sets (neutral for union, annihilator for the dot
    /// product).
    pub const EMPTY: Handle = Handle(0);
    /// The family `{∅}` (neutral for the dot product).
    pub const BASE: Handle = Handle(1);

    pub fn new() -> Self {
        let terminal = NodeRec { var: TERMINAL_VAR, lo: Self::EMPTY, hi: Self::EMPTY };
        Zdd {
            nodes: vec![terminal, terminal],
            unique: HashMap::new(),
            union_cache: HashMap::new(),
            nss_cache: HashMap::new(),
            max_set_cache: HashMap::new(),
            max_union_cache: HashMap::new(),
            mdp_cache: HashMap::new(),
            max_card_cache: HashMap::new(),
            count_cache: HashMap::new(),
        }
    }

    fn var(&self, h: Handle) -> u32 {
        self.nodes[h.0 as usize].var
    }

    fn lo(&self, h: Handle) -> Handle {
        self.nodes[h.0 as usize].lo
    }

    fn hi(&self, h: Handle) -> Handle {
        self.nodes[h.0 as usize].hi
    }

    pub fn is_terminal(h: Handle) -> bool {
        h == Self::EMPTY || h == Self::BASE
    }

    /// Hash-consed node constructor; applies the zero-suppression rule.
    fn make_node(&mut self, var: u32, lo: Handle, hi: Handle) -> Handle {
        if hi == Self::EMPTY {
            return lo;
        }
        debug_assert!(var < self.var(lo) && var < self.var(hi), "variable order violated");
        *self.unique.entry((var, lo, hi)).or_insert_with(|| {
            let h = Handle(self.nodes.len() as u32);
            self.nodes.push(NodeRec { var, lo, hi });
            h
        })
    }

    /// The family `{{v}}`.
    pub fn singleton_family(&mut self, v: u32) -> Handle {
        self.make_node(v, Self::EMPTY, Self::BASE)
    }

    /// Build a family from an explicit set list.
    pub fn from_sets(&mut self, sets: &Family<u32>) -> Handle {
        let mut acc = Self::EMPTY;
        for set in sets {
            let mut h = Self::BASE;
            for &v in set.iter().rev() {
                h = self.make_node(v, Self::EMPTY, h);
            }
            acc = self.union(acc, h);
        }
        acc
    }

    /// Enumerate the family explicitly (each set sorted; sets in canonical
    /// order).  Intended for tests and small dumps only.
    pub fn enumerate(&self, h: Handle) -> Family<u32> {
        fn walk(zdd: &Zdd, h: Handle, prefix: &mut Vec<u32>, out: &mut Family<u32>) {
            if h == Zdd::EMPTY {
                return;
            }
            if h == Zdd::BASE {
                out.insert(prefix.iter().copied().collect());
                return;
            }
            walk(zdd, zdd.lo(h), prefix, out);
            prefix.push(zdd.var(h));
            walk(zdd, zdd.hi(h), prefix, out);
            prefix.pop();
        }
        let mut out = Family::new();
        walk(self, h, &mut Vec::new(), &mut out);
        out
    }

    /// Plain family union.
    pub fn union(&mut self, a: Handle, b: Handle) -> Handle {
        if a == Self::EMPTY {
            return b;
        }
        if b == Self::EMPTY || a == b {
            return a;
        }
        let key = if a <= b { (a, b) } else { (b, a) };
        if let Some(&r) = self.union_cache.get(&key) {
            return r;
        }
        let (va, vb) = (self.var(a), self.var(b));
        let v = va.min(vb);
        let r = if va < vb {
            let (lo, hi) = (self.lo(a), self.hi(a));
            let l = self.union(lo, b);
            self.make_node(v, l, hi)
        } else if vb < va {
            let (lo, hi) = (self.lo(b), self.hi(b));
            let l = self.union(a, lo);
            self.make_node(v, l, hi)
        } else {
            let (alo, ahi) = (self.lo(a), self.hi(a));
            let (blo, bhi) = (self.lo(b), self.hi(b));
            let l = self.union(alo, blo);
            let h = self.union(ahi, bhi);
            self.make_node(v, l, h)
        };
        self.union_cache.insert(key, r);
        r
    }

    /// `{a ∈ A | no b ∈ B has a ⊆ b}` — the sets of `A` not dominated by
    /// any set of `B`.  The workhorse behind every antichain operation.
    pub fn not_sub_set(&mut self, a: Handle, b: Handle) -> Handle {
        if a == Self::EMPTY || a == b {
            return Self::EMPTY;
        }
        if b == Self::EMPTY {
            return a;
        }
        if a == Self::BASE {
            // ∅ is a subset of every set; B is nonempty here.
            return Self::EMPTY;
        }
        let key = (a, b);
        if let Some(&r) = self.nss_cache.get(&key) {
            return r;
        }
        let (va, vb) = (self.var(a), self.var(b));
        let r = if va < vb {
            // Sets containing va cannot be covered: no B set has va.
            let (lo, hi) = (self.lo(a), self.hi(a));
            let l = self.not_sub_set(lo, b);
            self.make_node(va, l, hi)
        } else if vb < va {
            // vb appears in no A set, so covering sets may keep or drop it.
            let merged = {
                let (blo, bhi) = (self.lo(b), self.hi(b));
                self.union(blo, bhi)
            };
            self.not_sub_set(a, merged)
        } else {
            let (alo, ahi) = (self.lo(a), self.hi(a));
            let (blo, bhi) = (self.lo(b), self.hi(b));
            let merged = self.union(blo, bhi);
            let l = self.not_sub_set(alo, merged);
            let h = self.not_sub_set(ahi, bhi);
            self.make_node(va, l, h)
        };
        self.nss_cache.insert(key, r);
        r
    }

    /// Thin a family to its maximal sets.
    pub fn max_set(&mut self, f: Handle) -> Handle {
        if Self::is_terminal(f) {
            return f;
        }
        if let Some(&r) = self.max_set_cache.get(&f) {
            return r;
        }
        let v = self.var(f);
        let (lo, hi) = (self.lo(f), self.hi(f));
        let m1 = self.max_set(hi);
        let m0 = self.max_set(lo);
        // A set without v survives only if no hi-side set (which gains v)
        // contains it.
        let l = self.not_sub_set(m0, m1);
        let r = self.make_node(v, l, m1);
        self.max_set_cache.insert(f, r);
        r
    }

    /// `max_set(a ∪ b)`, fused so intermediate families never materialise.
    pub fn max_union(&mut self, a: Handle, b: Handle) -> Handle {
        if a == Self::EMPTY {
            return self.max_set(b);
        }
        if b == Self::EMPTY || a == b {
            return self.max_set(a);
        }
        let key = if a <= b { (a, b) } else { (b, a) };
        if let Some(&r) = self.max_union_cache.get(&key) {
            return r;
        }
        let (va, vb) = (self.var(a), self.var(b));
        let v = va.min(vb);
        // Decompose both operands at v; the side whose top variable is
        // larger contributes nothing to the hi-branch.
        let (a0, a1) = if va == v { (self.lo(a), self.hi(a)) } else { (a, Self::EMPTY) };
        let (b0, b1) = if vb == v { (self.lo(b), self.hi(b)) } else { (b, Self::EMPTY) };
        let r1 = self.max_union(a1, b1);
        let r0 = self.max_union(a0, b0);
        let l = self.not_sub_set(r0, r1);
        let r = self.make_node(v, l, r1);
        self.max_union_cache.insert(key, r);
        r
    }

    /// `max_set({s ∪ t | s ∈ a, t ∈ b})` — all pairwise unions, thinned.
    pub fn max_dot_product(&mut self, a: Handle, b: Handle) -> Handle {
        if a == Self::EMPTY || b == Self::EMPTY {
            return Self::EMPTY;
        }
        if a == Self::BASE {
            return self.max_set(b);
        }
        if b == Self::BASE {
            return self.max_set(a);
        }
        let key = if a <= b { (a, b) } else { (b, a) };
        if let Some(&r) = self.mdp_cache.get(&key) {
            return r;
        }
        let (va, vb) = (self.var(a), self.var(b));
        let v = va.min(vb);
        let r = if va == vb {
            let (a0, a1) = (self.lo(a), self.hi(a));
            let (b0, b1) = (self.lo(b), self.hi(b));
            // Products containing v: at least one factor took its hi branch.
            let p01 = self.max_dot_product(a0, b1);
            let p10 = self.max_dot_product(a1, b0);
            let p11 = self.max_dot_product(a1, b1);
            let r1 = self.max_union(p01, p10);
            let r1 = self.max_union(r1, p11);
            let r0 = self.max_dot_product(a0, b0);
            let l = self.not_sub_set(r0, r1);
            self.make_node(v, l, r1)
        } else {
            // Only one operand mentions v; the other factors in unchanged.
            let (x, other) = if va < vb { (a, b) } else { (b, a) };
            let (x0, x1) = (self.lo(x), self.hi(x));
            let r1 = self.max_dot_product(x1, other);
            let r0 = self.max_dot_product(x0, other);
            let l = self.not_sub_set(r0, r1);
            self.make_node(v, l, r1)
        };
        self.mdp_cache.insert(key, r);
        r
    }

    /// Size of the largest set in the family (0 for `EMPTY` and `BASE`).
    pub fn max_cardinality(&mut self, h: Handle) -> usize {
        if Self::is_terminal(h) {
            return 0;
        }
        if let Some(&r) = self.max_card_cache.get(&h) {
            return r;
        }
        let (lo, hi) = (self.lo(h), self.hi(h));
        let r = self.max_cardinality(lo).max(self.max_cardinality(hi) + 1);
        self.max_card_cache.insert(h, r);
        r
    }

    /// Number of sets in the family (saturating).
    pub fn count_sets(&mut self, h: Handle) -> u64 {
        if h == Self::EMPTY {
            return 0;
        }
        if h == Self::BASE {
            return 1;
        }
        if let Some(&r) = self.count_cache.get(&h) {
            return r;
        }
        let (lo, hi) = (self.lo(h), self.hi(h));
        let r = self.count_sets(lo).saturating_add(self.count_sets(hi));
        self.count_cache.insert(h, r);
        r
    }

    /// Total internal (non-terminal) nodes ever allocated by this manager.
    pub fn num_nodes(&self) -> usize {
        self.nodes.len() - 2
    }

    /// Internal nodes reachable from any of the given roots.
    pub fn reachable_node_count(&self, roots: impl IntoIterator<Item = Handle>) -> usize {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack: Vec<Handle> = roots.into_iter().collect();
        let mut count = 0;
        while let Some(h) = stack.pop() {
            if Self::is_terminal(h) || seen[h.0 as usize] {
                continue;
            }
            seen[h.0 as usize] = true;
            count += 1;
            stack.push(self.lo(h));
            stack.push(self.hi(h));
        }
        count
    }

    /// Drop the operation memo tables (the arena and unique table stay, so
    /// existing handles remain valid and canonical).
    pub fn clear_op_caches(&mut self) {
        self.union_cache.clear();
        self.nss_cache.clear();
        self.max_set_cache.clear();
        self.max_union_cache.clear();
        self.mdp_cache.clear();
        self.max_card_cache.clear();
        self.count_cache.clear();
    }

    /// Graphviz rendering of the subgraphs below the given named roots.
    /// Solid edges are `hi` (variable present), dashed edges `lo`.
    pub fn to_dot(&self, roots: &[(String, Handle)], var_name: impl Fn(u32) -> String) -> String {
        let mut out = String::from("digraph zdd {\n  rankdir=TB;\n");
        out.push_str("  empty [label=\"0\", shape=box];\n");
        out.push_str("  base [label=\"1\", shape=box];\n");
        let id = |h: Handle| match h {
            Self::EMPTY => "empty".to_string(),
            Self::BASE => "base".to_string(),
            _ => format!("n{}", h.0),
        };
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = Vec::new();
        for (name, root) in roots {
            let _ = writeln!(out, "  {:?} [shape=plaintext];", name);
            let _ = writeln!(out, "  {:?} -> {};", name, id(*root));
            stack.push(*root);
        }
        while let Some(h) = stack.pop() {
            if Self::is_terminal(h) || seen[h.0 as usize] {
                continue;
            }
            seen[h.0 as usize] = true;
            let _ = writeln!(out, "  {} [label=\"{}\"];", id(h), var_name(self.var(h)));
            let _ = writeln!(out, "  {} -> {} [style=dashed];", id(h), id(self.lo(h)));
            let _ = writeln!(out, "  {} -> {};", id(h), id(self.hi(h)));
            stack.push(self.lo(h));
            stack.push(self.hi(h));
        }
        out.push_str("}\n");
        out
    }
}
