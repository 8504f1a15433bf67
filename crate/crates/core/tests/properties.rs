//! Property tests: the algebraic laws every domain must satisfy, engine
//! equivalences, and round trips, on arbitrary inputs with shrinking.

use std::collections::BTreeSet;

use proptest::prelude::*;

use cpa_core::cfg::{AccessLabel, BlockId};
use cpa_core::domain::{Domain, DomainKind};
use cpa_core::domains::{BlockCs, CMust, GlobalCs, Must, Product};
use cpa_core::exact::{ExactExplicit, ExactZdd, Tier};
use cpa_core::family::{self, Family};
use cpa_core::generate::{gen_random_cfg, RandomCfgParams};
use cpa_core::oracle::{find_witness_bounded, lru_simulate};
use cpa_core::solver::{analyze_program, check_fixpoint, solve, FlowGraph, Schedule, ScopeMode};
use cpa_core::zdd::Zdd;
use cpa_core::{parse_cfg, CacheConfig};

// ---------------------------------------------------------------------------
// Strategies

/// Single-block or empty labels over a 6-block universe: the labels every
/// domain supports.
fn arb_label() -> impl Strategy<Value = AccessLabel> {
    prop_oneof![
        2 => Just(AccessLabel::Empty),
        8 => (0u32..6).prop_map(|b| AccessLabel::Single(BlockId(b))),
    ]
}

fn arb_trace() -> impl Strategy<Value = Vec<AccessLabel>> {
    prop::collection::vec(arb_label(), 0..12)
}

fn arb_family() -> impl Strategy<Value = Family<u32>> {
    prop::collection::btree_set(prop::collection::btree_set(0u32..6, 0..=6), 0..=10)
}

/// Parameters whose labels every engine supports (single/empty only).
fn single_params() -> RandomCfgParams {
    RandomCfgParams::default()
}

/// Parameters exercising multi-block and unknown accesses as well.
fn rich_params() -> RandomCfgParams {
    RandomCfgParams { many_rate: 0.2, unknown_rate: 0.1, ..RandomCfgParams::default() }
}

fn fold_state<D: Domain>(d: &mut D, trace: &[AccessLabel]) -> D::State {
    let mut s = d.init_entry();
    for label in trace {
        s = d.update(&s, label);
    }
    s
}

// ---------------------------------------------------------------------------
// Lattice and transfer laws, uniformly over all domains

/// Join must be commutative, associative, idempotent, with `bottom` as the
/// neutral element, and must dominate both operands.
fn join_laws<D: Domain>(mut d: D, t1: &[AccessLabel], t2: &[AccessLabel], t3: &[AccessLabel]) {
    let name = d.name();
    let a = fold_state(&mut d, t1);
    let b = fold_state(&mut d, t2);
    let c = fold_state(&mut d, t3);
    let bot = d.bottom();

    let ab = d.join(&a, &b);
    let ba = d.join(&b, &a);
    assert_eq!(ab, ba, "{name}: join must commute");

    let bc = d.join(&b, &c);
    let a_bc = d.join(&a, &bc);
    let ab_c = d.join(&ab, &c);
    assert_eq!(a_bc, ab_c, "{name}: join must associate");

    let aa = d.join(&a, &a);
    assert_eq!(aa, a, "{name}: join must be idempotent");

    let a_bot = d.join(&a, &bot);
    assert_eq!(a_bot, a, "{name}: bottom must be neutral");

    assert!(d.leq(&a, &ab), "{name}: join must dominate the left operand");
    assert!(d.leq(&b, &ab), "{name}: join must dominate the right operand");
}

/// `update` must be monotone and `classify` anti-monotone: growing the
/// input state can only grow the output state and lose verdicts.
fn transfer_laws<D: Domain>(
    mut d: D,
    t1: &[AccessLabel],
    t2: &[AccessLabel],
    label: &AccessLabel,
) {
    let name = d.name();
    let a = fold_state(&mut d, t1);
    let b = fold_state(&mut d, t2);
    let ab = d.join(&a, &b);

    let ua = d.update(&a, label);
    let uab = d.update(&ab, label);
    assert!(d.leq(&ua, &uab), "{name}: update must be monotone");

    for blk in 0..6 {
        let blk = BlockId(blk);
        let coarse = d.classify(&ab, blk);
        let fine = d.classify(&a, blk);
        assert!(
            !coarse || fine,
            "{name}: classify must be anti-monotone (block {blk})"
        );
    }
}

macro_rules! for_every_domain {
    ($runner:ident ( _, $($arg:expr),* )) => {
        $runner(Must::new(2), $($arg),*);
        $runner(CMust::new(2), $($arg),*);
        $runner(BlockCs::new(2), $($arg),*);
        $runner(GlobalCs::new(2), $($arg),*);
        $runner(Product::new(2), $($arg),*);
        $runner(ExactZdd::new(2), $($arg),*);
        $runner(ExactExplicit::new(2, Tier::Full), $($arg),*);
        $runner(ExactExplicit::new(2, Tier::Maximal), $($arg),*);
        $runner(ExactExplicit::new(2, Tier::Bounded), $($arg),*);
    };
}

proptest! {
    #[test]
    fn every_domain_satisfies_the_join_laws(t1 in arb_trace(), t2 in arb_trace(), t3 in arb_trace()) {
        for_every_domain!(join_laws(_, &t1, &t2, &t3));
    }

    #[test]
    fn every_domain_satisfies_the_transfer_laws(
        t1 in arb_trace(),
        t2 in arb_trace(),
        label in arb_label(),
    ) {
        for_every_domain!(transfer_laws(_, &t1, &t2, &label));
    }
}

// ---------------------------------------------------------------------------
// Fixpoint engine on generated programs

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The solution the worklist returns really is a fixpoint above the
    /// seed, for every domain and for both label-rich and plain programs.
    #[test]
    fn solutions_verify_as_fixpoints(seed in any::<u16>()) {
        let cfg = gen_random_cfg(u64::from(seed), &rich_params());
        let graph = FlowGraph::whole(&cfg);
        macro_rules! check {
            ($d:expr) => {{
                let mut d = $d;
                let result = solve(&mut d, &graph, Schedule::ReversePostorder).expect("converges");
                prop_assert!(check_fixpoint(&mut d, &graph, &result), "{} fixpoint", d.name());
            }};
        }
        check!(Must::new(2));
        check!(CMust::new(2));
        check!(BlockCs::new(2));
        check!(GlobalCs::new(2));
        check!(ExactZdd::with_universe(2, cfg.block_ids()));
        check!(Product::new(2));
    }

    /// Fixpoints do not depend on the worklist order.  The exact domain's
    /// uncertain-access transfer is deliberately not monotone (it
    /// materialises possibly-first-accessed blocks), so its state equality
    /// across schedules is promised only for precisely-labelled programs;
    /// on label-rich programs both schedules still converge to sound
    /// fixpoints, which `solutions_verify_as_fixpoints` checks.
    #[test]
    fn schedules_agree_on_generated_programs(seed in any::<u16>()) {
        let cfg = gen_random_cfg(u64::from(seed), &single_params());
        let graph = FlowGraph::whole(&cfg);
        // One shared manager for both runs: canonical handles make state
        // equality meaningful across schedules.
        let mut exact = ExactZdd::new(2);
        let rpo = solve(&mut exact, &graph, Schedule::ReversePostorder).expect("converges");
        let fifo = solve(&mut exact, &graph, Schedule::Fifo).expect("converges");
        prop_assert_eq!(&rpo.states, &fifo.states);

        let rich = gen_random_cfg(u64::from(seed), &rich_params());
        let graph = FlowGraph::whole(&rich);
        let mut cmust = CMust::new(2);
        let rpo = solve(&mut cmust, &graph, Schedule::ReversePostorder).expect("converges");
        let fifo = solve(&mut cmust, &graph, Schedule::Fifo).expect("converges");
        prop_assert_eq!(&rpo.states, &fifo.states);
    }

    /// Printing a generated program and parsing it back is the identity.
    #[test]
    fn programs_round_trip_through_text(seed in any::<u16>()) {
        let cfg = gen_random_cfg(u64::from(seed), &rich_params());
        let reparsed = parse_cfg(&cfg.to_text()).expect("printed programs parse");
        prop_assert_eq!(&cfg, &reparsed);
    }

    /// The verdict sets of the domains are totally ordered by precision:
    /// global ⊆ block ⊆ product ⊆ exact, and cmust ⊆ product.
    #[test]
    fn verdicts_refine_in_the_documented_order(seed in any::<u16>(), k in 1u32..=3) {
        let cfg = gen_random_cfg(u64::from(seed), &single_params());
        let config = CacheConfig::fully_associative(k);
        let domains = [
            DomainKind::GlobalCs,
            DomainKind::BlockCs,
            DomainKind::CMust,
            DomainKind::Product,
            DomainKind::Exact,
        ];
        let report =
            analyze_program(&cfg, &config, &domains, ScopeMode::Whole).expect("analyses succeed");
        let scope = &report.scopes[0];
        let proven = |which: &str| -> BTreeSet<&str> {
            scope
                .blocks
                .iter()
                .filter(|row| {
                    row.verdicts.iter().any(|v| v.domain == which && v.persistent)
                })
                .map(|row| row.block.as_str())
                .collect()
        };
        let global = proven("globalcs");
        let block = proven("blockcs");
        let cmust = proven("cmust");
        let product = proven("product");
        let exact = proven("exact");
        prop_assert!(global.is_subset(&block), "global ⊆ block");
        prop_assert!(block.is_subset(&product), "block ⊆ product");
        prop_assert!(cmust.is_subset(&product), "cmust ⊆ product");
        prop_assert!(product.is_subset(&exact), "product ⊆ exact");
    }

    /// Witnesses do not get lost to the default path-length cap: searching
    /// far beyond it finds a double miss iff the capped search does.
    #[test]
    fn the_witness_length_cap_is_adequate(seed in any::<u16>(), k in 1u32..=3) {
        let cfg = gen_random_cfg(u64::from(seed), &single_params());
        let cap = cfg.num_nodes() + cfg.num_nodes() * cfg.edges().len() + 2;
        for b in cfg.block_ids() {
            let capped = find_witness_bounded(&cfg, b, k, 1_000_000, cap).expect("within budget");
            let generous =
                find_witness_bounded(&cfg, b, k, 1_000_000, cap * 4).expect("within budget");
            prop_assert_eq!(capped.is_some(), generous.is_some());
        }
    }
}

// ---------------------------------------------------------------------------
// Concrete LRU model

proptest! {
    /// `lru_simulate` agrees with the definitional criterion: an access
    /// hits iff at most `k` distinct blocks (itself included) occur from
    /// the previous access to the same block onward.
    #[test]
    fn simulation_matches_the_distinct_block_criterion(
        trace in prop::collection::vec(0u32..6, 0..24),
        k in 1u32..=4,
    ) {
        let blocks: Vec<BlockId> = trace.iter().map(|&b| BlockId(b)).collect();
        let hits = lru_simulate(&blocks, k);
        for (i, &b) in blocks.iter().enumerate() {
            let expected = match blocks[..i].iter().rposition(|&x| x == b) {
                None => false,
                Some(j) => {
                    let distinct: BTreeSet<BlockId> = blocks[j..=i].iter().copied().collect();
                    distinct.len() <= k as usize
                }
            };
            prop_assert_eq!(hits[i], expected, "position {} of {:?}", i, blocks);
        }
    }
}

// ---------------------------------------------------------------------------
// Family algebra and the decision-diagram engine

/// `Top`-aware cutoff: families with a member larger than `k` collapse.
fn limit(f: &Family<u32>, k: usize) -> Option<Family<u32>> {
    if family::exceeds(f, k) {
        None
    } else {
        Some(f.clone())
    }
}

proptest! {
    /// Thinning to maximal sets commutes with extending every set, with
    /// family union, and preserves the maximal cardinality — so verdicts
    /// survive the reduction.
    #[test]
    fn thinning_commutes_with_the_transfer_operations(
        f in arb_family(),
        g in arb_family(),
        x in 0u32..6,
    ) {
        let lhs = family::max_set(&family::add_to_all(&f, &x));
        let rhs = family::max_set(&family::add_to_all(&family::max_set(&f), &x));
        prop_assert_eq!(lhs, rhs, "thinning vs extension");

        let union: Family<u32> = f.union(&g).cloned().collect();
        let thinned_union: Family<u32> =
            family::max_set(&f).union(&family::max_set(&g)).cloned().collect();
        prop_assert_eq!(
            family::max_set(&union),
            family::max_set(&thinned_union),
            "thinning vs union"
        );

        prop_assert_eq!(
            family::max_cardinality(&f),
            family::max_cardinality(&family::max_set(&f)),
            "thinning vs maximal cardinality"
        );
    }

    /// The `> k` cutoff commutes with thinned union, `Top` absorbing.
    #[test]
    fn the_cutoff_commutes_with_thinned_union(
        f in arb_family(),
        g in arb_family(),
        k in 1usize..=4,
    ) {
        let union: Family<u32> = f.union(&g).cloned().collect();
        let lhs = limit(&family::max_set(&union), k);
        let rhs = match (limit(&f, k), limit(&g, k)) {
            (Some(lf), Some(lg)) => {
                let u: Family<u32> = lf.union(&lg).cloned().collect();
                limit(&family::max_set(&u), k)
            }
            _ => None,
        };
        prop_assert_eq!(lhs, rhs);
    }

    /// Classification (`no member exceeds k`) is exactly `limit != Top` and
    /// is invariant under thinning.
    #[test]
    fn classification_is_invariant_under_reduction(f in arb_family(), k in 1usize..=4) {
        let classify = !family::exceeds(&f, k);
        prop_assert_eq!(classify, limit(&f, k).is_some());
        prop_assert_eq!(classify, !family::exceeds(&family::max_set(&f), k));
    }

    /// Every diagram operation agrees with its explicit counterpart, and
    /// `enumerate ∘ from_sets` is the identity.
    #[test]
    fn diagram_operations_match_the_explicit_reference(f in arb_family(), g in arb_family()) {
        let mut z = Zdd::new();
        let hf = z.from_sets(&f);
        let hg = z.from_sets(&g);

        prop_assert_eq!(z.enumerate(hf), f.clone());
        prop_assert_eq!(z.count_sets(hf), f.len() as u64);
        prop_assert_eq!(z.max_cardinality(hf), family::max_cardinality(&f));

        let union = z.union(hf, hg);
        let explicit_union: Family<u32> = f.union(&g).cloned().collect();
        prop_assert_eq!(z.enumerate(union), explicit_union);

        let thinned = z.max_set(hf);
        prop_assert_eq!(z.enumerate(thinned), family::max_set(&f));

        let mu = z.max_union(hf, hg);
        prop_assert_eq!(z.enumerate(mu), family::max_union(&f, &g));

        let mdp = z.max_dot_product(hf, hg);
        prop_assert_eq!(z.enumerate(mdp), family::max_dot_product(&f, &g));
    }

    /// Canonicity: a family built set by set in any insertion order lands
    /// on the same handle as the batch construction.
    #[test]
    fn handles_are_canonical_under_insertion_order(f in arb_family()) {
        let sets: Vec<BTreeSet<u32>> = f.iter().cloned().collect();
        let orders = {
            let mut reversed = sets.clone();
            reversed.reverse();
            let mut rotated = sets.clone();
            if !rotated.is_empty() {
                rotated.rotate_left(sets.len() / 2);
            }
            [sets, reversed, rotated]
        };
        let mut z = Zdd::new();
        let batch = z.from_sets(&f);
        for order in &orders {
            let mut h = z.from_sets(&Family::new());
            for s in order {
                let one: Family<u32> = [s.clone()].into_iter().collect();
                let hs = z.from_sets(&one);
                h = z.union(h, hs);
            }
            prop_assert_eq!(h, batch);
        }
    }
}
