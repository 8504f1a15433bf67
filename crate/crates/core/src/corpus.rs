//! Small built-in graphs used across tests and benchmarks.
//!
//! Each constant embeds one file from `testdata/`; the same files are usable
//! directly with the command-line tool.  They cover the characteristic
//! shapes where the persistence domains differ: diamonds inside loops,
//! sequential conflicts, nested loops, and a loop whose body grows the
//! conflict set past the associativity on some paths but not on others.

use crate::cfg::{parse_cfg, Cfg};

/// Loop whose body accesses `x` on one branch and `y` on the other.  Both
/// are persistent at associativity 2, but age-based reasoning cannot show
/// it: neither block's age is bounded on both paths.
pub const FIG1: &str = include_str!("../../../testdata/fig1.cfg");

/// Loop accessing `v` then one of `w`/`x`.  The age of `v` is bounded by 2
/// on every path, so an age bound proves persistence of `v` at
/// associativity 2 even though its conflict-set overapproximation
/// `{v, w, x}` is too large.
pub const FIG2: &str = include_str!("../../../testdata/fig2.cfg");

/// The mirror image of [`FIG2`]'s trade-off: same shape as [`FIG1`], where
/// a conflict-set union `{x, y}` proves persistence at associativity 2 but
/// no finite age bound exists.
pub const FIG3: &str = include_str!("../../../testdata/fig3.cfg");

/// Straight-line prefix into a loop with a two-way diamond, then an exit
/// accessed via `y`.  Exercises growth and collapse of conflict-set
/// families across joins; used as the worked reference for the exact
/// domain's per-location values.
pub const FIG4: &str = include_str!("../../../testdata/fig4.cfg");

/// Nested loops where only the exact domain proves `v` persistent at
/// associativity 3: every age bound, single conflict-set union and their
/// product fail, yet no execution collects more than 3 distinct blocks
/// between consecutive accesses to `v`.
pub const FIG6: &str = include_str!("../../../testdata/fig6.cfg");

/// All built-in graphs with their names.
pub const ALL: &[(&str, &str)] =
    &[("fig1", FIG1), ("fig2", FIG2), ("fig3", FIG3), ("fig4", FIG4), ("fig6", FIG6)];

/// Parse a built-in graph (they are all valid by construction).
pub fn parse(name: &str) -> Cfg {
    let (_, text) = ALL
        .iter()
        .find(|(n, _)| *n == name)
        .unwrap_or_else(|| panic!("unknown built-in graph {name}"));
    parse_cfg(text).expect("built-in graphs parse")
}
