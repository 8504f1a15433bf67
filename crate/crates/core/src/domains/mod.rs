//! The classical, inexact persistence domains: age-based must analysis,
//! conflict-counting must analysis, per-block and global conflict-set
//! unions, and their cooperative product.
//!
//! Each is sound — it never calls a block persistent that some execution
//! makes miss twice — but each also has characteristic precision blind
//! spots the exact domain does not share (see the built-in graphs in
//! [`crate::corpus`] for the canonical separating examples).

mod blockcs;
mod cmust;
mod globalcs;
mod must;
mod product;

pub use blockcs::{BlockCs, BlockCsState};
pub use cmust::{CMust, CMustState};
pub use globalcs::{GlobalCs, GlobalCsState};
pub use must::{Must, MustState};
pub use product::{Product, ProductState};
