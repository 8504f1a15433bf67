//! Canonical printer for the textual CFG format.
//!
//! Emits declarations in their stored (declaration) order; parsing the
//! output reproduces the graph exactly, including identifier numbering.

use std::fmt::Write;

use super::{AccessLabel, Cfg};

pub fn print_cfg(cfg: &Cfg) -> String {
    let mut out = String::new();
    writeln!(out, "entry {};", cfg.node_name(cfg.entry())).unwrap();
    for node in cfg.nodes() {
        match node.address {
            Some(addr) => writeln!(out, "node {} @ 0x{addr:x};", node.name).unwrap(),
            None => writeln!(out, "node {};", node.name).unwrap(),
        }
    }
    for block in cfg.blocks() {
        match block.address {
            Some(addr) => writeln!(out, "block {} @ 0x{addr:x};", block.name).unwrap(),
            None => writeln!(out, "block {};", block.name).unwrap(),
        }
    }
    for edge in cfg.edges() {
        let src = cfg.node_name(edge.src);
        let dst = cfg.node_name(edge.dst);
        match &edge.label {
            AccessLabel::Empty => writeln!(out, "edge {src} -> {dst};").unwrap(),
            AccessLabel::Single(b) => {
                writeln!(out, "edge {src} -> {dst} access {};", cfg.block_name(*b)).unwrap()
            }
            AccessLabel::Many(bs) => {
                let names: Vec<_> = bs.iter().map(|b| cfg.block_name(*b)).collect();
                writeln!(out, "edge {src} -> {dst} access {{{}}};", names.join(",")).unwrap()
            }
            AccessLabel::Unknown => writeln!(out, "edge {src} -> {dst} access ?;").unwrap(),
        }
    }
    for scope in cfg.scopes() {
        let members: Vec<_> = scope.members.iter().map(|m| cfg.node_name(*m)).collect();
        writeln!(
            out,
            "scope {} header {} members {};",
            scope.name,
            cfg.node_name(scope.header),
            members.join(",")
        )
        .unwrap();
    }
    out
}
