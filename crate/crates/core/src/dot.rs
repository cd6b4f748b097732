//! Graphviz rendering with one rank per layer.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::graph::{Layering, StructuredGraph};

/// DOT digraph; edges listed in `dashed` are drawn dashed.
pub fn to_dot(g: &StructuredGraph, layers: Option<&Layering>, dashed: &BTreeSet<usize>) -> String {
    let mut out = String::from("digraph G {\n  rankdir=LR;\n");
    let quote = |v: usize| format!("\"{}\"", g.label(v).as_str().replace('"', "\\\""));
    match layers {
        Some(l) => {
            for (k, layer) in l.layers.iter().enumerate() {
                let members: Vec<String> = layer.iter().map(|&v| quote(v)).collect();
                let _ = writeln!(out, "  subgraph step{k} {{ rank=same; {}; }}", members.join("; "));
            }
        }
        None => {
            for v in 0..g.node_count() {
                let _ = writeln!(out, "  {};", quote(v));
            }
        }
    }
    for &l in g.leaders() {
        let _ = writeln!(out, "  {} [shape=doublecircle];", quote(l));
    }
    for (i, e) in g.edges().iter().enumerate() {
        let style = if dashed.contains(&i) { " [style=dashed]" } else { "" };
        let _ = writeln!(out, "  {} -> {}{style};", quote(e.from), quote(e.to));
    }
    out.push_str("}\n");
    out
}
