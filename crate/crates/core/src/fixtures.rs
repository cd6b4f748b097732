//! Reference graphs shipped with the crate (also under `fixtures/*.json`).

use crate::graph::{parse_graph, StructuredGraph};

pub const FIG1A_JSON: &str = include_str!("../fixtures/fig1a.json");
pub const FIG1B_JSON: &str = include_str!("../fixtures/fig1b.json");
pub const FIG3_JSON: &str = include_str!("../fixtures/fig3.json");
pub const CHAIN3_JSON: &str = include_str!("../fixtures/chain3.json");
pub const DIAMOND_JSON: &str = include_str!("../fixtures/diamond.json");

/// Two converging branches where the lower integrator has a single
/// integrator-free stem.
pub fn fig1a() -> StructuredGraph {
    parse_graph(FIG1A_JSON).expect("fixture parses")
}

/// [`fig1a`] plus an intermediator hanging off the upper integrator.
pub fn fig1b() -> StructuredGraph {
    parse_graph(FIG1B_JSON).expect("fixture parses")
}

/// Thirteen-node, seven-layer network used for the FSC/FSSC example.
pub fn fig3() -> StructuredGraph {
    parse_graph(FIG3_JSON).expect("fixture parses")
}

pub fn chain3() -> StructuredGraph {
    parse_graph(CHAIN3_JSON).expect("fixture parses")
}

pub fn diamond() -> StructuredGraph {
    parse_graph(DIAMOND_JSON).expect("fixture parses")
}

/// All named fixtures with their file stems.
pub fn all() -> Vec<(&'static str, StructuredGraph)> {
    vec![
        ("fig1a", fig1a()),
        ("fig1b", fig1b()),
        ("fig3", fig3()),
        ("chain3", chain3()),
        ("diamond", diamond()),
    ]
}
