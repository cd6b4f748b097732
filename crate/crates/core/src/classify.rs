//! Integrator / intermediator detection on hierarchical DAGs.
//!
//! An integrator has at least two incoming state edges. An intermediator has
//! a single incoming edge, but walking back through unique predecessors hits
//! an integrator (its anchor) before a leader, so every stem reaching it
//! passes through that integrator. Every remaining node is reached by exactly
//! one stem.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::graph::{validate, GraphError, StructuredGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Simple,
    Integrator,
    Intermediator,
}

/// An integrator with exactly one integrator-free stem, together with the
/// integrators that can appear on its other stems.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cond1Entry {
    pub integrator: usize,
    pub blockers: BTreeSet<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeClassification {
    pub roles: Vec<Role>,
    /// Anchor integrator of each intermediator, `None` elsewhere.
    pub anchor_of: Vec<Option<usize>>,
    /// Number of stems to each node that avoid every integrator other than
    /// the node itself.
    pub free_stems: Vec<u64>,
    pub cond1: Vec<Cond1Entry>,
}

impl NodeClassification {
    pub fn role(&self, v: usize) -> Role {
        self.roles[v]
    }

    pub fn integrators(&self) -> impl Iterator<Item = usize> + '_ {
        self.with_role(Role::Integrator)
    }

    pub fn intermediators(&self) -> impl Iterator<Item = usize> + '_ {
        self.with_role(Role::Intermediator)
    }

    fn with_role(&self, role: Role) -> impl Iterator<Item = usize> + '_ {
        self.roles
            .iter()
            .enumerate()
            .filter(move |(_, &r)| r == role)
            .map(|(v, _)| v)
    }

    /// The integrator whose entry decides whether `v`'s entry can vanish:
    /// `v` itself for integrators, the anchor for intermediators, none for
    /// simple nodes (their entries never vanish).
    pub fn carrier(&self, v: usize) -> Option<usize> {
        match self.roles[v] {
            Role::Simple => None,
            Role::Integrator => Some(v),
            Role::Intermediator => self.anchor_of[v],
        }
    }

    pub fn cond1_entry(&self, v: usize) -> Option<&Cond1Entry> {
        self.cond1.iter().find(|c| c.integrator == v)
    }
}

pub fn classify_nodes(g: &StructuredGraph) -> Result<NodeClassification, GraphError> {
    let shape = validate(g);
    if !shape.is_hdag() {
        return Err(GraphError::NotHdag(format!(
            "node classification requires a hierarchical DAG, got {:?}/{:?}",
            shape.acyclicity, shape.connectivity
        )));
    }
    let n = g.node_count();
    let preds = g.predecessors();
    let mut roles = vec![Role::Simple; n];
    for v in 0..n {
        if preds[v].len() >= 2 {
            roles[v] = Role::Integrator;
        }
    }

    let mut anchor_of = vec![None; n];
    for v in 0..n {
        if preds[v].len() != 1 {
            continue;
        }
        let mut u = preds[v][0];
        // bounded by n: the graph is acyclic
        loop {
            if roles[u] == Role::Integrator {
                roles[v] = Role::Intermediator;
                anchor_of[v] = Some(u);
                break;
            }
            if preds[u].len() != 1 {
                break;
            }
            u = preds[u][0];
        }
    }

    let order = g.topological_order().expect("HDAG is acyclic");
    let mut free_stems = vec![0u64; n];
    for &v in &order {
        if g.is_leader(v) {
            free_stems[v] = 1;
            continue;
        }
        free_stems[v] = preds[v]
            .iter()
            .filter(|&&u| roles[u] != Role::Integrator)
            .map(|&u| free_stems[u])
            .sum();
    }

    let cond1 = (0..n)
        .filter(|&v| roles[v] == Role::Integrator && free_stems[v] == 1)
        .map(|v| Cond1Entry {
            integrator: v,
            blockers: g
                .ancestors(v)
                .into_iter()
                .filter(|&u| roles[u] == Role::Integrator)
                .collect(),
        })
        .collect();

    Ok(NodeClassification {
        roles,
        anchor_of,
        free_stems,
        cond1,
    })
}
