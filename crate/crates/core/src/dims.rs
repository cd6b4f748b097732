//! Controllable-subspace dimensions.
//!
//! The maximum dimension is the largest number of nodes covered by
//! vertex-disjoint stems and cycles, found with a min-cost circulation. The
//! minimum dimension on a single-leader hierarchical DAG is the index of the
//! first layer whose column can vanish: every later column then vanishes
//! too, and each earlier column keeps a nonzero entry.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{classify_nodes, NodeClassification, Role};
use crate::flow::Circulation;
use crate::graph::{layering, validate, Edge, GraphError, Layering, StructuredGraph};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DimsError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("graph is not input-connected")]
    NotInputConnected,
    #[error("expected a single leader, found {0}")]
    MultiLeader(usize),
    #[error("graph is not a hierarchical DAG")]
    NotHdag,
    #[error("layer {layer}: {integrators} integrators exceed the enumeration cap")]
    Undecided { layer: usize, integrators: usize },
    #[error("subgraph cover {cover} differs from the layer count {expected}")]
    CoverMismatch { cover: usize, expected: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ZeroabilityMode {
    /// Blocking test of an integrator with one integrator-free stem, applied
    /// only within the layer holding that integrator.
    PaperLiteral,
    /// Decides whether the whole layer can vanish at once.
    ExactAlgebraic,
}

impl ZeroabilityMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ZeroabilityMode::PaperLiteral => "paper",
            ZeroabilityMode::ExactAlgebraic => "exact",
        }
    }
}

/// Integrators below a tested layer that the exact procedure may enumerate.
pub const MAX_FREE_INTEGRATORS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverSolution {
    pub covered: BTreeSet<usize>,
    pub stems: Vec<Vec<usize>>,
    pub cycles: Vec<Vec<usize>>,
    pub size: usize,
}

/// Maximum stems-and-cycles cover. Rejects graphs with unreachable nodes.
pub fn scs_dim(g: &StructuredGraph) -> Result<CoverSolution, DimsError> {
    if !validate(g).is_input_connected() {
        return Err(DimsError::NotInputConnected);
    }
    Ok(max_cover(g))
}

/// Cover without the connectivity check, for subgraphs with isolated nodes.
pub(crate) fn max_cover(g: &StructuredGraph) -> CoverSolution {
    let n = g.node_count();
    let (source, sink) = (2 * n, 2 * n + 1);
    let mut c = Circulation::new(2 * n + 2);
    let split: Vec<usize> = (0..n).map(|v| c.add_arc(2 * v, 2 * v + 1, 1, -1)).collect();
    let edge_arcs: Vec<usize> = g
        .edges()
        .iter()
        .map(|e| c.add_arc(2 * e.from + 1, 2 * e.to, 1, 0))
        .collect();
    let entry: Vec<usize> = g.leaders().iter().map(|&l| c.add_arc(source, 2 * l, 1, 0)).collect();
    for v in 0..n {
        c.add_arc(2 * v + 1, sink, 1, 0);
    }
    c.add_arc(sink, source, g.leaders().len() as i64, 0);
    let cost = c.solve();

    let covered: BTreeSet<usize> = (0..n).filter(|&v| c.flow(split[v]) == 1).collect();
    let mut next = vec![None; n];
    for (e, &a) in edge_arcs.iter().enumerate() {
        if c.flow(a) == 1 {
            let Edge { from, to } = g.edges()[e];
            next[from] = Some(to);
        }
    }
    let mut used = vec![false; n];
    let mut stems = Vec::new();
    for (i, &a) in entry.iter().enumerate() {
        if c.flow(a) == 1 {
            let mut path = vec![g.leaders()[i]];
            while let Some(w) = next[*path.last().unwrap()] {
                path.push(w);
            }
            for &v in &path {
                used[v] = true;
            }
            stems.push(path);
        }
    }
    let mut cycles = Vec::new();
    for &v in &covered {
        if used[v] {
            continue;
        }
        let mut cyc = vec![v];
        used[v] = true;
        let mut w = next[v].expect("covered node off every stem lies on a cycle");
        while w != v {
            used[w] = true;
            cyc.push(w);
            w = next[w].expect("cycle continues");
        }
        cycles.push(cyc);
    }
    debug_assert_eq!(-cost as usize, covered.len());
    CoverSolution {
        size: covered.len(),
        covered,
        stems,
        cycles,
    }
}

/// Everything the zeroability tests need about a single-leader HDAG.
#[derive(Debug, Clone)]
pub struct LayerAnalysis {
    pub layering: Layering,
    pub classification: NodeClassification,
    /// For each integrator `z`: last integrator `y` on stems into `z` mapped
    /// to the number of integrator-free paths from `y` to `z`.
    groups: Vec<BTreeMap<usize, usize>>,
}

impl LayerAnalysis {
    pub fn new(g: &StructuredGraph) -> Result<Self, DimsError> {
        if g.leaders().len() != 1 {
            return Err(DimsError::MultiLeader(g.leaders().len()));
        }
        if !validate(g).is_hdag() {
            return Err(DimsError::NotHdag);
        }
        let layering = layering(g)?;
        let classification = classify_nodes(g)?;
        let preds = g.predecessors();
        let mut groups = vec![BTreeMap::new(); g.node_count()];
        for z in classification.integrators() {
            for &w in &preds[z] {
                // walk back until an integrator or the leader
                let mut u = w;
                let last = loop {
                    if classification.role(u) == Role::Integrator {
                        break Some(u);
                    }
                    match preds[u].as_slice() {
                        [p] => u = *p,
                        _ => break None,
                    }
                };
                if let Some(y) = last {
                    *groups[z].entry(y).or_insert(0) += 1;
                }
            }
        }
        Ok(LayerAnalysis {
            layering,
            classification,
            groups,
        })
    }

    pub fn depth(&self) -> usize {
        self.layering.depth()
    }

    /// Whether the column of step `k` can become the zero vector.
    pub fn layer_zeroable(&self, k: usize, mode: ZeroabilityMode) -> Result<bool, DimsError> {
        let Some(layer) = self.layering.layers.get(k) else {
            return Ok(false);
        };
        let cls = &self.classification;
        if layer.iter().any(|&v| cls.role(v) == Role::Simple) {
            return Ok(false);
        }
        match mode {
            ZeroabilityMode::PaperLiteral => Ok(!layer.iter().any(|&w| {
                cls.cond1_entry(w).is_some_and(|c| {
                    layer.iter().any(|&j| {
                        cls.role(j) == Role::Intermediator && cls.anchor_of[j].is_some_and(|a| c.blockers.contains(&a))
                    })
                })
            })),
            ZeroabilityMode::ExactAlgebraic => self.exact_zeroable(k, layer),
        }
    }

    fn exact_zeroable(&self, k: usize, layer: &[usize]) -> Result<bool, DimsError> {
        let cls = &self.classification;
        let forced: BTreeSet<usize> = layer.iter().filter_map(|&v| cls.carrier(v)).collect();
        // Integrators past the forced set are unconstrained: whatever their
        // inputs, either vanishing or not is available.
        let horizon = forced.iter().map(|&z| self.layering.step_of[z]).max().unwrap_or(0);
        let free: Vec<usize> = cls
            .integrators()
            .filter(|z| !forced.contains(z) && self.layering.step_of[*z] < horizon)
            .collect();
        if free.len() > MAX_FREE_INTEGRATORS {
            return Err(DimsError::Undecided {
                layer: k,
                integrators: free.len(),
            });
        }
        let relevant: Vec<usize> = forced.iter().chain(&free).copied().collect();
        let mut zero = vec![false; cls.roles.len()];
        for mask in 0u32..(1u32 << free.len()) {
            zero.iter_mut().for_each(|z| *z = false);
            for &z in &forced {
                zero[z] = true;
            }
            for (i, &z) in free.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    zero[z] = true;
                }
            }
            if relevant.iter().all(|&z| self.consistent(z, &zero)) {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Every last edge into `z` carries one term; a term is live when the
    /// integrator feeding it is nonzero. The entry can vanish with zero or
    /// at least two live terms, and can stay nonzero with at least one.
    fn consistent(&self, z: usize, zero: &[bool]) -> bool {
        let live = self.classification.free_stems[z] as usize
            + self.groups[z]
                .iter()
                .filter(|(&y, _)| !zero[y])
                .map(|(_, &paths)| paths)
                .sum::<usize>();
        if zero[z] {
            live != 1
        } else {
            live >= 1
        }
    }

    pub fn first_zeroable_layer(&self, mode: ZeroabilityMode) -> Result<Option<usize>, DimsError> {
        for k in 1..=self.depth() {
            if self.layer_zeroable(k, mode)? {
                return Ok(Some(k));
            }
        }
        Ok(None)
    }
}

/// Drops every edge touching a node at step `k_first` or later.
pub fn build_subgraph(g: &StructuredGraph, layering: &Layering, k_first: Option<usize>) -> StructuredGraph {
    match k_first {
        None => g.clone(),
        Some(k) => g.with_edges(|_, e| layering.step_of[e.from] < k && layering.step_of[e.to] < k),
    }
}

/// Edges removed by [`build_subgraph`], in declaration order.
pub fn removed_edges(g: &StructuredGraph, layering: &Layering, k_first: Option<usize>) -> Vec<usize> {
    let Some(k) = k_first else {
        return Vec::new();
    };
    g.edges()
        .iter()
        .enumerate()
        .filter(|(_, e)| layering.step_of[e.from] >= k || layering.step_of[e.to] >= k)
        .map(|(i, _)| i)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SscsResult {
    pub mode: ZeroabilityMode,
    pub dim: usize,
    pub k_first: Option<usize>,
    pub removed_edges: Vec<usize>,
    pub cover: CoverSolution,
}

/// Minimum dimension as the cover of the pruned subgraph.
pub fn sscs_dim(g: &StructuredGraph, mode: ZeroabilityMode) -> Result<SscsResult, DimsError> {
    let la = LayerAnalysis::new(g)?;
    sscs_dim_with(g, &la, mode)
}

pub fn sscs_dim_with(g: &StructuredGraph, la: &LayerAnalysis, mode: ZeroabilityMode) -> Result<SscsResult, DimsError> {
    let k_first = la.first_zeroable_layer(mode)?;
    let sub = build_subgraph(g, &la.layering, k_first);
    let cover = max_cover(&sub);
    let expected = k_first.unwrap_or(la.depth() + 1);
    if cover.size != expected {
        return Err(DimsError::CoverMismatch {
            cover: cover.size,
            expected,
        });
    }
    Ok(SscsResult {
        mode,
        dim: cover.size,
        k_first,
        removed_edges: removed_edges(g, &la.layering, k_first),
        cover,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::graph::add_leader;
    use crate::symcm::{build_symcm, generic_rank};
    use ZeroabilityMode::*;

    fn labels(g: &StructuredGraph, vs: &[usize]) -> Vec<String> {
        vs.iter().map(|&v| g.label(v).to_string()).collect()
    }

    #[test]
    fn scs_examples() {
        let g = fixtures::fig3();
        let c = scs_dim(&g).unwrap();
        assert_eq!(c.size, 7);
        assert_eq!(c.stems.len(), 1);
        assert!(c.cycles.is_empty());
        assert_eq!(c.stems[0].len(), 7);
        assert_eq!(scs_dim(&fixtures::chain3()).unwrap().size, 3);
        assert_eq!(scs_dim(&fixtures::diamond()).unwrap().size, 3);
    }

    #[test]
    fn scs_matches_generic_rank() {
        for (name, g) in fixtures::all() {
            let m = build_symcm(&g).unwrap();
            assert_eq!(scs_dim(&g).unwrap().size, generic_rank(&m, 3).unwrap(), "{name}");
        }
    }

    #[test]
    fn cycles_are_covered() {
        let g = StructuredGraph::new(
            &["1", "2", "3", "4"],
            &[("1", "2"), ("3", "4"), ("4", "3"), ("2", "3")],
            &["1"],
        )
        .unwrap();
        let c = scs_dim(&g).unwrap();
        assert_eq!(c.size, 4);
        let mut seen: Vec<usize> = c.stems.iter().chain(&c.cycles).flatten().copied().collect();
        seen.sort_unstable();
        assert_eq!(labels(&g, &seen), ["1", "2", "3", "4"]);
    }

    #[test]
    fn scs_rejects_unreachable() {
        let g = StructuredGraph::new(&["1", "2"], &[], &["1"]).unwrap();
        assert_eq!(scs_dim(&g), Err(DimsError::NotInputConnected));
    }

    #[test]
    fn second_leader_extends_cover() {
        let g = fixtures::diamond();
        let two = add_leader(&g, g.index_of("2").unwrap());
        assert_eq!(scs_dim(&two).unwrap().size, 4);
        let four = add_leader(&g, g.index_of("4").unwrap());
        assert_eq!(scs_dim(&four).unwrap().size, 3);
    }

    #[test]
    fn fig1_layers() {
        for mode in [PaperLiteral, ExactAlgebraic] {
            let a = LayerAnalysis::new(&fixtures::fig1a()).unwrap();
            assert!(a.layer_zeroable(3, mode).unwrap());
            assert!(!a.layer_zeroable(2, mode).unwrap());
            assert_eq!(a.first_zeroable_layer(mode).unwrap(), Some(3));
            let b = LayerAnalysis::new(&fixtures::fig1b()).unwrap();
            assert!(!b.layer_zeroable(3, mode).unwrap());
            assert_eq!(b.first_zeroable_layer(mode).unwrap(), None);
        }
    }

    #[test]
    fn fig3_modes_disagree() {
        let g = fixtures::fig3();
        let la = LayerAnalysis::new(&g).unwrap();
        assert!(la.layer_zeroable(5, PaperLiteral).unwrap());
        assert!(!la.layer_zeroable(5, ExactAlgebraic).unwrap());
        assert!(!la.layer_zeroable(4, PaperLiteral).unwrap());
        assert!(la.layer_zeroable(6, ExactAlgebraic).unwrap());
        assert_eq!(la.first_zeroable_layer(PaperLiteral).unwrap(), Some(5));
        assert_eq!(la.first_zeroable_layer(ExactAlgebraic).unwrap(), Some(6));
    }

    #[test]
    fn chain_never_vanishes() {
        let la = LayerAnalysis::new(&fixtures::chain3()).unwrap();
        assert_eq!(la.first_zeroable_layer(ExactAlgebraic).unwrap(), None);
        assert_eq!(sscs_dim(&fixtures::chain3(), PaperLiteral).unwrap().dim, 3);
    }

    #[test]
    fn fig3_subgraph() {
        let g = fixtures::fig3();
        let la = LayerAnalysis::new(&g).unwrap();
        let removed: Vec<String> = removed_edges(&g, &la.layering, Some(5)).into_iter().map(|e| g.edge_key(e)).collect();
        assert_eq!(removed, ["8->10", "8->11", "9->12", "10->13", "11->13"]);
        assert_eq!(build_subgraph(&g, &la.layering, Some(5)).edges().len(), 10);
        assert_eq!(build_subgraph(&g, &la.layering, None), g);
        let r = sscs_dim(&g, PaperLiteral).unwrap();
        assert_eq!((r.dim, r.k_first), (5, Some(5)));
        let r = sscs_dim(&g, ExactAlgebraic).unwrap();
        assert_eq!((r.dim, r.k_first), (6, Some(6)));
    }

    #[test]
    fn fig1a_subgraph() {
        let g = fixtures::fig1a();
        let r = sscs_dim(&g, ExactAlgebraic).unwrap();
        assert_eq!(r.dim, 3);
        let removed: Vec<String> = r.removed_edges.iter().map(|&e| g.edge_key(e)).collect();
        assert_eq!(removed, ["4->6", "5->6"]);
        assert_eq!(sscs_dim(&fixtures::diamond(), ExactAlgebraic).unwrap().dim, 2);
    }

    #[test]
    fn rejects_multi_leader_and_dags() {
        let g = add_leader(&fixtures::fig1a(), 1);
        assert_eq!(sscs_dim(&g, ExactAlgebraic), Err(DimsError::MultiLeader(2)));
        let d = StructuredGraph::new(&["1", "2", "3"], &[("1", "2"), ("2", "3"), ("1", "3")], &["1"]).unwrap();
        assert_eq!(sscs_dim(&d, PaperLiteral), Err(DimsError::NotHdag));
    }
}
