//! Fixed controllable nodes.
//!
//! A node is FSC when adding it as a leader leaves the maximum dimension
//! unchanged. A node is FSSC when its basis vector lies in the range of the
//! controllability matrix at every nonzero parameter assignment.
//!
//! On a single-leader hierarchical DAG each column is supported on one
//! layer, so `e_i` is in the range exactly when the column of `i`'s layer
//! is a nonzero multiple of `e_i`. That holds for all parameters iff `i` is
//! alone in its layer and that layer lies before the first zeroable one.
//! The answer is checked by searching for a counter-witness: an assignment
//! where appending `e_i` raises the rank.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dims::{scs_dim, sscs_dim_with, DimsError, LayerAnalysis, ZeroabilityMode};
use crate::graph::{add_leader, StructuredGraph};
use crate::oracle::{min_rank, rank_exact, Budget, OracleError, RationalMatrix};
use crate::symcm::{build_symcm, evaluate, ParamAssignment, SymCM, GENERIC_DRAW_BOUND};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum FixedError {
    #[error(transparent)]
    Dims(#[from] DimsError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

impl From<crate::symcm::SymError> for FixedError {
    fn from(e: crate::symcm::SymError) -> Self {
        FixedError::Oracle(e.into())
    }
}

/// Nodes whose addition as a leader leaves the maximum cover unchanged.
pub fn fsc_nodes(g: &StructuredGraph) -> Result<BTreeSet<usize>, DimsError> {
    let base = scs_dim(g)?.size;
    let mut out = BTreeSet::new();
    for v in 0..g.node_count() {
        if g.is_leader(v) || scs_dim(&add_leader(g, v))?.size == base {
            out.insert(v);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    Leader,
    /// Alone in a layer that can never vanish.
    IsolatedLayer,
    /// Shares its layer with another node, or its layer can vanish.
    Excluded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeVerdict {
    pub node: usize,
    pub member: bool,
    pub basis: Basis,
    /// Rank of the matrix and of the matrix with `e_i` appended, at the
    /// counter-witness when one was found.
    pub base_rank: Option<usize>,
    pub augmented_rank: Option<usize>,
    pub witness: Option<ParamAssignment>,
    /// Members are certified by the layer argument; non-members by a
    /// counter-witness.
    pub certified: bool,
    /// A counter-witness exists for a node the layer argument accepts.
    pub disagreement: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedNodeReport {
    pub mode: ZeroabilityMode,
    pub base_dim: usize,
    pub k_first: Option<usize>,
    pub fssc: BTreeSet<usize>,
    pub per_node: Vec<NodeVerdict>,
}

impl FixedNodeReport {
    pub fn certified(&self) -> bool {
        self.per_node.iter().all(|v| v.certified)
    }

    pub fn disagreements(&self) -> Vec<usize> {
        self.per_node.iter().filter(|v| v.disagreement).map(|v| v.node).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedConfig {
    pub budget: Budget,
    pub seed: u64,
}

impl Default for FixedConfig {
    fn default() -> Self {
        FixedConfig {
            budget: Budget::default(),
            seed: 0,
        }
    }
}

pub fn fssc_nodes(g: &StructuredGraph, mode: ZeroabilityMode, cfg: FixedConfig) -> Result<FixedNodeReport, FixedError> {
    let la = LayerAnalysis::new(g)?;
    let m = build_symcm(g)?;
    let cert = min_rank(&m, cfg.budget, cfg.seed)?;
    fssc_nodes_with(g, &la, &m, mode, &cert.witness, cfg)
}

/// [`fssc_nodes`] reusing a prebuilt analysis, matrix and a low-rank witness.
pub fn fssc_nodes_with(
    g: &StructuredGraph,
    la: &LayerAnalysis,
    m: &SymCM,
    mode: ZeroabilityMode,
    low_rank: &ParamAssignment,
    cfg: FixedConfig,
) -> Result<FixedNodeReport, FixedError> {
    let sscs = sscs_dim_with(g, la, mode)?;
    let k_first = sscs.k_first;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    let mut candidates = vec![low_rank.clone()];
    for _ in 0..cfg.budget.trials.max(1) {
        candidates.push(ParamAssignment::random_integers(m.edges().len(), GENERIC_DRAW_BOUND, &mut rng));
    }
    let evaluated: Vec<(RationalMatrix, usize)> = candidates
        .iter()
        .map(|p| {
            let e = evaluate(m, p)?;
            let r = rank_exact(&e);
            Ok((e, r))
        })
        .collect::<Result<_, FixedError>>()?;

    let mut per_node = Vec::with_capacity(g.node_count());
    let mut fssc = BTreeSet::new();
    for v in 0..g.node_count() {
        let step = la.layering.step_of[v];
        let basis = if g.is_leader(v) {
            Basis::Leader
        } else if la.layering.layers[step].len() == 1 && k_first.is_none_or(|k| step < k) {
            Basis::IsolatedLayer
        } else {
            Basis::Excluded
        };
        let member = basis != Basis::Excluded;

        let mut counter = None;
        for (i, (e, r)) in evaluated.iter().enumerate() {
            let aug = rank_exact(&e.hconcat(&unit_column(g.node_count(), v)));
            if aug > *r {
                counter = Some((i, *r, aug));
                break;
            }
        }
        let (base_rank, augmented_rank, witness) = match counter {
            Some((i, r, aug)) => (Some(r), Some(aug), Some(candidates[i].clone())),
            None => (None, None, None),
        };
        if member {
            fssc.insert(v);
        }
        per_node.push(NodeVerdict {
            node: v,
            member,
            basis,
            base_rank,
            augmented_rank,
            witness,
            certified: member == counter.is_none(),
            disagreement: member && counter.is_some(),
        });
    }
    Ok(FixedNodeReport {
        mode,
        base_dim: sscs.dim,
        k_first,
        fssc,
        per_node,
    })
}

fn unit_column(n: usize, v: usize) -> RationalMatrix {
    let mut e = RationalMatrix::zeros(n, 1);
    e.set(v, 0, num_rational::BigRational::from_integer(1.into()));
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn labels(g: &StructuredGraph, s: &BTreeSet<usize>) -> Vec<String> {
        s.iter().map(|&v| g.label(v).to_string()).collect()
    }

    #[test]
    fn fsc_examples() {
        let g = fixtures::fig3();
        assert_eq!(labels(&g, &fsc_nodes(&g).unwrap()), ["1", "2", "13"]);
        let c = fixtures::chain3();
        assert_eq!(fsc_nodes(&c).unwrap().len(), 3);
        // adding 4 keeps the cover at 3: the stem 1-2-4 already uses it
        let d = fixtures::diamond();
        assert_eq!(labels(&d, &fsc_nodes(&d).unwrap()), ["1", "4"]);
    }

    #[test]
    fn fig3_fssc_both_modes() {
        let g = fixtures::fig3();
        for mode in [ZeroabilityMode::PaperLiteral, ZeroabilityMode::ExactAlgebraic] {
            let r = fssc_nodes(&g, mode, FixedConfig::default()).unwrap();
            assert_eq!(labels(&g, &r.fssc), ["1", "2"], "{mode:?}");
            assert!(r.certified());
            assert!(r.disagreements().is_empty());
        }
    }

    #[test]
    fn fig3_last_node_needs_the_low_rank_witness() {
        let g = fixtures::fig3();
        let r = fssc_nodes(&g, ZeroabilityMode::ExactAlgebraic, FixedConfig::default()).unwrap();
        let v = &r.per_node[g.index_of("13").unwrap()];
        assert_eq!((v.base_rank, v.augmented_rank), (Some(6), Some(7)));
    }

    #[test]
    fn fig1a_and_diamond_only_leader() {
        for g in [fixtures::fig1a(), fixtures::diamond()] {
            let r = fssc_nodes(&g, ZeroabilityMode::ExactAlgebraic, FixedConfig::default()).unwrap();
            assert_eq!(labels(&g, &r.fssc), ["1"]);
            assert!(r.certified());
        }
    }

    #[test]
    fn fig1a_node2_counter_witness() {
        let g = fixtures::fig1a();
        let r = fssc_nodes(&g, ZeroabilityMode::ExactAlgebraic, FixedConfig::default()).unwrap();
        let v = &r.per_node[g.index_of("2").unwrap()];
        assert!(!v.member && v.certified);
        assert!(v.augmented_rank.unwrap() > v.base_rank.unwrap());
    }

    #[test]
    fn chain_all_fixed() {
        let g = fixtures::chain3();
        let r = fssc_nodes(&g, ZeroabilityMode::ExactAlgebraic, FixedConfig::default()).unwrap();
        assert_eq!(r.fssc.len(), 3);
        assert!(r.certified());
    }
}
