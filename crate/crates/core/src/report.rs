//! The full analysis pipeline behind `sscs analyze`, and its JSON report.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::Role;
use crate::dims::{scs_dim, sscs_dim_with, DimsError, LayerAnalysis, SscsResult, ZeroabilityMode};
use crate::fixed::{fsc_nodes, fssc_nodes_with, Basis, FixedConfig, FixedError, FixedNodeReport};
use crate::graph::{layering, validate, GraphError, GraphShape, StructuredGraph};
use crate::oracle::{
    controllability_matrix, max_rank, min_rank, swp_crosscheck_with, Budget, CertificateJson, MinRankCertificate,
    OracleError,
};
use crate::symcm::{build_symcm, evaluate, generic_rank, modified_symcm, ParamAssignment, SymCM, SymError};

#[derive(Debug, Error)]
pub enum AnalyzeError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Dims(#[from] DimsError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Fixed(#[from] FixedError),
    #[error(transparent)]
    Sym(#[from] SymError),
}

impl AnalyzeError {
    /// Input problems, as opposed to failures inside the analysis.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            AnalyzeError::Graph(_) | AnalyzeError::Dims(DimsError::NotInputConnected | DimsError::Graph(_))
        )
    }
}

#[derive(Debug, Clone)]
pub struct AnalyzeOptions {
    pub modes: Vec<ZeroabilityMode>,
    pub seed: u64,
    pub budget: Budget,
    pub verify: bool,
    pub dump_symcm: bool,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            modes: vec![ZeroabilityMode::PaperLiteral, ZeroabilityMode::ExactAlgebraic],
            seed: 0,
            budget: Budget::default(),
            verify: false,
            dump_symcm: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tool {
    pub name: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationSummary {
    pub roles: BTreeMap<String, Role>,
    pub anchors: BTreeMap<String, String>,
    pub cond1: Vec<Cond1Summary>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cond1Summary {
    pub integrator: String,
    pub blockers: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverSummary {
    pub size: usize,
    pub stems: Vec<Vec<String>>,
    pub cycles: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SscsSummary {
    pub mode: ZeroabilityMode,
    pub dim: usize,
    pub k_first: Option<usize>,
    pub removed_edges: Vec<String>,
    /// Matches an exhaustive oracle minimum rank.
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeSummary {
    pub node: String,
    pub member: bool,
    pub basis: Basis,
    pub certified: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub base_rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub augmented_rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<BTreeMap<String, String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FsscSummary {
    pub mode: ZeroabilityMode,
    pub nodes: Vec<String>,
    pub certified: bool,
    pub per_node: Vec<NodeSummary>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificates {
    pub min_rank: CertificateJson,
    pub budget: Budget,
    pub infeasible_patterns: usize,
    pub unresolved_patterns: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub paper_k_first: Option<usize>,
    pub exact_k_first: Option<usize>,
    pub paper_dim: usize,
    pub exact_dim: usize,
    pub oracle_min_rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub tool: Tool,
    pub seed: u64,
    pub graph_shape: GraphShape,
    pub layering: Option<Vec<Vec<String>>>,
    pub classification: Option<ClassificationSummary>,
    pub scs_dim: usize,
    pub cover: CoverSummary,
    pub sscs: Vec<SscsSummary>,
    pub fsc: Vec<String>,
    pub fssc: Vec<FsscSummary>,
    pub certificates: Option<Certificates>,
    pub discrepancy: Option<Discrepancy>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub verification: Option<Vec<Check>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub symcm_dump: Option<Vec<String>>,
}

impl AnalysisReport {
    pub fn failed_checks(&self) -> Vec<&Check> {
        self.verification.iter().flatten().filter(|c| !c.ok).collect()
    }

    pub fn sscs_for(&self, mode: ZeroabilityMode) -> Option<&SscsSummary> {
        self.sscs.iter().find(|s| s.mode == mode)
    }

    pub fn fssc_for(&self, mode: ZeroabilityMode) -> Option<&FsscSummary> {
        self.fssc.iter().find(|s| s.mode == mode)
    }
}

fn names(g: &StructuredGraph, vs: impl IntoIterator<Item = usize>) -> Vec<String> {
    vs.into_iter().map(|v| g.label(v).to_string()).collect()
}

fn witness_map(g: &StructuredGraph, p: &ParamAssignment) -> BTreeMap<String, String> {
    p.values().iter().map(|(&e, v)| (g.edge_key(e), v.to_string())).collect()
}

/// Runs every analysis that applies to the graph's shape.
pub fn analyze(g: &StructuredGraph, opts: &AnalyzeOptions) -> Result<AnalysisReport, AnalyzeError> {
    let shape = validate(g);
    let cover = scs_dim(g)?;
    let fsc = fsc_nodes(g)?;
    let layers = layering(g)?;

    let symcm = if shape.is_acyclic() { Some(build_symcm(g)?) } else { None };
    let cert = match &symcm {
        Some(m) => Some(min_rank(m, opts.budget, opts.seed)?),
        None => None,
    };
    let single_hdag = shape.is_hdag() && g.leaders().len() == 1;
    let la = if single_hdag { Some(LayerAnalysis::new(g)?) } else { None };

    let mut sscs: BTreeMap<ZeroabilityMode, SscsResult> = BTreeMap::new();
    let mut fixed: BTreeMap<ZeroabilityMode, FixedNodeReport> = BTreeMap::new();
    if let (Some(la), Some(m), Some(c)) = (&la, &symcm, &cert) {
        let all = [ZeroabilityMode::PaperLiteral, ZeroabilityMode::ExactAlgebraic];
        for mode in all {
            sscs.insert(mode, sscs_dim_with(g, la, mode)?);
        }
        let differ = sscs[&all[0]].k_first != sscs[&all[1]].k_first;
        sscs.retain(|mode, _| differ || opts.modes.contains(mode));
        let cfg = FixedConfig {
            budget: opts.budget,
            seed: opts.seed,
        };
        for &mode in sscs.keys() {
            fixed.insert(mode, fssc_nodes_with(g, la, m, mode, &c.witness, cfg)?);
        }
    }

    let discrepancy = match (
        sscs.get(&ZeroabilityMode::PaperLiteral),
        sscs.get(&ZeroabilityMode::ExactAlgebraic),
        &cert,
    ) {
        (Some(p), Some(x), Some(c)) if p.k_first != x.k_first => Some(Discrepancy {
            paper_k_first: p.k_first,
            exact_k_first: x.k_first,
            paper_dim: p.dim,
            exact_dim: x.dim,
            oracle_min_rank: c.min_rank,
        }),
        _ => None,
    };

    let verification = if opts.verify {
        Some(verify(g, &shape, cover.size, symcm.as_ref(), cert.as_ref(), &sscs, &fixed, &fsc, opts)?)
    } else {
        None
    };

    Ok(AnalysisReport {
        tool: Tool {
            name: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
        seed: opts.seed,
        graph_shape: shape,
        layering: Some(layers.layers.iter().map(|l| names(g, l.iter().copied())).collect()),
        classification: la.as_ref().map(|la| {
            let cls = &la.classification;
            ClassificationSummary {
                roles: (0..g.node_count()).map(|v| (g.label(v).to_string(), cls.role(v))).collect(),
                anchors: (0..g.node_count())
                    .filter_map(|v| cls.anchor_of[v].map(|a| (g.label(v).to_string(), g.label(a).to_string())))
                    .collect(),
                cond1: cls
                    .cond1
                    .iter()
                    .map(|c| Cond1Summary {
                        integrator: g.label(c.integrator).to_string(),
                        blockers: names(g, c.blockers.iter().copied()),
                    })
                    .collect(),
            }
        }),
        scs_dim: cover.size,
        cover: CoverSummary {
            size: cover.size,
            stems: cover.stems.iter().map(|s| names(g, s.iter().copied())).collect(),
            cycles: cover.cycles.iter().map(|s| names(g, s.iter().copied())).collect(),
        },
        sscs: sscs
            .values()
            .map(|s| SscsSummary {
                mode: s.mode,
                dim: s.dim,
                k_first: s.k_first,
                removed_edges: s.removed_edges.iter().map(|&e| g.edge_key(e)).collect(),
                certified: cert.as_ref().is_some_and(|c| c.exhaustive && c.min_rank == s.dim),
            })
            .collect(),
        fsc: names(g, fsc.iter().copied()),
        fssc: fixed
            .values()
            .map(|r| FsscSummary {
                mode: r.mode,
                nodes: names(g, r.fssc.iter().copied()),
                certified: r.certified(),
                per_node: r
                    .per_node
                    .iter()
                    .map(|v| NodeSummary {
                        node: g.label(v.node).to_string(),
                        member: v.member,
                        basis: v.basis,
                        certified: v.certified,
                        base_rank: v.base_rank,
                        augmented_rank: v.augmented_rank,
                        witness: v.witness.as_ref().map(|p| witness_map(g, p)),
                    })
                    .collect(),
            })
            .collect(),
        certificates: match (&symcm, &cert) {
            (Some(m), Some(c)) => Some(Certificates {
                min_rank: c.to_json(m),
                budget: c.budget,
                infeasible_patterns: c.infeasible_patterns.len(),
                unresolved_patterns: c.unresolved_patterns,
            }),
            _ => None,
        },
        discrepancy,
        verification,
        symcm_dump: match (&symcm, opts.dump_symcm) {
            (Some(m), true) => Some(m.dump().lines().map(str::to_string).collect()),
            _ => None,
        },
    })
}

fn check(name: &str, ok: bool, detail: String) -> Check {
    Check {
        name: name.to_string(),
        ok,
        detail,
    }
}

/// Cross-checks between the graph-side answers and the oracle. A differing
/// paper-literal answer is reported as a discrepancy, not a failed check.
#[allow(clippy::too_many_arguments)]
fn verify(
    g: &StructuredGraph,
    shape: &GraphShape,
    scs: usize,
    symcm: Option<&SymCM>,
    cert: Option<&MinRankCertificate>,
    sscs: &BTreeMap<ZeroabilityMode, SscsResult>,
    fixed: &BTreeMap<ZeroabilityMode, FixedNodeReport>,
    fsc: &std::collections::BTreeSet<usize>,
    opts: &AnalyzeOptions,
) -> Result<Vec<Check>, AnalyzeError> {
    let mut out = Vec::new();
    let (Some(m), Some(cert)) = (symcm, cert) else {
        out.push(check("oracle", true, format!("skipped: graph is {:?}", shape.acyclicity)));
        return Ok(out);
    };

    let bad: Vec<String> = (0..g.node_count())
        .flat_map(|i| (0..m.steps()).map(move |k| (i, k)))
        .filter(|&(i, k)| !swp_crosscheck_with(g, m, i, k))
        .map(|(i, k)| format!("{}@{k}", g.label(i)))
        .collect();
    out.push(check("swp", bad.is_empty(), format!("mismatched cells: {bad:?}")));

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut same = true;
    for _ in 0..3 {
        let p = ParamAssignment::random_integers(g.edges().len(), crate::symcm::GENERIC_DRAW_BOUND, &mut rng);
        same &= evaluate(m, &p)? == controllability_matrix(g, &p)?;
    }
    out.push(check("evaluation", same, "stem expansion vs matrix powers at 3 draws".into()));

    let sampled = max_rank(m, opts.budget.trials.max(2), opts.seed)?;
    let generic = generic_rank(m, opts.seed)?;
    out.push(check(
        "scs",
        sampled == scs && generic == scs,
        format!("cover {scs}, sampled max {sampled}, generic {generic}"),
    ));

    out.push(check(
        "witness",
        crate::oracle::rank_exact(&evaluate(m, &cert.witness)?) == cert.min_rank,
        format!("min rank {} re-evaluated", cert.min_rank),
    ));

    if let Some(x) = sscs.get(&ZeroabilityMode::ExactAlgebraic) {
        let ok = if cert.exhaustive {
            cert.min_rank == x.dim
        } else {
            cert.min_rank >= x.dim
        };
        out.push(check(
            "sscs",
            ok,
            format!("exact {}, oracle {} (exhaustive {})", x.dim, cert.min_rank, cert.exhaustive),
        ));
        let modified = generic_rank(&modified_symcm(m, x.k_first), opts.seed)?;
        out.push(check(
            "modified",
            modified == x.dim,
            format!("generic rank of the pruned matrix {modified}"),
        ));
    }
    for (mode, r) in fixed {
        let d = r.disagreements();
        out.push(check(
            &format!("fssc-{}", mode.as_str()),
            d.is_empty() && r.fssc.is_subset(fsc),
            format!("counter-witnessed members {:?}", names(g, d)),
        ));
    }
    Ok(out)
}
