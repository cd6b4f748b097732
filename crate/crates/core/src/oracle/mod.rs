//! Ground truth for the graph-side answers: exact rank, randomized maximum
//! rank, and a certified search for the minimum rank over nonzero
//! parameters.
//!
//! Only MultiTerm entries are ever treated as zeroable. A vanishing pattern
//! is a set of such entries required to be zero at once; each pattern is
//! either realized by an explicit rational witness (checked by exact
//! evaluation) or, for single-leader layered matrices, proven infeasible by
//! [`propagate::LayeredStructure`].

pub mod linalg;
pub mod propagate;
pub mod search;

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{enumerate_stems, StructuredGraph};
use crate::symcm::{build_symcm, classify_entry, evaluate, EntryClass, Monomial, ParamAssignment, StemPoly, SymCM, SymError};

pub use linalg::{rank_exact, RationalMatrix};
use propagate::LayeredStructure;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error("witness realizes pattern {pattern:?} that the layer propagation rules out")]
    Inconsistent { pattern: Vec<(usize, usize)> },
}

/// Search limits. Part of every certificate so runs can be replayed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Vanishing patterns examined before giving up on exhaustiveness.
    pub max_patterns: usize,
    /// Linear-isolation restarts per pattern.
    pub solve_attempts: usize,
    /// Grid points per pattern after isolation fails.
    pub grid_points: usize,
    /// Random integer assignments seeding the upper bound.
    pub trials: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_patterns: 4096,
            solve_attempts: 32,
            grid_points: 256,
            trials: 8,
        }
    }
}

/// Cap on column patterns enumerated in full (2^cap subsets).
pub const MAX_PATTERN_COLUMNS: usize = 16;
/// Cap on entry-level patterns for matrices with overlapping rows.
pub const MAX_PATTERN_ENTRIES: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinRankCertificate {
    pub min_rank: usize,
    pub witness: ParamAssignment,
    pub exhaustive: bool,
    pub seed: u64,
    pub budget: Budget,
    pub patterns_checked: usize,
    /// Patterns proven unrealizable, as `(row, col)` entry sets.
    pub infeasible_patterns: Vec<Vec<(usize, usize)>>,
    /// Patterns neither realized nor refuted.
    pub unresolved_patterns: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub min_rank: usize,
    pub exhaustive: bool,
    pub seed: u64,
    pub witness: BTreeMap<String, String>,
    pub patterns_checked: usize,
}

impl MinRankCertificate {
    pub fn to_json(&self, m: &SymCM) -> CertificateJson {
        CertificateJson {
            min_rank: self.min_rank,
            exhaustive: self.exhaustive,
            seed: self.seed,
            witness: self
                .witness
                .values()
                .iter()
                .map(|(&e, v)| (m.edge_key(e), v.to_string()))
                .collect(),
            patterns_checked: self.patterns_checked,
        }
    }
}

/// Largest rank over `trials` random integer assignments from `{±1..±1000}`.
pub fn max_rank(m: &SymCM, trials: usize, seed: u64) -> Result<usize, OracleError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0;
    for _ in 0..trials.max(1) {
        let p = ParamAssignment::random_integers(m.edges().len(), crate::symcm::GENERIC_DRAW_BOUND, &mut rng);
        best = best.max(rank_exact(&evaluate(m, &p)?));
    }
    Ok(best)
}

struct Pattern {
    cells: Vec<(usize, usize)>,
    bound: usize,
}

/// Column patterns for matrices whose columns have disjoint supports: the
/// rank is the number of nonzero columns, so only whole columns matter.
fn column_patterns(m: &SymCM) -> Option<Vec<Pattern>> {
    let nonzero = m.nonzero_columns();
    let zeroable: Vec<Vec<(usize, usize)>> = nonzero
        .iter()
        .filter_map(|&c| {
            let cells: Vec<(usize, usize)> = (0..m.row_count())
                .filter(|&r| !m.entry(r, c).is_zero())
                .map(|r| (r, c))
                .collect();
            cells
                .iter()
                .all(|&(r, c)| classify_entry(m.entry(r, c)) == EntryClass::MultiTerm)
                .then_some(cells)
        })
        .collect();
    if zeroable.len() > MAX_PATTERN_COLUMNS {
        return None;
    }
    let mut out = Vec::with_capacity(1 << zeroable.len());
    for mask in 0u32..(1u32 << zeroable.len()) {
        let mut cells = Vec::new();
        for (i, col) in zeroable.iter().enumerate() {
            if mask >> i & 1 == 1 {
                cells.extend_from_slice(col);
            }
        }
        out.push(Pattern {
            cells,
            bound: nonzero.len() - mask.count_ones() as usize,
        });
    }
    Some(out)
}

/// Fallback when full enumeration is too large: zero every MultiTerm
/// entry from some step on.
fn suffix_patterns(m: &SymCM) -> Vec<Pattern> {
    let multi = m.multi_terms();
    (0..m.steps())
        .map(|k| {
            let cells: Vec<(usize, usize)> = multi.iter().copied().filter(|&(_, c)| m.col_of(c).1 >= k).collect();
            let bound = m.without(&cells).term_rank();
            Pattern { cells, bound }
        })
        .collect()
}

/// Entry-level patterns with term-rank bounds.
fn entry_patterns(m: &SymCM) -> Option<Vec<Pattern>> {
    let multi = m.multi_terms();
    if multi.len() > MAX_PATTERN_ENTRIES {
        return None;
    }
    Some(
        (0u32..(1u32 << multi.len()))
            .map(|mask| {
                let cells: Vec<(usize, usize)> = multi
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &c)| c)
                    .collect();
                let bound = m.without(&cells).term_rank();
                Pattern { cells, bound }
            })
            .collect(),
    )
}

/// Searches for the minimum rank over nonzero parameters.
///
/// Patterns are visited in ascending order of the rank they could at best
/// produce; the first realized pattern below the running bound improves it.
/// The certificate is exhaustive only when the columns have disjoint
/// supports (so rank equals the number of nonzero columns) and every
/// pattern below the final minimum was refuted.
pub fn min_rank(m: &SymCM, budget: Budget, seed: u64) -> Result<MinRankCertificate, OracleError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edge_count = m.edges().len();
    let mut best_witness = ParamAssignment::random_integers(edge_count, crate::symcm::GENERIC_DRAW_BOUND, &mut rng);
    let mut best = rank_exact(&evaluate(m, &best_witness)?);
    for _ in 1..budget.trials.max(1) {
        let p = ParamAssignment::random_integers(edge_count, crate::symcm::GENERIC_DRAW_BOUND, &mut rng);
        let r = rank_exact(&evaluate(m, &p)?);
        if r < best {
            best = r;
            best_witness = p;
        }
    }

    let row_sparse = m.is_row_sparse();
    let layered = LayeredStructure::from_symcm(m);
    let (mut patterns, complete_enumeration) = if row_sparse {
        match column_patterns(m) {
            Some(p) => (p, true),
            None => (suffix_patterns(m), false),
        }
    } else {
        match entry_patterns(m) {
            Some(p) => (p, true),
            None => (suffix_patterns(m), false),
        }
    };
    // ascending bound, then lexicographically smallest entry set
    patterns.sort_by(|a, b| a.bound.cmp(&b.bound).then_with(|| a.cells.cmp(&b.cells)));

    let mut checked = 0;
    let mut infeasible = Vec::new();
    let mut unresolved = 0;
    let mut budget_hit = false;
    for pat in &patterns {
        if pat.bound >= best {
            break;
        }
        if checked >= budget.max_patterns {
            budget_hit = true;
            break;
        }
        checked += 1;
        let proof = layered.as_ref().map(|s| {
            let mut rows: Vec<usize> = pat.cells.iter().map(|&(r, _)| r).collect();
            rows.sort_unstable();
            rows.dedup();
            s.vanishing_feasible(&rows)
        });
        match search::find_witness(m, &pat.cells, budget.solve_attempts, budget.grid_points, &mut rng) {
            Some(w) => {
                if proof == Some(false) {
                    return Err(OracleError::Inconsistent {
                        pattern: pat.cells.clone(),
                    });
                }
                let r = rank_exact(&evaluate(m, &w)?);
                if r < best {
                    best = r;
                    best_witness = w;
                }
            }
            None if proof == Some(false) => infeasible.push(pat.cells.clone()),
            None => unresolved += 1,
        }
    }

    Ok(MinRankCertificate {
        min_rank: best,
        witness: best_witness,
        exhaustive: row_sparse && complete_enumeration && unresolved == 0 && !budget_hit,
        seed,
        budget,
        patterns_checked: checked,
        infeasible_patterns: infeasible,
        unresolved_patterns: unresolved,
    })
}

/// Whether the built entry for `(i, k)` equals the sum over brute-force
/// enumerated stems, for every leader.
pub fn swp_crosscheck(g: &StructuredGraph, i: usize, k: usize) -> Result<bool, OracleError> {
    let m = build_symcm(g)?;
    Ok(swp_crosscheck_with(g, &m, i, k))
}

pub fn swp_crosscheck_with(g: &StructuredGraph, m: &SymCM, i: usize, k: usize) -> bool {
    if k >= m.steps() {
        return enumerate_stems(g, i, k).is_empty();
    }
    let stems = enumerate_stems(g, i, k);
    g.leaders().iter().enumerate().all(|(j, &leader)| {
        let brute = StemPoly::from_monomials(stems.iter().filter(|s| s.nodes[0] == leader).map(|s| Monomial {
            edges: s
                .nodes
                .windows(2)
                .map(|w| g.edge_index(w[0], w[1]).expect("stem edges exist"))
                .collect(),
            coefficient: 1,
        }));
        &brute == m.entry_at(i, j, k)
    })
}

/// `[B, AB, …, A^(n-1) B]` multiplied out numerically, with `A[v][u]` the
/// value of edge `u -> v`. Independent of the stem expansion.
pub fn controllability_matrix(g: &StructuredGraph, p: &ParamAssignment) -> Result<RationalMatrix, OracleError> {
    let n = g.node_count();
    let values = p.dense(g.edges(), |e| g.edge_key(e))?;
    let m = g.leaders().len();
    let mut out = RationalMatrix::zeros(n, n * m);
    for (j, &leader) in g.leaders().iter().enumerate() {
        let mut x = vec![BigRational::zero(); n];
        x[leader] = BigRational::one();
        for k in 0..n {
            for (v, xv) in x.iter().enumerate() {
                out.set(v, j * n + k, xv.clone());
            }
            let mut y = vec![BigRational::zero(); n];
            for (e, edge) in g.edges().iter().enumerate() {
                y[edge.to] += &values[e] * &x[edge.from];
            }
            x = y;
        }
    }
    Ok(out)
}
