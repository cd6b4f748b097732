//! The symbolic controllability matrix `[B, AB, ..., A^(n-1) B]`.
//!
//! Each entry is a sum of weight products: entry `(i, (j, k))` holds one
//! monomial per stem of `k` edges from leader `j` to node `i`, the monomial
//! being the product of the stem's edge parameters.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{Edge, NodeId, StructuredGraph};
use crate::oracle::linalg::{rank_exact, RationalMatrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymError {
    #[error("graph has a directed cycle; stem sets are unbounded")]
    Cyclic,
    #[error("no value assigned to edge {0}")]
    MissingEdge(String),
    #[error("edge {0} assigned zero; parameters must be nonzero")]
    ZeroParameter(String),
    #[error("unknown edge {0}")]
    UnknownEdge(String),
    #[error("unparsable rational {0:?}")]
    BadRational(String),
    #[error("generic rank unstable after {rounds} rounds (last draws: {last:?})")]
    UnstableRank { rounds: usize, last: (usize, usize) },
    #[error("random rank {sampled} disagrees with non-zero column count {structural}")]
    StructuralMismatch { sampled: usize, structural: usize },
}

/// Weight product of one stem: edge indices in path order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub edges: Vec<usize>,
    pub coefficient: i64,
}

impl Monomial {
    fn edge_set(&self) -> Vec<usize> {
        let mut s = self.edges.clone();
        s.sort_unstable();
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EntryClass {
    Zero,
    SingleTerm,
    MultiTerm,
}

/// Sum of weight products. Monomials are kept distinct by edge set.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StemPoly {
    monomials: Vec<Monomial>,
}

impl StemPoly {
    pub fn zero() -> Self {
        StemPoly::default()
    }

    /// The empty product, i.e. a leader's own entry at step 0.
    pub fn one() -> Self {
        StemPoly {
            monomials: vec![Monomial {
                edges: Vec::new(),
                coefficient: 1,
            }],
        }
    }

    pub fn from_monomials(monomials: impl IntoIterator<Item = Monomial>) -> Self {
        let mut by_set: BTreeMap<Vec<usize>, Monomial> = BTreeMap::new();
        for m in monomials {
            by_set
                .entry(m.edge_set())
                .and_modify(|acc| acc.coefficient += m.coefficient)
                .or_insert(m);
        }
        StemPoly {
            monomials: by_set.into_values().filter(|m| m.coefficient != 0).collect(),
        }
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_zero(&self) -> bool {
        self.monomials.is_empty()
    }

    /// Edges appearing in any monomial, ascending.
    pub fn variables(&self) -> Vec<usize> {
        let mut vars: Vec<usize> = self.monomials.iter().flat_map(|m| m.edges.iter().copied()).collect();
        vars.sort_unstable();
        vars.dedup();
        vars
    }

    fn extend_by(&self, edge: usize) -> impl Iterator<Item = Monomial> + '_ {
        self.monomials.iter().map(move |m| {
            let mut edges = m.edges.clone();
            edges.push(edge);
            Monomial {
                edges,
                coefficient: m.coefficient,
            }
        })
    }

    pub fn evaluate(&self, values: &[BigRational]) -> BigRational {
        let mut acc = BigRational::zero();
        for m in &self.monomials {
            let mut term = BigRational::from_integer(m.coefficient.into());
            for &e in &m.edges {
                term *= &values[e];
            }
            acc += term;
        }
        acc
    }
}

pub fn classify_entry(p: &StemPoly) -> EntryClass {
    match p.len() {
        0 => EntryClass::Zero,
        1 => EntryClass::SingleTerm,
        _ => EntryClass::MultiTerm,
    }
}

/// Nonzero rational value per edge, indexed by edge position in the graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamAssignment {
    values: BTreeMap<usize, BigRational>,
}

impl ParamAssignment {
    pub fn new(values: BTreeMap<usize, BigRational>) -> Self {
        ParamAssignment { values }
    }

    pub fn uniform(edge_count: usize, value: BigRational) -> Self {
        ParamAssignment {
            values: (0..edge_count).map(|e| (e, value.clone())).collect(),
        }
    }

    pub fn from_dense(values: Vec<BigRational>) -> Self {
        ParamAssignment {
            values: values.into_iter().enumerate().collect(),
        }
    }

    /// Uniform integers from `{±1, ..., ±bound}`.
    pub fn random_integers(edge_count: usize, bound: i64, rng: &mut impl Rng) -> Self {
        let values = (0..edge_count)
            .map(|e| {
                let mag = rng.gen_range(1..=bound);
                let v = if rng.gen_bool(0.5) { mag } else { -mag };
                (e, BigRational::from_integer(v.into()))
            })
            .collect();
        ParamAssignment { values }
    }

    pub fn get(&self, edge: usize) -> Option<&BigRational> {
        self.values.get(&edge)
    }

    pub fn set(&mut self, edge: usize, value: BigRational) {
        self.values.insert(edge, value);
    }

    pub fn values(&self) -> &BTreeMap<usize, BigRational> {
        &self.values
    }

    /// Dense value vector after checking that every edge is assigned and nonzero.
    pub fn dense(&self, edges: &[Edge], key: impl Fn(usize) -> String) -> Result<Vec<BigRational>, SymError> {
        (0..edges.len())
            .map(|e| match self.values.get(&e) {
                None => Err(SymError::MissingEdge(key(e))),
                Some(v) if v.is_zero() => Err(SymError::ZeroParameter(key(e))),
                Some(v) => Ok(v.clone()),
            })
            .collect()
    }

    /// `{"<from>-><to>": "p/q", ...}` keyed by edge labels.
    pub fn to_json_map(&self, g: &StructuredGraph) -> BTreeMap<String, String> {
        self.values
            .iter()
            .map(|(&e, v)| (g.edge_key(e), v.to_string()))
            .collect()
    }

    pub fn from_json_map(g: &StructuredGraph, map: &BTreeMap<String, String>) -> Result<Self, SymError> {
        let mut values = BTreeMap::new();
        for (key, text) in map {
            let e = (0..g.edges().len())
                .find(|&e| &g.edge_key(e) == key)
                .ok_or_else(|| SymError::UnknownEdge(key.clone()))?;
            let v: BigRational = text.parse().map_err(|_| SymError::BadRational(text.clone()))?;
            values.insert(e, v);
        }
        Ok(ParamAssignment { values })
    }
}

/// Symbolic controllability matrix. Columns are ordered input-major:
/// column `j * steps + k` is `A^k` applied to the `j`-th leader's input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymCM {
    rows: Vec<NodeId>,
    edges: Vec<Edge>,
    leaders: Vec<usize>,
    steps: usize,
    cells: Vec<StemPoly>,
}

impl SymCM {
    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn col_count(&self) -> usize {
        self.leaders.len() * self.steps
    }

    /// Number of steps per input, equal to the node count.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn leaders(&self) -> &[usize] {
        &self.leaders
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn row_label(&self, i: usize) -> &NodeId {
        &self.rows[i]
    }

    pub fn col_index(&self, input: usize, step: usize) -> usize {
        input * self.steps + step
    }

    /// `(input, step)` of a column.
    pub fn col_of(&self, col: usize) -> (usize, usize) {
        (col / self.steps, col % self.steps)
    }

    pub fn entry(&self, row: usize, col: usize) -> &StemPoly {
        &self.cells[row * self.col_count() + col]
    }

    pub fn entry_at(&self, row: usize, input: usize, step: usize) -> &StemPoly {
        self.entry(row, self.col_index(input, step))
    }

    pub fn edge_key(&self, e: usize) -> String {
        let Edge { from, to } = self.edges[e];
        format!("{}->{}", self.rows[from], self.rows[to])
    }

    /// Whether each row has at most one non-Zero entry. Columns then have
    /// disjoint supports and the rank is the number of non-zero columns.
    pub fn is_row_sparse(&self) -> bool {
        (0..self.row_count()).all(|r| (0..self.col_count()).filter(|&c| !self.entry(r, c).is_zero()).count() <= 1)
    }

    pub fn nonzero_columns(&self) -> Vec<usize> {
        (0..self.col_count())
            .filter(|&c| (0..self.row_count()).any(|r| !self.entry(r, c).is_zero()))
            .collect()
    }

    /// `(row, col)` of every MultiTerm entry, column-major.
    pub fn multi_terms(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for c in 0..self.col_count() {
            for r in 0..self.row_count() {
                if classify_entry(self.entry(r, c)) == EntryClass::MultiTerm {
                    out.push((r, c));
                }
            }
        }
        out
    }

    /// Copy with the listed `(row, col)` entries set to Zero.
    pub fn without(&self, cells: &[(usize, usize)]) -> SymCM {
        let mut out = self.clone();
        let cols = self.col_count();
        for &(r, c) in cells {
            out.cells[r * cols + c] = StemPoly::zero();
        }
        out
    }

    /// Size of a maximum row/column matching over non-Zero entries, an
    /// upper bound on the rank at any parameters.
    pub fn term_rank(&self) -> usize {
        let adj: Vec<Vec<usize>> = (0..self.row_count())
            .map(|r| (0..self.col_count()).filter(|&c| !self.entry(r, c).is_zero()).collect())
            .collect();
        let mut col_match: Vec<Option<usize>> = vec![None; self.col_count()];
        let mut size = 0;
        for r in 0..self.row_count() {
            let mut seen = vec![false; self.col_count()];
            if augment(r, &adj, &mut col_match, &mut seen) {
                size += 1;
            }
        }
        size
    }

    pub fn values(&self, p: &ParamAssignment) -> Result<Vec<BigRational>, SymError> {
        p.dense(&self.edges, |e| self.edge_key(e))
    }

    /// One line per non-Zero cell, cells in column order then row order,
    /// monomials sorted lexicographically by their rendering.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for c in 0..self.col_count() {
            let (j, k) = self.col_of(c);
            for r in 0..self.row_count() {
                let p = self.entry(r, c);
                if p.is_zero() {
                    continue;
                }
                let mut terms: Vec<String> = p.monomials().iter().map(|m| self.render_monomial(m)).collect();
                terms.sort();
                let mut poly = String::new();
                for (i, t) in terms.iter().enumerate() {
                    match (i, t.strip_prefix('-')) {
                        (0, _) => poly.push_str(t),
                        (_, Some(neg)) => {
                            poly.push_str(" - ");
                            poly.push_str(neg);
                        }
                        (_, None) => {
                            poly.push_str(" + ");
                            poly.push_str(t);
                        }
                    }
                }
                let _ = writeln!(
                    out,
                    "row={} input={} step={} terms={} poly={}",
                    self.rows[r],
                    self.rows[self.leaders[j]],
                    k,
                    p.len(),
                    poly
                );
            }
        }
        out
    }

    fn render_monomial(&self, m: &Monomial) -> String {
        let body = if m.edges.is_empty() {
            "1".to_string()
        } else {
            m.edges
                .iter()
                .map(|&e| {
                    let Edge { from, to } = self.edges[e];
                    format!("a_{{{},{}}}", self.rows[from], self.rows[to])
                })
                .collect::<Vec<_>>()
                .join("·")
        };
        match m.coefficient {
            1 => body,
            -1 => format!("-{body}"),
            c => format!("{c}·{body}"),
        }
    }
}

fn augment(r: usize, adj: &[Vec<usize>], col_match: &mut [Option<usize>], seen: &mut [bool]) -> bool {
    for &c in &adj[r] {
        if seen[c] {
            continue;
        }
        seen[c] = true;
        if col_match[c].is_none_or(|r2| augment(r2, adj, col_match, seen)) {
            col_match[c] = Some(r);
            return true;
        }
    }
    false
}

/// Builds the matrix by layer-order dynamic programming over stems.
pub fn build_symcm(g: &StructuredGraph) -> Result<SymCM, SymError> {
    if g.topological_order().is_none() {
        return Err(SymError::Cyclic);
    }
    let n = g.node_count();
    let m = g.leaders().len();
    let cols = n * m;
    let mut cells = vec![StemPoly::zero(); n * cols];
    for (j, &leader) in g.leaders().iter().enumerate() {
        let mut cur = vec![StemPoly::zero(); n];
        cur[leader] = StemPoly::one();
        for k in 0..n {
            for (v, p) in cur.iter().enumerate() {
                cells[v * cols + j * n + k] = p.clone();
            }
            if k + 1 == n {
                break;
            }
            let mut next: Vec<Vec<Monomial>> = vec![Vec::new(); n];
            for (e, edge) in g.edges().iter().enumerate() {
                next[edge.to].extend(cur[edge.from].extend_by(e));
            }
            cur = next.into_iter().map(StemPoly::from_monomials).collect();
        }
    }
    Ok(SymCM {
        rows: g.nodes().to_vec(),
        edges: g.edges().to_vec(),
        leaders: g.leaders().to_vec(),
        steps: n,
        cells,
    })
}

pub fn evaluate(m: &SymCM, p: &ParamAssignment) -> Result<RationalMatrix, SymError> {
    let values = m.values(p)?;
    Ok(evaluate_dense(m, &values))
}

/// [`evaluate`] on an already checked dense value vector.
pub fn evaluate_dense(m: &SymCM, values: &[BigRational]) -> RationalMatrix {
    let mut out = RationalMatrix::zeros(m.row_count(), m.col_count());
    for r in 0..m.row_count() {
        for c in 0..m.col_count() {
            let p = m.entry(r, c);
            if !p.is_zero() {
                out.set(r, c, p.evaluate(values));
            }
        }
    }
    out
}

/// Zeroes every column whose step is `k_first` or later.
pub fn modified_symcm(m: &SymCM, k_first: Option<usize>) -> SymCM {
    let mut out = m.clone();
    let Some(k_first) = k_first else {
        return out;
    };
    let cols = m.col_count();
    for r in 0..m.row_count() {
        for c in 0..cols {
            if m.col_of(c).1 >= k_first {
                out.cells[r * cols + c] = StemPoly::zero();
            }
        }
    }
    out
}

/// Range of the random integer draws used for generic rank.
pub const GENERIC_DRAW_BOUND: i64 = 1000;
const GENERIC_ROUNDS: usize = 5;

/// Rank at random parameters, confirmed by a second independent draw.
pub fn generic_rank(m: &SymCM, seed: u64) -> Result<usize, SymError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last = (0, 0);
    for _ in 0..GENERIC_ROUNDS {
        let a = ParamAssignment::random_integers(m.edges.len(), GENERIC_DRAW_BOUND, &mut rng);
        let b = ParamAssignment::random_integers(m.edges.len(), GENERIC_DRAW_BOUND, &mut rng);
        let ra = rank_exact(&evaluate(m, &a)?);
        let rb = rank_exact(&evaluate(m, &b)?);
        if ra == rb {
            if m.is_row_sparse() {
                let structural = m.nonzero_columns().len();
                if structural != ra {
                    return Err(SymError::StructuralMismatch {
                        sampled: ra,
                        structural,
                    });
                }
            }
            return Ok(ra);
        }
        last = (ra, rb);
    }
    Err(SymError::UnstableRank {
        rounds: GENERIC_ROUNDS,
        last,
    })
}

/// All-ones parameters, handy for hand-checked examples.
pub fn ones(m: &SymCM) -> ParamAssignment {
    ParamAssignment::uniform(m.edges.len(), BigRational::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn entry<'a>(m: &'a SymCM, g: &StructuredGraph, row: &str, step: usize) -> &'a StemPoly {
        m.entry_at(g.index_of(row).unwrap(), 0, step)
    }

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn assignment(g: &StructuredGraph, pairs: &[(&str, &str, i64)]) -> ParamAssignment {
        let mut p = ParamAssignment::uniform(g.edges().len(), BigRational::one());
        for &(a, b, v) in pairs {
            let e = g.edge_index(g.index_of(a).unwrap(), g.index_of(b).unwrap()).unwrap();
            p.set(e, rat(v));
        }
        p
    }

    #[test]
    fn fig1b_entries() {
        let g = fixtures::fig1b();
        let m = build_symcm(&g).unwrap();
        assert_eq!(entry(&m, &g, "5", 2).len(), 2);
        assert_eq!(entry(&m, &g, "6", 3).len(), 3);
        assert_eq!(classify_entry(entry(&m, &g, "5", 2)), EntryClass::MultiTerm);
        assert_eq!(classify_entry(entry(&m, &g, "4", 2)), EntryClass::SingleTerm);
        assert_eq!(classify_entry(entry(&m, &g, "4", 3)), EntryClass::Zero);
    }

    #[test]
    fn chain_entry_is_single_path_product() {
        let g = fixtures::chain3();
        let m = build_symcm(&g).unwrap();
        let p = entry(&m, &g, "3", 2);
        assert_eq!(p.monomials(), &[Monomial { edges: vec![0, 1], coefficient: 1 }]);
        assert_eq!(classify_entry(p), EntryClass::SingleTerm);
    }

    #[test]
    fn fig3_last_entry_has_six_monomials() {
        let g = fixtures::fig3();
        let m = build_symcm(&g).unwrap();
        assert_eq!(entry(&m, &g, "13", 6).len(), 6);
    }

    #[test]
    fn shape_and_sparsity() {
        let g = fixtures::fig3();
        let m = build_symcm(&g).unwrap();
        assert_eq!((m.row_count(), m.col_count()), (13, 13));
        assert!(m.is_row_sparse());
        assert_eq!(m.nonzero_columns(), (0..7).collect::<Vec<_>>());
    }

    #[test]
    fn rejects_cycles() {
        let g = StructuredGraph::new(&["1", "2"], &[("1", "2"), ("2", "1")], &["1"]).unwrap();
        assert_eq!(build_symcm(&g), Err(SymError::Cyclic));
    }

    #[test]
    fn evaluation_examples() {
        let g = fixtures::fig1a();
        let m = build_symcm(&g).unwrap();
        let six = g.index_of("6").unwrap();
        let five = g.index_of("5").unwrap();
        let all_ones = evaluate(&m, &ones(&m)).unwrap();
        assert_eq!(all_ones.get(six, 3), &rat(3));
        assert_eq!(all_ones.get(five, 2), &rat(2));
        assert_eq!(rank_exact(&all_ones), 4);

        let alpha_zero = evaluate(&m, &assignment(&g, &[("3", "5", -1)])).unwrap();
        assert!(alpha_zero.get(five, 2).is_zero());
        assert_eq!(rank_exact(&alpha_zero), 4);

        // alpha = -1 cancels the lone a12·a24·a46 term
        let cancel = evaluate(&m, &assignment(&g, &[("3", "5", -2)])).unwrap();
        assert_eq!(cancel.get(five, 2), &rat(-1));
        assert!(cancel.get(six, 3).is_zero());
        assert_eq!(rank_exact(&cancel), 3);
    }

    #[test]
    fn chain_entries_never_vanish() {
        let g = fixtures::chain3();
        let m = build_symcm(&g).unwrap();
        let p = assignment(&g, &[("1", "2", -7), ("2", "3", 3)]);
        let e = evaluate(&m, &p).unwrap();
        for k in 0..3 {
            assert!(!e.get(k, k).is_zero());
        }
    }

    #[test]
    fn evaluation_errors() {
        let g = fixtures::chain3();
        let m = build_symcm(&g).unwrap();
        let mut p = ParamAssignment::new(BTreeMap::from([(0, rat(1))]));
        assert_eq!(evaluate(&m, &p), Err(SymError::MissingEdge("2->3".into())));
        p.set(1, rat(0));
        assert_eq!(evaluate(&m, &p), Err(SymError::ZeroParameter("2->3".into())));
    }

    #[test]
    fn modified_matrix() {
        let g = fixtures::fig1a();
        let m = build_symcm(&g).unwrap();
        let md = modified_symcm(&m, Some(3));
        assert!(entry(&md, &g, "6", 3).is_zero());
        for k in 0..3 {
            for r in 0..m.row_count() {
                assert_eq!(md.entry_at(r, 0, k), m.entry_at(r, 0, k));
            }
        }
        assert_eq!(modified_symcm(&m, None), m);
        assert_eq!(generic_rank(&md, 1).unwrap(), 3);

        let g3 = fixtures::fig3();
        let m3 = modified_symcm(&build_symcm(&g3).unwrap(), Some(5));
        assert_eq!(m3.nonzero_columns(), (0..5).collect::<Vec<_>>());
    }

    #[test]
    fn generic_ranks() {
        assert_eq!(generic_rank(&build_symcm(&fixtures::fig3()).unwrap(), 0).unwrap(), 7);
        assert_eq!(generic_rank(&build_symcm(&fixtures::chain3()).unwrap(), 0).unwrap(), 3);
    }

    #[test]
    fn assignment_json_round_trip() {
        let g = fixtures::fig1a();
        let p = assignment(&g, &[("3", "5", -2)]);
        let mut map = p.to_json_map(&g);
        assert_eq!(map["3->5"], "-2");
        map.insert("1->2".into(), "3/4".into());
        let q = ParamAssignment::from_json_map(&g, &map).unwrap();
        assert_eq!(q.get(0), Some(&BigRational::new(3.into(), 4.into())));
        assert_eq!(q.get(4), Some(&rat(-2)));
        map.insert("9->9".into(), "1".into());
        assert!(ParamAssignment::from_json_map(&g, &map).is_err());
    }
}
