//! Pattern graphs of structured networks.
//!
//! A [`StructuredGraph`] records only the nonzero pattern of the state matrix
//! (directed state-to-state edges) and the set of leaders, i.e. the state
//! nodes that receive an input. Everything downstream works on node and edge
//! indices; labels are only used for parsing, ordering and reporting.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("malformed graph document: {0}")]
    Json(String),
    #[error("invalid node label {0:?}: labels must be non-empty and contain no whitespace")]
    BadLabel(String),
    #[error("duplicate node {0:?}")]
    DuplicateNode(String),
    #[error("edge references unknown node {0:?}")]
    UnknownNode(String),
    #[error("duplicate edge {0:?} -> {1:?}")]
    DuplicateEdge(String, String),
    #[error("duplicate leader {0:?}")]
    DuplicateLeader(String),
    #[error("leader set is empty")]
    EmptyLeaders,
    #[error("nodes not reachable from any leader: {}", .0.join(", "))]
    Unreachable(Vec<String>),
    #[error("graph is not a hierarchical DAG: {0}")]
    NotHdag(String),
}

/// A node label. Labels are compared as exact byte strings.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(label: impl Into<String>) -> Result<Self, GraphError> {
        let label = label.into();
        if label.is_empty() || label.chars().any(char::is_whitespace) {
            return Err(GraphError::BadLabel(label));
        }
        Ok(NodeId(label))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::borrow::Borrow<str> for NodeId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A directed state edge between node indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    nodes: Vec<String>,
    edges: Vec<(String, String)>,
    leaders: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuredGraph {
    nodes: Vec<NodeId>,
    edges: Vec<Edge>,
    leaders: Vec<usize>,
    index: HashMap<NodeId, usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Acyclicity {
    #[serde(rename = "HDAG")]
    Hdag,
    #[serde(rename = "DAG")]
    Dag,
    Cyclic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Connectivity {
    InputConnected,
    NotInputConnected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphShape {
    pub acyclicity: Acyclicity,
    pub connectivity: Connectivity,
}

impl GraphShape {
    pub fn is_hdag(&self) -> bool {
        self.acyclicity == Acyclicity::Hdag
    }

    pub fn is_acyclic(&self) -> bool {
        self.acyclicity != Acyclicity::Cyclic
    }

    pub fn is_input_connected(&self) -> bool {
        self.connectivity == Connectivity::InputConnected
    }
}

/// Shortest-stem layering: `step_of[v]` is the number of edges on the
/// shortest path from any leader to `v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layering {
    pub step_of: Vec<usize>,
    pub layers: Vec<Vec<usize>>,
}

impl Layering {
    pub fn depth(&self) -> usize {
        self.layers.len().saturating_sub(1)
    }
}

/// A stem as the sequence of visited node indices, leader first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Stem {
    pub nodes: Vec<usize>,
}

impl Stem {
    pub fn steps(&self) -> usize {
        self.nodes.len() - 1
    }
}

impl StructuredGraph {
    /// Builds a graph from labels, applying the same checks as [`parse_graph`].
    pub fn new<S: AsRef<str>>(
        nodes: &[S],
        edges: &[(S, S)],
        leaders: &[S],
    ) -> Result<Self, GraphError> {
        let mut ids = Vec::with_capacity(nodes.len());
        let mut index = HashMap::new();
        for label in nodes {
            let id = NodeId::new(label.as_ref())?;
            if index.insert(id.clone(), ids.len()).is_some() {
                return Err(GraphError::DuplicateNode(id.0));
            }
            ids.push(id);
        }
        let lookup = |label: &str| -> Result<usize, GraphError> {
            index
                .get(label)
                .copied()
                .ok_or_else(|| GraphError::UnknownNode(label.to_string()))
        };
        let mut seen = HashSet::new();
        let mut es = Vec::with_capacity(edges.len());
        for (from, to) in edges {
            let edge = Edge {
                from: lookup(from.as_ref())?,
                to: lookup(to.as_ref())?,
            };
            if !seen.insert(edge) {
                return Err(GraphError::DuplicateEdge(
                    from.as_ref().to_string(),
                    to.as_ref().to_string(),
                ));
            }
            es.push(edge);
        }
        if leaders.is_empty() {
            return Err(GraphError::EmptyLeaders);
        }
        let mut ls = Vec::with_capacity(leaders.len());
        for label in leaders {
            let l = lookup(label.as_ref())?;
            if ls.contains(&l) {
                return Err(GraphError::DuplicateLeader(label.as_ref().to_string()));
            }
            ls.push(l);
        }
        Ok(StructuredGraph {
            nodes: ids,
            edges: es,
            leaders: ls,
            index,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn leaders(&self) -> &[usize] {
        &self.leaders
    }

    pub fn label(&self, v: usize) -> &NodeId {
        &self.nodes[v]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn is_leader(&self, v: usize) -> bool {
        self.leaders.contains(&v)
    }

    pub fn edge_index(&self, from: usize, to: usize) -> Option<usize> {
        self.edges.iter().position(|e| e.from == from && e.to == to)
    }

    /// `"<from>-><to>"`, the key used for edges in JSON documents.
    pub fn edge_key(&self, e: usize) -> String {
        let Edge { from, to } = self.edges[e];
        format!("{}->{}", self.nodes[from], self.nodes[to])
    }

    /// Predecessor lists in edge declaration order.
    pub fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut preds = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            preds[e.to].push(e.from);
        }
        preds
    }

    pub fn successors(&self) -> Vec<Vec<usize>> {
        let mut succs = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            succs[e.from].push(e.to);
        }
        succs
    }

    /// State in-degree; input edges are not part of the graph and never counted.
    pub fn in_degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.to == v).count()
    }

    /// Same graph with the edge subset selected by `keep`.
    pub fn with_edges(&self, keep: impl Fn(usize, &Edge) -> bool) -> StructuredGraph {
        let edges = self
            .edges
            .iter()
            .enumerate()
            .filter(|(i, e)| keep(*i, e))
            .map(|(_, e)| *e)
            .collect();
        StructuredGraph {
            edges,
            ..self.clone()
        }
    }

    /// Serializes back to the graph document schema.
    pub fn to_json(&self) -> String {
        let doc = GraphDoc {
            nodes: self.nodes.iter().map(|n| n.0.clone()).collect(),
            edges: self
                .edges
                .iter()
                .map(|e| (self.nodes[e.from].0.clone(), self.nodes[e.to].0.clone()))
                .collect(),
            leaders: self.leaders.iter().map(|&l| self.nodes[l].0.clone()).collect(),
        };
        serde_json::to_string(&doc).expect("graph document serializes")
    }

    /// Breadth-first distances from the leader set; `None` for unreachable nodes.
    fn distances(&self) -> Vec<Option<usize>> {
        let succs = self.successors();
        let mut dist = vec![None; self.nodes.len()];
        let mut queue = VecDeque::new();
        for &l in &self.leaders {
            dist[l] = Some(0);
            queue.push_back(l);
        }
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap() + 1;
            for &v in &succs[u] {
                if dist[v].is_none() {
                    dist[v] = Some(d);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Kahn's algorithm; `None` if the graph has a directed cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.nodes.len();
        let succs = self.successors();
        let mut indeg = vec![0usize; n];
        for e in &self.edges {
            indeg[e.to] += 1;
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &v in &succs[u] {
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    queue.push_back(v);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// Nodes from which `v` can be reached, excluding `v` itself.
    pub fn ancestors(&self, v: usize) -> BTreeSet<usize> {
        let preds = self.predecessors();
        let mut seen = BTreeSet::new();
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            for &p in &preds[u] {
                if p != v && seen.insert(p) {
                    stack.push(p);
                }
            }
        }
        seen
    }
}

pub fn parse_graph(text: &str) -> Result<StructuredGraph, GraphError> {
    let doc: GraphDoc = serde_json::from_str(text).map_err(|e| GraphError::Json(e.to_string()))?;
    StructuredGraph::new(&doc.nodes, &doc.edges, &doc.leaders)
}

pub fn validate(g: &StructuredGraph) -> GraphShape {
    let dist = g.distances();
    let connectivity = if dist.iter().all(Option::is_some) {
        Connectivity::InputConnected
    } else {
        Connectivity::NotInputConnected
    };
    let acyclicity = if g.topological_order().is_none() {
        Acyclicity::Cyclic
    } else if connectivity == Connectivity::InputConnected
        && g.edges
            .iter()
            .all(|e| dist[e.to].unwrap() == dist[e.from].unwrap() + 1)
    {
        // Also excludes leaders with incoming edges: their step is 0.
        Acyclicity::Hdag
    } else {
        Acyclicity::Dag
    };
    GraphShape {
        acyclicity,
        connectivity,
    }
}

pub fn layering(g: &StructuredGraph) -> Result<Layering, GraphError> {
    let dist = g.distances();
    let unreachable: Vec<String> = dist
        .iter()
        .enumerate()
        .filter(|(_, d)| d.is_none())
        .map(|(v, _)| g.nodes[v].0.clone())
        .collect();
    if !unreachable.is_empty() {
        return Err(GraphError::Unreachable(unreachable));
    }
    let step_of: Vec<usize> = dist.into_iter().map(Option::unwrap).collect();
    let depth = step_of.iter().copied().max().unwrap_or(0);
    let mut layers = vec![Vec::new(); depth + 1];
    for (v, &k) in step_of.iter().enumerate() {
        layers[k].push(v);
    }
    Ok(Layering { step_of, layers })
}

/// Enumerates every stem of exactly `k` edges ending at `target`, ordered
/// lexicographically by the label sequence.
pub fn enumerate_stems(g: &StructuredGraph, target: usize, k: usize) -> Vec<Stem> {
    let preds = g.predecessors();
    let mut out = Vec::new();
    let mut path = vec![target];
    let mut on_path = vec![false; g.node_count()];
    on_path[target] = true;
    walk_back(g, &preds, k, &mut path, &mut on_path, &mut out);
    out.sort_by(|a, b| {
        let la = a.nodes.iter().map(|&v| g.label(v));
        let lb = b.nodes.iter().map(|&v| g.label(v));
        la.cmp(lb)
    });
    out
}

fn walk_back(
    g: &StructuredGraph,
    preds: &[Vec<usize>],
    remaining: usize,
    path: &mut Vec<usize>,
    on_path: &mut [bool],
    out: &mut Vec<Stem>,
) {
    let head = *path.last().unwrap();
    if remaining == 0 {
        if g.is_leader(head) {
            out.push(Stem {
                nodes: path.iter().rev().copied().collect(),
            });
        }
        return;
    }
    for &p in &preds[head] {
        if on_path[p] {
            continue;
        }
        on_path[p] = true;
        path.push(p);
        walk_back(g, preds, remaining - 1, path, on_path, out);
        path.pop();
        on_path[p] = false;
    }
}

/// Appends `v` to the leader list; a no-op when `v` already leads.
pub fn add_leader(g: &StructuredGraph, v: usize) -> StructuredGraph {
    let mut out = g.clone();
    if !out.leaders.contains(&v) {
        out.leaders.push(v);
    }
    out
}

/// [`add_leader`] by label.
pub fn add_leader_by_label(g: &StructuredGraph, label: &str) -> Result<StructuredGraph, GraphError> {
    let v = g
        .index_of(label)
        .ok_or_else(|| GraphError::UnknownNode(label.to_string()))?;
    Ok(add_leader(g, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn parses_two_node_chain() {
        let g = parse_graph(r#"{"nodes":["1","2"],"edges":[["1","2"]],"leaders":["1"]}"#).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edges(), &[Edge { from: 0, to: 1 }]);
        assert_eq!(g.leaders(), &[0]);
    }

    #[test]
    fn fig1a_has_seven_state_edges() {
        let g = parse_graph(&fixtures::fig1a().to_json()).unwrap();
        assert_eq!(g.node_count(), 6);
        assert_eq!(g.edges().len(), 7);
    }

    #[test]
    fn rejects_bad_documents() {
        let err = parse_graph(r#"{"nodes":["1"],"edges":[["1","9"]],"leaders":["1"]}"#).unwrap_err();
        assert_eq!(err, GraphError::UnknownNode("9".into()));
        assert!(err.to_string().contains("\"9\""));

        let err = parse_graph(r#"{"nodes":["1","1"],"edges":[],"leaders":["1"]}"#).unwrap_err();
        assert_eq!(err, GraphError::DuplicateNode("1".into()));

        let err = parse_graph(r#"{"nodes":["1","2"],"edges":[["1","2"],["1","2"]],"leaders":["1"]}"#)
            .unwrap_err();
        assert_eq!(err, GraphError::DuplicateEdge("1".into(), "2".into()));

        let err = parse_graph(r#"{"nodes":["1"],"edges":[],"leaders":["1","1"]}"#).unwrap_err();
        assert_eq!(err, GraphError::DuplicateLeader("1".into()));

        let err = parse_graph(r#"{"nodes":["1"],"edges":[],"leaders":[]}"#).unwrap_err();
        assert_eq!(err, GraphError::EmptyLeaders);

        let err = parse_graph(r#"{"nodes":["a b"],"edges":[],"leaders":["a b"]}"#).unwrap_err();
        assert!(matches!(err, GraphError::BadLabel(_)));

        assert!(matches!(parse_graph("{\"nodes\":[}"), Err(GraphError::Json(_))));
        let err = parse_graph(r#"{"nodes":["1"],"edges":[],"leaders":["1"],"extra":1}"#).unwrap_err();
        assert!(matches!(err, GraphError::Json(msg) if msg.contains("extra")));
    }

    #[test]
    fn shapes() {
        let fig3 = fixtures::fig3();
        assert_eq!(
            validate(&fig3),
            GraphShape {
                acyclicity: Acyclicity::Hdag,
                connectivity: Connectivity::InputConnected
            }
        );
        assert!(validate(&fixtures::chain3()).is_hdag());

        let skip = StructuredGraph::new(
            &["1", "2"],
            &[("1", "2"), ("2", "1")],
            &["1"],
        )
        .unwrap();
        assert_eq!(validate(&skip).acyclicity, Acyclicity::Cyclic);

        let mut edges: Vec<(String, String)> = fig3
            .edges()
            .iter()
            .map(|e| (fig3.label(e.from).to_string(), fig3.label(e.to).to_string()))
            .collect();
        edges.push(("2".into(), "6".into()));
        let labels: Vec<String> = fig3.nodes().iter().map(|n| n.to_string()).collect();
        let g = StructuredGraph::new(&labels, &edges, &["1".to_string()]).unwrap();
        let shape = validate(&g);
        assert_eq!(shape.acyclicity, Acyclicity::Dag);
        assert!(shape.is_input_connected());

        let disconnected = StructuredGraph::new(&["1", "2"], &[], &["1"]).unwrap();
        assert_eq!(validate(&disconnected).connectivity, Connectivity::NotInputConnected);

        let self_loop = StructuredGraph::new(&["1"], &[("1", "1")], &["1"]).unwrap();
        assert_eq!(validate(&self_loop).acyclicity, Acyclicity::Cyclic);

        // a leader fed by another leader breaks the step-0 placement
        let fed = StructuredGraph::new(&["1", "2"], &[("1", "2")], &["1", "2"]).unwrap();
        assert_eq!(validate(&fed).acyclicity, Acyclicity::Dag);
    }

    fn layer_labels(g: &StructuredGraph) -> Vec<Vec<String>> {
        layering(g)
            .unwrap()
            .layers
            .iter()
            .map(|l| l.iter().map(|&v| g.label(v).to_string()).collect())
            .collect()
    }

    #[test]
    fn layerings() {
        let fig3 = fixtures::fig3();
        assert_eq!(
            layer_labels(&fig3),
            vec![
                vec!["1"],
                vec!["2"],
                vec!["3", "4"],
                vec!["5", "6", "7"],
                vec!["8", "9"],
                vec!["10", "11", "12"],
                vec!["13"]
            ]
        );
        assert_eq!(layering(&fig3).unwrap().depth(), 6);
        assert_eq!(layer_labels(&fixtures::chain3()), vec![vec!["1"], vec!["2"], vec!["3"]]);
        let fig1b = fixtures::fig1b();
        assert_eq!(
            layer_labels(&fig1b),
            vec![vec!["1"], vec!["2", "3"], vec!["4", "5"], vec!["6", "7"]]
        );
        assert_eq!(layering(&fig1b).unwrap().depth(), 3);

        let g = StructuredGraph::new(&["1", "2", "3"], &[("1", "2")], &["1"]).unwrap();
        assert_eq!(layering(&g), Err(GraphError::Unreachable(vec!["3".into()])));
    }

    fn stem_labels(g: &StructuredGraph, target: &str, k: usize) -> Vec<Vec<String>> {
        enumerate_stems(g, g.index_of(target).unwrap(), k)
            .into_iter()
            .map(|s| s.nodes.iter().map(|&v| g.label(v).to_string()).collect())
            .collect()
    }

    #[test]
    fn stems() {
        let fig1a = fixtures::fig1a();
        assert_eq!(
            stem_labels(&fig1a, "5", 2),
            vec![vec!["1", "2", "5"], vec!["1", "3", "5"]]
        );
        assert!(stem_labels(&fig1a, "5", 1).is_empty());
        assert_eq!(stem_labels(&fixtures::chain3(), "3", 2), vec![vec!["1", "2", "3"]]);
        assert_eq!(stem_labels(&fixtures::chain3(), "1", 0), vec![vec!["1"]]);
    }

    #[test]
    fn stems_skip_revisits_in_cycles() {
        let g = StructuredGraph::new(&["1", "2", "3"], &[("1", "2"), ("2", "3"), ("3", "2")], &["1"])
            .unwrap();
        assert_eq!(stem_labels(&g, "2", 1), vec![vec!["1", "2"]]);
        assert!(stem_labels(&g, "2", 3).is_empty());
    }

    #[test]
    fn leader_augmentation() {
        let fig3 = fixtures::fig3();
        let g = add_leader_by_label(&fig3, "13").unwrap();
        let leaders: Vec<&str> = g.leaders().iter().map(|&l| g.label(l).as_str()).collect();
        assert_eq!(leaders, ["1", "13"]);
        assert_eq!(add_leader_by_label(&fig3, "1").unwrap(), fig3);
        let d = add_leader_by_label(&fixtures::diamond(), "4").unwrap();
        assert_eq!(d.leaders(), &[0, 3]);
        assert_eq!(
            add_leader_by_label(&fig3, "99"),
            Err(GraphError::UnknownNode("99".into()))
        );
    }
}
