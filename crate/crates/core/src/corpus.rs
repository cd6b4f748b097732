//! Test corpora: every single-leader hierarchical DAG up to a node count,
//! one representative per isomorphism class, and seeded random DAGs.

use std::collections::HashSet;

use rand::Rng;

use crate::graph::StructuredGraph;

/// Layer widths after the leader layer, summing to `n - 1`.
pub fn layer_profiles(n: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for w in 1..=left {
            cur.push(w);
            rec(left - w, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n >= 1 {
        rec(n - 1, &mut Vec::new(), &mut out);
    }
    out
}

/// Adjacency between consecutive layers: `masks[k][j]` is the predecessor
/// set (bits over layer `k`) of node `j` in layer `k + 1`.
type Masks = Vec<Vec<u32>>;

fn canonical(widths: &[usize], masks: &Masks) -> Masks {
    // brute force over per-layer permutations; layers are tiny
    let perms: Vec<Vec<Vec<usize>>> = widths.iter().map(|&w| permutations(w)).collect();
    let mut best: Option<Masks> = None;
    let mut choice = vec![0usize; widths.len()];
    loop {
        let relabeled: Masks = (0..masks.len())
            .map(|k| {
                let (from, to) = (&perms[k][choice[k]], &perms[k + 1][choice[k + 1]]);
                let mut row = vec![0u32; widths[k + 1]];
                for (j, &m) in masks[k].iter().enumerate() {
                    let mut bits = 0;
                    for (i, &target) in from.iter().enumerate() {
                        if m >> i & 1 == 1 {
                            bits |= 1 << target;
                        }
                    }
                    row[to[j]] = bits;
                }
                row
            })
            .collect();
        if best.as_ref().is_none_or(|b| relabeled < *b) {
            best = Some(relabeled);
        }
        let mut k = 0;
        loop {
            if k == widths.len() {
                return best.unwrap();
            }
            choice[k] += 1;
            if choice[k] < perms[k].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

fn permutations(w: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..w).collect();
    heap(w, &mut cur, &mut out);
    out
}

fn heap(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(cur.clone());
        return;
    }
    for i in 0..k - 1 {
        heap(k - 1, cur, out);
        if k % 2 == 0 {
            cur.swap(i, k - 1);
        } else {
            cur.swap(0, k - 1);
        }
    }
    heap(k - 1, cur, out);
}

fn to_graph(widths: &[usize], masks: &Masks) -> StructuredGraph {
    let mut first = Vec::with_capacity(widths.len());
    let mut n = 0;
    for &w in widths {
        first.push(n);
        n += w;
    }
    let labels: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
    let mut edges = Vec::new();
    for (k, row) in masks.iter().enumerate() {
        for (j, &m) in row.iter().enumerate() {
            for i in 0..widths[k] {
                if m >> i & 1 == 1 {
                    edges.push((labels[first[k] + i].clone(), labels[first[k + 1] + j].clone()));
                }
            }
        }
    }
    StructuredGraph::new(&labels, &edges, &labels[..1]).expect("generated graph is well formed")
}

/// Every single-leader hierarchical DAG with exactly `n` nodes, one per
/// isomorphism class. Nodes are labelled `1..=n` in layer order.
pub fn hdags(n: usize) -> Vec<StructuredGraph> {
    let mut out = Vec::new();
    for profile in layer_profiles(n) {
        let mut widths = vec![1];
        widths.extend(profile);
        let mut seen = HashSet::new();
        let mut masks: Masks = (0..widths.len() - 1).map(|k| vec![1u32; widths[k + 1]]).collect();
        loop {
            let c = canonical(&widths, &masks);
            if seen.insert(c.clone()) {
                out.push(to_graph(&widths, &c));
            }
            // odometer over nonempty predecessor masks
            let mut advanced = false;
            'outer: for k in 0..masks.len() {
                let limit = (1u32 << widths[k]) - 1;
                for j in 0..masks[k].len() {
                    if masks[k][j] < limit {
                        masks[k][j] += 1;
                        advanced = true;
                        break 'outer;
                    }
                    masks[k][j] = 1;
                }
            }
            if !advanced {
                break;
            }
        }
    }
    out
}

/// All [`hdags`] with `1 <= n <= max_n`.
pub fn hdags_up_to(max_n: usize) -> Vec<StructuredGraph> {
    (1..=max_n).flat_map(hdags).collect()
}

/// Random input-connected DAG on `n` nodes: the first `leaders` nodes lead,
/// every later node gets one earlier predecessor plus extra forward edges
/// with probability `density`.
pub fn random_dag(n: usize, leaders: usize, density: f64, rng: &mut impl Rng) -> StructuredGraph {
    let leaders = leaders.clamp(1, n);
    let labels: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
    let mut edges = Vec::new();
    for j in leaders..n {
        let p = rng.gen_range(0..j);
        for i in 0..j {
            if i == p || rng.gen_bool(density) {
                edges.push((labels[i].clone(), labels[j].clone()));
            }
        }
    }
    StructuredGraph::new(&labels, &edges, &labels[..leaders]).expect("generated graph is well formed")
}
