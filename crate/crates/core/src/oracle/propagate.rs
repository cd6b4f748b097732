//! Exact vanishing-pattern feasibility for single-leader layered matrices.
//!
//! When every edge joins consecutive layers, the entry of a node `w` is
//! `sum over predecessors u of a_uw * M_u`, and each edge parameter feeds
//! exactly one such sum. Given which predecessors are nonzero, `M_w` is
//! forced to zero (no nonzero predecessor), forced nonzero (exactly one),
//! or free to take any real value (two or more, by scaling and canceling).
//! Feasibility of a vanishing pattern therefore only depends on the
//! zero/nonzero pattern of the previous layer, which this module explores
//! layer by layer.

use std::collections::HashSet;

use crate::symcm::SymCM;

#[derive(Debug, Clone)]
pub struct LayeredStructure {
    layers: Vec<Vec<usize>>,
    /// Position of each node inside its layer.
    slot: Vec<usize>,
    step: Vec<usize>,
    preds: Vec<Vec<usize>>,
}

impl LayeredStructure {
    /// `None` unless the matrix has one input, every row has exactly one
    /// non-Zero entry, and every edge joins consecutive steps.
    pub fn from_symcm(m: &SymCM) -> Option<Self> {
        if m.leaders().len() != 1 || !m.is_row_sparse() {
            return None;
        }
        let n = m.row_count();
        let mut step = vec![0; n];
        for (r, s) in step.iter_mut().enumerate() {
            *s = (0..m.col_count()).find(|&c| !m.entry(r, c).is_zero())?;
        }
        let mut preds = vec![Vec::new(); n];
        for e in m.edges() {
            if step[e.to] != step[e.from] + 1 {
                return None;
            }
            preds[e.to].push(e.from);
        }
        let depth = step.iter().copied().max().unwrap_or(0);
        let mut layers = vec![Vec::new(); depth + 1];
        let mut slot = vec![0; n];
        for v in 0..n {
            slot[v] = layers[step[v]].len();
            layers[step[v]].push(v);
        }
        Some(LayeredStructure {
            layers,
            slot,
            step,
            preds,
        })
    }

    pub fn step(&self, v: usize) -> usize {
        self.step[v]
    }

    pub fn layers(&self) -> &[Vec<usize>] {
        &self.layers
    }

    /// Whether some nonzero parameter assignment makes every node in
    /// `targets` vanish at once.
    pub fn vanishing_feasible(&self, targets: &[usize]) -> bool {
        let Some(last) = targets.iter().map(|&v| self.step[v]).max() else {
            return true;
        };
        let mut is_target = vec![false; self.step.len()];
        for &v in targets {
            is_target[v] = true;
        }
        // Layer 0 holds only the leader, whose entry is the constant 1.
        if targets.iter().any(|&v| self.step[v] == 0) {
            return false;
        }
        let mut states: HashSet<Vec<bool>> = HashSet::from([vec![true; self.layers[0].len()]]);
        for k in 1..=last {
            let mut next_states = HashSet::new();
            for state in &states {
                self.expand(k, state, &is_target, &mut next_states);
            }
            if next_states.is_empty() {
                return false;
            }
            states = next_states;
        }
        true
    }

    fn expand(&self, k: usize, prev: &[bool], is_target: &[bool], out: &mut HashSet<Vec<bool>>) {
        // per node: (can be zero, can be nonzero)
        let mut options = Vec::with_capacity(self.layers[k].len());
        for &w in &self.layers[k] {
            let live = self.preds[w].iter().filter(|&&u| prev[self.slot[u]]).count();
            let (zero, nonzero) = match live {
                0 => (true, false),
                1 => (false, true),
                _ => (true, true),
            };
            if is_target[w] {
                if !zero {
                    return;
                }
                options.push((true, false));
            } else {
                options.push((zero, nonzero));
            }
        }
        let mut cur = vec![false; options.len()];
        fill(&options, 0, &mut cur, out);
    }
}

fn fill(options: &[(bool, bool)], i: usize, cur: &mut Vec<bool>, out: &mut HashSet<Vec<bool>>) {
    if i == options.len() {
        out.insert(cur.clone());
        return;
    }
    let (zero, nonzero) = options[i];
    if zero {
        cur[i] = false;
        fill(options, i + 1, cur, out);
    }
    if nonzero {
        cur[i] = true;
        fill(options, i + 1, cur, out);
    }
}
