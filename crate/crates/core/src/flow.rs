//! Min-cost circulation by negative-cycle canceling.
//!
//! Bellman-Ford finds a negative residual cycle, the bottleneck is pushed
//! around it, and the process repeats until no negative cycle remains.
//! Graphs here are tiny, so no scaling or potentials.

#[derive(Debug, Clone)]
struct Arc {
    to: usize,
    cap: i64,
    cost: i64,
    flow: i64,
}

#[derive(Debug, Clone)]
pub struct Circulation {
    n: usize,
    arcs: Vec<Arc>,
    from: Vec<usize>,
}

impl Circulation {
    pub fn new(n: usize) -> Self {
        Circulation {
            n,
            arcs: Vec::new(),
            from: Vec::new(),
        }
    }

    /// Adds `u -> v`; the paired residual arc sits at `id ^ 1`.
    pub fn add_arc(&mut self, u: usize, v: usize, cap: i64, cost: i64) -> usize {
        let id = self.arcs.len();
        self.arcs.push(Arc { to: v, cap, cost, flow: 0 });
        self.from.push(u);
        self.arcs.push(Arc { to: u, cap: 0, cost: -cost, flow: 0 });
        self.from.push(v);
        id
    }

    pub fn flow(&self, arc: usize) -> i64 {
        self.arcs[arc].flow
    }

    pub fn head(&self, arc: usize) -> usize {
        self.arcs[arc].to
    }

    pub fn tail(&self, arc: usize) -> usize {
        self.from[arc]
    }

    fn residual(&self, arc: usize) -> i64 {
        self.arcs[arc].cap - self.arcs[arc].flow
    }

    pub fn total_cost(&self) -> i64 {
        self.arcs.iter().step_by(2).map(|a| a.flow * a.cost).sum()
    }

    /// Cancels negative cycles until optimal; returns the final cost.
    pub fn solve(&mut self) -> i64 {
        while let Some(cycle) = self.negative_cycle() {
            let push = cycle.iter().map(|&a| self.residual(a)).min().unwrap();
            debug_assert!(push > 0);
            for a in cycle {
                self.arcs[a].flow += push;
                self.arcs[a ^ 1].flow -= push;
            }
        }
        self.total_cost()
    }

    fn negative_cycle(&self) -> Option<Vec<usize>> {
        let mut dist = vec![0i64; self.n];
        let mut pred: Vec<Option<usize>> = vec![None; self.n];
        let mut last = None;
        for _ in 0..self.n {
            last = None;
            for (a, arc) in self.arcs.iter().enumerate() {
                if self.residual(a) <= 0 {
                    continue;
                }
                let u = self.from[a];
                if dist[u] + arc.cost < dist[arc.to] {
                    dist[arc.to] = dist[u] + arc.cost;
                    pred[arc.to] = Some(a);
                    last = Some(arc.to);
                }
            }
            last?;
        }
        // Still relaxing after n rounds: walk back n steps to land on the cycle.
        let mut v = last?;
        for _ in 0..self.n {
            v = self.from[pred[v].unwrap()];
        }
        let start = v;
        let mut cycle = Vec::new();
        loop {
            let a = pred[v].unwrap();
            cycle.push(a);
            v = self.from[a];
            if v == start {
                break;
            }
        }
        cycle.reverse();
        Some(cycle)
    }
}
