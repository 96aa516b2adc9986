//! Max-flow / min-cut with Dinic's algorithm.

use std::collections::VecDeque;

use crate::graph::{NodeId, Weight};

#[derive(Clone, Debug)]
struct Arc {
    to: usize,
    residual: Weight,
}

/// A capacity network; arcs are stored in pairs (`2i` forward, `2i + 1`
/// backward) so the reverse of arc `a` is `a ^ 1`.
#[derive(Clone, Debug, Default)]
pub struct FlowNetwork {
    adj: Vec<Vec<usize>>,
    arcs: Vec<Arc>,
    capacity: Vec<Weight>,
}

impl FlowNetwork {
    pub fn new(n: usize) -> Self {
        FlowNetwork {
            adj: vec![Vec::new(); n],
            arcs: Vec::new(),
            capacity: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    /// Adds a directed arc `u -> v` with capacity `cap`.
    pub fn add_arc(&mut self, u: usize, v: usize, cap: Weight) {
        self.add_pair(u, v, cap, 0);
    }

    /// Adds an undirected edge: capacity `cap` in both directions.
    pub fn add_edge(&mut self, u: usize, v: usize, cap: Weight) {
        self.add_pair(u, v, cap, cap);
    }

    fn add_pair(&mut self, u: usize, v: usize, forward: Weight, backward: Weight) {
        debug_assert!(forward >= 0 && backward >= 0);
        let id = self.arcs.len();
        self.arcs.push(Arc {
            to: v,
            residual: forward,
        });
        self.arcs.push(Arc {
            to: u,
            residual: backward,
        });
        self.capacity.push(forward);
        self.capacity.push(backward);
        self.adj[u].push(id);
        self.adj[v].push(id + 1);
    }

    fn levels(&self, s: usize, t: usize) -> Option<Vec<u32>> {
        let mut level = vec![u32::MAX; self.n()];
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &a in &self.adj[u] {
                let arc = &self.arcs[a];
                if arc.residual > 0 && level[arc.to] == u32::MAX {
                    level[arc.to] = level[u] + 1;
                    queue.push_back(arc.to);
                }
            }
        }
        (level[t] != u32::MAX).then_some(level)
    }

    /// Saturates every shortest augmenting path of the current level graph.
    fn blocking_flow(&mut self, s: usize, t: usize, level: &[u32]) -> Weight {
        let mut next = vec![0usize; self.n()];
        let mut path: Vec<usize> = Vec::new();
        let mut total = 0;
        let mut u = s;
        loop {
            if u == t {
                let d = path
                    .iter()
                    .map(|&a| self.arcs[a].residual)
                    .min()
                    .expect("path to sink is non-empty");
                for &a in &path {
                    self.arcs[a].residual -= d;
                    self.arcs[a ^ 1].residual += d;
                }
                total += d;
                let first_saturated = path
                    .iter()
                    .position(|&a| self.arcs[a].residual == 0)
                    .expect("some arc saturates");
                path.truncate(first_saturated);
                u = path.last().map_or(s, |&a| self.arcs[a].to);
                continue;
            }
            let mut advanced = false;
            while next[u] < self.adj[u].len() {
                let a = self.adj[u][next[u]];
                let arc = &self.arcs[a];
                if arc.residual > 0 && level[arc.to] == level[u] + 1 {
                    path.push(a);
                    u = arc.to;
                    advanced = true;
                    break;
                }
                next[u] += 1;
            }
            if !advanced {
                match path.pop() {
                    None => break,
                    Some(a) => {
                        u = self.arcs[a ^ 1].to;
                        next[u] += 1;
                    }
                }
            }
        }
        total
    }

    /// Computes a maximum `s`-`t` flow, leaving the residual network behind.
    pub fn max_flow(&mut self, s: usize, t: usize) -> Weight {
        assert_ne!(s, t, "source and sink must differ");
        let mut flow = 0;
        while let Some(level) = self.levels(s, t) {
            flow += self.blocking_flow(s, t, &level);
        }
        flow
    }

    /// Nodes reachable from `s` in the residual network (the smallest
    /// source side of a minimum cut).
    pub fn source_side(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n()];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &a in &self.adj[u] {
                let arc = &self.arcs[a];
                if arc.residual > 0 && !seen[arc.to] {
                    seen[arc.to] = true;
                    queue.push_back(arc.to);
                }
            }
        }
        seen
    }

    /// Complement of the nodes that can reach `t` in the residual network
    /// (the largest source side of a minimum cut).
    pub fn maximal_source_side(&self, t: usize) -> Vec<bool> {
        let mut reaches = vec![false; self.n()];
        reaches[t] = true;
        let mut queue = VecDeque::from([t]);
        while let Some(v) = queue.pop_front() {
            // u reaches v if the arc u -> v has residual capacity; that arc is
            // the reverse of some arc v -> u stored at v.
            for &a in &self.adj[v] {
                let back = a ^ 1;
                let u = self.arcs[a].to;
                if !reaches[u] && self.arcs[back].residual > 0 {
                    reaches[u] = true;
                    queue.push_back(u);
                }
            }
        }
        reaches.into_iter().map(|r| !r).collect()
    }

    /// Total original capacity of arcs leaving the node set `side`.
    pub fn cut_capacity(&self, side: &[bool]) -> Weight {
        let mut total = 0;
        for (u, arcs) in self.adj.iter().enumerate() {
            if !side[u] {
                continue;
            }
            for &a in arcs {
                if !side[self.arcs[a].to] {
                    total += self.capacity[a];
                }
            }
        }
        total
    }
}

/// A flow network together with its terminals and the graph node that
/// each network node stands for (`None` for contracted terminals).
#[derive(Clone, Debug)]
pub struct FlowProblem {
    pub network: FlowNetwork,
    pub source: usize,
    pub sink: usize,
    pub node_map: Vec<Option<NodeId>>,
}

/// Solves the max-flow problem; returns the flow value and the residual
/// source side. The flow value always equals the capacity of that cut.
pub fn max_flow_min_cut(fp: &mut FlowProblem) -> (Weight, Vec<bool>) {
    let value = fp.network.max_flow(fp.source, fp.sink);
    let side = fp.network.source_side(fp.source);
    let capacity = fp.network.cut_capacity(&side);
    assert_eq!(value, capacity, "max-flow value must equal the min-cut capacity");
    (value, side)
}
