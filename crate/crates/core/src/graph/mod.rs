//! Static weighted undirected graphs in adjacency-array form.
//!
//! Every undirected edge `{u, v}` is stored twice, once in the neighbor list
//! of each endpoint. Neighbor lists are sorted by target id and each slot
//! records the slot of its reverse direction, so walking from `u -> v` to
//! `v -> u` is O(1).

mod metis;

pub use metis::{load_metis, parse_metis, write_metis};

use std::ops::Range;

use thiserror::Error;

pub type NodeId = usize;
pub type BlockId = usize;
pub type Weight = i64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("edge {{{u}, {v}}} has non-positive weight {weight}")]
    NonPositiveEdgeWeight { u: NodeId, v: NodeId, weight: Weight },
    #[error("node {0} has negative weight")]
    NegativeNodeWeight(NodeId),
    #[error("node index {index} out of range for a graph with {n} nodes")]
    OutOfRange { index: usize, n: usize },
    #[error("io error: {0}")]
    Io(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    xadj: Vec<usize>,
    adjncy: Vec<NodeId>,
    adjwgt: Vec<Weight>,
    reverse: Vec<usize>,
    vwgt: Vec<Weight>,
    total_node_weight: Weight,
    max_node_weight: Weight,
    total_edge_weight: Weight,
}

impl Graph {
    /// Builds a graph from an undirected edge list.
    ///
    /// Each edge may be given in either orientation; repeated pairs are
    /// merged by summing their weights.
    pub fn from_edges<I>(node_weights: Vec<Weight>, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (NodeId, NodeId, Weight)>,
    {
        let n = node_weights.len();
        if let Some(v) = node_weights.iter().position(|&w| w < 0) {
            return Err(GraphError::NegativeNodeWeight(v));
        }
        let mut lists: Vec<Vec<(NodeId, Weight)>> = vec![Vec::new(); n];
        for (u, v, w) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(GraphError::OutOfRange { index: x, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if w <= 0 {
                return Err(GraphError::NonPositiveEdgeWeight { u, v, weight: w });
            }
            lists[u].push((v, w));
            lists[v].push((u, w));
        }
        for list in &mut lists {
            merge_parallel(list);
        }
        Ok(Self::from_sorted_lists(node_weights, lists))
    }

    /// Unit node weights and unit edge weights.
    pub fn unweighted(n: usize, edges: &[(NodeId, NodeId)]) -> Result<Self, GraphError> {
        Self::from_edges(vec![1; n], edges.iter().map(|&(u, v)| (u, v, 1)))
    }

    /// Assembles a graph from per-node neighbor lists that are already
    /// sorted, merged, symmetric and free of self-loops.
    pub(crate) fn from_sorted_lists(vwgt: Vec<Weight>, lists: Vec<Vec<(NodeId, Weight)>>) -> Self {
        let n = vwgt.len();
        debug_assert_eq!(lists.len(), n);
        let mut xadj = Vec::with_capacity(n + 1);
        xadj.push(0);
        let total: usize = lists.iter().map(Vec::len).sum();
        let mut adjncy = Vec::with_capacity(total);
        let mut adjwgt = Vec::with_capacity(total);
        for list in &lists {
            for &(v, w) in list {
                adjncy.push(v);
                adjwgt.push(w);
            }
            xadj.push(adjncy.len());
        }
        let mut reverse = vec![0; total];
        for u in 0..n {
            for e in xadj[u]..xadj[u + 1] {
                let v = adjncy[e];
                let row = &adjncy[xadj[v]..xadj[v + 1]];
                let pos = row
                    .binary_search(&u)
                    .expect("neighbor lists must be symmetric");
                reverse[e] = xadj[v] + pos;
            }
        }
        let total_node_weight = vwgt.iter().sum();
        let max_node_weight = vwgt.iter().copied().max().unwrap_or(0);
        let total_edge_weight = adjwgt.iter().sum::<Weight>() / 2;
        Graph {
            xadj,
            adjncy,
            adjwgt,
            reverse,
            vwgt,
            total_node_weight,
            max_node_weight,
            total_edge_weight,
        }
    }

    pub fn n(&self) -> usize {
        self.vwgt.len()
    }

    /// Number of undirected edges.
    pub fn m(&self) -> usize {
        self.adjncy.len() / 2
    }

    pub fn nodes(&self) -> Range<NodeId> {
        0..self.n()
    }

    /// Slot range of the directed edges leaving `v`.
    #[inline]
    pub fn edge_slots(&self, v: NodeId) -> Range<usize> {
        self.xadj[v]..self.xadj[v + 1]
    }

    #[inline]
    pub fn edge_target(&self, slot: usize) -> NodeId {
        self.adjncy[slot]
    }

    #[inline]
    pub fn edge_weight(&self, slot: usize) -> Weight {
        self.adjwgt[slot]
    }

    /// Slot of the opposite direction of `slot`.
    #[inline]
    pub fn reverse_slot(&self, slot: usize) -> usize {
        self.reverse[slot]
    }

    /// Neighbors of `v` with the weight of the connecting edge.
    #[inline]
    pub fn neighbors(&self, v: NodeId) -> impl Iterator<Item = (NodeId, Weight)> + '_ {
        let r = self.edge_slots(v);
        self.adjncy[r.clone()]
            .iter()
            .copied()
            .zip(self.adjwgt[r].iter().copied())
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.xadj[v + 1] - self.xadj[v]
    }

    #[inline]
    pub fn node_weight(&self, v: NodeId) -> Weight {
        self.vwgt[v]
    }

    pub fn node_weights(&self) -> &[Weight] {
        &self.vwgt
    }

    /// c(V)
    pub fn total_node_weight(&self) -> Weight {
        self.total_node_weight
    }

    pub fn max_node_weight(&self) -> Weight {
        self.max_node_weight
    }

    /// ω(E), each undirected edge counted once.
    pub fn total_edge_weight(&self) -> Weight {
        self.total_edge_weight
    }

    /// Slot of the edge `u -> v`, if present.
    pub fn find_edge(&self, u: NodeId, v: NodeId) -> Option<usize> {
        let r = self.edge_slots(u);
        self.adjncy[r.clone()]
            .binary_search(&v)
            .ok()
            .map(|pos| r.start + pos)
    }

    /// Iterates undirected edges once each as `(u, v, w)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, Weight)> + '_ {
        self.nodes().flat_map(move |u| {
            self.neighbors(u)
                .filter(move |&(v, _)| u < v)
                .map(move |(v, w)| (u, v, w))
        })
    }

    /// Replaces zero node weights by one. Edge ratings divide by node
    /// weights, so coarsening requires strictly positive weights.
    pub fn normalize_node_weights(&mut self) {
        let mut changed = false;
        for w in &mut self.vwgt {
            if *w == 0 {
                *w = 1;
                changed = true;
            }
        }
        if changed {
            self.total_node_weight = self.vwgt.iter().sum();
            self.max_node_weight = self.vwgt.iter().copied().max().unwrap_or(0);
        }
    }

    /// Subgraph induced by `nodes`; returns the graph and the local → global map.
    pub fn induced_subgraph(&self, nodes: &[NodeId]) -> (Graph, Vec<NodeId>) {
        const ABSENT: usize = usize::MAX;
        let mut local = vec![ABSENT; self.n()];
        for (i, &v) in nodes.iter().enumerate() {
            local[v] = i;
        }
        let mut lists = Vec::with_capacity(nodes.len());
        let mut vwgt = Vec::with_capacity(nodes.len());
        for &v in nodes {
            vwgt.push(self.node_weight(v));
            let mut list: Vec<(NodeId, Weight)> = self
                .neighbors(v)
                .filter(|&(u, _)| local[u] != ABSENT)
                .map(|(u, w)| (local[u], w))
                .collect();
            list.sort_unstable_by_key(|&(u, _)| u);
            lists.push(list);
        }
        (Graph::from_sorted_lists(vwgt, lists), nodes.to_vec())
    }
}

/// Sorts a neighbor list by target and merges repeated targets by weight sum.
pub(crate) fn merge_parallel(list: &mut Vec<(NodeId, Weight)>) {
    list.sort_unstable_by_key(|&(v, _)| v);
    let mut out: Vec<(NodeId, Weight)> = Vec::with_capacity(list.len());
    for &(v, w) in list.iter() {
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 += w,
            _ => out.push((v, w)),
        }
    }
    *list = out;
}
