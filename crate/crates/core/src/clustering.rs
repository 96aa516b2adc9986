//! Clusterings, connected components, overlay clusterings and quotient graphs.

use std::collections::VecDeque;

use crate::edge_set::EdgeSet;
use crate::graph::{merge_parallel, BlockId, Graph, NodeId, Weight};

/// A block assignment without balance requirement; ids are dense in `0..k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clustering {
    k: usize,
    assignment: Vec<BlockId>,
}

impl Clustering {
    /// Relabels arbitrary ids densely in order of first appearance.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut remap = std::collections::HashMap::new();
        let assignment = labels
            .iter()
            .map(|l| {
                let next = remap.len();
                *remap.entry(*l).or_insert(next)
            })
            .collect();
        Clustering {
            k: remap.len(),
            assignment,
        }
    }

    pub(crate) fn from_dense(k: usize, assignment: Vec<BlockId>) -> Self {
        debug_assert!(assignment.iter().all(|&c| c < k));
        Clustering { k, assignment }
    }

    /// Number of clusters k'.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn cluster(&self, v: NodeId) -> BlockId {
        self.assignment[v]
    }

    pub fn assignment(&self) -> &[BlockId] {
        &self.assignment
    }

    /// Members of every cluster, in node order.
    pub fn members(&self) -> Vec<Vec<NodeId>> {
        let mut out = vec![Vec::new(); self.k];
        for (v, &c) in self.assignment.iter().enumerate() {
            out[c].push(v);
        }
        out
    }
}

/// Labels the connected components of the graph restricted to the edge
/// slots accepted by `keep(u, slot)`.
pub(crate) fn components_where<F>(g: &Graph, mut keep: F) -> Clustering
where
    F: FnMut(NodeId, usize) -> bool,
{
    const UNSEEN: usize = usize::MAX;
    let mut label = vec![UNSEEN; g.n()];
    let mut k = 0;
    let mut queue = VecDeque::new();
    for root in g.nodes() {
        if label[root] != UNSEEN {
            continue;
        }
        label[root] = k;
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            for e in g.edge_slots(u) {
                let v = g.edge_target(e);
                if label[v] == UNSEEN && keep(u, e) {
                    label[v] = k;
                    queue.push_back(v);
                }
            }
        }
        k += 1;
    }
    Clustering::from_dense(k, label)
}

/// Components of G after removing the `excluded` edges.
pub fn connected_components(g: &Graph, excluded: &EdgeSet) -> Clustering {
    let mask = excluded.slot_mask(g);
    components_where(g, |_, e| !mask[e])
}

/// Components of G after removing every edge cut by `a` or by `b`. Each
/// resulting cluster lies inside a single block of both inputs.
pub fn overlay_clustering(g: &Graph, a: &[BlockId], b: &[BlockId]) -> Clustering {
    components_where(g, |u, e| {
        let v = g.edge_target(e);
        a[u] == a[v] && b[u] == b[v]
    })
}

/// Contracts every cluster into a single node. Node weights are summed,
/// edges between clusters merged by weight sum, intra-cluster edges dropped.
pub fn quotient_graph(g: &Graph, c: &Clustering) -> Graph {
    contract_by_map(g, c.assignment(), c.k())
}

/// Builds the coarse graph induced by `map: fine -> coarse` with `k`
/// coarse nodes.
pub(crate) fn contract_by_map(g: &Graph, map: &[NodeId], k: usize) -> Graph {
    let mut vwgt = vec![0 as Weight; k];
    let mut lists: Vec<Vec<(NodeId, Weight)>> = vec![Vec::new(); k];
    for u in g.nodes() {
        let cu = map[u];
        vwgt[cu] += g.node_weight(u);
        for (v, w) in g.neighbors(u) {
            let cv = map[v];
            if cu != cv {
                lists[cu].push((cv, w));
            }
        }
    }
    for list in &mut lists {
        merge_parallel(list);
    }
    Graph::from_sorted_lists(vwgt, lists)
}
