//! Balanced k-way partitions: block assignment, block weights, cached cut.

use crate::edge_set::EdgeSet;
use crate::graph::{BlockId, Graph, NodeId, Weight};

/// L_max = (1 + eps) * c(V) / k + max_v c(v).
pub fn l_max(g: &Graph, k: usize, eps: f64) -> f64 {
    (1.0 + eps) * g.total_node_weight() as f64 / k as f64 + g.max_node_weight() as f64
}

/// Largest integer block weight that satisfies the balance constraint.
pub fn max_block_weight(g: &Graph, k: usize, eps: f64) -> Weight {
    // Block weights are integers, so w <= L_max iff w <= floor(L_max). The
    // small slack absorbs representation error in products like 1.03 * 100.
    (l_max(g, k, eps) + 1e-9).floor() as Weight
}

/// Sum of the weights of edges whose endpoints lie in different blocks.
pub fn cut_value(g: &Graph, assignment: &[BlockId]) -> Weight {
    g.edges()
        .filter(|&(u, v, _)| assignment[u] != assignment[v])
        .map(|(_, _, w)| w)
        .sum()
}

/// Edges whose endpoints lie in different blocks.
pub fn cut_edge_set(g: &Graph, assignment: &[BlockId]) -> EdgeSet {
    EdgeSet::from_sorted_unchecked(
        g.edges()
            .filter(|&(u, v, _)| assignment[u] != assignment[v])
            .map(|(u, v, _)| (u, v))
            .collect(),
    )
}

/// Checks the balance constraint of `p` against the L_max of `g`.
pub fn is_feasible(g: &Graph, p: &Partition) -> bool {
    let bound = l_max(g, p.k(), p.eps());
    p.block_weights().iter().all(|&w| w as f64 <= bound + 1e-9)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    k: usize,
    eps: f64,
    assignment: Vec<BlockId>,
    block_weights: Vec<Weight>,
    caps: Vec<Weight>,
    cut: Weight,
}

impl Partition {
    /// Partition with the uniform cap floor(L_max) derived from `g`.
    pub fn new(g: &Graph, k: usize, eps: f64, assignment: Vec<BlockId>) -> Self {
        let cap = max_block_weight(g, k, eps);
        Self::with_caps(g, k, eps, assignment, vec![cap; k])
    }

    /// Partition with explicit per-block weight caps.
    pub fn with_caps(
        g: &Graph,
        k: usize,
        eps: f64,
        assignment: Vec<BlockId>,
        caps: Vec<Weight>,
    ) -> Self {
        assert!(k >= 1, "k must be at least 1");
        assert_eq!(assignment.len(), g.n(), "assignment must cover every node");
        assert_eq!(caps.len(), k);
        let mut block_weights = vec![0; k];
        for (v, &b) in assignment.iter().enumerate() {
            assert!(b < k, "block id {b} out of range for k={k}");
            block_weights[b] += g.node_weight(v);
        }
        let cut = cut_value(g, &assignment);
        Partition {
            k,
            eps,
            assignment,
            block_weights,
            caps,
            cut,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    #[inline]
    pub fn block(&self, v: NodeId) -> BlockId {
        self.assignment[v]
    }

    pub fn assignment(&self) -> &[BlockId] {
        &self.assignment
    }

    pub fn into_assignment(self) -> Vec<BlockId> {
        self.assignment
    }

    pub fn cut(&self) -> Weight {
        self.cut
    }

    #[inline]
    pub fn block_weight(&self, b: BlockId) -> Weight {
        self.block_weights[b]
    }

    pub fn block_weights(&self) -> &[Weight] {
        &self.block_weights
    }

    #[inline]
    pub fn cap(&self, b: BlockId) -> Weight {
        self.caps[b]
    }

    pub fn caps(&self) -> &[Weight] {
        &self.caps
    }

    /// All blocks within their caps.
    pub fn is_feasible(&self) -> bool {
        self.block_weights
            .iter()
            .zip(&self.caps)
            .all(|(w, c)| w <= c)
    }

    /// Total weight by which blocks exceed their caps.
    pub fn overload(&self) -> Weight {
        self.block_weights
            .iter()
            .zip(&self.caps)
            .map(|(w, c)| (w - c).max(0))
            .sum()
    }

    /// Ordering key for comparing partitions: overload first, then cut.
    pub fn quality_key(&self) -> (Weight, Weight) {
        (self.overload(), self.cut)
    }

    pub fn cut_edges(&self, g: &Graph) -> EdgeSet {
        cut_edge_set(g, &self.assignment)
    }

    /// Moves `v` to block `to`, updating block weights and the cached cut.
    /// Returns the decrease of the cut.
    pub fn move_node(&mut self, g: &Graph, v: NodeId, to: BlockId) -> Weight {
        let from = self.assignment[v];
        if from == to {
            return 0;
        }
        let mut gain = 0;
        for (u, w) in g.neighbors(v) {
            let b = self.assignment[u];
            if b == from {
                gain -= w;
            } else if b == to {
                gain += w;
            }
        }
        self.assignment[v] = to;
        let c = g.node_weight(v);
        self.block_weights[from] -= c;
        self.block_weights[to] += c;
        self.cut -= gain;
        gain
    }

    /// Recomputes cut and block weights from the assignment.
    pub fn recompute(&mut self, g: &Graph) {
        self.block_weights.iter_mut().for_each(|w| *w = 0);
        for (v, &b) in self.assignment.iter().enumerate() {
            self.block_weights[b] += g.node_weight(v);
        }
        self.cut = cut_value(g, &self.assignment);
    }

    /// Checks the cached values against a full recomputation.
    pub fn is_consistent(&self, g: &Graph) -> bool {
        let mut fresh = self.clone();
        fresh.recompute(g);
        fresh.cut == self.cut && fresh.block_weights == self.block_weights
    }

    /// Lifts a partition of a coarse graph to the finer graph, where
    /// `fine_to_coarse[v]` is the coarse node containing fine node `v`.
    /// Cut and block weights carry over unchanged.
    pub fn project(&self, fine_to_coarse: &[NodeId]) -> Partition {
        Partition {
            k: self.k,
            eps: self.eps,
            assignment: fine_to_coarse.iter().map(|&c| self.assignment[c]).collect(),
            block_weights: self.block_weights.clone(),
            caps: self.caps.clone(),
            cut: self.cut,
        }
    }

    /// Pushes a partition of a fine graph down onto a coarse graph. Returns
    /// `None` when some coarse node contains fine nodes of different blocks.
    pub fn restrict(&self, coarse: &Graph, fine_to_coarse: &[NodeId]) -> Option<Partition> {
        const UNSET: usize = usize::MAX;
        let mut assignment = vec![UNSET; coarse.n()];
        for (v, &c) in fine_to_coarse.iter().enumerate() {
            let b = self.assignment[v];
            if assignment[c] == UNSET {
                assignment[c] = b;
            } else if assignment[c] != b {
                return None;
            }
        }
        if assignment.contains(&UNSET) {
            return None;
        }
        Some(Partition::with_caps(
            coarse,
            self.k,
            self.eps,
            assignment,
            self.caps.clone(),
        ))
    }
}
