//! Canonical sets of undirected edges.

use crate::graph::{Graph, NodeId};

/// A deduplicated set of undirected edges stored as sorted `(u, v)` pairs
/// with `u < v`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct EdgeSet {
    edges: Vec<(NodeId, NodeId)>,
}

#[inline]
fn canonical(u: NodeId, v: NodeId) -> (NodeId, NodeId) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

impl EdgeSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a set from edges given in any orientation, possibly repeated.
    pub fn from_pairs<I: IntoIterator<Item = (NodeId, NodeId)>>(pairs: I) -> Self {
        let mut edges: Vec<_> = pairs.into_iter().map(|(u, v)| canonical(u, v)).collect();
        edges.sort_unstable();
        edges.dedup();
        EdgeSet { edges }
    }

    pub(crate) fn from_sorted_unchecked(edges: Vec<(NodeId, NodeId)>) -> Self {
        debug_assert!(edges.windows(2).all(|w| w[0] < w[1]));
        EdgeSet { edges }
    }

    /// Every edge of `g`.
    pub fn all(g: &Graph) -> Self {
        EdgeSet {
            edges: g.edges().map(|(u, v, _)| (u, v)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, u: NodeId, v: NodeId) -> bool {
        self.edges.binary_search(&canonical(u, v)).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.edges.iter().copied()
    }

    pub fn as_slice(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn union(&self, other: &EdgeSet) -> EdgeSet {
        let (a, b) = (&self.edges, &other.edges);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        EdgeSet { edges: out }
    }

    pub fn extend(&mut self, other: &EdgeSet) {
        *self = self.union(other);
    }

    /// |self △ other|
    pub fn symmetric_difference_len(&self, other: &EdgeSet) -> usize {
        let (a, b) = (&self.edges, &other.edges);
        let (mut i, mut j, mut common) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    common += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        a.len() + b.len() - 2 * common
    }

    /// Per-slot membership mask aligned with the adjacency array of `g`.
    /// Both directions of a member edge are flagged.
    pub fn slot_mask(&self, g: &Graph) -> Vec<bool> {
        let mut mask = vec![false; 2 * g.m()];
        for &(u, v) in &self.edges {
            if let Some(e) = g.find_edge(u, v) {
                mask[e] = true;
                mask[g.reverse_slot(e)] = true;
            }
        }
        mask
    }
}

impl FromIterator<(NodeId, NodeId)> for EdgeSet {
    fn from_iter<T: IntoIterator<Item = (NodeId, NodeId)>>(iter: T) -> Self {
        EdgeSet::from_pairs(iter)
    }
}

/// Number of edges in exactly one of the two sets; used as the distance
/// between two individuals.
pub fn partition_distance(a: &EdgeSet, b: &EdgeSet) -> usize {
    a.symmetric_difference_len(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn distance_examples() {
        let a = EdgeSet::from_pairs([(0, 1)]);
        let b = EdgeSet::from_pairs([(2, 1)]);
        assert_eq!(partition_distance(&a, &a), 0);
        assert_eq!(partition_distance(&a, &b), 2);
        let c = EdgeSet::from_pairs([(0, 1), (1, 2)]);
        let d = EdgeSet::from_pairs([(1, 2), (2, 3)]);
        assert_eq!(partition_distance(&c, &d), 2);
    }

    #[test]
    fn canonical_form_dedups() {
        let s = EdgeSet::from_pairs([(3, 1), (1, 3), (0, 2)]);
        assert_eq!(s.as_slice(), &[(0, 2), (1, 3)]);
        assert!(s.contains(3, 1));
    }

    fn edge_set() -> impl Strategy<Value = EdgeSet> {
        prop::collection::vec((0usize..8, 0usize..8), 0..20).prop_map(|pairs| {
            EdgeSet::from_pairs(pairs.into_iter().filter(|(u, v)| u != v))
        })
    }

    proptest! {
        #[test]
        fn distance_is_a_pseudometric(a in edge_set(), b in edge_set(), c in edge_set()) {
            prop_assert_eq!(partition_distance(&a, &a), 0);
            prop_assert_eq!(partition_distance(&a, &b), partition_distance(&b, &a));
            prop_assert!(
                partition_distance(&a, &c) <= partition_distance(&a, &b) + partition_distance(&b, &c)
            );
        }

        #[test]
        fn union_contains_both(a in edge_set(), b in edge_set()) {
            let u = a.union(&b);
            for (x, y) in a.iter().chain(b.iter()) {
                prop_assert!(u.contains(x, y));
            }
            prop_assert_eq!(u.len(), (a.len() + b.len() + a.symmetric_difference_len(&b)) / 2);
        }
    }
}
