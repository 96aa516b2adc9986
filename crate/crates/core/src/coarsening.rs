//! Edge rating, GPA matching, contraction and multilevel hierarchies.
//!
//! Edges are rated with expansion*2, `ω(u,v)² / (c(u)·c(v))`. The Global
//! Path Algorithm scans edges by decreasing rating and collects paths and
//! even cycles (every node has degree at most two in the collection), then
//! solves maximum-rating matching exactly on each path and cycle by dynamic
//! programming. Blocked edges are never matched, so they survive every
//! contraction.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::clustering::{components_where, contract_by_map};
use crate::edge_set::EdgeSet;
use crate::graph::{Graph, NodeId, Weight};
use crate::partition::Partition;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CoarsenError {
    #[error("{{{0}, {1}}} is not an edge")]
    NotAnEdge(NodeId, NodeId),
    #[error("node {0} has zero weight, expansion*2 is undefined")]
    ZeroNodeWeight(NodeId),
    #[error("level {level} out of range for a hierarchy with {depth} contractions")]
    LevelOutOfRange { level: usize, depth: usize },
    #[error("partition has {got} nodes, level graph has {expected}")]
    SizeMismatch { expected: usize, got: usize },
}

/// Exact rational edge rating `num / den`.
#[derive(Clone, Copy, Debug)]
pub struct Rating {
    num: u128,
    den: u128,
}

impl Rating {
    pub fn new(edge_weight: Weight, cu: Weight, cv: Weight) -> Self {
        let w = edge_weight as u128;
        Rating {
            num: w * w,
            den: cu as u128 * cv as u128,
        }
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl PartialEq for Rating {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Rating {}

impl PartialOrd for Rating {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rating {
    fn cmp(&self, other: &Self) -> Ordering {
        match (
            self.num.checked_mul(other.den),
            other.num.checked_mul(self.den),
        ) {
            (Some(a), Some(b)) => a.cmp(&b),
            _ => self.value().total_cmp(&other.value()),
        }
    }
}

/// expansion*2 rating of the edge `{u, v}`.
pub fn rate_edge(g: &Graph, u: NodeId, v: NodeId) -> Result<Rating, CoarsenError> {
    let slot = g.find_edge(u, v).ok_or(CoarsenError::NotAnEdge(u, v))?;
    for x in [u, v] {
        if g.node_weight(x) == 0 {
            return Err(CoarsenError::ZeroNodeWeight(x));
        }
    }
    Ok(Rating::new(g.edge_weight(slot), g.node_weight(u), g.node_weight(v)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    partner: Vec<Option<NodeId>>,
    edges: Vec<(NodeId, NodeId)>,
}

impl Matching {
    pub fn empty(n: usize) -> Self {
        Matching {
            partner: vec![None; n],
            edges: Vec::new(),
        }
    }

    /// Builds a matching from edges; panics if two edges share a node.
    pub fn from_edges(n: usize, edges: &[(NodeId, NodeId)]) -> Self {
        let mut m = Matching::empty(n);
        for &(u, v) in edges {
            m.insert(u, v);
        }
        m
    }

    fn insert(&mut self, u: NodeId, v: NodeId) {
        assert!(
            self.partner[u].is_none() && self.partner[v].is_none(),
            "matching edges must be node-disjoint"
        );
        self.partner[u] = Some(v);
        self.partner[v] = Some(u);
        self.edges.push(if u < v { (u, v) } else { (v, u) });
    }

    pub fn partner(&self, v: NodeId) -> Option<NodeId> {
        self.partner[v]
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Sum of expansion*2 ratings of the matched edges.
    pub fn rating_sum(&self, g: &Graph) -> f64 {
        self.edges
            .iter()
            .map(|&(u, v)| rate_edge(g, u, v).map(|r| r.value()).unwrap_or(0.0))
            .sum()
    }
}

/// Non-blocked, ratable edges `(u, v, rating)` with `u < v`, sorted by
/// decreasing rating; ties are ordered by a seeded shuffle.
pub(crate) fn sorted_candidates<R: Rng + ?Sized>(
    g: &Graph,
    blocked: &[bool],
    rng: &mut R,
) -> Vec<(NodeId, NodeId, Rating)> {
    let mut cand = Vec::new();
    for u in g.nodes() {
        let cu = g.node_weight(u);
        if cu == 0 {
            continue;
        }
        for e in g.edge_slots(u) {
            let v = g.edge_target(e);
            if u < v && !blocked[e] && g.node_weight(v) > 0 {
                cand.push((u, v, Rating::new(g.edge_weight(e), cu, g.node_weight(v))));
            }
        }
    }
    cand.shuffle(rng);
    cand.sort_by(|a, b| b.2.cmp(&a.2));
    cand
}

/// GPA matching on `g` avoiding the `blocked` edges.
pub fn gpa_matching<R: Rng + ?Sized>(g: &Graph, blocked: &EdgeSet, rng: &mut R) -> Matching {
    gpa_matching_masked(g, &blocked.slot_mask(g), rng)
}

/// GPA matching with blocked edges given as a per-slot mask.
pub fn gpa_matching_masked<R: Rng + ?Sized>(g: &Graph, blocked: &[bool], rng: &mut R) -> Matching {
    let candidates = sorted_candidates(g, blocked, rng);
    let collection = PathCollection::build(g.n(), &candidates);
    let mut matching = Matching::empty(g.n());
    for component in collection.components() {
        let weights: Vec<f64> = component.edges.iter().map(|e| e.2).collect();
        let chosen = if component.is_cycle {
            best_cycle_matching(&weights)
        } else {
            best_path_matching(&weights)
        };
        for i in chosen {
            let (u, v, _) = component.edges[i];
            matching.insert(u, v);
        }
    }
    matching
}

/// Paths and even cycles assembled from the rating-ordered edge scan.
pub(crate) struct PathCollection {
    adj: Vec<[Option<(NodeId, f64)>; 2]>,
}

pub(crate) struct CollectionComponent {
    /// Edges in walk order.
    pub edges: Vec<(NodeId, NodeId, f64)>,
    pub is_cycle: bool,
}

impl PathCollection {
    pub(crate) fn build(n: usize, candidates: &[(NodeId, NodeId, Rating)]) -> Self {
        let mut adj: Vec<[Option<(NodeId, f64)>; 2]> = vec![[None, None]; n];
        let mut degree = vec![0u8; n];
        // For path endpoints: the opposite endpoint and the path length.
        let mut other_end: Vec<NodeId> = (0..n).collect();
        let mut length = vec![0usize; n];
        for &(u, v, rating) in candidates {
            if degree[u] >= 2 || degree[v] >= 2 {
                continue;
            }
            let r = rating.value();
            if other_end[u] == v {
                // u and v are the two ends of one path: closing it forms a cycle.
                if (length[u] + 1) % 2 == 1 {
                    continue;
                }
            } else {
                let (a, b) = (other_end[u], other_end[v]);
                let len = length[u] + length[v] + 1;
                other_end[a] = b;
                other_end[b] = a;
                length[a] = len;
                length[b] = len;
            }
            adj[u][degree[u] as usize] = Some((v, r));
            adj[v][degree[v] as usize] = Some((u, r));
            degree[u] += 1;
            degree[v] += 1;
        }
        PathCollection { adj }
    }

    fn degree(&self, v: NodeId) -> usize {
        self.adj[v].iter().filter(|x| x.is_some()).count()
    }

    pub(crate) fn components(&self) -> Vec<CollectionComponent> {
        let n = self.adj.len();
        let mut visited = vec![false; n];
        let mut out = Vec::new();
        // Paths start at a degree-one endpoint.
        for start in 0..n {
            if visited[start] || self.degree(start) != 1 {
                continue;
            }
            out.push(CollectionComponent {
                edges: self.walk(start, &mut visited),
                is_cycle: false,
            });
        }
        // Remaining degree-two nodes lie on cycles.
        for start in 0..n {
            if visited[start] || self.degree(start) != 2 {
                continue;
            }
            let mut edges = self.walk(start, &mut visited);
            // The walk stops before re-entering `start`; close the cycle.
            let last = edges.last().map(|e| e.1).unwrap_or(start);
            let closing = self.adj[last]
                .iter()
                .flatten()
                .find(|(x, _)| *x == start)
                .map(|&(_, r)| r)
                .expect("cycle must close");
            edges.push((last, start, closing));
            out.push(CollectionComponent {
                edges,
                is_cycle: true,
            });
        }
        out
    }

    fn walk(&self, start: NodeId, visited: &mut [bool]) -> Vec<(NodeId, NodeId, f64)> {
        let mut edges = Vec::new();
        visited[start] = true;
        let mut prev = usize::MAX;
        let mut cur = start;
        loop {
            let next = self.adj[cur]
                .iter()
                .flatten()
                .find(|(x, _)| *x != prev && !visited[*x]);
            match next {
                Some(&(x, r)) => {
                    edges.push((cur, x, r));
                    visited[x] = true;
                    prev = cur;
                    cur = x;
                }
                None => break,
            }
        }
        edges
    }
}

/// Maximum-weight matching on a path with edge weights `w[0..L]`; returns
/// the chosen edge indices.
pub(crate) fn best_path_matching(w: &[f64]) -> Vec<usize> {
    let l = w.len();
    // best[i]: optimum over the first i edges.
    let mut best = vec![0.0f64; l + 1];
    let mut take = vec![false; l + 1];
    for i in 1..=l {
        let skip = best[i - 1];
        let with = w[i - 1] + if i >= 2 { best[i - 2] } else { 0.0 };
        if with > skip {
            best[i] = with;
            take[i] = true;
        } else {
            best[i] = skip;
        }
    }
    let mut chosen = Vec::new();
    let mut i = l;
    while i > 0 {
        if take[i] {
            chosen.push(i - 1);
            i = i.saturating_sub(2);
        } else {
            i -= 1;
        }
    }
    chosen.reverse();
    chosen
}

/// Maximum-weight matching on a cycle whose edge `i` joins edges `i-1`
/// and `i+1` (indices mod L).
pub(crate) fn best_cycle_matching(w: &[f64]) -> Vec<usize> {
    let l = w.len();
    if l < 3 {
        return best_path_matching(w);
    }
    // Either edge 0 is unused (a path over 1..L) or it is used and its two
    // neighbors are not (a path over 2..L-1).
    let without: Vec<usize> = best_path_matching(&w[1..]).into_iter().map(|i| i + 1).collect();
    let without_sum: f64 = without.iter().map(|&i| w[i]).sum();
    let mut with: Vec<usize> = vec![0];
    with.extend(best_path_matching(&w[2..l - 1]).into_iter().map(|i| i + 2));
    let with_sum: f64 = with.iter().map(|&i| w[i]).sum();
    if with_sum > without_sum {
        with
    } else {
        without
    }
}

/// Contracts every matched pair into one coarse node. Returns the coarse
/// graph and the fine → coarse node map.
pub fn contract(g: &Graph, m: &Matching) -> (Graph, Vec<NodeId>) {
    const UNSET: usize = usize::MAX;
    let mut map = vec![UNSET; g.n()];
    let mut next = 0;
    for v in g.nodes() {
        if map[v] != UNSET {
            continue;
        }
        map[v] = next;
        if let Some(u) = m.partner(v) {
            map[u] = next;
        }
        next += 1;
    }
    (contract_by_map(g, &map, next), map)
}

/// Maps a fine blocked set through `map`. A coarse edge is blocked if any
/// of the fine edges merged into it was blocked.
fn map_blocked(blocked: &EdgeSet, map: &[NodeId]) -> EdgeSet {
    EdgeSet::from_pairs(
        blocked
            .iter()
            .map(|(u, v)| (map[u], map[v]))
            .filter(|(a, b)| a != b),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopRule {
    /// Stop once fewer than `max(60k, n / (60k))` nodes remain.
    SizeThreshold,
    /// Contract until every remaining edge is blocked.
    NoContractableEdge,
}

/// Coarsening stops once the node count drops below this value.
pub fn size_threshold(n: usize, k: usize) -> usize {
    (60 * k).max(n / (60 * k))
}

/// One contraction step.
#[derive(Clone, Debug)]
pub struct Level {
    /// The coarse graph produced by this step.
    pub graph: Graph,
    /// Fine → coarse node map.
    pub map: Vec<NodeId>,
    /// The matching that was contracted; `None` when a whole component
    /// clustering was contracted at once.
    pub matching: Option<Matching>,
    /// Blocked edges on the coarse graph.
    pub blocked: EdgeSet,
}

/// A stack of successively coarser graphs over a borrowed finest graph.
#[derive(Clone, Debug)]
pub struct Hierarchy<'g> {
    finest: &'g Graph,
    finest_blocked: EdgeSet,
    levels: Vec<Level>,
}

impl<'g> Hierarchy<'g> {
    pub fn new(finest: &'g Graph, blocked: EdgeSet) -> Self {
        Hierarchy {
            finest,
            finest_blocked: blocked,
            levels: Vec::new(),
        }
    }

    /// Number of contractions performed.
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Graph at `level`; 0 is the finest graph.
    pub fn graph(&self, level: usize) -> &Graph {
        if level == 0 {
            self.finest
        } else {
            &self.levels[level - 1].graph
        }
    }

    pub fn coarsest(&self) -> &Graph {
        self.graph(self.depth())
    }

    pub fn blocked(&self, level: usize) -> &EdgeSet {
        if level == 0 {
            &self.finest_blocked
        } else {
            &self.levels[level - 1].blocked
        }
    }

    /// Map from nodes of `level` to nodes of `level + 1`.
    pub fn map(&self, level: usize) -> &[NodeId] {
        &self.levels[level].map
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn push(&mut self, level: Level) {
        self.levels.push(level);
    }

    /// Composition of all maps: finest node → coarsest node.
    pub fn finest_to_coarsest(&self) -> Vec<NodeId> {
        let mut map: Vec<NodeId> = self.finest.nodes().collect();
        for level in &self.levels {
            for c in &mut map {
                *c = level.map[*c];
            }
        }
        map
    }

    /// Lifts a partition of the graph at `level + 1` onto the graph at `level`.
    pub fn project_partition(&self, level: usize, p: &Partition) -> Result<Partition, CoarsenError> {
        if level >= self.depth() {
            return Err(CoarsenError::LevelOutOfRange {
                level,
                depth: self.depth(),
            });
        }
        let coarse_n = self.graph(level + 1).n();
        if p.n() != coarse_n {
            return Err(CoarsenError::SizeMismatch {
                expected: coarse_n,
                got: p.n(),
            });
        }
        Ok(p.project(self.map(level)))
    }

    /// Pushes a partition of the finest graph down to the coarsest graph.
    /// Returns `None` if a coarse node mixes blocks.
    pub fn restrict_to_coarsest(&self, p: &Partition) -> Option<Partition> {
        p.restrict(self.coarsest(), &self.finest_to_coarsest())
    }
}

/// Repeats GPA matching and contraction until `stop` fires or no edge can
/// be matched.
pub fn build_hierarchy<'g, R: Rng + ?Sized>(
    g: &'g Graph,
    k: usize,
    blocked: &EdgeSet,
    stop: StopRule,
    rng: &mut R,
) -> Hierarchy<'g> {
    let mut h = Hierarchy::new(g, blocked.clone());
    let threshold = size_threshold(g.n(), k.max(1));
    loop {
        let level = h.depth();
        let cur = h.graph(level);
        if stop == StopRule::SizeThreshold && cur.n() < threshold {
            break;
        }
        match coarsen_once(cur, h.blocked(level), stop, rng) {
            Some(next) => h.push(next),
            None => break,
        }
    }
    h
}

/// Performs one contraction step, or returns `None` when nothing can be
/// contracted (or coarsening stagnates under the size rule).
pub fn coarsen_once<R: Rng + ?Sized>(
    g: &Graph,
    blocked: &EdgeSet,
    stop: StopRule,
    rng: &mut R,
) -> Option<Level> {
    let mask = blocked.slot_mask(g);
    let matching = gpa_matching_masked(g, &mask, rng);
    if matching.is_empty() {
        return None;
    }
    // Fewer than 1% of the nodes matched.
    let stagnating = 2 * matching.len() * 100 < g.n();
    if stagnating {
        return match stop {
            StopRule::SizeThreshold => None,
            StopRule::NoContractableEdge => {
                // Collapse every component of the non-blocked edges at once;
                // the result is the same coarsest graph, reached in one step.
                let comps = components_where(g, |_, e| !mask[e]);
                let map = comps.assignment().to_vec();
                let graph = contract_by_map(g, &map, comps.k());
                let blocked = map_blocked(blocked, &map);
                Some(Level {
                    graph,
                    map,
                    matching: None,
                    blocked,
                })
            }
        };
    }
    let (graph, map) = contract(g, &matching);
    let blocked = map_blocked(blocked, &map);
    Some(Level {
        graph,
        map,
        matching: Some(matching),
        blocked,
    })
}
