//! Natural cuts: small cuts that separate a dense core from the ring
//! around it, used to build clusterings for the combine framework.
//!
//! A discovery round grows a BFS tree `T` from a center until its weight
//! reaches `alpha * u`. The nodes added before the tree weighed
//! `alpha * u / f` form the core; the neighbors of `T` outside `T` form the
//! ring. The core is contracted to a source, the ring to a sink, and a
//! minimum cut between them is an elementary natural cut (ENC).

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::clustering::{connected_components, quotient_graph, Clustering};
use crate::edge_set::EdgeSet;
use crate::graph::{Graph, NodeId, Weight};
use crate::refinement::{max_flow_min_cut, FlowNetwork, FlowProblem};

/// An elementary natural cut: the edges of one round's minimum cut and the
/// core it protects.
#[derive(Clone, Debug, PartialEq)]
pub struct Enc {
    pub cut_edges: EdgeSet,
    pub core: Vec<NodeId>,
    pub weight: Weight,
}

/// For every node, the ENCs whose core contains it.
#[derive(Clone, Debug, Default)]
pub struct EncIndex {
    encs: Vec<Enc>,
    by_node: Vec<Vec<usize>>,
}

impl EncIndex {
    pub fn new(n: usize) -> Self {
        EncIndex {
            encs: Vec::new(),
            by_node: vec![Vec::new(); n],
        }
    }

    pub fn insert(&mut self, enc: Enc) {
        let id = self.encs.len();
        for &v in &enc.core {
            self.by_node[v].push(id);
        }
        self.encs.push(enc);
    }

    pub fn extend<I: IntoIterator<Item = Enc>>(&mut self, encs: I) {
        for enc in encs {
            self.insert(enc);
        }
    }

    pub fn len(&self) -> usize {
        self.encs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.encs.is_empty()
    }

    pub fn encs(&self) -> &[Enc] {
        &self.encs
    }

    pub fn enc(&self, id: usize) -> &Enc {
        &self.encs[id]
    }

    /// Ids of the ENCs whose core contains `v`.
    pub fn containing(&self, v: NodeId) -> &[usize] {
        &self.by_node[v]
    }
}

/// Parameters of one discovery pass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NaturalCutParams {
    /// Size parameter U.
    pub u: f64,
    pub alpha: f64,
    /// Core ratio f: the core stops growing at `alpha * u / f`.
    pub f: f64,
}

impl NaturalCutParams {
    pub fn new(u: f64, alpha: f64, f: f64) -> Self {
        assert!(u > 0.0, "U must be positive");
        assert!(alpha > 0.0, "alpha must be positive");
        assert!(f > 1.0, "f must exceed 1");
        NaturalCutParams { u, alpha, f }
    }

    /// Randomized parameters for the first combine stage: f in [5, 20],
    /// alpha in [0.75, 1.25] and U = c(V) / (3k).
    pub fn sample_stage1<R: Rng + ?Sized>(g: &Graph, k: usize, rng: &mut R) -> Self {
        assert!(k >= 1);
        let u = (g.total_node_weight() as f64 / (3 * k) as f64).max(f64::MIN_POSITIVE);
        Self::new(u, rng.gen_range(0.75..=1.25), rng.gen_range(5.0..=20.0))
    }

    /// Fixed parameters of the preprocessing contraction: f = 10, alpha = 1
    /// and U = (1 + eps) n / (2k).
    pub fn preprocessing(g: &Graph, k: usize, eps: f64) -> Self {
        assert!(k >= 1);
        let u = ((1.0 + eps) * g.n() as f64 / (2 * k) as f64).max(f64::MIN_POSITIVE);
        Self::new(u, 1.0, 10.0)
    }
}

/// Result of one discovery round around `center`; `None` if the ring was
/// empty. `core` is filled either way.
fn discovery_round(
    g: &Graph,
    center: NodeId,
    params: &NaturalCutParams,
    in_tree: &mut [bool],
    core: &mut Vec<NodeId>,
) -> Option<Enc> {
    let limit = params.alpha * params.u;
    let core_limit = limit / params.f;
    let mut tree = Vec::new();
    let mut weight = 0.0;
    let mut queue = VecDeque::from([center]);
    in_tree[center] = true;
    core.clear();
    while let Some(v) = queue.pop_front() {
        if weight < core_limit {
            core.push(v);
        }
        tree.push(v);
        weight += g.node_weight(v) as f64;
        if weight >= limit {
            break;
        }
        for (u, _) in g.neighbors(v) {
            if !in_tree[u] {
                in_tree[u] = true;
                queue.push_back(u);
            }
        }
    }
    // Nodes still queued were reached but not added to the tree.
    for v in queue {
        in_tree[v] = false;
    }

    let mut local = std::collections::HashMap::new();
    let mut is_core = std::collections::HashSet::new();
    for &v in core.iter() {
        is_core.insert(v);
    }
    // Network nodes: 0 = source (core), 1 = sink (ring), 2.. = other tree nodes.
    let mut next = 2;
    for &v in &tree {
        let id = if is_core.contains(&v) {
            0
        } else {
            next += 1;
            next - 1
        };
        local.insert(v, id);
    }
    let mut ring = Vec::new();
    for &v in &tree {
        for (u, _) in g.neighbors(v) {
            if !in_tree[u] && !local.contains_key(&u) {
                local.insert(u, 1);
                ring.push(u);
            }
        }
    }
    let result = if ring.is_empty() {
        None
    } else {
        let mut network = FlowNetwork::new(next);
        for &v in &tree {
            for (u, w) in g.neighbors(v) {
                let (a, b) = (local[&v], local[&u]);
                // Tree-tree edges appear twice; add each once.
                if a != b && (!in_tree[u] || v < u) {
                    network.add_edge(a, b, w);
                }
            }
        }
        let mut node_map = vec![None; next];
        for &v in &tree {
            let id = local[&v];
            if id >= 2 {
                node_map[id] = Some(v);
            }
        }
        let mut problem = FlowProblem {
            network,
            source: 0,
            sink: 1,
            node_map,
        };
        let (value, side) = max_flow_min_cut(&mut problem);
        let mut pairs = Vec::new();
        let mut weight = 0;
        for &v in &tree {
            if !side[local[&v]] {
                continue;
            }
            for (u, w) in g.neighbors(v) {
                if !side[local[&u]] {
                    pairs.push((v, u));
                    weight += w;
                }
            }
        }
        assert_eq!(weight, value, "cut weight must equal the flow value");
        Some(Enc {
            cut_edges: EdgeSet::from_pairs(pairs),
            core: core.clone(),
            weight,
        })
    };
    for &v in &tree {
        in_tree[v] = false;
    }
    result
}

/// Runs discovery rounds until every node belongs to some core. Returns
/// the ENCs and the union of their cut edges.
pub fn discover_natural_cuts<R: Rng + ?Sized>(
    g: &Graph,
    params: &NaturalCutParams,
    rng: &mut R,
) -> (Vec<Enc>, EdgeSet) {
    let mut order: Vec<NodeId> = g.nodes().collect();
    order.shuffle(rng);
    let mut covered = vec![false; g.n()];
    let mut in_tree = vec![false; g.n()];
    let mut core = Vec::new();
    let mut encs = Vec::new();
    let mut union = EdgeSet::new();
    // Visiting a random permutation and skipping covered nodes picks each
    // center uniformly among the nodes not yet in any core.
    for center in order {
        if covered[center] {
            continue;
        }
        let enc = discovery_round(g, center, params, &mut in_tree, &mut core);
        for &v in &core {
            covered[v] = true;
        }
        if let Some(enc) = enc {
            union.extend(&enc.cut_edges);
            encs.push(enc);
        }
    }
    (encs, union)
}

/// Clustering for the first combine stage: one discovery pass with sampled
/// parameters, then the components left after removing all cut edges.
/// The discovered ENCs are returned for the stage-two index.
pub fn stage1_clustering<R: Rng + ?Sized>(g: &Graph, k: usize, rng: &mut R) -> (Clustering, Vec<Enc>) {
    let params = NaturalCutParams::sample_stage1(g, k, rng);
    let (encs, cuts) = discover_natural_cuts(g, &params, rng);
    (connected_components(g, &cuts), encs)
}

/// Clustering for the second combine stage: visit nodes in random order;
/// for each node not yet marked pick a random ENC containing it, emit it
/// and mark its core. Clusters are the components left after removing the
/// cut edges of all emitted ENCs.
pub fn stage2_clustering<R: Rng + ?Sized>(index: &EncIndex, g: &Graph, rng: &mut R) -> Clustering {
    stage2_emitted(index, g, rng).0
}

/// As [`stage2_clustering`], also returning the emitted ENC ids.
pub fn stage2_emitted<R: Rng + ?Sized>(index: &EncIndex, g: &Graph, rng: &mut R) -> (Clustering, Vec<usize>) {
    let mut order: Vec<NodeId> = g.nodes().collect();
    order.shuffle(rng);
    let mut marked = vec![false; g.n()];
    let mut emitted = Vec::new();
    let mut cuts = EdgeSet::new();
    for v in order {
        if marked[v] {
            continue;
        }
        let Some(&id) = index.containing(v).choose(rng) else {
            // Uncovered node: its own core with no cut edges.
            marked[v] = true;
            continue;
        };
        let enc = index.enc(id);
        for &u in &enc.core {
            marked[u] = true;
        }
        cuts.extend(&enc.cut_edges);
        emitted.push(id);
    }
    (connected_components(g, &cuts), emitted)
}

/// Contracts every component of `g` without the edges in `cuts` to a node.
pub fn preprocess_contract(g: &Graph, cuts: &EdgeSet) -> (Graph, Vec<NodeId>) {
    let clusters = connected_components(g, cuts);
    if clusters.k() == 1 && g.n() > 1 {
        log::warn!("no natural cut separates the graph; contraction yields a single node");
    }
    let coarse = quotient_graph(g, &clusters);
    (coarse, clusters.assignment().to_vec())
}

/// Preprocessing contraction: `repetitions` discovery passes with the
/// fixed preprocessing parameters, their cut unions merged, then
/// [`preprocess_contract`].
pub fn natural_cut_preprocess<R: Rng + ?Sized>(
    g: &Graph,
    k: usize,
    eps: f64,
    repetitions: usize,
    rng: &mut R,
) -> (Graph, Vec<NodeId>, EdgeSet) {
    let params = NaturalCutParams::preprocessing(g, k, eps);
    preprocess_with(g, &params, repetitions, rng)
}

/// As [`natural_cut_preprocess`] with explicit parameters.
pub fn preprocess_with<R: Rng + ?Sized>(
    g: &Graph,
    params: &NaturalCutParams,
    repetitions: usize,
    rng: &mut R,
) -> (Graph, Vec<NodeId>, EdgeSet) {
    let mut cuts = EdgeSet::new();
    for _ in 0..repetitions.max(1) {
        cuts.extend(&discover_natural_cuts(g, params, rng).1);
    }
    let (coarse, map) = preprocess_contract(g, &cuts);
    (coarse, map, cuts)
}
