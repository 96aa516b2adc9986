//! Initial partitioning of the coarsest graph by recursive greedy bisection.

use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};

use crate::graph::{BlockId, Graph, NodeId, Weight};
use crate::partition::{max_block_weight, Partition};
use crate::refinement::{fm_refine, rebalance};
use crate::SeededRng;

/// Default number of independent initial partitioning attempts.
pub const DEFAULT_INITIAL_TRIES: usize = 4;

/// Grows block 0 from random seeds until it weighs at least `target`,
/// never letting it exceed `cap0`. The frontier is expanded best-first: the
/// next node is the one whose move increases the cut least (ties random).
/// Everything not grown is block 1.
fn grow_region<R: Rng + ?Sized>(g: &Graph, target: Weight, cap0: Weight, rng: &mut R) -> Vec<BlockId> {
    let n = g.n();
    let mut assignment = vec![1; n];
    // Weight of edges from each node into block 0.
    let mut conn0 = vec![0; n];
    let mut closed = vec![false; n];
    let mut open = n;
    let mut weight = 0;
    let mut heap: BinaryHeap<(Weight, u32, NodeId)> = BinaryHeap::new();
    let gain = |v: NodeId, c0: Weight| 2 * c0 - g.neighbors(v).map(|(_, w)| w).sum::<Weight>();
    while weight < target && open > 0 {
        if heap.is_empty() {
            // Disconnected remainder: restart from a random open node.
            let pick = rng.gen_range(0..open);
            let seed = (0..n).filter(|&v| !closed[v]).nth(pick).expect("an open node exists");
            heap.push((gain(seed, 0), rng.gen(), seed));
        }
        while let Some((key, _, v)) = heap.pop() {
            if closed[v] || key != gain(v, conn0[v]) {
                continue;
            }
            closed[v] = true;
            open -= 1;
            let c = g.node_weight(v);
            if weight + c > cap0 {
                continue;
            }
            assignment[v] = 0;
            weight += c;
            if weight >= target {
                break;
            }
            for (u, w) in g.neighbors(v) {
                if !closed[u] {
                    conn0[u] += w;
                    heap.push((gain(u, conn0[u]), rng.gen(), u));
                }
            }
        }
    }
    assignment
}

/// Bisection of `g` into a block targeted at `target` weight and the rest,
/// with explicit caps, improved by FM.
fn bisect_with_caps<R: Rng + ?Sized>(
    g: &Graph,
    eps: f64,
    target: Weight,
    caps: [Weight; 2],
    rng: &mut R,
) -> Partition {
    let assignment = grow_region(g, target, caps[0], rng);
    let mut p = Partition::with_caps(g, 2, eps, assignment, caps.to_vec());
    rebalance(g, &mut p, rng);
    fm_refine(g, &mut p, rng);
    p
}

/// Cap for a side meant to hold `share` weight. Tighter than L_max by one
/// unit of slack below the heaviest node, so unit-weight graphs are split
/// exactly by share; still never below what a single node needs.
fn side_cap(g: &Graph, share: f64, eps: f64) -> Weight {
    ((1.0 + eps) * share + 1e-9).floor() as Weight + g.max_node_weight().max(1) - 1
}

/// Bisection with block 0 grown to half the total weight, then one FM pass.
/// Block weights never exceed L_max; the result may be infeasible only if
/// no balanced bisection was found.
pub fn greedy_bisect<R: Rng + ?Sized>(g: &Graph, eps: f64, rng: &mut R) -> Partition {
    let half = g.total_node_weight() as f64 / 2.0;
    let cap = side_cap(g, half, eps);
    let mut p = bisect_with_caps(g, eps, half.ceil() as Weight, [cap, cap], rng);
    let global = max_block_weight(g, 2, eps);
    // Re-express against the standard caps; the tighter caps imply them.
    p = Partition::new(g, 2, eps, p.into_assignment());
    debug_assert!(p.block_weights().iter().all(|&w| w <= global) || cap > global);
    p
}

/// Imbalance allowed per bisection so that `depth` nested bisections stay
/// within the overall `eps`.
fn per_level_eps(eps: f64, k: usize) -> f64 {
    let depth = (k as f64).log2().ceil().max(1.0);
    (1.0 + eps).powf(1.0 / depth) - 1.0
}

fn recurse<R: Rng + ?Sized>(
    g: &Graph,
    nodes: &[NodeId],
    k: usize,
    first_block: BlockId,
    eps_level: f64,
    out: &mut [BlockId],
    rng: &mut R,
) {
    if k == 1 || nodes.is_empty() {
        for &v in nodes {
            out[v] = first_block;
        }
        return;
    }
    let (sub, map) = g.induced_subgraph(nodes);
    let k0 = k / 2;
    let k1 = k - k0;
    let total = sub.total_node_weight() as f64;
    let share = |kk: usize| total * kk as f64 / k as f64;
    let cap = |kk: usize| side_cap(&sub, share(kk), eps_level);
    let target = share(k0).round() as Weight;
    let p = bisect_with_caps(&sub, eps_level, target, [cap(k0), cap(k1)], rng);
    let mut left = Vec::new();
    let mut right = Vec::new();
    for (i, &v) in map.iter().enumerate() {
        if p.block(i) == 0 {
            left.push(v);
        } else {
            right.push(v);
        }
    }
    recurse(g, &left, k0, first_block, eps_level, out, rng);
    recurse(g, &right, k1, first_block + k0, eps_level, out, rng);
}

/// One recursive-bisection run measured against `caps`.
fn recursive_bisection<R: Rng + ?Sized>(
    g: &Graph,
    k: usize,
    eps: f64,
    caps: &[Weight],
    rng: &mut R,
) -> Partition {
    let mut assignment = vec![0; g.n()];
    if k > 1 {
        let all: Vec<NodeId> = g.nodes().collect();
        recurse(g, &all, k, 0, per_level_eps(eps, k), &mut assignment, rng);
    }
    let mut p = Partition::with_caps(g, k, eps, assignment, caps.to_vec());
    if rebalance(g, &mut p, rng) {
        fm_refine(g, &mut p, rng);
    }
    p
}

/// Best of `tries` recursive bisections of `g` into `k` blocks, judged by
/// (overload, cut). The returned partition is infeasible only when no try
/// found a feasible one; check [`Partition::is_feasible`].
pub fn initial_partition<R: Rng + ?Sized>(
    g: &Graph,
    k: usize,
    eps: f64,
    tries: usize,
    rng: &mut R,
) -> Partition {
    let cap = max_block_weight(g, k, eps);
    initial_partition_with_caps(g, k, eps, &vec![cap; k], tries, rng)
}

/// As [`initial_partition`] with explicit per-block caps, used when `g` is
/// a coarse graph and the caps come from the finest graph.
pub fn initial_partition_with_caps<R: Rng + ?Sized>(
    g: &Graph,
    k: usize,
    eps: f64,
    caps: &[Weight],
    tries: usize,
    rng: &mut R,
) -> Partition {
    assert!(k >= 1, "k must be at least 1");
    assert!(tries >= 1, "at least one try is needed");
    let mut best: Option<Partition> = None;
    for _ in 0..tries {
        let mut try_rng = SeededRng::seed_from_u64(rng.gen());
        let p = recursive_bisection(g, k, eps, caps, &mut try_rng);
        if best.as_ref().is_none_or(|b| p.quality_key() < b.quality_key()) {
            best = Some(p);
        }
    }
    best.expect("tries >= 1")
}
