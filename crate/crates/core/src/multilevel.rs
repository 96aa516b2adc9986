//! The multilevel driver: V-cycle partitioning, F-cycles and the combine
//! framework shared by the evolutionary operators.

use rand::Rng;

use crate::coarsening::{build_hierarchy, coarsen_once, size_threshold, StopRule};
use crate::edge_set::EdgeSet;
use crate::graph::{BlockId, Graph, Weight};
use crate::initial::{initial_partition_with_caps, DEFAULT_INITIAL_TRIES};
use crate::partition::{cut_edge_set, max_block_weight, Partition};
use crate::refinement::{fm_refine, multitry_fm, rebalance, refine_all_pairs};
use crate::seeded_rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strength {
    /// FM, multi-try FM and flow-based pair refinement on every level.
    Strong,
    /// FM and multi-try FM only.
    Eco,
}

#[derive(Clone, Debug)]
pub struct PartitionerConfig {
    pub strength: Strength,
    pub k: usize,
    pub eps: f64,
    pub seed: u64,
    pub stop: StopRule,
    pub fm: bool,
    pub multitry: bool,
    pub flow: bool,
    pub initial_tries: usize,
}

impl PartitionerConfig {
    pub fn new(strength: Strength, k: usize, eps: f64) -> Self {
        assert!(k >= 1, "k must be at least 1");
        assert!(eps >= 0.0, "eps must be non-negative");
        PartitionerConfig {
            strength,
            k,
            eps,
            seed: 0,
            stop: StopRule::SizeThreshold,
            fm: true,
            multitry: true,
            flow: strength == Strength::Strong,
            initial_tries: DEFAULT_INITIAL_TRIES,
        }
    }

    pub fn strong(k: usize, eps: f64) -> Self {
        Self::new(Strength::Strong, k, eps)
    }

    pub fn eco(k: usize, eps: f64) -> Self {
        Self::new(Strength::Eco, k, eps)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Same settings for a different number of blocks and imbalance.
    pub fn with_k_eps(&self, k: usize, eps: f64) -> Self {
        let mut cfg = self.clone();
        assert!(k >= 1 && eps >= 0.0);
        cfg.k = k;
        cfg.eps = eps;
        cfg
    }
}

/// One refinement pass on one level. Never worsens a feasible partition.
pub fn refine_level<R: Rng + ?Sized>(g: &Graph, p: &mut Partition, cfg: &PartitionerConfig, rng: &mut R) {
    if p.k() < 2 {
        return;
    }
    if !p.is_feasible() {
        rebalance(g, p, rng);
    }
    if cfg.fm {
        fm_refine(g, p, rng);
    }
    if cfg.multitry {
        multitry_fm(g, p, rng);
    }
    if cfg.flow && cfg.strength == Strength::Strong {
        refine_all_pairs(g, p, rng);
    }
}

fn finest_caps(g: &Graph, cfg: &PartitionerConfig) -> Vec<Weight> {
    vec![max_block_weight(g, cfg.k, cfg.eps); cfg.k]
}

/// V-cycle partitioning seeded from `cfg.seed`.
pub fn partition(g: &Graph, cfg: &PartitionerConfig) -> Partition {
    partition_with_rng(g, cfg, &mut seeded_rng(cfg.seed))
}

/// V-cycle partitioning: coarsen, partition the coarsest graph, then
/// project and refine level by level. Infeasible only if no feasible
/// partition was found; check [`Partition::is_feasible`].
pub fn partition_with_rng<R: Rng + ?Sized>(g: &Graph, cfg: &PartitionerConfig, rng: &mut R) -> Partition {
    let caps = finest_caps(g, cfg);
    if cfg.k == 1 {
        return Partition::with_caps(g, 1, cfg.eps, vec![0; g.n()], caps);
    }
    let h = build_hierarchy(g, cfg.k, &EdgeSet::new(), cfg.stop, rng);
    let coarsest = h.coarsest();
    let mut p = initial_partition_with_caps(coarsest, cfg.k, cfg.eps, &caps, cfg.initial_tries, rng);
    refine_level(coarsest, &mut p, cfg, rng);
    for level in (0..h.depth()).rev() {
        p = h.project_partition(level, &p).expect("level and size match");
        refine_level(h.graph(level), &mut p, cfg, rng);
    }
    debug_assert!(p.is_consistent(g));
    p
}

struct FCycle<'c, R: Rng + ?Sized> {
    cfg: &'c PartitionerConfig,
    threshold: usize,
    visits: Vec<usize>,
    fresh_pending: bool,
    rng: &'c mut R,
}

impl<R: Rng + ?Sized> FCycle<'_, R> {
    fn enter(&mut self, g: &Graph, p: Partition, depth: usize) -> Partition {
        if self.visits.len() <= depth {
            self.visits.resize(depth + 1, 0);
        }
        self.visits[depth] += 1;
        let (mut p, descended) = self.step(g, p, depth);
        if descended {
            self.visits[depth] += 1;
            // Second recursive call only on the second visit of this level.
            if self.visits[depth] == 2 {
                p = self.step(g, p, depth).0;
            }
        }
        p
    }

    /// Coarsens once with the cut edges of `p` blocked, recurses, and
    /// refines on the way back. Returns whether a coarser level existed.
    fn step(&mut self, g: &Graph, mut p: Partition, depth: usize) -> (Partition, bool) {
        let level = if g.n() >= self.threshold {
            coarsen_once(g, &p.cut_edges(g), StopRule::SizeThreshold, self.rng)
        } else {
            None
        };
        let Some(level) = level else {
            if self.fresh_pending {
                self.fresh_pending = false;
                p = initial_partition_with_caps(
                    g,
                    p.k(),
                    p.eps(),
                    p.caps(),
                    self.cfg.initial_tries,
                    self.rng,
                );
            }
            refine_level(g, &mut p, self.cfg, self.rng);
            return (p, false);
        };
        let coarse = p
            .restrict(&level.graph, &level.map)
            .expect("cut edges are never contracted");
        let child = self.enter(&level.graph, coarse, depth + 1);
        let mut p = child.project(&level.map);
        refine_level(g, &mut p, self.cfg, self.rng);
        (p, true)
    }
}

/// F-cycle on a given partition. Cut edges of the current partition are
/// never contracted, and each level makes a second recursive call the
/// second time it is reached. With `use_input_as_initial` the input
/// partition seeds the coarsest graph and the cut cannot increase; without
/// it the coarsest graph is partitioned afresh.
pub fn fcycle<R: Rng + ?Sized>(
    g: &Graph,
    p: &Partition,
    cfg: &PartitionerConfig,
    use_input_as_initial: bool,
    rng: &mut R,
) -> Partition {
    if p.k() < 2 {
        return p.clone();
    }
    let mut run = FCycle {
        cfg,
        threshold: size_threshold(g.n(), p.k()),
        visits: Vec::new(),
        fresh_pending: !use_input_as_initial,
        rng,
    };
    let out = run.enter(g, p.clone(), 0);
    debug_assert!(out.is_consistent(g));
    out
}

/// Combine framework: contracts everything except the cut edges of `p`
/// and of the clustering `c`, seeds the coarsest graph with `p` and refines
/// back up. The result is never worse than `p` when `p` is feasible.
pub fn combine_core<R: Rng + ?Sized>(
    g: &Graph,
    p: &Partition,
    c: &[BlockId],
    cfg: &PartitionerConfig,
    rng: &mut R,
) -> Partition {
    assert_eq!(c.len(), g.n(), "clustering must cover every node");
    let blocked = p.cut_edges(g).union(&cut_edge_set(g, c));
    let h = build_hierarchy(g, p.k(), &blocked, StopRule::NoContractableEdge, rng);
    let mut q = h
        .restrict_to_coarsest(p)
        .expect("no cut edge of p is contracted");
    refine_level(h.coarsest(), &mut q, cfg, rng);
    for level in (0..h.depth()).rev() {
        q = h.project_partition(level, &q).expect("level and size match");
        refine_level(h.graph(level), &mut q, cfg, rng);
    }
    debug_assert!(q.is_consistent(g));
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{grid, path, random_connected};
    use crate::partition::cut_value;
    use rand::seq::SliceRandom;

    /// Optimal feasible bisection cut by enumeration.
    fn best_bisection(g: &Graph, eps: f64) -> Weight {
        let cap = max_block_weight(g, 2, eps);
        let n = g.n();
        let mut best = Weight::MAX;
        for mask in 0u32..(1 << n) {
            let a: Vec<usize> = (0..n).map(|v| (mask >> v & 1) as usize).collect();
            let w1: Weight = (0..n).filter(|&v| a[v] == 1).map(|v| g.node_weight(v)).sum();
            if w1 <= cap && g.total_node_weight() - w1 <= cap {
                best = best.min(cut_value(g, &a));
            }
        }
        best
    }

    #[test]
    fn p4_bisection() {
        let g = path(4);
        assert_eq!(best_bisection(&g, 0.0), 1);
        let p = partition(&g, &PartitionerConfig::strong(2, 0.0));
        assert_eq!(p.cut(), 1);
        assert!(p.is_feasible());
    }

    #[test]
    fn grid4_bisection() {
        let g = grid(4, 4);
        assert_eq!(best_bisection(&g, 0.03), 4);
        for seed in 0..5 {
            for cfg in [PartitionerConfig::strong(2, 0.03), PartitionerConfig::eco(2, 0.03)] {
                let p = partition(&g, &cfg.with_seed(seed));
                assert_eq!(p.cut(), 4);
                assert!(p.is_feasible());
            }
        }
    }

    #[test]
    fn k1_is_trivial() {
        let g = grid(3, 3);
        let p = partition(&g, &PartitionerConfig::strong(1, 0.03));
        assert_eq!(p.cut(), 0);
    }

    #[test]
    fn deterministic_per_seed() {
        let g = random_connected(300, 0.02, &mut seeded_rng(1));
        let cfg = PartitionerConfig::strong(4, 0.03).with_seed(9);
        assert_eq!(partition(&g, &cfg), partition(&g, &cfg));
    }

    #[test]
    fn larger_graphs_are_feasible() {
        let g = grid(40, 40);
        let p = partition(&g, &PartitionerConfig::eco(8, 0.03).with_seed(3));
        assert!(p.is_feasible());
        assert!(p.is_consistent(&g));
        // A 40x40 grid cut into 8 strips costs 280; any sane result is far below.
        assert!(p.cut() < 280, "cut {}", p.cut());
    }

    #[test]
    fn fcycle_with_input_never_worsens() {
        let mut rng = seeded_rng(4);
        for _ in 0..20 {
            let g = random_connected(rng.gen_range(20..200), 0.05, &mut rng);
            let k = rng.gen_range(2..5);
            let cfg = PartitionerConfig::eco(k, 0.03);
            let p = partition_with_rng(&g, &cfg, &mut rng);
            if !p.is_feasible() {
                continue;
            }
            let q = fcycle(&g, &p, &cfg, true, &mut rng);
            assert!(q.cut() <= p.cut());
            assert!(q.is_feasible());
        }
    }

    #[test]
    fn fcycle_keeps_an_optimum() {
        let g = grid(4, 4);
        let a: Vec<usize> = (0..16).map(|v| usize::from(v % 4 >= 2)).collect();
        let p = Partition::new(&g, 2, 0.03, a);
        assert_eq!(p.cut(), 4);
        let q = fcycle(&g, &p, &PartitionerConfig::strong(2, 0.03), true, &mut seeded_rng(1));
        assert_eq!(q.cut(), 4);
    }

    #[test]
    fn fcycle_fresh_start_is_feasible() {
        let g = grid(4, 4);
        let a: Vec<usize> = (0..16).map(|v| usize::from(v % 4 >= 2)).collect();
        let p = Partition::new(&g, 2, 0.03, a);
        for seed in 0..5 {
            let q = fcycle(&g, &p, &PartitionerConfig::strong(2, 0.03), false, &mut seeded_rng(seed));
            assert!(q.is_feasible());
            assert!(q.is_consistent(&g));
        }
    }

    #[test]
    fn fcycle_visit_pattern() {
        // Every level that has a coarser level below makes exactly one
        // second call; the counters record entry and each child return.
        let g = grid(40, 40);
        let cfg = PartitionerConfig::eco(2, 0.03);
        let p = partition(&g, &cfg);
        let mut rng = seeded_rng(2);
        let mut run = FCycle {
            cfg: &cfg,
            threshold: size_threshold(g.n(), 2),
            visits: Vec::new(),
            fresh_pending: false,
            rng: &mut rng,
        };
        run.enter(&g, p, 0);
        let visits = run.visits.clone();
        assert!(visits.len() >= 3, "{visits:?}");
        // Level 0: entry and child return. Level 1: reached from both calls
        // of level 0, each time with entry and child return.
        assert_eq!(visits[0], 2);
        assert_eq!(visits[1], 4);
    }

    /// Four coarse groups A, B, C, D with weights 5, 1, 5, 1. `p` splits
    /// {A, B} from {C, D}; `c` splits {A, D} from {B, C}, the better
    /// bisection. Moving B or D across is what local search needs to find.
    fn four_groups() -> (Graph, Vec<usize>, Vec<usize>) {
        let a: Vec<usize> = (0..5).collect();
        let b = 5;
        let c: Vec<usize> = (6..11).collect();
        let d = 11;
        let mut edges = Vec::new();
        for group in [&a, &c] {
            for (i, &u) in group.iter().enumerate() {
                for &v in &group[i + 1..] {
                    edges.push((u, v, 5));
                }
            }
        }
        edges.push((a[0], d, 10));
        edges.push((b, c[0], 10));
        edges.push((a[1], b, 1));
        edges.push((c[1], d, 1));
        edges.push((a[2], c[2], 1));
        edges.push((b, d, 1));
        let g = Graph::from_edges(vec![1; 12], edges).unwrap();
        let mut p = vec![0; 12];
        let mut q = vec![0; 12];
        for &v in &c {
            p[v] = 1;
            q[v] = 1;
        }
        p[d] = 1;
        q[b] = 1;
        (g, p, q)
    }

    #[test]
    fn combine_exchanges_a_small_group() {
        let (g, pa, ca) = four_groups();
        let p = Partition::new(&g, 2, 0.03, pa.clone());
        assert_eq!(p.cut(), 22);
        assert_eq!(cut_value(&g, &ca), 4);
        let blocked = p.cut_edges(&g).union(&cut_edge_set(&g, &ca));
        let h = build_hierarchy(&g, 2, &blocked, StopRule::NoContractableEdge, &mut seeded_rng(1));
        assert_eq!(h.coarsest().n(), 4);
        for seed in 0..5 {
            let out = combine_core(&g, &p, &ca, &PartitionerConfig::strong(2, 0.03), &mut seeded_rng(seed));
            assert_eq!(out.cut(), 4);
            assert!(out.is_feasible());
        }
    }

    #[test]
    fn combine_with_itself_never_worsens() {
        let g = grid(6, 6);
        let p = partition(&g, &PartitionerConfig::eco(3, 0.03).with_seed(2));
        let own = p.assignment().to_vec();
        let out = combine_core(&g, &p, &own, &PartitionerConfig::eco(3, 0.03), &mut seeded_rng(1));
        assert!(out.cut() <= p.cut());
    }

    #[test]
    fn combine_never_worsens_on_random_pairs() {
        let mut rng = seeded_rng(21);
        for _ in 0..100 {
            let n = rng.gen_range(4..14);
            let g = random_connected(n, 0.3, &mut rng);
            let k = rng.gen_range(2..4);
            let mut a: Vec<usize> = (0..n).map(|v| v % k).collect();
            a.shuffle(&mut rng);
            let p = Partition::new(&g, k, 0.03, a);
            let c: Vec<usize> = (0..n).map(|_| rng.gen_range(0..5)).collect();
            let cfg = PartitionerConfig::strong(k, 0.03);
            let out = combine_core(&g, &p, &c, &cfg, &mut rng);
            assert!(out.is_feasible());
            assert!(out.cut() <= p.cut());
        }
    }
}
