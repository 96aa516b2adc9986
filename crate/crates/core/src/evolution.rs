//! Steady-state evolutionary operators: selection, three combine
//! operators, two mutations and similarity-based eviction.

use rand::Rng;

use crate::edge_set::{partition_distance, EdgeSet};
use crate::graph::{Graph, Weight};
use crate::multilevel::{combine_core, fcycle, partition_with_rng, PartitionerConfig};
use crate::natural_cuts::{stage1_clustering, stage2_clustering, EncIndex};
use crate::partition::Partition;

/// A feasible partition with its cut edges cached for distance queries.
#[derive(Clone, Debug, PartialEq)]
pub struct Individual {
    partition: Partition,
    cut_edges: EdgeSet,
}

impl Individual {
    pub fn new(g: &Graph, partition: Partition) -> Self {
        let cut_edges = partition.cut_edges(g);
        Individual {
            partition,
            cut_edges,
        }
    }

    pub fn cut(&self) -> Weight {
        self.partition.cut()
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn into_partition(self) -> Partition {
        self.partition
    }

    pub fn cut_edges(&self) -> &EdgeSet {
        &self.cut_edges
    }

    pub fn is_feasible(&self) -> bool {
        self.partition.is_feasible()
    }
}

#[derive(Clone, Debug)]
pub struct Population {
    capacity: usize,
    members: Vec<Individual>,
    best: Option<Individual>,
}

impl Population {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "population capacity must be positive");
        Population {
            capacity,
            members: Vec::with_capacity(capacity),
            best: None,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.members.len() >= self.capacity
    }

    pub fn members(&self) -> &[Individual] {
        &self.members
    }

    /// Best individual ever offered to this population.
    pub fn best(&self) -> Option<&Individual> {
        self.best.as_ref()
    }

    pub fn best_cut(&self) -> Option<Weight> {
        self.best.as_ref().map(Individual::cut)
    }

    fn observe(&mut self, ind: &Individual) -> bool {
        if self.best.as_ref().is_none_or(|b| ind.cut() < b.cut()) {
            self.best = Some(ind.clone());
            true
        } else {
            false
        }
    }
}

/// The better of two uniformly drawn members (with replacement); ties are
/// broken at random.
pub fn tournament_select<'p, R: Rng + ?Sized>(pop: &'p Population, rng: &mut R) -> &'p Individual {
    assert!(!pop.is_empty(), "tournament on an empty population");
    let a = &pop.members[rng.gen_range(0..pop.len())];
    let b = &pop.members[rng.gen_range(0..pop.len())];
    match a.cut().cmp(&b.cut()) {
        std::cmp::Ordering::Less => a,
        std::cmp::Ordering::Greater => b,
        std::cmp::Ordering::Equal => {
            if rng.gen_bool(0.5) {
                a
            } else {
                b
            }
        }
    }
}

/// Inserts `off` while below capacity. Once full, replaces the member most
/// similar to `off` (fewest differing cut edges) among those whose cut is
/// no better than `off`'s; rejects `off` if there is none. Infeasible
/// offspring are always rejected. The best-ever tracker is updated either
/// way. Returns whether `off` entered the population.
pub fn evict_insert<R: Rng + ?Sized>(pop: &mut Population, off: Individual, rng: &mut R) -> bool {
    if !off.is_feasible() {
        return false;
    }
    pop.observe(&off);
    if !pop.is_full() {
        pop.members.push(off);
        return true;
    }
    let mut target: Option<(usize, usize)> = None;
    let mut ties = 0u32;
    for (i, m) in pop.members.iter().enumerate() {
        if m.cut() < off.cut() {
            continue;
        }
        let d = partition_distance(m.cut_edges(), off.cut_edges());
        match target {
            Some((_, best)) if d > best => {}
            Some((_, best)) if d == best => {
                ties += 1;
                if rng.gen_range(0..=ties) == 0 {
                    target = Some((i, d));
                }
            }
            _ => {
                target = Some((i, d));
                ties = 0;
            }
        }
    }
    match target {
        Some((i, _)) => {
            pop.members[i] = off;
            true
        }
        None => false,
    }
}

/// Calls of the natural-cut combine operator that use fresh discovery
/// before switching to the accumulated ENC index.
pub const STAGE1_CALLS: usize = 10;

/// Per-worker state of the natural-cut combine operator.
#[derive(Clone, Debug)]
pub struct NaturalCutState {
    pub calls: usize,
    pub index: EncIndex,
}

impl NaturalCutState {
    pub fn new(n: usize) -> Self {
        NaturalCutState {
            calls: 0,
            index: EncIndex::new(n),
        }
    }

    pub fn in_stage1(&self) -> bool {
        self.calls < STAGE1_CALLS || self.index.is_empty()
    }
}

/// Classical combine: two tournament winners, the better one seeds the
/// coarsest graph, the other acts as clustering.
pub fn combine_c1<R: Rng + ?Sized>(
    g: &Graph,
    pop: &Population,
    cfg: &PartitionerConfig,
    rng: &mut R,
) -> Individual {
    let first = tournament_select(pop, rng);
    let second = tournament_select(pop, rng);
    let (p, c) = match first.cut().cmp(&second.cut()) {
        std::cmp::Ordering::Less => (first, second),
        std::cmp::Ordering::Greater => (second, first),
        std::cmp::Ordering::Equal if rng.gen_bool(0.5) => (first, second),
        std::cmp::Ordering::Equal => (second, first),
    };
    let out = combine_core(g, p.partition(), c.partition().assignment(), cfg, rng);
    Individual::new(g, out)
}

/// Range of the number of blocks of the clustering partition: k' in
/// [max(2, ceil(k/4)), 4k].
pub fn c2_k_range(k: usize) -> (usize, usize) {
    (k.div_ceil(4).max(2), 4 * k)
}

/// Combine with a partition of different k' and imbalance eps' used as
/// clustering.
pub fn combine_c2<R: Rng + ?Sized>(
    g: &Graph,
    pop: &Population,
    cfg: &PartitionerConfig,
    rng: &mut R,
) -> Individual {
    let p = tournament_select(pop, rng);
    let (lo, hi) = c2_k_range(p.partition().k());
    let k2 = rng.gen_range(lo..=hi);
    let eps = p.partition().eps();
    let eps2 = if eps > 0.0 { rng.gen_range(eps..=4.0 * eps) } else { 0.0 };
    let other = partition_with_rng(g, &cfg.with_k_eps(k2, eps2), rng);
    let out = combine_core(g, p.partition(), other.assignment(), cfg, rng);
    Individual::new(g, out)
}

/// Combine with a natural-cut clustering: fresh discovery for the first
/// calls, then clusterings assembled from the ENC index.
pub fn combine_c3<R: Rng + ?Sized>(
    g: &Graph,
    pop: &Population,
    state: &mut NaturalCutState,
    cfg: &PartitionerConfig,
    rng: &mut R,
) -> Individual {
    let p = tournament_select(pop, rng);
    let clustering = if state.in_stage1() {
        let (c, encs) = stage1_clustering(g, p.partition().k(), rng);
        state.index.extend(encs);
        c
    } else {
        stage2_clustering(&state.index, g, rng)
    };
    state.calls += 1;
    let out = combine_core(g, p.partition(), clustering.assignment(), cfg, rng);
    Individual::new(g, out)
}

fn random_member<'p, R: Rng + ?Sized>(pop: &'p Population, rng: &mut R) -> &'p Individual {
    assert!(!pop.is_empty(), "mutation on an empty population");
    &pop.members[rng.gen_range(0..pop.len())]
}

/// F-cycle on a random member, seeded with its own partition; never worse.
pub fn mutate_m1<R: Rng + ?Sized>(g: &Graph, pop: &Population, cfg: &PartitionerConfig, rng: &mut R) -> Individual {
    let p = random_member(pop, rng);
    Individual::new(g, fcycle(g, p.partition(), cfg, true, rng))
}

/// F-cycle on a random member with a fresh initial partition; may be worse.
pub fn mutate_m2<R: Rng + ?Sized>(g: &Graph, pop: &Population, cfg: &PartitionerConfig, rng: &mut R) -> Individual {
    let p = random_member(pop, rng);
    Individual::new(g, fcycle(g, p.partition(), cfg, false, rng))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Operator {
    M1,
    M2,
    C1,
    C2,
    C3,
}

/// Mutation weight `coin` out of 10, then fixed splits within mutation and
/// combine.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OperatorRatios {
    pub coin: u32,
    pub m1: u32,
    pub m2: u32,
    pub c1: u32,
    pub c2: u32,
    pub c3: u32,
}

impl Default for OperatorRatios {
    fn default() -> Self {
        OperatorRatios {
            coin: 1,
            m1: 4,
            m2: 1,
            c1: 3,
            c2: 1,
            c3: 1,
        }
    }
}

impl OperatorRatios {
    pub fn with_coin(coin: u32) -> Self {
        assert!(coin <= 10, "coin must lie in 0..=10");
        OperatorRatios {
            coin,
            ..Self::default()
        }
    }

    /// Exact probability of each operator.
    pub fn probabilities(&self) -> [(Operator, f64); 5] {
        let mutation = self.coin as f64 / 10.0;
        let msum = (self.m1 + self.m2) as f64;
        let csum = (self.c1 + self.c2 + self.c3) as f64;
        [
            (Operator::M1, mutation * self.m1 as f64 / msum),
            (Operator::M2, mutation * self.m2 as f64 / msum),
            (Operator::C1, (1.0 - mutation) * self.c1 as f64 / csum),
            (Operator::C2, (1.0 - mutation) * self.c2 as f64 / csum),
            (Operator::C3, (1.0 - mutation) * self.c3 as f64 / csum),
        ]
    }
}

pub fn pick_operator<R: Rng + ?Sized>(ratios: &OperatorRatios, rng: &mut R) -> Operator {
    assert!(ratios.coin <= 10);
    assert!(ratios.m1 + ratios.m2 > 0 && ratios.c1 + ratios.c2 + ratios.c3 > 0);
    if rng.gen_range(0..10) < ratios.coin {
        if rng.gen_range(0..ratios.m1 + ratios.m2) < ratios.m1 {
            Operator::M1
        } else {
            Operator::M2
        }
    } else {
        let r = rng.gen_range(0..ratios.c1 + ratios.c2 + ratios.c3);
        if r < ratios.c1 {
            Operator::C1
        } else if r < ratios.c1 + ratios.c2 {
            Operator::C2
        } else {
            Operator::C3
        }
    }
}

/// Produces one offspring with the given operator.
pub fn apply_operator<R: Rng + ?Sized>(
    op: Operator,
    g: &Graph,
    pop: &Population,
    state: &mut NaturalCutState,
    cfg: &PartitionerConfig,
    rng: &mut R,
) -> Individual {
    match op {
        Operator::M1 => mutate_m1(g, pop, cfg, rng),
        Operator::M2 => mutate_m2(g, pop, cfg, rng),
        Operator::C1 => combine_c1(g, pop, cfg, rng),
        Operator::C2 => combine_c2(g, pop, cfg, rng),
        Operator::C3 => combine_c3(g, pop, state, cfg, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{bridged_triangles, grid, random_connected};
    use crate::seeded_rng;

    /// Bisection of a 12-node path whose cut edges are exactly the first
    /// `c` path edges. The loose imbalance keeps every such split feasible.
    fn path_individual(g: &Graph, c: usize) -> Individual {
        let a: Vec<usize> = (0..12).map(|v| v.min(c) % 2).collect();
        Individual::new(g, Partition::new(g, 2, 1.0, a))
    }

    fn population_with_cuts(cuts: &[usize]) -> (Graph, Population) {
        let g = crate::generators::path(12);
        let mut pop = Population::new(cuts.len());
        for &c in cuts {
            let ind = path_individual(&g, c);
            assert_eq!(ind.cut() as usize, c);
            assert!(evict_insert(&mut pop, ind, &mut seeded_rng(0)));
        }
        (g, pop)
    }

    #[test]
    fn tournament_of_one() {
        let (_, pop) = population_with_cuts(&[3]);
        assert_eq!(tournament_select(&pop, &mut seeded_rng(1)).cut(), 3);
    }

    #[test]
    fn tournament_frequency() {
        // The best of cuts {1, 2, 3, 4} wins unless both draws miss it:
        // 1 - (3/4)^2 = 7/16.
        let (_, pop) = population_with_cuts(&[1, 2, 3, 4]);
        let mut rng = seeded_rng(2);
        let trials = 10_000;
        let wins = (0..trials).filter(|_| tournament_select(&pop, &mut rng).cut() == 1).count();
        let freq = wins as f64 / trials as f64;
        assert!((freq - 7.0 / 16.0).abs() <= 0.02, "frequency {freq}");
    }

    #[test]
    fn tournament_picks_lower_of_two() {
        let (_, pop) = population_with_cuts(&[5, 9]);
        let mut rng = seeded_rng(3);
        let trials = 4000;
        let wins = (0..trials).filter(|_| tournament_select(&pop, &mut rng).cut() == 5).count();
        assert!((wins as f64 / trials as f64 - 0.75).abs() < 0.03);
    }

    #[test]
    fn eviction_rejects_worse_offspring() {
        let (g, mut pop) = population_with_cuts(&[2, 3]);
        let worse = path_individual(&g, 7);
        assert!(!evict_insert(&mut pop, worse, &mut seeded_rng(1)));
        assert_eq!(pop.len(), 2);
        assert_eq!(pop.best_cut(), Some(2));
    }

    #[test]
    fn below_capacity_always_inserts() {
        let g = crate::generators::path(12);
        let mut pop = Population::new(3);
        assert!(evict_insert(&mut pop, path_individual(&g, 9), &mut seeded_rng(1)));
        assert!(evict_insert(&mut pop, path_individual(&g, 11), &mut seeded_rng(1)));
        assert_eq!(pop.len(), 2);
        assert_eq!(pop.best_cut(), Some(9));
    }

    #[test]
    fn eviction_replaces_most_similar() {
        let g = crate::generators::path(12);
        // Offspring cuts the first 3 edges. x cuts the first 5 (distance 2),
        // y cuts edges 4..8 only (distance 3 + 4 = 7).
        let off = path_individual(&g, 3);
        let x = path_individual(&g, 5);
        let ya: Vec<usize> = (0..12).map(|v| if v <= 4 { 0 } else { (v.min(8) - 4) % 2 }).collect();
        let y = Individual::new(&g, Partition::new(&g, 2, 1.0, ya));
        assert_eq!(partition_distance(x.cut_edges(), off.cut_edges()), 2);
        assert_eq!(partition_distance(y.cut_edges(), off.cut_edges()), 7);
        let mut pop = Population::new(2);
        pop.members.push(x.clone());
        pop.members.push(y.clone());
        assert!(evict_insert(&mut pop, off.clone(), &mut seeded_rng(1)));
        assert_eq!(pop.members(), &[off, y]);
    }

    #[test]
    fn duplicate_replaces_its_twin() {
        let (_, mut pop) = population_with_cuts(&[2, 4]);
        let twin = pop.members()[1].clone();
        assert!(evict_insert(&mut pop, twin.clone(), &mut seeded_rng(1)));
        assert_eq!(pop.len(), 2);
        assert_eq!(pop.members()[0].cut(), 2);
        assert_eq!(pop.members()[1], twin);
    }

    #[test]
    fn eviction_never_removes_better_members() {
        let mut rng = seeded_rng(5);
        let g = random_connected(30, 0.1, &mut rng);
        let mut pop = Population::new(4);
        for _ in 0..40 {
            let a: Vec<usize> = (0..30).map(|_| rng.gen_range(0..2)).collect();
            let off = Individual::new(&g, Partition::new(&g, 2, 0.1, a));
            let before: Vec<Weight> = pop.members().iter().map(Individual::cut).collect();
            let cut = off.cut();
            let best_before = pop.best_cut();
            evict_insert(&mut pop, off, &mut rng);
            let after: Vec<Weight> = pop.members().iter().map(Individual::cut).collect();
            for c in before.iter().filter(|&&c| c < cut) {
                assert!(after.iter().filter(|&&x| x == *c).count() >= before.iter().filter(|&&x| x == *c).count());
            }
            if let (Some(b0), Some(b1)) = (best_before, pop.best_cut()) {
                assert!(b1 <= b0);
            }
            assert!(pop.members().iter().all(Individual::is_feasible));
        }
    }

    #[test]
    fn c2_ranges() {
        assert_eq!(c2_k_range(8), (2, 32));
        assert_eq!(c2_k_range(2), (2, 8));
        assert_eq!(c2_k_range(16), (4, 64));
    }

    fn seeded_population(g: &Graph, cfg: &PartitionerConfig, size: usize, rng: &mut crate::SeededRng) -> Population {
        let mut pop = Population::new(size);
        for _ in 0..size {
            let p = partition_with_rng(g, cfg, rng);
            evict_insert(&mut pop, Individual::new(g, p), rng);
        }
        pop
    }

    #[test]
    fn combines_never_worsen_their_parent() {
        let mut rng = seeded_rng(7);
        let g = grid(12, 12);
        let cfg = PartitionerConfig::eco(4, 0.03);
        let pop = seeded_population(&g, &cfg, 4, &mut rng);
        let worst = pop.members().iter().map(Individual::cut).max().unwrap();
        let mut state = NaturalCutState::new(g.n());
        for _ in 0..6 {
            // Offspring are at least as good as the selected parent, which is
            // itself a member; the worst member bounds every parent.
            for op in [Operator::C1, Operator::C2, Operator::C3, Operator::M1] {
                let off = apply_operator(op, &g, &pop, &mut state, &cfg, &mut rng);
                assert!(off.cut() <= worst, "{op:?}");
                assert!(off.is_feasible());
            }
        }
    }

    #[test]
    fn c1_bound_by_better_parent() {
        let mut rng = seeded_rng(8);
        let g = random_connected(60, 0.06, &mut rng);
        let cfg = PartitionerConfig::strong(2, 0.03);
        let mut pop = Population::new(2);
        for _ in 0..2 {
            let p = partition_with_rng(&g, &cfg.clone().with_seed(rng.gen()), &mut rng);
            pop.members.push(Individual::new(&g, p));
        }
        // Both parents come from these two members, so the offspring is
        // never worse than the worse member.
        let worst = pop.members().iter().map(Individual::cut).max().unwrap();
        for _ in 0..5 {
            let off = combine_c1(&g, &pop, &cfg, &mut rng);
            assert!(off.cut() <= worst);
        }
    }

    #[test]
    fn c3_stage_switch() {
        let g = grid(10, 10);
        let cfg = PartitionerConfig::eco(2, 0.03);
        let mut rng = seeded_rng(9);
        let pop = seeded_population(&g, &cfg, 2, &mut rng);
        let mut state = NaturalCutState::new(g.n());
        for call in 0..STAGE1_CALLS {
            assert!(state.in_stage1(), "call {call}");
            let before = state.index.len();
            combine_c3(&g, &pop, &mut state, &cfg, &mut rng);
            assert!(state.index.len() > before);
        }
        assert!(!state.in_stage1());
        let before = state.index.len();
        combine_c3(&g, &pop, &mut state, &cfg, &mut rng);
        assert_eq!(state.index.len(), before);
        assert_eq!(state.calls, STAGE1_CALLS + 1);
    }

    #[test]
    fn c3_on_bridged_triangles_finds_the_bridge() {
        let g = bridged_triangles();
        let cfg = PartitionerConfig::strong(2, 0.03);
        let mut rng = seeded_rng(10);
        let mut pop = Population::new(1);
        // A poor but feasible start: cut 3.
        let p = Partition::new(&g, 2, 0.03, vec![0, 0, 1, 1, 1, 0]);
        assert!(p.is_feasible());
        pop.members.push(Individual::new(&g, p));
        let mut state = NaturalCutState::new(g.n());
        let off = combine_c3(&g, &pop, &mut state, &cfg, &mut rng);
        assert_eq!(off.cut(), 1);
    }

    #[test]
    fn m1_keeps_optimum_and_never_worsens() {
        let g = grid(4, 4);
        let cfg = PartitionerConfig::strong(2, 0.03);
        let mut pop = Population::new(1);
        let a: Vec<usize> = (0..16).map(|v| usize::from(v % 4 >= 2)).collect();
        pop.members.push(Individual::new(&g, Partition::new(&g, 2, 0.03, a)));
        for seed in 0..5 {
            assert_eq!(mutate_m1(&g, &pop, &cfg, &mut seeded_rng(seed)).cut(), 4);
        }
        let mut rng = seeded_rng(11);
        let g = random_connected(80, 0.05, &mut rng);
        let cfg = PartitionerConfig::eco(3, 0.03);
        let pop = seeded_population(&g, &cfg, 1, &mut rng);
        for _ in 0..5 {
            let off = mutate_m1(&g, &pop, &cfg, &mut rng);
            assert!(off.cut() <= pop.members()[0].cut());
        }
        let off = mutate_m2(&g, &pop, &cfg, &mut rng);
        assert!(off.is_feasible());
    }

    #[test]
    fn operator_probabilities() {
        let r = OperatorRatios::default();
        let expect = [0.08, 0.02, 0.54, 0.18, 0.18];
        for ((_, p), e) in r.probabilities().iter().zip(expect) {
            assert!((p - e).abs() < 1e-12);
        }
        let mut rng = seeded_rng(12);
        let draws = 100_000;
        let mut counts = std::collections::HashMap::new();
        for _ in 0..draws {
            *counts.entry(pick_operator(&r, &mut rng)).or_insert(0usize) += 1;
        }
        for (op, p) in r.probabilities() {
            let freq = counts.get(&op).copied().unwrap_or(0) as f64 / draws as f64;
            assert!((freq - p).abs() <= 0.01, "{op:?}: {freq} vs {p}");
        }
        let mut mutations = 0;
        for _ in 0..10_000 {
            if matches!(pick_operator(&r, &mut rng), Operator::M1 | Operator::M2) {
                mutations += 1;
            }
        }
        assert!((mutations as f64 / 10_000.0 - 0.1).abs() < 0.01);
        let all_mutation = OperatorRatios::with_coin(10);
        assert!((0..1000).all(|_| matches!(pick_operator(&all_mutation, &mut rng), Operator::M1 | Operator::M2)));
    }
}
