//! End-to-end runs through the public API.

use std::time::Duration;

use evopart::engine::{run, EngineConfig};
use evopart::evolution::{apply_operator, evict_insert, Individual, NaturalCutState, Operator, Population};
use evopart::generators::{grid, planted_clusters};
use evopart::multilevel::{combine_core, fcycle, partition, partition_with_rng, PartitionerConfig};
use evopart::natural_cuts::natural_cut_preprocess;
use evopart::{graph::write_metis, parse_metis, seeded_rng, Partition};
use proptest::prelude::*;

#[test]
fn metis_round_trip_then_partition() {
    let g = grid(6, 6);
    let h = parse_metis(&write_metis(&g)).unwrap();
    assert_eq!(g, h);
    let p = partition(&h, &PartitionerConfig::strong(2, 0.0));
    assert!(p.is_feasible());
    assert_eq!(p.cut(), 6);
}

#[test]
fn planted_clusters_are_recovered() {
    let g = planted_clusters(4, 16, 0.5, 0.02, &mut seeded_rng(3));
    let planted: Vec<usize> = (0..64).map(|v| v / 16).collect();
    let planted = Partition::new(&g, 4, 0.03, planted);
    let best = (0..5)
        .map(|s| partition(&g, &PartitionerConfig::strong(4, 0.03).with_seed(s)).cut())
        .min()
        .unwrap();
    assert!(best <= planted.cut());
}

#[test]
fn every_operator_keeps_population_feasible() {
    let g = grid(10, 10);
    let cfg = PartitionerConfig::eco(4, 0.03);
    let mut rng = seeded_rng(9);
    let mut pop = Population::new(5);
    for _ in 0..5 {
        let ind = Individual::new(&g, partition_with_rng(&g, &cfg, &mut rng));
        evict_insert(&mut pop, ind, &mut rng);
    }
    let mut state = NaturalCutState::new(g.n());
    let mut best = pop.best_cut().unwrap();
    for round in 0..30 {
        let op = [Operator::M1, Operator::M2, Operator::C1, Operator::C2, Operator::C3][round % 5];
        let off = apply_operator(op, &g, &pop, &mut state, &cfg, &mut rng);
        assert!(off.partition().is_consistent(&g));
        evict_insert(&mut pop, off, &mut rng);
        assert!(pop.members().iter().all(Individual::is_feasible));
        let now = pop.best_cut().unwrap();
        assert!(now <= best);
        best = now;
    }
}

#[test]
fn preprocessing_then_partition_lifts_back() {
    let g = grid(12, 12);
    let mut rng = seeded_rng(4);
    let (coarse, map, _) = natural_cut_preprocess(&g, 4, 0.03, 2, &mut rng);
    assert_eq!(coarse.total_node_weight(), g.total_node_weight());
    let cp = partition(&coarse, &PartitionerConfig::strong(4, 0.1));
    let lifted: Vec<usize> = map.iter().map(|&c| cp.block(c)).collect();
    let fine = Partition::new(&g, 4, 0.1, lifted);
    assert_eq!(fine.cut(), cp.cut());
}

#[test]
fn engine_with_two_workers() {
    let g = grid(8, 8);
    let mut cfg = EngineConfig::new(PartitionerConfig::eco(2, 0.03), 2, Duration::from_millis(800));
    cfg.seed = 11;
    let res = run(&g, &cfg).unwrap();
    assert!(res.best.is_feasible());
    assert!(res.best.cut() >= 8);
    assert!(res.log.iter().all(|e| e.worker < 2 && e.t >= 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn combine_never_worse_than_first_parent(seed in any::<u64>(), k in 2usize..6) {
        let mut rng = seeded_rng(seed);
        let g = evopart::generators::random_connected(40, 0.08, &mut rng);
        let cfg = PartitionerConfig::eco(k, 0.05);
        let a = partition_with_rng(&g, &cfg, &mut rng);
        let b = partition_with_rng(&g, &cfg, &mut rng);
        prop_assume!(a.is_feasible());
        let child = combine_core(&g, &a, b.assignment(), &cfg, &mut rng);
        prop_assert!(child.cut() <= a.cut());
        prop_assert!(child.is_feasible());
    }

    #[test]
    fn fcycle_with_input_never_worse(seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let g = evopart::generators::random_connected(50, 0.06, &mut rng);
        let cfg = PartitionerConfig::strong(3, 0.03);
        let p = partition_with_rng(&g, &cfg, &mut rng);
        prop_assume!(p.is_feasible());
        let q = fcycle(&g, &p, &cfg, true, &mut rng);
        prop_assert!(q.cut() <= p.cut());
        prop_assert!(q.is_feasible());
    }
}
