//! Flow-based refinement between pairs of adjacent blocks.
//!
//! For blocks `a` and `b` a corridor is grown by BFS from their common
//! boundary into each block. The corridor inside `a` is capped by the room
//! left in `b` (and vice versa), so moving any subset of corridor nodes to
//! the other side keeps both blocks within their caps. Everything of `a`
//! outside the corridor becomes the source, everything of `b` outside the
//! corridor the sink, and a minimum cut of that network is the best
//! bipartition reachable inside the corridor.

use std::collections::{BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;

use super::flow::{max_flow_min_cut, FlowNetwork, FlowProblem};
use crate::graph::{BlockId, Graph, NodeId, Weight};
use crate::partition::Partition;

/// BFS layers grown from the pair boundary into each block.
pub const MAX_CORRIDOR_DEPTH: usize = 10;

/// Grows the corridor inside `side` starting from its nodes adjacent to
/// `other`, admitting nodes while their total weight stays within `budget`.
fn grow_corridor<R: Rng + ?Sized>(
    g: &Graph,
    p: &Partition,
    side: BlockId,
    other: BlockId,
    budget: Weight,
    in_corridor: &mut [bool],
    rng: &mut R,
) -> Vec<NodeId> {
    let mut start: Vec<NodeId> = g
        .nodes()
        .filter(|&v| p.block(v) == side && g.neighbors(v).any(|(u, _)| p.block(u) == other))
        .collect();
    start.shuffle(rng);
    let mut taken = Vec::new();
    let mut weight = 0;
    let mut queue: VecDeque<(NodeId, usize)> = VecDeque::new();
    let mut seen = std::collections::HashSet::new();
    for v in start {
        seen.insert(v);
        queue.push_back((v, 0));
    }
    while let Some((v, depth)) = queue.pop_front() {
        let c = g.node_weight(v);
        if weight + c > budget {
            continue;
        }
        weight += c;
        in_corridor[v] = true;
        taken.push(v);
        if depth + 1 >= MAX_CORRIDOR_DEPTH {
            continue;
        }
        for (u, _) in g.neighbors(v) {
            if p.block(u) == side && seen.insert(u) {
                queue.push_back((u, depth + 1));
            }
        }
    }
    taken
}

/// Tries to lower the cut between blocks `a` and `b` with one min-cut
/// computation. Applies the result only if the cut strictly decreases and
/// the partition stays within its caps; returns whether it changed.
pub fn flow_pair_refine<R: Rng + ?Sized>(
    g: &Graph,
    p: &mut Partition,
    a: BlockId,
    b: BlockId,
    rng: &mut R,
) -> bool {
    assert_ne!(a, b);
    let mut in_corridor = vec![false; g.n()];
    let room_b = p.cap(b) - p.block_weight(b);
    let room_a = p.cap(a) - p.block_weight(a);
    let corridor_a = grow_corridor(g, p, a, b, room_b.max(0), &mut in_corridor, rng);
    let corridor_b = grow_corridor(g, p, b, a, room_a.max(0), &mut in_corridor, rng);
    if corridor_a.is_empty() && corridor_b.is_empty() {
        return false;
    }

    let nodes: Vec<NodeId> = corridor_a.iter().chain(&corridor_b).copied().collect();
    let mut local = std::collections::HashMap::with_capacity(nodes.len());
    for (i, &v) in nodes.iter().enumerate() {
        local.insert(v, i);
    }
    let source = nodes.len();
    let sink = nodes.len() + 1;
    let mut network = FlowNetwork::new(nodes.len() + 2);
    // Current a/b cut restricted to edges that the network can change.
    let mut current = 0;
    for (i, &v) in nodes.iter().enumerate() {
        let v_side_a = p.block(v) == a;
        for (u, w) in g.neighbors(v) {
            let bu = p.block(u);
            if let Some(&j) = local.get(&u) {
                if i < j {
                    network.add_edge(i, j, w);
                    if (bu == a) != v_side_a {
                        current += w;
                    }
                }
            } else if bu == a {
                network.add_edge(source, i, w);
                if !v_side_a {
                    current += w;
                }
            } else if bu == b {
                network.add_edge(i, sink, w);
                if v_side_a {
                    current += w;
                }
            }
        }
    }
    let mut node_map: Vec<Option<NodeId>> = nodes.iter().map(|&v| Some(v)).collect();
    node_map.extend([None, None]);
    let mut problem = FlowProblem {
        network,
        source,
        sink,
        node_map,
    };
    let (flow, minimal) = max_flow_min_cut(&mut problem);
    debug_assert!(flow <= current);
    if flow >= current {
        return false;
    }
    let maximal = problem.network.maximal_source_side(sink);
    let mut options = vec![minimal, maximal];
    options.shuffle(rng);
    for side in options {
        // Weight change of block a if this cut is applied.
        let mut delta_a = 0;
        for (i, &v) in nodes.iter().enumerate() {
            let now_a = p.block(v) == a;
            if side[i] && !now_a {
                delta_a += g.node_weight(v);
            } else if !side[i] && now_a {
                delta_a -= g.node_weight(v);
            }
        }
        let new_a = p.block_weight(a) + delta_a;
        let new_b = p.block_weight(b) - delta_a;
        if new_a > p.cap(a) || new_b > p.cap(b) {
            continue;
        }
        let before = p.cut();
        for (i, &v) in nodes.iter().enumerate() {
            let target = if side[i] { a } else { b };
            if p.block(v) != target {
                p.move_node(g, v, target);
            }
        }
        debug_assert_eq!(before - p.cut(), current - flow);
        return true;
    }
    false
}

/// Pairs of blocks joined by at least one edge.
pub fn adjacent_block_pairs(g: &Graph, p: &Partition) -> Vec<(BlockId, BlockId)> {
    let mut pairs = BTreeSet::new();
    for (u, v, _) in g.edges() {
        let (a, b) = (p.block(u), p.block(v));
        if a != b {
            pairs.insert((a.min(b), a.max(b)));
        }
    }
    pairs.into_iter().collect()
}

/// Sweeps all adjacent block pairs in random order with
/// [`flow_pair_refine`], repeating while some pair improved.
pub fn refine_all_pairs<R: Rng + ?Sized>(g: &Graph, p: &mut Partition, rng: &mut R) -> bool {
    refine_all_pairs_counted(g, p, rng).0
}

/// As [`refine_all_pairs`], also reporting how many pair refinements were
/// attempted per sweep.
pub fn refine_all_pairs_counted<R: Rng + ?Sized>(
    g: &Graph,
    p: &mut Partition,
    rng: &mut R,
) -> (bool, Vec<usize>) {
    let mut any = false;
    let mut visits = Vec::new();
    loop {
        let mut pairs = adjacent_block_pairs(g, p);
        pairs.shuffle(rng);
        visits.push(pairs.len());
        let mut improved = false;
        for (a, b) in pairs {
            improved |= flow_pair_refine(g, p, a, b, rng);
        }
        if !improved {
            break;
        }
        any = true;
    }
    (any, visits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{grid, path, random_connected};
    use crate::seeded_rng;

    #[test]
    fn jagged_grid_cut_is_straightened() {
        // 2 x 4 grid:
        //   0 1 2 3
        //   4 5 6 7
        let g = grid(2, 4);
        let mut p = Partition::new(&g, 2, 0.0, vec![0, 0, 0, 1, 0, 0, 1, 1]);
        assert_eq!(p.cut(), 3);
        let mut rng = seeded_rng(1);
        let changed = flow_pair_refine(&g, &mut p, 0, 1, &mut rng);
        assert!(changed);
        assert_eq!(p.cut(), 2);
        assert!(p.is_feasible());
        assert!(p.is_consistent(&g));
    }

    #[test]
    fn optimal_bisection_is_left_alone() {
        let g = grid(2, 4);
        let mut p = Partition::new(&g, 2, 0.0, vec![0, 0, 1, 1, 0, 0, 1, 1]);
        assert!(!flow_pair_refine(&g, &mut p, 0, 1, &mut seeded_rng(2)));
        assert_eq!(p.cut(), 2);
    }

    #[test]
    fn tight_blocks_never_become_infeasible() {
        let g = path(6);
        let mut p = Partition::with_caps(&g, 2, 0.0, vec![0, 1, 0, 1, 0, 1], vec![3, 3]);
        flow_pair_refine(&g, &mut p, 0, 1, &mut seeded_rng(3));
        assert!(p.is_feasible());
        assert!(p.cut() <= 5);
    }

    #[test]
    fn chain_of_blocks_visits_k_minus_one_pairs() {
        let g = path(8);
        let mut p = Partition::new(&g, 4, 0.0, vec![0, 0, 1, 1, 2, 2, 3, 3]);
        let (_, visits) = refine_all_pairs_counted(&g, &mut p, &mut seeded_rng(4));
        assert_eq!(visits[0], 3);
        // Converged: another sweep changes nothing.
        let before = p.clone();
        assert!(!refine_all_pairs(&g, &mut p, &mut seeded_rng(5)));
        assert_eq!(p, before);
    }

    #[test]
    fn pair_refinement_never_worsens() {
        let mut rng = seeded_rng(6);
        for _ in 0..200 {
            let n = rng.gen_range(6..40);
            let g = random_connected(n, 0.12, &mut rng);
            let k = rng.gen_range(2..5);
            let mut assignment: Vec<usize> = (0..n).map(|v| v % k).collect();
            assignment.shuffle(&mut rng);
            let p0 = Partition::new(&g, k, 0.1, assignment);
            let mut p = p0.clone();
            refine_all_pairs(&g, &mut p, &mut rng);
            assert!(p.is_consistent(&g));
            assert!(p.is_feasible());
            assert!(p.cut() <= p0.cut());
        }
    }
}
