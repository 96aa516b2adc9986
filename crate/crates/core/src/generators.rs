//! Small synthetic graph families used by tests, benchmarks and the CLI.

use rand::Rng;

use crate::graph::{Graph, NodeId};

pub fn path(n: usize) -> Graph {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    Graph::unweighted(n, &edges).expect("valid path")
}

pub fn cycle(n: usize) -> Graph {
    assert!(n >= 3);
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Graph::unweighted(n, &edges).expect("valid cycle")
}

/// `rows x cols` 4-neighbor grid; node `r * cols + c`.
pub fn grid(rows: usize, cols: usize) -> Graph {
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                edges.push((v, v + 1));
            }
            if r + 1 < rows {
                edges.push((v, v + cols));
            }
        }
    }
    Graph::unweighted(rows * cols, &edges).expect("valid grid")
}

pub fn complete(n: usize) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            edges.push((u, v));
        }
    }
    Graph::unweighted(n, &edges).expect("valid clique")
}

/// Two triangles {0,1,2} and {3,4,5} joined by the bridge {2,3}.
pub fn bridged_triangles() -> Graph {
    Graph::unweighted(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)])
        .expect("valid graph")
}

/// Erdős–Rényi G(n, p) with unit weights, plus a random spanning path so
/// the result is connected.
pub fn random_connected<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Graph {
    let mut order: Vec<NodeId> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let mut edges: Vec<(NodeId, NodeId)> = order.windows(2).map(|w| (w[0], w[1])).collect();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::unweighted(n, &edges).expect("valid random graph")
}

/// Random graph with random edge weights in `1..=max_weight`, not
/// necessarily connected.
pub fn random_weighted<R: Rng + ?Sized>(n: usize, p: f64, max_weight: i64, rng: &mut R) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v, rng.gen_range(1..=max_weight)));
            }
        }
    }
    Graph::from_edges(vec![1; n], edges).expect("valid random graph")
}

/// `clusters` planted groups of `size` nodes: edges inside a group appear
/// with probability `p_in`, across groups with `p_out`. Each group also gets
/// a spanning path so it is connected.
pub fn planted_clusters<R: Rng + ?Sized>(
    clusters: usize,
    size: usize,
    p_in: f64,
    p_out: f64,
    rng: &mut R,
) -> Graph {
    let n = clusters * size;
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let same = u / size == v / size;
            let forced = same && v == u + 1;
            if forced || rng.gen_bool(if same { p_in } else { p_out }) {
                edges.push((u, v));
            }
        }
    }
    Graph::unweighted(n, &edges).expect("valid planted graph")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn shapes() {
        assert_eq!(grid(4, 4).m(), 24);
        assert_eq!(cycle(6).m(), 6);
        assert_eq!(complete(4).m(), 6);
        assert_eq!(bridged_triangles().m(), 7);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let g = planted_clusters(4, 16, 0.5, 0.01, &mut rng);
        assert_eq!(g.n(), 64);
    }
}
