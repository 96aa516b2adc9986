//! Multilevel graph partitioning with a distributed steady-state
//! evolutionary algorithm on top.
//!
//! The library is organized bottom-up: graph representation and partition
//! arithmetic, coarsening, initial partitioning, local refinement, the
//! multilevel driver (V-cycles, F-cycles and the combine framework), natural
//! cuts, the evolutionary operators, the parallel island engine, and the
//! convergence analysis used to evaluate runs.

pub mod analysis;
pub mod clustering;
pub mod coarsening;
pub mod edge_set;
pub mod engine;
pub mod evolution;
pub mod generators;
pub mod graph;
pub mod initial;
pub mod multilevel;
pub mod natural_cuts;
pub mod partition;
pub mod refinement;

pub use clustering::{connected_components, overlay_clustering, quotient_graph, Clustering};
pub use edge_set::{partition_distance, EdgeSet};
pub use graph::{load_metis, parse_metis, BlockId, Graph, GraphError, NodeId, Weight};
pub use partition::{cut_edge_set, cut_value, is_feasible, l_max, Partition};

/// Seeded random number generator used throughout the crate.
pub type SeededRng = rand_chacha::ChaCha8Rng;

/// Convenience constructor for [`SeededRng`].
pub fn seeded_rng(seed: u64) -> SeededRng {
    use rand::SeedableRng;
    SeededRng::seed_from_u64(seed)
}
