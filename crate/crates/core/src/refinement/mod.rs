//! Local improvement of k-way partitions: FM moves, rebalancing and
//! flow-based pair refinement.

mod flow;
mod fm;
mod pair;

pub use flow::{max_flow_min_cut, FlowNetwork, FlowProblem};
pub use fm::{fm_move_limit, fm_refine, multitry_fm, rebalance, MAX_FM_ROUNDS};
pub use pair::{
    adjacent_block_pairs, flow_pair_refine, refine_all_pairs, refine_all_pairs_counted,
    MAX_CORRIDOR_DEPTH,
};
