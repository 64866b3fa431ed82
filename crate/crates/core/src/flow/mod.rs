//! Integer max-flow and min-cost max-flow over explicit networks.

mod network;
mod solver;

pub use network::{EdgeId, FlowEdge, FlowNetwork, FlowResult};
pub use solver::{max_flow, min_cost_max_flow};
