//! Three-layer flow networks `s → L → R → t`, exact integral max-flow,
//! minimum cuts, and flow transfer between the small and lifted networks.

mod export;
mod maxflow;
mod network;
mod transfer;

pub use export::{network_to_dot, network_to_json};
pub use maxflow::{
    cut_capacity, max_flow, max_flow_integral, min_cut, verify_flow, FlowAssignment,
};
pub use network::{
    build_lifted_network, build_small_network, ArcLayer, ArcOrigin, FlowArc, FlowNetwork,
    NetworkKind, NodeRole, MAX_LIFTED_ARCS, MAX_LIFTED_LEFT,
};
pub use transfer::{arc_images, lift_flow, project_flow};
