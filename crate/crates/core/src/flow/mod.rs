//! Flow primitives shared by every routing backend.

mod cmcf;
mod maxflow;
mod paths;
mod rounding;

pub use cmcf::{solve_cmcf_min_congestion, solve_cmcf_short_paths, CmcfSolution, SourceFlow};
pub use maxflow::{max_flow_integral, FlowNetwork};
pub use paths::{
    cancel_cycles, decompose_solution, endpoint_distribution, sample_path, Direction, FlowArc,
    FlowAssignment, FlowPath, FlowSampler, PairPaths, PathDistribution, SampledWalk,
};
pub use rounding::{round_paths, RoundedPaths, UnitCommodity};

use crate::graph::VertexId;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FlowError {
    #[error("source and sink must differ (both are {0})")]
    SameTerminals(usize),
    #[error("node {node} carries no flow in the {direction:?} direction")]
    NoFlowAt { node: usize, direction: Direction },
    #[error("flow walk from node {0} did not reach a terminal; flow is not acyclic")]
    WalkDidNotTerminate(usize),
    #[error("restriction set induces a disconnected subgraph")]
    Disconnected,
    #[error("demand ({s}, {t}) has an endpoint outside the restriction set")]
    DemandOutsideRestriction { s: VertexId, t: VertexId },
    #[error("commodity {index} ships {value} units, expected exactly 1")]
    NonUnitCommodity { index: usize, value: f64 },
    #[error("LP solver failed: {0}")]
    Solver(String),
}
