//! Exact multi-AGV path planning.
//!
//! Total travel time over the fleet decomposes per vehicle because the
//! flow-balance model has no coupling constraints, so each vehicle is an
//! independent (possibly constrained) shortest-path problem. Paths are
//! edge-simple: a vehicle may revisit a node but never traverses the same
//! directed edge twice.

mod bind;
mod oracle;
mod path;
mod solve;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{NodeId, TaskId, VehicleId};

pub use bind::bind;
pub use oracle::{oracle_instance, oracle_solve, scenario_problem};
pub use path::{shortest_path, shortest_paths_lex};
pub use solve::{solve, solve_vehicle};

/// Default wall-clock limit for one solve, in seconds.
pub const DEFAULT_TIME_LIMIT_SECS: f64 = 300.0;

/// Directed edges available to one vehicle, keyed by `(source, target)`.
pub type EdgeSet = BTreeMap<(NodeId, NodeId), f64>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathRequirement {
    /// The path must contain these nodes as a contiguous run.
    Subpath(Vec<NodeId>),
    /// The path must be exactly this node sequence.
    Exact(Vec<NodeId>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct VehicleProblem {
    pub vehicle: VehicleId,
    pub task: TaskId,
    pub origin: NodeId,
    pub destination: NodeId,
    pub edges: EdgeSet,
    pub requirement: Option<PathRequirement>,
}

/// A bound planning instance: one problem per tasked vehicle, in fleet order.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverInstance {
    pub vehicles: Vec<VehicleProblem>,
}

impl SolverInstance {
    pub fn vehicle(&self, id: &str) -> Option<&VehicleProblem> {
        self.vehicles.iter().find(|v| v.vehicle.as_str() == id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehiclePlan {
    pub vehicle: VehicleId,
    pub task: TaskId,
    pub path: Vec<NodeId>,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub plans: Vec<VehiclePlan>,
    /// Sum of the per-vehicle costs.
    pub objective: f64,
}

impl Solution {
    pub fn from_plans(plans: Vec<VehiclePlan>) -> Self {
        let objective = plans.iter().map(|p| p.cost).sum();
        Solution { plans, objective }
    }

    pub fn plan(&self, vehicle: &str) -> Option<&VehiclePlan> {
        self.plans.iter().find(|p| p.vehicle.as_str() == vehicle)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveErrorKind {
    BindUnknownNode,
    BindUnknownVehicle,
    BindConflict,
    Infeasible,
    Timeout,
    DegenerateEdgeReuse,
}

impl SolveErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveErrorKind::BindUnknownNode => "bind_unknown_node",
            SolveErrorKind::BindUnknownVehicle => "bind_unknown_vehicle",
            SolveErrorKind::BindConflict => "bind_conflict",
            SolveErrorKind::Infeasible => "infeasible",
            SolveErrorKind::Timeout => "timeout",
            SolveErrorKind::DegenerateEdgeReuse => "degenerate_edge_reuse",
        }
    }

    pub fn is_bind(self) -> bool {
        matches!(
            self,
            SolveErrorKind::BindUnknownNode | SolveErrorKind::BindUnknownVehicle | SolveErrorKind::BindConflict
        )
    }
}

impl fmt::Display for SolveErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("{kind}: {detail}")]
pub struct SolveError {
    pub kind: SolveErrorKind,
    pub detail: String,
}

impl SolveError {
    pub(crate) fn new(kind: SolveErrorKind, detail: String) -> Self {
        SolveError { kind, detail }
    }
}
