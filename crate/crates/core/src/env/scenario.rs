use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use super::{EnvError, ExpertiseLevel, NodeId, TaskId, TerminalEnv, VehicleId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    RoadClosure,
    ForbiddenEdgeVehicle,
    DesignatedRoute,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 3] =
        [ScenarioKind::RoadClosure, ScenarioKind::ForbiddenEdgeVehicle, ScenarioKind::DesignatedRoute];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::RoadClosure => "road_closure",
            ScenarioKind::ForbiddenEdgeVehicle => "forbidden_edge_vehicle",
            ScenarioKind::DesignatedRoute => "designated_route",
        }
    }

    pub fn parse(s: &str) -> Option<ScenarioKind> {
        ScenarioKind::ALL.into_iter().find(|k| k.as_str() == s)
    }

    /// The fixed parameters used by the benchmark scenarios.
    pub fn benchmark_spec(self) -> ScenarioSpec {
        match self {
            ScenarioKind::RoadClosure => ScenarioSpec::RoadClosure { edge: (NodeId(6), NodeId(7)) },
            ScenarioKind::ForbiddenEdgeVehicle => {
                ScenarioSpec::ForbiddenEdgeVehicle { vehicle: VehicleId::from("AGV-4"), edge: (NodeId(5), NodeId(6)) }
            }
            ScenarioKind::DesignatedRoute => ScenarioSpec::DesignatedRoute {
                task: TaskId::from("T3"),
                nodes: alloc::vec![NodeId(6), NodeId(10), NodeId(11)],
            },
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Structured ground truth for an operational requirement.
///
/// Closure and forbidden edges apply in both directions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum ScenarioSpec {
    /// No additional requirement.
    None,
    RoadClosure {
        edge: (NodeId, NodeId),
    },
    ForbiddenEdgeVehicle {
        vehicle: VehicleId,
        edge: (NodeId, NodeId),
    },
    DesignatedRoute {
        task: TaskId,
        nodes: Vec<NodeId>,
    },
}

impl ScenarioSpec {
    pub fn kind(&self) -> Option<ScenarioKind> {
        match self {
            ScenarioSpec::None => None,
            ScenarioSpec::RoadClosure { .. } => Some(ScenarioKind::RoadClosure),
            ScenarioSpec::ForbiddenEdgeVehicle { .. } => Some(ScenarioKind::ForbiddenEdgeVehicle),
            ScenarioSpec::DesignatedRoute { .. } => Some(ScenarioKind::DesignatedRoute),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        self.kind().map_or("none", ScenarioKind::as_str)
    }

    /// Checks every reference against `env`.
    pub fn validate(&self, env: &TerminalEnv) -> Result<(), EnvError> {
        let node = |id: NodeId| {
            if env.net.has_node(id) {
                Ok(())
            } else {
                Err(EnvError::UnknownNode { node: id, context: String::from("scenario") })
            }
        };
        match self {
            ScenarioSpec::None => Ok(()),
            ScenarioSpec::RoadClosure { edge } => {
                node(edge.0)?;
                node(edge.1)
            }
            ScenarioSpec::ForbiddenEdgeVehicle { vehicle, edge } => {
                if env.config.agv(vehicle).is_none() {
                    return Err(EnvError::UnknownVehicle {
                        vehicle: vehicle.clone(),
                        context: String::from("scenario"),
                    });
                }
                node(edge.0)?;
                node(edge.1)
            }
            ScenarioSpec::DesignatedRoute { task, nodes } => {
                if env.config.task(task).is_none() {
                    return Err(EnvError::UnknownTask(task.clone()));
                }
                if nodes.len() < 2 {
                    return Err(EnvError::ShortScenarioPath);
                }
                for &n in nodes {
                    node(n)?;
                }
                for w in nodes.windows(2) {
                    if env.net.length(w[0], w[1]).is_none() {
                        return Err(EnvError::MissingScenarioEdge(w[0], w[1]));
                    }
                }
                Ok(())
            }
        }
    }
}

fn same_undirected(edge: (NodeId, NodeId), a: u32, b: u32) -> bool {
    edge == (NodeId(a), NodeId(b)) || edge == (NodeId(b), NodeId(a))
}

/// Natural-language requirement for a benchmark scenario at a given
/// expertise level.
pub fn scenario_prompt(spec: &ScenarioSpec, level: ExpertiseLevel) -> Result<&'static str, EnvError> {
    use ExpertiseLevel::*;
    let unknown = || EnvError::UnknownCombination { kind: String::from(spec.kind_name()), level };
    let text = match spec {
        ScenarioSpec::RoadClosure { edge } if same_undirected(*edge, 6, 7) => match level {
            Technician => "That road between node 6 and node 7 can't be used today.",
            Engineer => "Attention: The bidirectional road segment connecting nodes (6, 7) is completely closed.",
            Scientist => "The model must satisfy a topology constraint: remove the edge subset E' = {(6,7), (7,6)} from the network graph.",
        },
        ScenarioSpec::ForbiddenEdgeVehicle { vehicle, edge }
            if vehicle.as_str() == "AGV-4" && same_undirected(*edge, 5, 6) =>
        {
            match level {
                Technician => "AGV-4 in the fleet is one of those extra-tall ones; it can't get under the low bridge between node 5 and node 6.",
                Engineer => "Attention: AGV-4 in the fleet is an over-height vehicle and cannot pass through the bidirectional height-restricted gantry connecting (5, 6).",
                Scientist => "A vehicle-path compatibility constraint must be enforced: for v=4, the decision variable x_{ve} must be 0 for all e in {(5,6), (6,5)}.",
            }
        }
        ScenarioSpec::DesignatedRoute { task, nodes }
            if task.as_str() == "T3" && nodes.as_slice() == [NodeId(6), NodeId(10), NodeId(11)] =>
        {
            match level {
                Technician => "The container for T3 has dangerous goods, so it has to stick to the safe route: go from 6 to 10, then from 10 to 11. No exceptions.",
                Engineer => "Task T3 involves dangerous goods and must follow the designated one-way safety corridor (6->10->11).",
                Scientist => "A mandatory subpath constraint must be applied to the AGV assigned to task T3, ensuring its solution path contains the subsequence (6, 10, 11).",
            }
        }
        _ => return Err(unknown()),
    };
    Ok(text)
}
