//! Terminal environment: road network, fleet/task configuration and the
//! natural-language operational requirements.

mod generate;
mod network;
mod scenario;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use generate::{generate_instances, BaseInstance, GenerationError, FLEET_SIZE};
pub use network::default_network;
pub use scenario::{scenario_prompt, ScenarioKind, ScenarioSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for NodeId {
    fn from(v: u32) -> Self {
        NodeId(v)
    }
}

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name(String::from(s))
            }
        }
    };
}

string_id!(
    /// Vehicle identifier, e.g. `AGV-4`.
    VehicleId
);
string_id!(
    /// Task identifier, e.g. `T3`.
    TaskId
);

pub type Attributes = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    #[serde(rename = "type", default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub source: NodeId,
    pub target: NodeId,
    pub length: f64,
}

/// On-disk shape of `network.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

/// Directed road network with strictly positive edge lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    index: BTreeMap<(NodeId, NodeId), f64>,
}

impl Network {
    pub fn new(nodes: Vec<Node>, edges: Vec<Edge>) -> Result<Self, EnvError> {
        let mut ids = BTreeSet::new();
        for n in &nodes {
            if !ids.insert(n.id) {
                return Err(EnvError::DuplicateNode(n.id));
            }
        }
        let mut index = BTreeMap::new();
        for e in &edges {
            for end in [e.source, e.target] {
                if !ids.contains(&end) {
                    return Err(EnvError::UnknownNode {
                        node: end,
                        context: alloc::format!("edge ({}, {})", e.source, e.target),
                    });
                }
            }
            if !(e.length.is_finite() && e.length > 0.0) {
                return Err(EnvError::NonPositiveLength { source_node: e.source, target: e.target, length: e.length });
            }
            if index.insert((e.source, e.target), e.length).is_some() {
                return Err(EnvError::DuplicateEdge(e.source, e.target));
            }
        }
        Ok(Network { nodes, edges, index })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn has_node(&self, id: NodeId) -> bool {
        self.nodes.iter().any(|n| n.id == id)
    }

    pub fn length(&self, u: NodeId, v: NodeId) -> Option<f64> {
        self.index.get(&(u, v)).copied()
    }

    /// Edge map keyed by `(source, target)`.
    pub fn edge_map(&self) -> &BTreeMap<(NodeId, NodeId), f64> {
        &self.index
    }

    pub fn to_file(&self) -> NetworkFile {
        NetworkFile { nodes: self.nodes.clone(), edges: self.edges.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Agv {
    pub id: VehicleId,
    #[serde(default)]
    pub attributes: Attributes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Task {
    pub id: TaskId,
    pub agv: VehicleId,
    pub origin: NodeId,
    pub destination: NodeId,
    #[serde(default)]
    pub attributes: Attributes,
}

/// Fleet and pre-assigned tasks; also the on-disk shape of `config.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FleetConfig {
    pub agvs: Vec<Agv>,
    pub tasks: Vec<Task>,
}

impl FleetConfig {
    fn validate(&self) -> Result<(), EnvError> {
        let mut agvs = BTreeSet::new();
        for a in &self.agvs {
            if !agvs.insert(&a.id) {
                return Err(EnvError::DuplicateVehicle(a.id.clone()));
            }
        }
        let mut tasks = BTreeSet::new();
        let mut busy = BTreeSet::new();
        for t in &self.tasks {
            if !tasks.insert(&t.id) {
                return Err(EnvError::DuplicateTask(t.id.clone()));
            }
            if !agvs.contains(&t.agv) {
                return Err(EnvError::UnknownVehicle {
                    vehicle: t.agv.clone(),
                    context: alloc::format!("task {}", t.id),
                });
            }
            if !busy.insert(&t.agv) {
                return Err(EnvError::VehicleOverbooked(t.agv.clone()));
            }
            if t.origin == t.destination {
                return Err(EnvError::DegenerateTask(t.id.clone()));
            }
        }
        Ok(())
    }

    pub fn task(&self, id: &TaskId) -> Option<&Task> {
        self.tasks.iter().find(|t| &t.id == id)
    }

    pub fn agv(&self, id: &VehicleId) -> Option<&Agv> {
        self.agvs.iter().find(|a| &a.id == id)
    }

    pub fn task_of(&self, vehicle: &VehicleId) -> Option<&Task> {
        self.tasks.iter().find(|t| &t.agv == vehicle)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpertiseLevel {
    Technician,
    Engineer,
    Scientist,
}

impl ExpertiseLevel {
    pub const ALL: [ExpertiseLevel; 3] =
        [ExpertiseLevel::Technician, ExpertiseLevel::Engineer, ExpertiseLevel::Scientist];

    pub fn as_str(self) -> &'static str {
        match self {
            ExpertiseLevel::Technician => "technician",
            ExpertiseLevel::Engineer => "engineer",
            ExpertiseLevel::Scientist => "scientist",
        }
    }
}

impl fmt::Display for ExpertiseLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// On-disk shape of `requirements.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Requirements {
    pub expertise_level: ExpertiseLevel,
    #[serde(rename = "requirements")]
    pub texts: Vec<String>,
}

/// The full environment handed to the transfer workflow.
#[derive(Debug, Clone, PartialEq)]
pub struct TerminalEnv {
    pub net: Network,
    pub config: FleetConfig,
    pub reqs: Requirements,
}

impl TerminalEnv {
    pub fn new(net: Network, config: FleetConfig, reqs: Requirements) -> Result<Self, EnvError> {
        config.validate()?;
        for t in &config.tasks {
            for end in [t.origin, t.destination] {
                if !net.has_node(end) {
                    return Err(EnvError::UnknownNode { node: end, context: alloc::format!("task {}", t.id) });
                }
            }
        }
        Ok(TerminalEnv { net, config, reqs })
    }

    /// Validates the three decoded input files jointly.
    pub fn from_files(net: NetworkFile, config: FleetConfig, reqs: Requirements) -> Result<Self, EnvError> {
        let net = Network::new(net.nodes, net.edges)?;
        TerminalEnv::new(net, config, reqs)
    }

    /// Compact, deterministic text rendering used in prompts, retrieval
    /// queries and stored exemplars.
    pub fn digest(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "nodes ({}):", self.net.nodes().len());
        for n in self.net.nodes() {
            match &n.kind {
                Some(k) => {
                    let _ = write!(out, " {}[{}]", n.id, k);
                }
                None => {
                    let _ = write!(out, " {}", n.id);
                }
            }
        }
        let _ = write!(out, "\nedges ({}):", self.net.edges().len());
        for e in self.net.edges() {
            let _ = write!(out, " {}->{}:{}", e.source, e.target, e.length);
        }
        let _ = write!(out, "\nagvs ({}):", self.config.agvs.len());
        for a in &self.config.agvs {
            let _ = write!(out, " {}", a.id);
            write_attributes(&mut out, &a.attributes);
        }
        let _ = write!(out, "\ntasks ({}):", self.config.tasks.len());
        for t in &self.config.tasks {
            let _ = write!(out, " {}@{} {}->{}", t.id, t.agv, t.origin, t.destination);
            write_attributes(&mut out, &t.attributes);
            out.push(';');
        }
        out
    }
}

fn write_attributes(out: &mut String, attrs: &Attributes) {
    if attrs.is_empty() {
        return;
    }
    out.push('{');
    for (i, (k, v)) in attrs.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{k}={v}");
    }
    out.push('}');
}

/// Coarse classification of environment errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvErrorKind {
    Reference,
    Value,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("unknown node {node} referenced by {context}")]
    UnknownNode { node: NodeId, context: String },
    #[error("unknown vehicle {vehicle} referenced by {context}")]
    UnknownVehicle { vehicle: VehicleId, context: String },
    #[error("unknown task {0}")]
    UnknownTask(TaskId),
    #[error("edge ({source_node}, {target}) has non-positive length {length}")]
    NonPositiveLength { source_node: NodeId, target: NodeId, length: f64 },
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(NodeId, NodeId),
    #[error("duplicate node {0}")]
    DuplicateNode(NodeId),
    #[error("duplicate vehicle {0}")]
    DuplicateVehicle(VehicleId),
    #[error("duplicate task {0}")]
    DuplicateTask(TaskId),
    #[error("vehicle {0} carries more than one task")]
    VehicleOverbooked(VehicleId),
    #[error("task {0} has origin equal to destination")]
    DegenerateTask(TaskId),
    #[error("scenario path ({0}, {1}) is not an edge of the network")]
    MissingScenarioEdge(NodeId, NodeId),
    #[error("scenario node sequence must contain at least two nodes")]
    ShortScenarioPath,
    #[error("no prompt template for scenario {kind} at level {level}")]
    UnknownCombination { kind: String, level: ExpertiseLevel },
}

impl EnvError {
    pub fn kind(&self) -> EnvErrorKind {
        match self {
            EnvError::UnknownNode { .. }
            | EnvError::UnknownVehicle { .. }
            | EnvError::UnknownTask(_)
            | EnvError::MissingScenarioEdge(..)
            | EnvError::UnknownCombination { .. } => EnvErrorKind::Reference,
            _ => EnvErrorKind::Value,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn n(id: u32) -> Node {
        Node { id: NodeId(id), kind: None }
    }

    fn e(s: u32, t: u32, len: f64) -> Edge {
        Edge { source: NodeId(s), target: NodeId(t), length: len }
    }

    fn one_task_config(o: u32, d: u32) -> FleetConfig {
        FleetConfig {
            agvs: vec![Agv { id: "AGV-1".into(), attributes: Attributes::new() }],
            tasks: vec![Task {
                id: "T1".into(),
                agv: "AGV-1".into(),
                origin: NodeId(o),
                destination: NodeId(d),
                attributes: Attributes::new(),
            }],
        }
    }

    fn reqs() -> Requirements {
        Requirements { expertise_level: ExpertiseLevel::Engineer, texts: vec![] }
    }

    #[test]
    fn minimal_environment_is_valid() {
        let net = Network::new(vec![n(0), n(1)], vec![e(0, 1, 5.0)]).unwrap();
        let env = TerminalEnv::new(net, one_task_config(0, 1), reqs()).unwrap();
        assert_eq!(env.config.tasks.len(), 1);
        assert_eq!(env.net.length(NodeId(0), NodeId(1)), Some(5.0));
    }

    #[test]
    fn edge_to_missing_node_names_it() {
        let err = Network::new(vec![n(0), n(1)], vec![e(0, 9, 1.0)]).unwrap_err();
        assert_eq!(err.kind(), EnvErrorKind::Reference);
        assert!(alloc::format!("{err}").contains("node 9"));
    }

    #[test]
    fn non_positive_and_duplicate_edges_rejected() {
        let err = Network::new(vec![n(0), n(1)], vec![e(0, 1, 0.0)]).unwrap_err();
        assert_eq!(err.kind(), EnvErrorKind::Value);
        let err = Network::new(vec![n(0), n(1)], vec![e(0, 1, f64::NAN)]).unwrap_err();
        assert!(matches!(err, EnvError::NonPositiveLength { .. }));
        let err = Network::new(vec![n(0), n(1)], vec![e(0, 1, 1.0), e(0, 1, 2.0)]).unwrap_err();
        assert_eq!(err, EnvError::DuplicateEdge(NodeId(0), NodeId(1)));
    }

    #[test]
    fn task_references_are_checked() {
        let net = Network::new(vec![n(0), n(1)], vec![e(0, 1, 5.0)]).unwrap();
        let err = TerminalEnv::new(net.clone(), one_task_config(0, 7), reqs()).unwrap_err();
        assert!(matches!(err, EnvError::UnknownNode { node: NodeId(7), .. }));

        let mut cfg = one_task_config(0, 1);
        cfg.tasks[0].agv = "AGV-2".into();
        let err = TerminalEnv::new(net.clone(), cfg, reqs()).unwrap_err();
        assert!(matches!(err, EnvError::UnknownVehicle { .. }));

        let err = TerminalEnv::new(net.clone(), one_task_config(1, 1), reqs()).unwrap_err();
        assert_eq!(err, EnvError::DegenerateTask("T1".into()));

        let mut cfg = one_task_config(0, 1);
        let mut second = cfg.tasks[0].clone();
        second.id = "T2".into();
        cfg.tasks.push(second);
        let err = TerminalEnv::new(net, cfg, reqs()).unwrap_err();
        assert_eq!(err, EnvError::VehicleOverbooked("AGV-1".into()));
    }

    #[test]
    fn digest_is_compact_and_stable() {
        let net = Network::new(vec![n(0), n(1)], vec![e(0, 1, 5.0)]).unwrap();
        let env = TerminalEnv::new(net, one_task_config(0, 1), reqs()).unwrap();
        assert_eq!(env.digest(), "nodes (2): 0 1\nedges (1): 0->1:5\nagvs (1): AGV-1\ntasks (1): T1@AGV-1 0->1;");
    }
}
