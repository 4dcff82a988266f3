use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{
    default_network, scenario_prompt, Agv, Attributes, EnvError, ExpertiseLevel, FleetConfig, Network, NodeId,
    Requirements, ScenarioKind, ScenarioSpec, Task, TerminalEnv, VehicleId,
};
use crate::solver::{self, SolveError};

pub const FLEET_SIZE: usize = 30;
const MAX_RESAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenerationError {
    #[error("count must be at least 1")]
    ZeroCount,
    #[error("no feasible OD pair for {vehicle} after {attempts} samples: {last}")]
    Infeasible { vehicle: VehicleId, attempts: usize, last: SolveError },
}

/// A generated benchmark instance before an expertise level is chosen.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseInstance {
    pub kind: ScenarioKind,
    /// 1-based position within its scenario.
    pub index: usize,
    pub net: Network,
    pub config: FleetConfig,
    pub spec: ScenarioSpec,
}

impl BaseInstance {
    pub fn id(&self, level: ExpertiseLevel) -> String {
        format!("{}-{}-{}", self.kind, self.index, level)
    }

    /// The full environment with the scenario prompt for `level` as its
    /// single requirement.
    pub fn env(&self, level: ExpertiseLevel) -> Result<TerminalEnv, EnvError> {
        let text = scenario_prompt(&self.spec, level)?;
        TerminalEnv::new(
            self.net.clone(),
            self.config.clone(),
            Requirements { expertise_level: level, texts: alloc::vec![String::from(text)] },
        )
    }
}

fn stream_of(kind: ScenarioKind) -> u64 {
    match kind {
        ScenarioKind::RoadClosure => 1,
        ScenarioKind::ForbiddenEdgeVehicle => 2,
        ScenarioKind::DesignatedRoute => 3,
    }
}

/// Generates `count` instances of `kind` on the default network.
///
/// Each instance has `FLEET_SIZE` AGVs, `T<k>` bound to `AGV-<k>`, and OD
/// pairs sampled uniformly over ordered node pairs with distinct endpoints.
/// A pair is resampled while the vehicle's constrained problem has no
/// solution. The result is a pure function of the arguments.
pub fn generate_instances(seed: u64, kind: ScenarioKind, count: usize) -> Result<Vec<BaseInstance>, GenerationError> {
    if count == 0 {
        return Err(GenerationError::ZeroCount);
    }
    let net = default_network();
    let spec = kind.benchmark_spec();
    let node_count = net.nodes().len() as u32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_of(kind));

    let mut out = Vec::with_capacity(count);
    for index in 1..=count {
        let mut agvs = Vec::with_capacity(FLEET_SIZE);
        let mut tasks = Vec::with_capacity(FLEET_SIZE);
        for k in 1..=FLEET_SIZE {
            let vehicle = VehicleId(format!("AGV-{k}"));
            let task_id = format!("T{k}");
            let mut agv_attrs = Attributes::new();
            let mut task_attrs = Attributes::new();
            match &spec {
                ScenarioSpec::ForbiddenEdgeVehicle { vehicle: v, .. } if *v == vehicle => {
                    agv_attrs.insert("over_height".into(), "true".into());
                }
                ScenarioSpec::DesignatedRoute { task, .. } if task.as_str() == task_id => {
                    task_attrs.insert("dangerous_goods".into(), "true".into());
                }
                _ => {}
            }
            let agv = Agv { id: vehicle.clone(), attributes: agv_attrs };
            let mut last = None;
            let mut chosen = None;
            for _ in 0..MAX_RESAMPLES {
                let origin = rng.gen_range(0..node_count);
                let mut destination = rng.gen_range(0..node_count - 1);
                if destination >= origin {
                    destination += 1;
                }
                let task = Task {
                    id: task_id.as_str().into(),
                    agv: vehicle.clone(),
                    origin: NodeId(origin),
                    destination: NodeId(destination),
                    attributes: task_attrs.clone(),
                };
                let problem = solver::scenario_problem(&net, &spec, &agv, &task);
                match solver::solve_vehicle(&problem) {
                    Ok(_) => {
                        chosen = Some(task);
                        break;
                    }
                    Err(e) => last = Some(e),
                }
            }
            match chosen {
                Some(task) => tasks.push(task),
                None => {
                    return Err(GenerationError::Infeasible {
                        vehicle,
                        attempts: MAX_RESAMPLES,
                        last: last.expect("at least one sample was drawn"),
                    })
                }
            }
            agvs.push(agv);
        }
        out.push(BaseInstance {
            kind,
            index,
            net: net.clone(),
            config: FleetConfig { agvs, tasks },
            spec: spec.clone(),
        });
    }
    Ok(out)
}
