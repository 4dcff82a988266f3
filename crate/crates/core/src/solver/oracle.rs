use alloc::vec::Vec;

use super::{solve, PathRequirement, Solution, SolveError, SolveErrorKind, SolverInstance, VehicleProblem};
use crate::clock::Clock;
use crate::env::{Agv, EnvError, EnvErrorKind, Network, ScenarioSpec, Task, TerminalEnv};

/// The constrained problem a scenario imposes on one vehicle, built straight
/// from the structured scenario.
pub fn scenario_problem(net: &Network, spec: &ScenarioSpec, agv: &Agv, task: &Task) -> VehicleProblem {
    let mut edges = net.edge_map().clone();
    let mut requirement = None;
    match spec {
        ScenarioSpec::None => {}
        ScenarioSpec::RoadClosure { edge: (a, b) } => {
            edges.remove(&(*a, *b));
            edges.remove(&(*b, *a));
        }
        ScenarioSpec::ForbiddenEdgeVehicle { vehicle, edge: (a, b) } => {
            if *vehicle == agv.id {
                edges.remove(&(*a, *b));
                edges.remove(&(*b, *a));
            }
        }
        ScenarioSpec::DesignatedRoute { task: t, nodes } => {
            if *t == task.id {
                requirement = Some(PathRequirement::Subpath(nodes.clone()));
            }
        }
    }
    VehicleProblem {
        vehicle: agv.id.clone(),
        task: task.id.clone(),
        origin: task.origin,
        destination: task.destination,
        edges,
        requirement,
    }
}

fn invalid(err: EnvError) -> SolveError {
    let kind = match err {
        EnvError::UnknownNode { .. } | EnvError::MissingScenarioEdge(..) => SolveErrorKind::BindUnknownNode,
        EnvError::UnknownVehicle { .. } | EnvError::UnknownTask(_) => SolveErrorKind::BindUnknownVehicle,
        ref e if e.kind() == EnvErrorKind::Reference => SolveErrorKind::BindUnknownNode,
        _ => SolveErrorKind::BindConflict,
    };
    SolveError::new(kind, alloc::format!("{err}"))
}

/// Ground-truth instance for `spec`, independent of any DSL program.
pub fn oracle_instance(env: &TerminalEnv, spec: &ScenarioSpec) -> Result<SolverInstance, SolveError> {
    spec.validate(env).map_err(invalid)?;
    let vehicles: Vec<_> = env
        .config
        .agvs
        .iter()
        .filter_map(|agv| env.config.task_of(&agv.id).map(|task| (agv, task)))
        .map(|(agv, task)| scenario_problem(&env.net, spec, agv, task))
        .collect();
    Ok(SolverInstance { vehicles })
}

/// Solves the structured scenario directly, bypassing the DSL.
pub fn oracle_solve(
    env: &TerminalEnv,
    spec: &ScenarioSpec,
    time_limit_secs: f64,
    clock: &dyn Clock,
) -> Result<Solution, SolveError> {
    solve(&oracle_instance(env, spec)?, time_limit_secs, clock)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;
    use crate::env::{generate_instances, ExpertiseLevel, NodeId, ScenarioKind};
    use crate::solver::bind;
    use crate::FrozenClock;

    fn env_of(kind: ScenarioKind) -> (TerminalEnv, ScenarioSpec) {
        let inst = &generate_instances(11, kind, 1).unwrap()[0];
        (inst.env(ExpertiseLevel::Scientist).unwrap(), inst.spec.clone())
    }

    #[test]
    fn empty_scenario_matches_bare_program() {
        let (env, _) = env_of(ScenarioKind::RoadClosure);
        let oracle = oracle_solve(&env, &ScenarioSpec::None, 300.0, &FrozenClock).unwrap();
        let ast = parse("model m objective minimize total_travel_time constraints { flow_balance all }").unwrap();
        let agent = solve(&bind(&ast, &env).unwrap(), 300.0, &FrozenClock).unwrap();
        assert_eq!(oracle.objective, agent.objective);
        assert_eq!(oracle, agent);
    }

    #[test]
    fn forbidden_edge_is_scoped_to_its_vehicle() {
        let (env, spec) = env_of(ScenarioKind::ForbiddenEdgeVehicle);
        let base = oracle_solve(&env, &ScenarioSpec::None, 300.0, &FrozenClock).unwrap();
        let constrained = oracle_solve(&env, &spec, 300.0, &FrozenClock).unwrap();
        for (a, b) in base.plans.iter().zip(&constrained.plans) {
            if a.vehicle.as_str() != "AGV-4" {
                assert_eq!(a.cost.to_bits(), b.cost.to_bits());
            }
        }
        let agv4 = constrained.plan("AGV-4").unwrap();
        assert!(!agv4
            .path
            .windows(2)
            .any(|w| (w[0], w[1]) == (NodeId(5), NodeId(6)) || (w[0], w[1]) == (NodeId(6), NodeId(5))));
    }

    #[test]
    fn designated_route_cost() {
        let (mut env, spec) = env_of(ScenarioKind::DesignatedRoute);
        let t3 = env.config.tasks.iter_mut().find(|t| t.id.as_str() == "T3").unwrap();
        t3.origin = NodeId(0);
        t3.destination = NodeId(14);
        let sol = oracle_solve(&env, &spec, 300.0, &FrozenClock).unwrap();
        assert_eq!(sol.plan("AGV-3").unwrap().cost, 74.0);
    }

    #[test]
    fn invalid_spec_is_a_bind_error() {
        let (env, _) = env_of(ScenarioKind::RoadClosure);
        let spec = ScenarioSpec::RoadClosure { edge: (NodeId(6), NodeId(99)) };
        let err = oracle_solve(&env, &spec, 300.0, &FrozenClock).unwrap_err();
        assert_eq!(err.kind, SolveErrorKind::BindUnknownNode);
    }
}
