use alloc::format;
use alloc::vec::Vec;

use super::{PathRequirement, SolveError, SolveErrorKind, SolverInstance, VehicleProblem};
use crate::dsl::{ModelAst, Statement, VehicleRef};
use crate::env::{NodeId, TerminalEnv, VehicleId};

fn problems_for(env: &TerminalEnv) -> Vec<VehicleProblem> {
    env.config
        .agvs
        .iter()
        .filter_map(|agv| env.config.task_of(&agv.id))
        .map(|task| VehicleProblem {
            vehicle: task.agv.clone(),
            task: task.id.clone(),
            origin: task.origin,
            destination: task.destination,
            edges: env.net.edge_map().clone(),
            requirement: None,
        })
        .collect()
}

fn check_nodes(env: &TerminalEnv, nodes: &[NodeId], stmt: &str) -> Result<(), SolveError> {
    match nodes.iter().find(|&&n| !env.net.has_node(n)) {
        Some(n) => Err(SolveError::new(
            SolveErrorKind::BindUnknownNode,
            format!("{stmt} references node {n}, which is not in the network"),
        )),
        None => Ok(()),
    }
}

fn resolve(env: &TerminalEnv, subject: &VehicleRef) -> Result<VehicleId, SolveError> {
    match subject {
        VehicleRef::Vehicle(id) => env
            .config
            .agvs
            .iter()
            .find(|a| a.id.as_str() == id)
            .map(|a| a.id.clone())
            .ok_or_else(|| SolveError::new(SolveErrorKind::BindUnknownVehicle, format!("unknown vehicle \"{id}\""))),
        VehicleRef::Task(id) => env
            .config
            .tasks
            .iter()
            .find(|t| t.id.as_str() == id)
            .map(|t| t.agv.clone())
            .ok_or_else(|| SolveError::new(SolveErrorKind::BindUnknownVehicle, format!("unknown task \"{id}\""))),
    }
}

/// Binds a statically checked program to an environment.
///
/// Task subjects resolve to their pre-assigned vehicle. `remove_edge`
/// applies to every vehicle, `forbid_edge` to its subject only. Removing an
/// edge the network does not have is a no-op.
pub fn bind(ast: &ModelAst, env: &TerminalEnv) -> Result<SolverInstance, SolveError> {
    let mut vehicles = problems_for(env);
    for stmt in &ast.statements {
        match stmt {
            Statement::FlowBalanceAll => {}
            Statement::RemoveEdge { from, to } => {
                check_nodes(env, &[*from, *to], "remove_edge")?;
                for v in &mut vehicles {
                    v.edges.remove(&(*from, *to));
                }
            }
            Statement::ForbidEdge { subject, from, to } => {
                let vehicle = resolve(env, subject)?;
                check_nodes(env, &[*from, *to], "forbid_edge")?;
                if let Some(v) = vehicles.iter_mut().find(|v| v.vehicle == vehicle) {
                    v.edges.remove(&(*from, *to));
                }
            }
            Statement::RequireSubpath { subject, nodes } | Statement::RequireExactPath { subject, nodes } => {
                let exact = matches!(stmt, Statement::RequireExactPath { .. });
                let keyword = if exact { "require_exact_path" } else { "require_subpath" };
                let vehicle = resolve(env, subject)?;
                check_nodes(env, nodes, keyword)?;
                let v = vehicles.iter_mut().find(|v| v.vehicle == vehicle).ok_or_else(|| {
                    SolveError::new(SolveErrorKind::BindConflict, format!("{keyword} for {vehicle}, which has no task"))
                })?;
                if v.requirement.is_some() {
                    return Err(SolveError::new(
                        SolveErrorKind::BindConflict,
                        format!("more than one path requirement resolves to {vehicle}"),
                    ));
                }
                if exact {
                    let first = nodes[0];
                    let last = nodes[nodes.len() - 1];
                    if first != v.origin || last != v.destination {
                        return Err(SolveError::new(
                            SolveErrorKind::BindConflict,
                            format!(
                                "exact path for {vehicle} runs {first} -> {last} but its task runs {} -> {}",
                                v.origin, v.destination
                            ),
                        ));
                    }
                    v.requirement = Some(PathRequirement::Exact(nodes.clone()));
                } else {
                    v.requirement = Some(PathRequirement::Subpath(nodes.clone()));
                }
            }
        }
    }
    Ok(SolverInstance { vehicles })
}
