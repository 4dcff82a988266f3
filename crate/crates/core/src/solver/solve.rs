use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use super::path::path_cost;
use super::{
    shortest_path, shortest_paths_lex, PathRequirement, Solution, SolveError, SolveErrorKind, SolverInstance,
    VehiclePlan, VehicleProblem,
};
use crate::clock::Clock;
use crate::env::NodeId;

/// Cap on shortest-path alternatives examined per segment when the first
/// concatenation reuses an edge.
const ALTERNATIVE_LIMIT: usize = 512;

fn reused_edge(path: &[NodeId]) -> Option<(NodeId, NodeId)> {
    let mut seen = BTreeSet::new();
    path.windows(2).map(|w| (w[0], w[1])).find(|&e| !seen.insert(e))
}

fn join(prefix: &[NodeId], forced: &[NodeId], suffix: &[NodeId]) -> Vec<NodeId> {
    let mut out = Vec::with_capacity(prefix.len() + forced.len() + suffix.len());
    out.extend_from_slice(prefix);
    out.extend_from_slice(&forced[1..]);
    out.extend_from_slice(&suffix[1..]);
    out
}

fn plan(problem: &VehicleProblem, path: Vec<NodeId>) -> VehiclePlan {
    let cost = path_cost(&problem.edges, &path).expect("plan follows available edges");
    VehiclePlan { vehicle: problem.vehicle.clone(), task: problem.task.clone(), path, cost }
}

fn check_forced(problem: &VehicleProblem, nodes: &[NodeId]) -> Result<(), SolveError> {
    for w in nodes.windows(2) {
        if !problem.edges.contains_key(&(w[0], w[1])) {
            return Err(SolveError::new(
                SolveErrorKind::Infeasible,
                format!("required edge ({}, {}) is not available to {}", w[0], w[1], problem.vehicle),
            ));
        }
    }
    Ok(())
}

fn segment(problem: &VehicleProblem, s: NodeId, t: NodeId) -> Result<(f64, Vec<NodeId>), SolveError> {
    shortest_path(&problem.edges, s, t)
        .map_err(|e| SolveError::new(e.kind, format!("{} ({}): {}", problem.vehicle, problem.task, e.detail)))
}

fn solve_subpath(problem: &VehicleProblem, forced: &[NodeId]) -> Result<VehiclePlan, SolveError> {
    check_forced(problem, forced)?;
    let first = forced[0];
    let last = *forced.last().expect("subpath has at least two nodes");
    let (_, prefix) = segment(problem, problem.origin, first)?;
    let (_, suffix) = segment(problem, last, problem.destination)?;
    let path = join(&prefix, forced, &suffix);
    let Some(edge) = reused_edge(&path) else {
        return Ok(plan(problem, path));
    };

    // Any other pair of shortest segments reaches the same lower bound;
    // take the lexicographically first one that stays edge-simple.
    let (prefixes, _) = shortest_paths_lex(&problem.edges, problem.origin, first, ALTERNATIVE_LIMIT)?;
    let (suffixes, _) = shortest_paths_lex(&problem.edges, last, problem.destination, ALTERNATIVE_LIMIT)?;
    for p in &prefixes {
        for s in &suffixes {
            let candidate = join(p, forced, s);
            if reused_edge(&candidate).is_none() {
                return Ok(plan(problem, candidate));
            }
        }
    }
    Err(SolveError::new(
        SolveErrorKind::DegenerateEdgeReuse,
        format!(
            "{} ({}): every cheapest route through the required subpath traverses edge ({}, {}) twice",
            problem.vehicle, problem.task, edge.0, edge.1
        ),
    ))
}

fn solve_exact(problem: &VehicleProblem, nodes: &[NodeId]) -> Result<VehiclePlan, SolveError> {
    if nodes.first() != Some(&problem.origin) || nodes.last() != Some(&problem.destination) {
        return Err(SolveError::new(
            SolveErrorKind::BindConflict,
            format!("exact path for {} must run from {} to {}", problem.vehicle, problem.origin, problem.destination),
        ));
    }
    check_forced(problem, nodes)?;
    if let Some((a, b)) = reused_edge(nodes) {
        return Err(SolveError::new(
            SolveErrorKind::DegenerateEdgeReuse,
            format!("exact path for {} traverses edge ({a}, {b}) twice", problem.vehicle),
        ));
    }
    Ok(plan(problem, nodes.to_vec()))
}

/// Optimal plan for a single vehicle.
pub fn solve_vehicle(problem: &VehicleProblem) -> Result<VehiclePlan, SolveError> {
    match &problem.requirement {
        None => {
            let (_, path) = segment(problem, problem.origin, problem.destination)?;
            Ok(plan(problem, path))
        }
        Some(PathRequirement::Subpath(nodes)) => solve_subpath(problem, nodes),
        Some(PathRequirement::Exact(nodes)) => solve_exact(problem, nodes),
    }
}

/// Solves every vehicle in fleet order; the first failing vehicle aborts
/// the solve. Exceeding `time_limit_secs` of `clock` time is a timeout.
pub fn solve(instance: &SolverInstance, time_limit_secs: f64, clock: &dyn Clock) -> Result<Solution, SolveError> {
    let start = clock.now_secs();
    let mut plans = Vec::with_capacity(instance.vehicles.len());
    for problem in &instance.vehicles {
        plans.push(solve_vehicle(problem)?);
        let elapsed = clock.now_secs() - start;
        if elapsed > time_limit_secs {
            return Err(SolveError::new(
                SolveErrorKind::Timeout,
                format!("solve exceeded the {time_limit_secs} s limit after {elapsed:.3} s"),
            ));
        }
    }
    Ok(Solution::from_plans(plans))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{default_network, NodeId};
    use crate::solver::EdgeSet;
    use core::cell::Cell;

    fn ids(v: &[u32]) -> Vec<NodeId> {
        v.iter().copied().map(NodeId).collect()
    }

    fn undirected(pairs: &[(u32, u32, f64)]) -> EdgeSet {
        let mut e = EdgeSet::new();
        for &(a, b, l) in pairs {
            e.insert((NodeId(a), NodeId(b)), l);
            e.insert((NodeId(b), NodeId(a)), l);
        }
        e
    }

    fn problem(edges: EdgeSet, o: u32, d: u32, req: Option<PathRequirement>) -> VehicleProblem {
        VehicleProblem {
            vehicle: "AGV-1".into(),
            task: "T1".into(),
            origin: NodeId(o),
            destination: NodeId(d),
            edges,
            requirement: req,
        }
    }

    #[test]
    fn four_cycle_subpath_revisits_node() {
        // Edge-simple enumeration over paths 0 -> 2 containing 3 -> 0:
        // [0,3,0,1,2] = 4 and [0,1,2,3,0,3,2] = 6.
        let edges = undirected(&[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]);
        let p = problem(edges, 0, 2, Some(PathRequirement::Subpath(ids(&[3, 0]))));
        let plan = solve_vehicle(&p).unwrap();
        assert_eq!(plan.cost, 4.0);
        assert_eq!(plan.path, ids(&[0, 3, 0, 1, 2]));
    }

    #[test]
    fn closure_detour_on_default_network() {
        let mut edges = default_network().edge_map().clone();
        edges.remove(&(NodeId(6), NodeId(7)));
        edges.remove(&(NodeId(7), NodeId(6)));
        let plan = solve_vehicle(&problem(edges, 6, 7, None)).unwrap();
        assert_eq!(plan.cost, 30.0);
        assert_eq!(plan.path, ids(&[6, 1, 2, 7]));
    }

    #[test]
    fn designated_route_segments() {
        let edges = default_network().edge_map().clone();
        let req = PathRequirement::Subpath(ids(&[6, 10, 11]));
        let plan = solve_vehicle(&problem(edges, 0, 14, Some(req))).unwrap();
        // SP(0->6) 20 + 14 + 10 + SP(11->14) 30.
        assert_eq!(plan.cost, 74.0);
        assert_eq!(&plan.path[..3], &ids(&[0, 1, 6])[..]);
        assert_eq!(plan.path.last(), Some(&NodeId(14)));
    }

    #[test]
    fn alternative_segments_avoid_reuse() {
        // Square 0-1-2-3 plus chord 0-2. Origin 3, subpath [0,1,2,3],
        // destination 1. The lexicographic suffix [3,0,1] reuses (3,0); the
        // tied suffix [3,2,1] does not, so the bound of 6 is still reached.
        let edges = undirected(&[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0), (0, 2, 2.0)]);
        let p = problem(edges, 3, 1, Some(PathRequirement::Subpath(ids(&[0, 1, 2, 3]))));
        let plan = solve_vehicle(&p).unwrap();
        assert_eq!(plan.path, ids(&[3, 0, 1, 2, 3, 2, 1]));
        assert_eq!(plan.cost, 6.0);
    }

    #[test]
    fn degenerate_when_bound_unattainable() {
        // Directed cycle 0->1->2->0. Origin 0, subpath [2,0], destination 1:
        // prefix [0,1,2] and suffix [0,1] both need (0,1).
        let mut edges = EdgeSet::new();
        for (a, b) in [(0, 1), (1, 2), (2, 0)] {
            edges.insert((NodeId(a), NodeId(b)), 1.0);
        }
        let p = problem(edges, 0, 1, Some(PathRequirement::Subpath(ids(&[2, 0]))));
        let err = solve_vehicle(&p).unwrap_err();
        assert_eq!(err.kind, SolveErrorKind::DegenerateEdgeReuse);
    }

    #[test]
    fn exact_path_checks() {
        let edges = undirected(&[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 3.0)]);
        let ok = problem(edges.clone(), 0, 2, Some(PathRequirement::Exact(ids(&[0, 2]))));
        assert_eq!(solve_vehicle(&ok).unwrap().cost, 3.0);
        let wrong_end = problem(edges.clone(), 0, 2, Some(PathRequirement::Exact(ids(&[0, 1]))));
        assert_eq!(solve_vehicle(&wrong_end).unwrap_err().kind, SolveErrorKind::BindConflict);
        let mut cut = edges.clone();
        cut.remove(&(NodeId(0), NodeId(2)));
        let missing = problem(cut, 0, 2, Some(PathRequirement::Exact(ids(&[0, 2]))));
        assert_eq!(solve_vehicle(&missing).unwrap_err().kind, SolveErrorKind::Infeasible);
        let loops = problem(edges, 0, 2, Some(PathRequirement::Exact(ids(&[0, 1, 0, 1, 2]))));
        assert_eq!(solve_vehicle(&loops).unwrap_err().kind, SolveErrorKind::DegenerateEdgeReuse);
    }

    #[test]
    fn forced_edge_missing_is_infeasible() {
        let edges = undirected(&[(0, 1, 1.0), (1, 2, 1.0)]);
        let p = problem(edges, 0, 2, Some(PathRequirement::Subpath(ids(&[0, 2]))));
        assert_eq!(solve_vehicle(&p).unwrap_err().kind, SolveErrorKind::Infeasible);
    }

    struct Ticking(Cell<f64>);

    impl Clock for Ticking {
        fn now_secs(&self) -> f64 {
            let t = self.0.get();
            self.0.set(t + 1.0);
            t
        }
    }

    #[test]
    fn timeout_and_objective() {
        let edges = undirected(&[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 3.0)]);
        let mut forbidden = edges.clone();
        forbidden.remove(&(NodeId(0), NodeId(1)));
        let mut second = problem(edges, 0, 2, None);
        second.vehicle = "AGV-2".into();
        let instance = SolverInstance { vehicles: alloc::vec![problem(forbidden, 0, 2, None), second] };
        let sol = solve(&instance, 300.0, &crate::FrozenClock).unwrap();
        assert_eq!(sol.plans[0].cost, 3.0);
        assert_eq!(sol.plans[1].cost, 2.0);
        assert_eq!(sol.objective, 5.0);

        let err = solve(&instance, 0.5, &Ticking(Cell::new(0.0))).unwrap_err();
        assert_eq!(err.kind, SolveErrorKind::Timeout);
    }
}
