//! Random small instances driven through the DSL and bind, together with
//! the edge sets and requirements each vehicle should end up with.

use std::collections::BTreeSet;

use portagent_core::dsl::{ModelAst, Objective, Statement, VehicleRef};
use portagent_core::env::{Agv, Edge, ExpertiseLevel, FleetConfig, Network, Node, Requirements, Task};
use portagent_core::solver::{self, EdgeSet, PathRequirement, SolveErrorKind};
use portagent_core::{NodeId, TerminalEnv};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::brute::{brute_force, brute_force_capped, flow_balanced};

pub struct ExpectedVehicle {
    pub vehicle: String,
    pub origin: NodeId,
    pub destination: NodeId,
    pub edges: EdgeSet,
    pub requirement: Option<PathRequirement>,
}

pub struct Case {
    pub env: TerminalEnv,
    pub ast: ModelAst,
    pub expected: Vec<ExpectedVehicle>,
}

fn random_walk(rng: &mut ChaCha8Rng, edges: &[(NodeId, NodeId)], start: NodeId, len: usize, n: u32) -> Vec<NodeId> {
    let mut walk = vec![start];
    while walk.len() < len {
        let u = *walk.last().unwrap();
        let succ: Vec<NodeId> = edges.iter().filter(|e| e.0 == u).map(|e| e.1).collect();
        let v = match succ.choose(rng) {
            Some(&v) if rng.gen_bool(0.95) => v,
            _ => NodeId(rng.gen_range(0..n)),
        };
        walk.push(v);
    }
    walk
}

/// Fewest-hop route, or `None` when unreachable.
fn bfs(edges: &[(NodeId, NodeId)], s: NodeId, t: NodeId) -> Option<Vec<NodeId>> {
    let mut prev = std::collections::BTreeMap::new();
    let mut queue = std::collections::VecDeque::from([s]);
    let mut seen = BTreeSet::from([s]);
    while let Some(u) = queue.pop_front() {
        if u == t {
            let mut path = vec![t];
            while let Some(&p) = prev.get(path.last().unwrap()) {
                path.push(p);
            }
            path.reverse();
            return Some(path);
        }
        for &(a, b) in edges {
            if a == u && seen.insert(b) {
                prev.insert(b, u);
                queue.push_back(b);
            }
        }
    }
    None
}

/// Graphs of 2 to 8 nodes with integer lengths, so every sum is exact.
pub fn random_case(seed: u64) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n: u32 = rng.gen_range(2..=8);
    let density = rng.gen_range(0.25..0.65);
    let mut raw = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.gen_bool(density) {
                raw.push(Edge { source: NodeId(u), target: NodeId(v), length: f64::from(rng.gen_range(1u32..=20)) });
            }
        }
    }
    let pairs: Vec<(NodeId, NodeId)> = raw.iter().map(|e| (e.source, e.target)).collect();
    let nodes = (0..n).map(|id| Node { id: NodeId(id), kind: None }).collect();
    let net = Network::new(nodes, raw.clone()).expect("valid random network");

    let fleet = rng.gen_range(1..=3usize);
    let mut agvs = Vec::new();
    let mut tasks = Vec::new();
    for k in 1..=fleet {
        let origin = NodeId(rng.gen_range(0..n));
        let mut destination = NodeId(rng.gen_range(0..n));
        while destination == origin {
            destination = NodeId(rng.gen_range(0..n));
        }
        agvs.push(Agv { id: format!("AGV-{k}").as_str().into(), attributes: Default::default() });
        tasks.push(Task {
            id: format!("T{k}").as_str().into(),
            agv: format!("AGV-{k}").as_str().into(),
            origin,
            destination,
            attributes: Default::default(),
        });
    }

    let base: EdgeSet = raw.iter().map(|e| ((e.source, e.target), e.length)).collect();
    let mut expected: Vec<ExpectedVehicle> = tasks
        .iter()
        .map(|t| ExpectedVehicle {
            vehicle: t.agv.0.clone(),
            origin: t.origin,
            destination: t.destination,
            edges: base.clone(),
            requirement: None,
        })
        .collect();

    let mut statements = vec![Statement::FlowBalanceAll];
    let mut removed = BTreeSet::new();
    let pick_edge = |rng: &mut ChaCha8Rng| -> (NodeId, NodeId) {
        match pairs.choose(rng) {
            Some(&e) if rng.gen_bool(0.8) => e,
            _ => (NodeId(rng.gen_range(0..n)), NodeId(rng.gen_range(0..n))),
        }
    };
    for _ in 0..rng.gen_range(0..=5) {
        let k = rng.gen_range(0..fleet);
        let subject = if rng.gen_bool(0.5) {
            VehicleRef::Vehicle(format!("AGV-{}", k + 1))
        } else {
            VehicleRef::Task(format!("T{}", k + 1))
        };
        match rng.gen_range(0..4) {
            0 => {
                let (from, to) = pick_edge(&mut rng);
                if removed.insert((from, to)) {
                    for e in &mut expected {
                        e.edges.remove(&(from, to));
                    }
                    statements.push(Statement::RemoveEdge { from, to });
                }
            }
            1 => {
                let (from, to) = pick_edge(&mut rng);
                expected[k].edges.remove(&(from, to));
                statements.push(Statement::ForbidEdge { subject, from, to });
            }
            2 if expected[k].requirement.is_none() => {
                let start = NodeId(rng.gen_range(0..n));
                let len = rng.gen_range(2..=4);
                let nodes = random_walk(&mut rng, &pairs, start, len, n);
                expected[k].requirement = Some(PathRequirement::Subpath(nodes.clone()));
                statements.push(Statement::RequireSubpath { subject, nodes });
            }
            3 if expected[k].requirement.is_none() => {
                let len = rng.gen_range(1..=4);
                let mut nodes = random_walk(&mut rng, &pairs, expected[k].origin, len, n);
                let tail = bfs(&pairs, *nodes.last().unwrap(), expected[k].destination);
                match tail {
                    Some(tail) if rng.gen_bool(0.9) => nodes.extend_from_slice(&tail[1..]),
                    _ => nodes.push(expected[k].destination),
                }
                if nodes.len() < 2 {
                    nodes.push(expected[k].destination);
                }
                expected[k].requirement = Some(PathRequirement::Exact(nodes.clone()));
                statements.push(Statement::RequireExactPath { subject, nodes });
            }
            _ => {}
        }
    }
    let reqs = Requirements { expertise_level: ExpertiseLevel::Scientist, texts: vec![] };
    let env = TerminalEnv::new(net, FleetConfig { agvs, tasks }, reqs).expect("valid random env");
    Case {
        env,
        ast: ModelAst { name: "random".into(), objective: Objective::MinimizeTotalTravelTime, statements },
        expected,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Verdict {
    /// Solver and brute force agree on an optimal cost.
    Optimal,
    /// Both report that no valid walk exists.
    Infeasible,
    /// Solver refused with edge reuse and the true optimum, if any, lies
    /// strictly above the segment lower bound.
    DegenerateAboveBound,
}

/// Binds and solves the case vehicle by vehicle and checks each against
/// brute force. Returns one verdict per vehicle or a description of the
/// first disagreement.
pub fn check_case(case: &Case) -> Result<Vec<Verdict>, String> {
    let instance = solver::bind(&case.ast, &case.env).map_err(|e| format!("bind failed: {e}"))?;
    if instance.vehicles.len() != case.expected.len() {
        return Err("vehicle count differs".into());
    }
    let mut verdicts = Vec::new();
    for exp in &case.expected {
        let problem = instance.vehicle(&exp.vehicle).ok_or("vehicle missing from instance")?;
        if problem.edges != exp.edges || problem.requirement != exp.requirement {
            return Err(format!("{}: bound problem differs from the statements", exp.vehicle));
        }
        let search = |cap| brute_force_capped(&exp.edges, exp.origin, exp.destination, exp.requirement.as_ref(), cap);
        let solved = solver::solve_vehicle(problem);
        // A cap never hides a cheaper walk, it only skips dearer ones.
        let truth = match &solved {
            Ok(plan) => search(plan.cost),
            Err(e) if e.kind == SolveErrorKind::DegenerateEdgeReuse => None,
            Err(_) => search(f64::INFINITY),
        };
        let verdict = match (solved, truth) {
            (Ok(plan), Some((cost, _))) => {
                if plan.cost != cost {
                    return Err(format!("{}: solver cost {} but brute force {}", exp.vehicle, plan.cost, cost));
                }
                let p = &plan.path;
                let sum: Option<f64> =
                    p.windows(2).try_fold(0.0, |acc, w| exp.edges.get(&(w[0], w[1])).map(|l| acc + l));
                let distinct: BTreeSet<_> = p.windows(2).map(|w| (w[0], w[1])).collect();
                if sum != Some(plan.cost)
                    || distinct.len() + 1 != p.len()
                    || !flow_balanced(p, exp.origin, exp.destination)
                {
                    return Err(format!("{}: returned path {:?} is not a valid edge-simple walk", exp.vehicle, p));
                }
                if let Some(PathRequirement::Subpath(run)) = &exp.requirement {
                    if !p.windows(run.len()).any(|w| w == run.as_slice()) {
                        return Err(format!("{}: path misses the required subpath", exp.vehicle));
                    }
                }
                Verdict::Optimal
            }
            (Err(e), None) if e.kind == SolveErrorKind::Infeasible => Verdict::Infeasible,
            (Err(e), _) if e.kind == SolveErrorKind::DegenerateEdgeReuse => {
                let bound = match &exp.requirement {
                    Some(PathRequirement::Subpath(run)) => {
                        let head = brute_force(&exp.edges, exp.origin, run[0], None).map(|r| r.0);
                        let tail = brute_force(&exp.edges, *run.last().unwrap(), exp.destination, None).map(|r| r.0);
                        let forced: f64 = run.windows(2).map(|w| exp.edges[&(w[0], w[1])]).sum();
                        head.zip(tail).map(|(h, t)| h + forced + t)
                    }
                    _ => None,
                };
                // Exact paths are refused only when they repeat an edge,
                // which no valid walk can do.
                let cap = bound.unwrap_or(f64::INFINITY);
                if let Some((c, p)) = search(cap) {
                    return Err(format!(
                        "{}: degenerate refusal but {:?} costs {} <= bound {:?}",
                        exp.vehicle, p, c, bound
                    ));
                }
                Verdict::DegenerateAboveBound
            }
            (got, truth) => {
                return Err(format!(
                    "{}: solver returned {:?}, brute force {:?}",
                    exp.vehicle,
                    got.map(|p| p.cost),
                    truth
                ))
            }
        };
        verdicts.push(verdict);
    }
    Ok(verdicts)
}
