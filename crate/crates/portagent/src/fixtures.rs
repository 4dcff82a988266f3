//! Generators for the shipped mock scripts.
//!
//! The fault-injection suite depends on the generated instances (which
//! closure instances a one-way closure actually hurts, and the OD pair of
//! the route-bound task), so it is computed from the suite plan rather than
//! written by hand.

use portagent_core::bench::{plan_suite, PlannedInstance, SuiteConfig};
use portagent_core::dsl;
use portagent_core::env::{ExpertiseLevel, NodeId, ScenarioKind, ScenarioSpec};
use portagent_core::llm::{MockScript, ScriptEntry};
use portagent_core::solver::{self, oracle_solve};
use portagent_core::{FrozenClock, TerminalEnv};

use crate::mock::SuiteScript;

pub const CLOSURE_PROGRAM: &str = "model road_closure\nobjective minimize total_travel_time\nconstraints {\n  flow_balance all\n  remove_edge (6, 7)\n  remove_edge (7, 6)\n}\n";
pub const FORBIDDEN_PROGRAM: &str = "model over_height_vehicle\nobjective minimize total_travel_time\nconstraints {\n  flow_balance all\n  forbid_edge vehicle \"AGV-4\" (5, 6)\n  forbid_edge vehicle \"AGV-4\" (6, 5)\n}\n";
pub const ROUTE_PROGRAM: &str = "model dangerous_goods_route\nobjective minimize total_travel_time\nconstraints {\n  flow_balance all\n  require_subpath task \"T3\" [6, 10, 11]\n}\n";
const ONE_WAY_PROGRAM: &str = "model road_closure\nobjective minimize total_travel_time\nconstraints {\n  flow_balance all\n  remove_edge (6, 7)\n}\n";
/// Missing closing brace.
pub const BROKEN_CLOSURE: &str = "model road_closure\nobjective minimize total_travel_time\nconstraints {\n  flow_balance all\n  remove_edge (6, 7)\n  remove_edge (7, 6)\n";
const BROKEN_FORBIDDEN: &str = "model over_height_vehicle\nobjective minimize total_travel_time\nconstraints {\n  flow_balance all\n  forbid_edge \"AGV-4\" (5, 6)\n  forbid_edge \"AGV-4\" (6, 5)\n}\n";
/// Subject keyword left out, as a coder without the primitives might.
const UNGROUNDED_ROUTE: &str = "model dangerous_goods_route\nobjective minimize total_travel_time\nconstraints {\n  flow_balance all\n  require_subpath \"T3\" [6, 10, 11]\n}\n";

/// Text present in prompts only when retrieval is on.
pub const RAG_MARKER: &str = "## Modeling primitives";

fn fenced(program: &str) -> String {
    format!("Here is the program.\n\n```{}\n{}```\n", dsl::FENCE_TAG, program)
}

fn text(s: impl Into<String>) -> ScriptEntry {
    ScriptEntry::Text(s.into())
}

fn scheme(kind: ScenarioKind) -> &'static str {
    match kind {
        ScenarioKind::RoadClosure => {
            "Reasoning: the closed segment between nodes 6 and 7 is two-way, so no vehicle may use it in either direction.\n\
Scheme: binary flow variables per vehicle and directed edge; flow balance for every vehicle; remove edges (6,7) and (7,6) for all vehicles; minimize total travel time."
        }
        ScenarioKind::ForbiddenEdgeVehicle => {
            "Reasoning: only AGV-4 is over-height, and the gantry between nodes 5 and 6 restricts both directions.\n\
Scheme: binary flow variables; flow balance for every vehicle; forbid edges (5,6) and (6,5) for AGV-4 only; minimize total travel time."
        }
        ScenarioKind::DesignatedRoute => {
            "Reasoning: the vehicle serving task T3 carries dangerous goods and must pass 6 -> 10 -> 11 in order; the rest of its path stays free.\n\
Scheme: binary flow variables; flow balance for every vehicle; a mandatory subpath [6, 10, 11] for task T3; minimize total travel time."
        }
    }
}

fn correct_program(kind: ScenarioKind) -> &'static str {
    match kind {
        ScenarioKind::RoadClosure => CLOSURE_PROGRAM,
        ScenarioKind::ForbiddenEdgeVehicle => FORBIDDEN_PROGRAM,
        ScenarioKind::DesignatedRoute => ROUTE_PROGRAM,
    }
}

fn first_try(kind: ScenarioKind) -> MockScript {
    MockScript { modeler: vec![text(scheme(kind))], coder: vec![text(fenced(correct_program(kind)))], debugger: vec![] }
}

/// Every scenario modeled and coded correctly on the first attempt.
pub fn golden() -> SuiteScript {
    SuiteScript {
        by_scenario: ScenarioKind::ALL.into_iter().map(|k| (k, first_try(k))).collect(),
        ..SuiteScript::default()
    }
}

const FIX_CLOSURE: &str = "DIAGNOSIS: the constraints block is never closed, so the parser reached the end of input.\n\
CORRECTION: close the constraints block with a final } after the last remove_edge statement.";

/// Road closure: attempt 1 has a parse error, attempt 2 is correct.
pub fn parse_then_fix() -> MockScript {
    let s = scheme(ScenarioKind::RoadClosure);
    MockScript {
        modeler: vec![text(s), text(s)],
        coder: vec![text(fenced(BROKEN_CLOSURE)), text(fenced(CLOSURE_PROGRAM))],
        debugger: vec![text(FIX_CLOSURE)],
    }
}

/// Road closure: three different failures in a row.
pub fn three_failures() -> MockScript {
    let s = scheme(ScenarioKind::RoadClosure);
    MockScript {
        modeler: vec![text(s), text(s), text(s)],
        coder: vec![
            text("The closure means vehicles must avoid the segment between 6 and 7."),
            text(fenced(BROKEN_CLOSURE)),
            text(fenced("model road_closure\nobjective minimize total_travel_time\nconstraints {\n  remove_edge (6, 7)\n  remove_edge (7, 6)\n}\n")),
        ],
        debugger: vec![
            text("DIAGNOSIS: the reply contained no code block.\nCORRECTION: answer with exactly one fenced vds-dsl block."),
            text(FIX_CLOSURE),
        ],
    }
}

fn forbidden_repair() -> MockScript {
    let s = scheme(ScenarioKind::ForbiddenEdgeVehicle);
    MockScript {
        modeler: vec![text(s), text(s)],
        coder: vec![text(fenced(BROKEN_FORBIDDEN)), text(fenced(FORBIDDEN_PROGRAM))],
        debugger: vec![text(
            "DIAGNOSIS: forbid_edge needs a subject keyword before the vehicle id.\n\
CORRECTION: write forbid_edge vehicle \"AGV-4\" (5, 6) and forbid_edge vehicle \"AGV-4\" (6, 5).",
        )],
    }
}

/// Designated route whose coder only gets the syntax right when the
/// primitives are in the prompt.
fn route_needs_retrieval() -> MockScript {
    let s = scheme(ScenarioKind::DesignatedRoute);
    let coder = ScriptEntry::Conditional {
        if_prompt_contains: RAG_MARKER.into(),
        then: fenced(ROUTE_PROGRAM),
        otherwise: fenced(UNGROUNDED_ROUTE),
    };
    MockScript {
        modeler: vec![text(s), text(s), text(s)],
        coder: vec![coder.clone(), coder.clone(), coder],
        debugger: vec![
            text("DIAGNOSIS: require_subpath is missing its subject.\nCORRECTION: name the vehicle through its task."),
            text("DIAGNOSIS: the subject is still missing.\nCORRECTION: write the subject as a task reference."),
        ],
    }
}

fn objective(env: &TerminalEnv, program: &str) -> Option<f64> {
    let ast = dsl::parse(program).ok()?;
    let inst = solver::bind(&ast, env).ok()?;
    solver::solve(&inst, solver::DEFAULT_TIME_LIMIT_SECS, &FrozenClock).ok().map(|s| s.objective)
}

fn oracle_objective(p: &PlannedInstance) -> f64 {
    oracle_solve(&p.env, &p.spec, solver::DEFAULT_TIME_LIMIT_SECS, &FrozenClock)
        .expect("planned instances are feasible")
        .objective
}

/// Cheapest node-simple path from `s` to `t` through `via` (consecutive)
/// that costs strictly more than `floor`; ties go to the smaller sequence.
fn detour_through(env: &TerminalEnv, s: NodeId, t: NodeId, via: &[NodeId], floor: f64) -> Option<(f64, Vec<NodeId>)> {
    let edges = env.net.edge_map();
    let mut best: Option<(f64, Vec<NodeId>)> = None;
    let cap = floor + 40.0;
    let mut stack = vec![s];
    fn contains_run(path: &[NodeId], via: &[NodeId]) -> bool {
        path.windows(via.len()).any(|w| w == via)
    }
    #[allow(clippy::too_many_arguments)]
    fn dfs(
        edges: &std::collections::BTreeMap<(NodeId, NodeId), f64>,
        t: NodeId,
        via: &[NodeId],
        floor: f64,
        cap: f64,
        cost: f64,
        stack: &mut Vec<NodeId>,
        best: &mut Option<(f64, Vec<NodeId>)>,
    ) {
        let u = *stack.last().expect("non-empty");
        if u == t {
            if cost > floor && contains_run(stack, via) {
                let better = match best {
                    None => true,
                    Some((c, p)) => cost < *c || (cost == *c && stack.as_slice() < p.as_slice()),
                };
                if better {
                    *best = Some((cost, stack.clone()));
                }
            }
            return;
        }
        for (&(a, b), &len) in edges.range((u, NodeId(0))..=(u, NodeId(u32::MAX))) {
            debug_assert_eq!(a, u);
            if stack.contains(&b) || cost + len > cap {
                continue;
            }
            stack.push(b);
            dfs(edges, t, via, floor, cap, cost + len, stack, best);
            stack.pop();
        }
    }
    dfs(edges, t, via, floor, cap, 0.0, &mut stack, &mut best);
    best
}

fn exact_path_program(nodes: &[NodeId]) -> String {
    let list: Vec<String> = nodes.iter().map(ToString::to_string).collect();
    format!(
        "model dangerous_goods_route\nobjective minimize total_travel_time\nconstraints {{\n  flow_balance all\n  require_exact_path task \"T3\" [{}]\n}}\n",
        list.join(", ")
    )
}

fn misread(kind: ScenarioKind, program: &str) -> MockScript {
    MockScript { modeler: vec![text(scheme(kind))], coder: vec![text(fenced(program))], debugger: vec![] }
}

/// The fault-injection suite for the default plan at `seed`.
///
/// Three executed-but-wrong programs: two one-way closures (technician and
/// engineer) and one exact path where a subpath was asked (technician), so
/// 42 of 45 instances are solved with a 13/14/15 split across levels. On
/// top of that, three forbidden-edge instances need one repair cycle and
/// every other designated-route instance only codes correctly with
/// retrieval on, so both ablations lose instances the full pipeline solves.
pub fn fault_injection(seed: u64) -> Result<SuiteScript, String> {
    let suite = SuiteConfig { seed, ..SuiteConfig::default() };
    let plan = plan_suite(&suite).map_err(|e| e.to_string())?;
    let mut script = SuiteScript {
        by_scenario: [
            (ScenarioKind::RoadClosure, first_try(ScenarioKind::RoadClosure)),
            (ScenarioKind::ForbiddenEdgeVehicle, first_try(ScenarioKind::ForbiddenEdgeVehicle)),
            (ScenarioKind::DesignatedRoute, route_needs_retrieval()),
        ]
        .into(),
        ..SuiteScript::default()
    };

    let one_way_levels = [ExpertiseLevel::Technician, ExpertiseLevel::Engineer];
    let mut closures =
        plan.iter().filter(|p| p.scenario == ScenarioKind::RoadClosure && p.level == ExpertiseLevel::Technician);
    for level in one_way_levels {
        let hurt = closures
            .by_ref()
            .find(|p| objective(&p.env, ONE_WAY_PROGRAM).is_some_and(|z| (z - oracle_objective(p)).abs() > 1e-4))
            .ok_or("no closure instance where a one-way closure changes the objective")?;
        let id = hurt.id.replace(ExpertiseLevel::Technician.as_str(), level.as_str());
        script.by_instance.insert(id, misread(ScenarioKind::RoadClosure, ONE_WAY_PROGRAM));
    }

    let route = plan
        .iter()
        .filter(|p| p.scenario == ScenarioKind::DesignatedRoute && p.level == ExpertiseLevel::Technician)
        .find_map(|p| {
            let ScenarioSpec::DesignatedRoute { task, nodes } = &p.spec else { return None };
            let t = p.env.config.task(task)?;
            let sol = oracle_solve(&p.env, &p.spec, solver::DEFAULT_TIME_LIMIT_SECS, &FrozenClock).ok()?;
            let own = sol.plan(t.agv.as_str())?.cost;
            let (_, path) = detour_through(&p.env, t.origin, t.destination, nodes, own)?;
            let program = exact_path_program(&path);
            objective(&p.env, &program).map(|_| (p.id.clone(), program))
        })
        .ok_or("no designated-route instance admits a longer exact path")?;
    script.by_instance.insert(route.0, misread(ScenarioKind::DesignatedRoute, &route.1));

    for id in [
        "forbidden_edge_vehicle-1-scientist",
        "forbidden_edge_vehicle-2-engineer",
        "forbidden_edge_vehicle-3-technician",
    ] {
        script.by_instance.insert(id.into(), forbidden_repair());
    }
    Ok(script)
}

/// Names accepted by `mockgen`.
pub const NAMES: [&str; 4] = ["golden", "fault_injection", "parse_then_fix", "three_failures"];

/// Pretty JSON for the named fixture.
pub fn generate(name: &str, seed: u64) -> Result<String, String> {
    let value = match name {
        "golden" => serde_json::to_value(golden()),
        "fault_injection" => serde_json::to_value(fault_injection(seed)?),
        "parse_then_fix" => serde_json::to_value(parse_then_fix()),
        "three_failures" => serde_json::to_value(three_failures()),
        other => return Err(format!("unknown fixture {other:?}; expected one of {}", NAMES.join(", "))),
    }
    .expect("scripts serialize");
    Ok(crate::io::to_json_pretty(&value))
}
