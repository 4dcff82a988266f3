//! Benchmark evaluation: per-instance scoring against the oracle, CER/SSR
//! aggregation and the significance tests across expertise levels.

mod special;
mod stats;
mod suite;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{self, Statement, VehicleRef};
use crate::env::{ExpertiseLevel, ScenarioKind, ScenarioSpec, TerminalEnv};
use crate::solver::Solution;
use crate::workflow::{classify_stage_error, FailureClass, TransferOutcome};

pub use special::{beta_i, chi_squared_cdf, chi_squared_sf, f_cdf, f_sf, gamma_p, gamma_q};
pub use stats::{anova_test, chi_squared_test, Anova, ChiSquared, StatError};
pub use suite::{
    compute_stats, plan_suite, run_instance, Ablation, AccumulationGate, AnovaReport, BenchError, BenchReport,
    ChiSquaredReport, InstanceRun, PlannedInstance, ReportConfig, StatReport, SuiteConfig, SIGNIFICANCE_LEVEL,
};

/// Permitted absolute objective error.
pub const DEFAULT_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureCategory {
    /// Executed, but the objective differs from the oracle.
    Misinterpretation,
    Syntax,
    Runtime,
    /// All attempts used, with both syntax and runtime failures among them.
    Exhausted,
}

impl FailureCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureCategory::Misinterpretation => "misinterpretation",
            FailureCategory::Syntax => "syntax",
            FailureCategory::Runtime => "runtime",
            FailureCategory::Exhausted => "exhausted",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MisinterpretationKind {
    /// A closure removed in one direction only.
    OneWayClosure,
    /// The designated route was imposed as the whole path.
    ExactPathInsteadOfSubpath,
    Other,
}

impl MisinterpretationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MisinterpretationKind::OneWayClosure => "one_way_closure",
            MisinterpretationKind::ExactPathInsteadOfSubpath => "exact_path_instead_of_subpath",
            MisinterpretationKind::Other => "other",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceResult {
    pub id: String,
    pub scenario: ScenarioKind,
    pub level: ExpertiseLevel,
    pub executed: bool,
    pub solved: bool,
    pub objective: Option<f64>,
    pub oracle_objective: f64,
    pub iterations: usize,
    pub wall_time_secs: f64,
    pub failure: Option<FailureCategory>,
    pub misinterpretation: Option<MisinterpretationKind>,
    pub trace_path: Option<String>,
}

/// `|z - z_star| <= tolerance`, with the boundary kept inclusive despite
/// rounding in the subtraction.
pub fn within_tolerance(z: f64, z_star: f64, tolerance: f64) -> bool {
    let slack = 4.0 * f64::EPSILON * z.abs().max(z_star.abs()).max(1.0);
    (z - z_star).abs() <= tolerance + slack
}

/// Guesses which way an executed-but-wrong program misread the scenario.
pub fn classify_misinterpretation(program: &str, spec: &ScenarioSpec, env: &TerminalEnv) -> MisinterpretationKind {
    let Ok(ast) = dsl::parse(program) else {
        return MisinterpretationKind::Other;
    };
    match spec {
        ScenarioSpec::RoadClosure { edge: (a, b) } => {
            let removed = |u, v| {
                ast.statements.iter().any(|s| matches!(s, Statement::RemoveEdge { from, to } if *from == u && *to == v))
            };
            if removed(*a, *b) != removed(*b, *a) {
                return MisinterpretationKind::OneWayClosure;
            }
        }
        ScenarioSpec::DesignatedRoute { task, .. } => {
            let vehicle = env.config.task(task).map(|t| t.agv.clone());
            let targets_task = |subject: &VehicleRef| match subject {
                VehicleRef::Task(t) => t == task.as_str(),
                VehicleRef::Vehicle(v) => vehicle.as_ref().is_some_and(|id| id.as_str() == v),
            };
            let exact = ast
                .statements
                .iter()
                .any(|s| matches!(s, Statement::RequireExactPath { subject, .. } if targets_task(subject)));
            if exact {
                return MisinterpretationKind::ExactPathInsteadOfSubpath;
            }
        }
        ScenarioSpec::None | ScenarioSpec::ForbiddenEdgeVehicle { .. } => {}
    }
    MisinterpretationKind::Other
}

/// Scores one transfer outcome against the oracle solution.
pub fn evaluate_instance(
    id: &str,
    scenario: ScenarioKind,
    env: &TerminalEnv,
    spec: &ScenarioSpec,
    outcome: &TransferOutcome,
    oracle: &Solution,
    tolerance: f64,
) -> InstanceResult {
    let executed = outcome.executed();
    let objective = outcome.solution.as_ref().map(|s| s.objective);
    let solved = objective.is_some_and(|z| within_tolerance(z, oracle.objective, tolerance));
    let (failure, misinterpretation) = if solved {
        (None, None)
    } else if executed {
        let program = outcome.final_program.as_deref().unwrap_or("");
        (Some(FailureCategory::Misinterpretation), Some(classify_misinterpretation(program, spec, env)))
    } else {
        let classes: Vec<FailureClass> =
            outcome.attempts.iter().filter_map(|a| a.error.as_ref()).map(classify_stage_error).collect();
        let last = classes.last().copied().unwrap_or(FailureClass::Runtime);
        let mixed = classes.iter().any(|c| *c != last);
        let category = match last {
            _ if mixed => FailureCategory::Exhausted,
            FailureClass::Syntax => FailureCategory::Syntax,
            FailureClass::Runtime => FailureCategory::Runtime,
        };
        (Some(category), None)
    };
    InstanceResult {
        id: String::from(id),
        scenario,
        level: env.reqs.expertise_level,
        executed,
        solved,
        objective,
        oracle_objective: oracle.objective,
        iterations: outcome.iterations,
        wall_time_secs: outcome.total_wall_time_secs,
        failure,
        misinterpretation,
        trace_path: None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsAggregate {
    pub n_total: usize,
    pub n_executed: usize,
    pub n_solved: usize,
    pub cer: f64,
    pub ssr: f64,
    pub mean_iterations: f64,
    pub mean_wall_time_secs: f64,
    pub failures: BTreeMap<FailureCategory, usize>,
    pub misinterpretations: BTreeMap<MisinterpretationKind, usize>,
}

impl MetricsAggregate {
    fn of(results: &[&InstanceResult]) -> Self {
        let n_total = results.len();
        let n_executed = results.iter().filter(|r| r.executed).count();
        let n_solved = results.iter().filter(|r| r.solved).count();
        let mut failures = BTreeMap::new();
        let mut misinterpretations = BTreeMap::new();
        for r in results {
            if let Some(f) = r.failure {
                *failures.entry(f).or_insert(0) += 1;
            }
            if let Some(m) = r.misinterpretation {
                *misinterpretations.entry(m).or_insert(0) += 1;
            }
        }
        let n = n_total as f64;
        MetricsAggregate {
            n_total,
            n_executed,
            n_solved,
            cer: n_executed as f64 / n,
            ssr: n_solved as f64 / n,
            mean_iterations: results.iter().map(|r| r.iterations as f64).sum::<f64>() / n,
            mean_wall_time_secs: results.iter().map(|r| r.wall_time_secs).sum::<f64>() / n,
            failures,
            misinterpretations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub by_scenario: BTreeMap<ScenarioKind, MetricsAggregate>,
    pub by_level: BTreeMap<ExpertiseLevel, MetricsAggregate>,
    pub overall: MetricsAggregate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("no results to aggregate")]
pub struct EmptyInput;

pub fn compute_metrics(results: &[InstanceResult]) -> Result<Metrics, EmptyInput> {
    if results.is_empty() {
        return Err(EmptyInput);
    }
    let mut scenario: BTreeMap<ScenarioKind, Vec<&InstanceResult>> = BTreeMap::new();
    let mut level: BTreeMap<ExpertiseLevel, Vec<&InstanceResult>> = BTreeMap::new();
    for r in results {
        scenario.entry(r.scenario).or_default().push(r);
        level.entry(r.level).or_default().push(r);
    }
    let all: Vec<&InstanceResult> = results.iter().collect();
    Ok(Metrics {
        by_scenario: scenario.into_iter().map(|(k, v)| (k, MetricsAggregate::of(&v))).collect(),
        by_level: level.into_iter().map(|(k, v)| (k, MetricsAggregate::of(&v))).collect(),
        overall: MetricsAggregate::of(&all),
    })
}
