use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::stats::{anova_test, chi_squared_test, Anova, ChiSquared, StatError};
use super::{compute_metrics, evaluate_instance, EmptyInput, InstanceResult, Metrics, DEFAULT_TOLERANCE};
use crate::clock::Clock;
use crate::env::{
    generate_instances, EnvError, ExpertiseLevel, GenerationError, ScenarioKind, ScenarioSpec, TerminalEnv,
};
use crate::knowledge::{Exemplar, KnowledgeBase};
use crate::llm::Backend;
use crate::solver::{oracle_solve, SolveError};
use crate::workflow::{run_transfer, TransferError, TransferOutcome, WorkflowConfig};

pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ablation {
    #[default]
    None,
    NoRag,
    NoSelfCorrection,
}

impl Ablation {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(Ablation::None),
            "no-rag" => Some(Ablation::NoRag),
            "no-self-correction" => Some(Ablation::NoSelfCorrection),
            _ => None,
        }
    }

    /// Label used in reports.
    pub fn label(self) -> &'static str {
        match self {
            Ablation::None => "full",
            Ablation::NoRag => "w/o RAG",
            Ablation::NoSelfCorrection => "w/o self-correction",
        }
    }
}

/// When a solved run's program is added to the knowledge base.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccumulationGate {
    /// Whenever the agent's own solve succeeds.
    #[default]
    AgentSuccess,
    /// Only when the objective also matches the oracle.
    OracleVerified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub seed: u64,
    pub scenarios: Vec<ScenarioKind>,
    pub instances_per_scenario: usize,
    pub levels: Vec<ExpertiseLevel>,
    pub tolerance: f64,
    pub ablation: Ablation,
    pub workflow: WorkflowConfig,
    /// Let later instances retrieve exemplars accumulated earlier in the
    /// same run. Off: every instance sees the base as it was at start.
    pub within_run_learning: bool,
    pub accumulation_gate: AccumulationGate,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 42,
            scenarios: ScenarioKind::ALL.to_vec(),
            instances_per_scenario: 5,
            levels: ExpertiseLevel::ALL.to_vec(),
            tolerance: DEFAULT_TOLERANCE,
            ablation: Ablation::None,
            workflow: WorkflowConfig::default(),
            within_run_learning: false,
            accumulation_gate: AccumulationGate::AgentSuccess,
        }
    }
}

impl SuiteConfig {
    /// The workflow configuration with the ablation applied.
    pub fn effective_workflow(&self) -> WorkflowConfig {
        let mut w = self.workflow.clone();
        match self.ablation {
            Ablation::None => {}
            Ablation::NoRag => w.use_rag = false,
            Ablation::NoSelfCorrection => w.use_self_correction = false,
        }
        w
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: &str| Err(BenchError::Config(String::from(m)));
        if self.scenarios.is_empty() {
            return bad("suite has no scenarios");
        }
        if self.levels.is_empty() {
            return bad("suite has no expertise levels");
        }
        if self.instances_per_scenario == 0 {
            return bad("instances_per_scenario must be at least 1");
        }
        if self.tolerance.is_nan() || self.tolerance < 0.0 {
            return bad("tolerance must be non-negative");
        }
        self.effective_workflow().validate().map_err(|e| BenchError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannedInstance {
    pub id: String,
    pub scenario: ScenarioKind,
    pub level: ExpertiseLevel,
    pub env: TerminalEnv,
    pub spec: ScenarioSpec,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BenchError {
    #[error("invalid suite: {0}")]
    Config(String),
    #[error(transparent)]
    Generation(#[from] GenerationError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("oracle failed on {id}: {error}")]
    Oracle { id: String, error: SolveError },
    #[error("transfer run for {id} failed: {error}")]
    Transfer { id: String, error: TransferError },
}

/// Expands the suite into instances, ordered by scenario, index and level.
pub fn plan_suite(suite: &SuiteConfig) -> Result<Vec<PlannedInstance>, BenchError> {
    suite.validate()?;
    let mut out = Vec::new();
    for &kind in &suite.scenarios {
        for base in generate_instances(suite.seed, kind, suite.instances_per_scenario)? {
            for &level in &suite.levels {
                out.push(PlannedInstance {
                    id: base.id(level),
                    scenario: kind,
                    level,
                    env: base.env(level)?,
                    spec: base.spec.clone(),
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceRun {
    pub result: InstanceResult,
    pub outcome: TransferOutcome,
    /// Exemplar added to `kb` by this run.
    pub accumulated: Option<Exemplar>,
}

/// Solves the instance with the oracle, runs the transfer workflow on its
/// prompt and scores the result.
pub fn run_instance(
    planned: &PlannedInstance,
    kb: &mut KnowledgeBase,
    backend: &mut dyn Backend,
    suite: &SuiteConfig,
    clock: &dyn Clock,
) -> Result<InstanceRun, BenchError> {
    let mut workflow = suite.effective_workflow();
    let oracle = oracle_solve(&planned.env, &planned.spec, workflow.solve_time_limit_secs, clock)
        .map_err(|error| BenchError::Oracle { id: planned.id.clone(), error })?;
    let accumulate = workflow.accumulate_on_success;
    if suite.accumulation_gate == AccumulationGate::OracleVerified {
        workflow.accumulate_on_success = false;
    }
    let mut outcome = run_transfer(&planned.env, kb, backend, &workflow, clock)
        .map_err(|error| BenchError::Transfer { id: planned.id.clone(), error })?;
    let result = evaluate_instance(
        &planned.id,
        planned.scenario,
        &planned.env,
        &planned.spec,
        &outcome,
        &oracle,
        suite.tolerance,
    );
    let accumulated = match (suite.accumulation_gate, &outcome.final_program) {
        (AccumulationGate::OracleVerified, Some(program)) if accumulate && result.solved => {
            let description = planned.env.reqs.texts.join(" ");
            let ex = kb
                .accumulate(&planned.env, program, &description)
                .expect("a program that solved passes validation")
                .clone();
            outcome.accumulated = Some(ex.id.clone());
            Some(ex)
        }
        _ => outcome.accumulated.as_ref().and_then(|id| kb.exemplars().iter().find(|e| &e.id == id).cloned()),
    };
    Ok(InstanceRun { result, outcome, accumulated })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiSquaredReport {
    pub groups: Vec<ExpertiseLevel>,
    /// `(success, failure)` per group.
    pub table: Vec<[u64; 2]>,
    pub result: Option<ChiSquared>,
    pub error: Option<String>,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnovaReport {
    pub groups: Vec<ExpertiseLevel>,
    pub result: Option<Anova>,
    /// Set when the test is undefined or a convention was applied.
    pub note: Option<String>,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatReport {
    pub alpha: f64,
    pub cer: ChiSquaredReport,
    pub ssr: ChiSquaredReport,
    pub iterations: AnovaReport,
    pub wall_time: AnovaReport,
}

fn chi_report(
    groups: &[ExpertiseLevel],
    results: &[InstanceResult],
    hit: fn(&InstanceResult) -> bool,
) -> ChiSquaredReport {
    let table: Vec<[u64; 2]> = groups
        .iter()
        .map(|&g| {
            let rows = results.iter().filter(|r| r.level == g);
            let (yes, no) = rows.fold((0, 0), |(y, n), r| if hit(r) { (y + 1, n) } else { (y, n + 1) });
            [yes, no]
        })
        .collect();
    let (result, error) = match chi_squared_test(&table) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    ChiSquaredReport {
        groups: groups.to_vec(),
        table,
        significant: result.is_some_and(|r| r.p_value < SIGNIFICANCE_LEVEL),
        result,
        error,
    }
}

fn anova_report(
    groups: &[ExpertiseLevel],
    results: &[InstanceResult],
    value: fn(&InstanceResult) -> f64,
) -> AnovaReport {
    let samples: Vec<Vec<f64>> =
        groups.iter().map(|&g| results.iter().filter(|r| r.level == g).map(value).collect()).collect();
    let (result, note) = match anova_test(&samples) {
        Ok(r) => (Some(r), None),
        Err(StatError::DegenerateInput) => (
            Some(Anova {
                f: 0.0,
                df_between: (samples.len() - 1) as u32,
                df_within: (samples.iter().map(Vec::len).sum::<usize>() - samples.len()) as u32,
                p_value: 1.0,
            }),
            Some(String::from("all samples identical; F = 0 and p = 1 by convention")),
        ),
        Err(e) => (None, Some(e.to_string())),
    };
    AnovaReport {
        groups: groups.to_vec(),
        significant: result.is_some_and(|r| r.p_value < SIGNIFICANCE_LEVEL),
        result,
        note,
    }
}

/// Chi-squared tests on CER and SSR and ANOVA on iterations and wall time,
/// all across expertise levels.
pub fn compute_stats(results: &[InstanceResult]) -> StatReport {
    let groups: Vec<ExpertiseLevel> =
        ExpertiseLevel::ALL.into_iter().filter(|l| results.iter().any(|r| r.level == *l)).collect();
    StatReport {
        alpha: SIGNIFICANCE_LEVEL,
        cer: chi_report(&groups, results, |r| r.executed),
        ssr: chi_report(&groups, results, |r| r.solved),
        iterations: anova_report(&groups, results, |r| r.iterations as f64),
        wall_time: anova_report(&groups, results, |r| r.wall_time_secs),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportConfig {
    pub label: &'static str,
    pub suite: SuiteConfig,
    pub mock: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub config: ReportConfig,
    pub instances: Vec<InstanceResult>,
    pub aggregates: Metrics,
    pub stats: StatReport,
}

impl BenchReport {
    /// Sorts the results by id and aggregates them.
    pub fn new(
        suite: &SuiteConfig,
        mock: Option<String>,
        mut results: Vec<InstanceResult>,
    ) -> Result<Self, EmptyInput> {
        results.sort_by(|a, b| a.id.cmp(&b.id));
        let aggregates = compute_metrics(&results)?;
        let stats = compute_stats(&results);
        Ok(BenchReport {
            config: ReportConfig { label: suite.ablation.label(), suite: suite.clone(), mock },
            instances: results,
            aggregates,
            stats,
        })
    }
}
