//! Suite execution with parallel fan-out and report files.

use std::path::Path;

use portagent_core::bench::{
    plan_suite, run_instance, BenchError, BenchReport, InstanceResult, InstanceRun, PlannedInstance, SuiteConfig,
};
use portagent_core::knowledge::{Exemplar, KnowledgeBase};
use portagent_core::workflow::TransferOutcome;
use portagent_core::Clock;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::io::{self, IoError};
use crate::mock::LlmChoice;

#[derive(Debug, Error)]
pub enum BenchRunError {
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error("{0}")]
    Backend(String),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Serialize)]
pub struct InstanceTrace<'a> {
    pub id: &'a str,
    pub scenario: String,
    pub level: String,
    pub requirements: &'a [String],
    pub result: &'a InstanceResult,
    pub outcome: &'a TransferOutcome,
}

#[derive(Debug)]
pub struct BenchRun {
    pub report: BenchReport,
    /// Per-instance runs, sorted by id.
    pub runs: Vec<(PlannedInstance, InstanceRun)>,
}

impl BenchRun {
    pub fn accumulated(&self) -> impl Iterator<Item = &Exemplar> {
        self.runs.iter().filter_map(|(_, r)| r.accumulated.as_ref())
    }

    pub fn result(&self, id: &str) -> Option<&InstanceResult> {
        self.report.instances.iter().find(|r| r.id == id)
    }
}

pub fn trace_file(id: &str) -> String {
    format!("traces/{id}.json")
}

fn run_one<C: Clock + ?Sized>(
    planned: &PlannedInstance,
    kb: &mut KnowledgeBase,
    llm: &LlmChoice,
    suite: &SuiteConfig,
    clock: &C,
) -> Result<InstanceRun, BenchRunError> {
    let mut backend = llm.backend_for(&planned.id, Some(planned.scenario)).map_err(BenchRunError::Backend)?;
    let mut run = run_instance(planned, kb, &mut *backend, suite, &clock)?;
    run.result.trace_path = Some(trace_file(&planned.id));
    Ok(run)
}

/// Runs every planned instance against a snapshot of `kb`.
///
/// Without within-run learning the instances are independent and run in
/// parallel, each on its own copy of the base. With it they run in plan
/// order and later instances see earlier accumulations.
pub fn run_benchmark<C: Clock + Sync + ?Sized>(
    suite: &SuiteConfig,
    kb: &KnowledgeBase,
    llm: &LlmChoice,
    clock: &C,
) -> Result<BenchRun, BenchRunError> {
    let plan = plan_suite(suite)?;
    let mut runs: Vec<(PlannedInstance, InstanceRun)> = if suite.within_run_learning {
        let mut shared = kb.clone();
        let mut out = Vec::with_capacity(plan.len());
        for p in plan {
            let run = run_one(&p, &mut shared, llm, suite, clock)?;
            out.push((p, run));
        }
        out
    } else {
        plan.into_par_iter()
            .map(|p| {
                let mut local = kb.clone();
                let run = run_one(&p, &mut local, llm, suite, clock)?;
                Ok((p, run))
            })
            .collect::<Result<_, BenchRunError>>()?
    };
    runs.sort_by(|a, b| a.0.id.cmp(&b.0.id));
    let results = runs.iter().map(|(_, r)| r.result.clone()).collect();
    let mock = match llm {
        LlmChoice::Mock { .. } => Some(llm.label()),
        LlmChoice::Http(_) => None,
    };
    let report =
        BenchReport::new(suite, mock, results).map_err(|_| BenchError::Config("suite has no instances".into()))?;
    Ok(BenchRun { report, runs })
}

#[derive(Serialize)]
struct CsvRow<'a> {
    id: &'a str,
    scenario: &'a str,
    level: &'a str,
    executed: bool,
    solved: bool,
    objective: Option<f64>,
    oracle_objective: f64,
    iterations: usize,
    wall_time_secs: f64,
    failure: &'a str,
    misinterpretation: &'a str,
    trace_path: &'a str,
}

pub fn instances_csv(results: &[InstanceResult]) -> Result<String, BenchRunError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in results {
        w.serialize(CsvRow {
            id: &r.id,
            scenario: r.scenario.as_str(),
            level: r.level.as_str(),
            executed: r.executed,
            solved: r.solved,
            objective: r.objective,
            oracle_objective: r.oracle_objective,
            iterations: r.iterations,
            wall_time_secs: r.wall_time_secs,
            failure: r.failure.map_or("", |f| f.as_str()),
            misinterpretation: r.misinterpretation.map_or("", |m| m.as_str()),
            trace_path: r.trace_path.as_deref().unwrap_or(""),
        })?;
    }
    let bytes = w.into_inner().map_err(|e| BenchRunError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes `report.json`, `instances.csv`, one trace per instance under
/// `traces/` and accumulated exemplars under `accumulated/`, never into
/// the input knowledge base.
pub fn write_outputs(out: &Path, run: &BenchRun) -> Result<(), BenchRunError> {
    for (planned, r) in &run.runs {
        let trace = InstanceTrace {
            id: &planned.id,
            scenario: planned.scenario.as_str().into(),
            level: planned.level.as_str().into(),
            requirements: &planned.env.reqs.texts,
            result: &r.result,
            outcome: &r.outcome,
        };
        io::write_json(&out.join(trace_file(&planned.id)), &trace)?;
    }
    for (planned, r) in &run.runs {
        if let Some(ex) = &r.accumulated {
            // Parallel runs each start from the same snapshot, so their ids
            // collide; the instance id keeps the files distinct.
            let ex = Exemplar { id: format!("accumulated-{}", planned.id), ..ex.clone() };
            io::write_json(&out.join("accumulated").join(format!("{}.json", planned.id)), &ex)?;
        }
    }
    io::write_atomic(&out.join("instances.csv"), instances_csv(&run.report.instances)?.as_bytes())?;
    io::write_json(&out.join("report.json"), &run.report)?;
    Ok(())
}
