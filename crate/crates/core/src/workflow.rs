//! The Virtual Expert Team loop: retrieve, model, code, check, execute and,
//! on failure, reflect and retry.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::Clock;
use crate::dsl;
use crate::env::TerminalEnv;
use crate::knowledge::{KnowledgeBase, RetrievalQuery, RetrievedContext};
use crate::llm::{
    self, parse_reflection, render_prompt, Backend, BackendError, ExpertRole, FailedAttempt, PromptContext,
    PromptError, Reflection, DEFAULT_PROMPT_BUDGET_TOKENS,
};
use crate::solver::{self, Solution, DEFAULT_TIME_LIMIT_SECS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorkflowConfig {
    pub max_iterations: usize,
    pub k_shot: usize,
    pub use_rag: bool,
    pub use_self_correction: bool,
    pub solve_time_limit_secs: f64,
    pub accumulate_on_success: bool,
    /// Re-run the Modeler after a failure; `false` repairs with the Coder only.
    pub rerun_modeler: bool,
    pub prompt_budget_tokens: usize,
}

impl Default for WorkflowConfig {
    fn default() -> Self {
        WorkflowConfig {
            max_iterations: 3,
            k_shot: 1,
            use_rag: true,
            use_self_correction: true,
            solve_time_limit_secs: DEFAULT_TIME_LIMIT_SECS,
            accumulate_on_success: true,
            rerun_modeler: true,
            prompt_budget_tokens: DEFAULT_PROMPT_BUDGET_TOKENS,
        }
    }
}

impl WorkflowConfig {
    pub fn validate(&self) -> Result<(), TransferError> {
        if self.max_iterations == 0 {
            return Err(TransferError::Config(String::from("max_iterations must be at least 1")));
        }
        if self.solve_time_limit_secs.is_nan() || self.solve_time_limit_secs <= 0.0 {
            return Err(TransferError::Config(format!(
                "solve time limit must be positive, got {}",
                self.solve_time_limit_secs
            )));
        }
        if self.prompt_budget_tokens == 0 {
            return Err(TransferError::Config(String::from("prompt budget must be positive")));
        }
        Ok(())
    }

    /// Attempts allowed: one when self-correction is off.
    pub fn effective_max_iterations(&self) -> usize {
        if self.use_self_correction {
            self.max_iterations
        } else {
            1
        }
    }
}

/// How far an attempt got. Everything before `Bind` is pre-execution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Extract,
    Parse,
    Static,
    Bind,
    Solve,
    Solved,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Extract => "extract",
            Stage::Parse => "parse",
            Stage::Static => "static",
            Stage::Bind => "bind",
            Stage::Solve => "solve",
            Stage::Solved => "solved",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureClass {
    /// Extraction, parse or static-check failure.
    Syntax,
    /// Bind or solve failure.
    Runtime,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageError {
    pub stage: Stage,
    /// `extraction`, `parse`, `static`, or a solver error kind.
    pub kind: String,
    pub message: String,
}

/// Failure class of an error that survived to the final attempt. Either
/// class means the run did not execute.
pub fn classify_stage_error(err: &StageError) -> FailureClass {
    match err.stage {
        Stage::Extract | Stage::Parse | Stage::Static => FailureClass::Syntax,
        Stage::Bind | Stage::Solve | Stage::Solved => FailureClass::Runtime,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exchange {
    pub role: ExpertRole,
    pub system: String,
    pub user: String,
    pub completion: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub index: usize,
    pub modeler_scheme: String,
    pub coder_output: String,
    pub extracted_program: Option<String>,
    pub stage_reached: Stage,
    pub error: Option<StageError>,
    pub reflection: Option<Reflection>,
    pub exchanges: Vec<Exchange>,
    pub wall_time_secs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferStatus {
    Solved,
    Exhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferOutcome {
    pub status: TransferStatus,
    pub final_program: Option<String>,
    pub solution: Option<Solution>,
    pub attempts: Vec<AttemptRecord>,
    /// Attempts made; a first-try success counts as 1.
    pub iterations: usize,
    pub total_wall_time_secs: f64,
    /// Id of the exemplar added to the knowledge base, if any.
    pub accumulated: Option<String>,
}

impl TransferOutcome {
    pub fn executed(&self) -> bool {
        self.status == TransferStatus::Solved
    }

    pub fn last_attempt(&self) -> Option<&AttemptRecord> {
        self.attempts.last()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransferError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
}

fn stage_error(stage: Stage, kind: &str, message: String) -> StageError {
    StageError { stage, kind: String::from(kind), message }
}

/// Runs the program through extract, parse, static check, bind and solve.
fn execute(
    coder_output: &str,
    env: &TerminalEnv,
    config: &WorkflowConfig,
    clock: &dyn Clock,
    extracted: &mut Option<String>,
) -> Result<(String, Solution), StageError> {
    let program =
        dsl::extract_dsl_block(coder_output).map_err(|e| stage_error(Stage::Extract, "extraction", e.to_string()))?;
    *extracted = Some(program.clone());
    let ast = dsl::parse(&program).map_err(|e| stage_error(Stage::Parse, "parse", e.to_string()))?;
    let problems = dsl::static_check(&ast);
    if !problems.is_empty() {
        let message = problems.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ");
        return Err(stage_error(Stage::Static, "static", message));
    }
    let solve_err = |stage, e: solver::SolveError| stage_error(stage, e.kind.as_str(), e.to_string());
    let instance = solver::bind(&ast, env).map_err(|e| solve_err(Stage::Bind, e))?;
    let solution =
        solver::solve(&instance, config.solve_time_limit_secs, clock).map_err(|e| solve_err(Stage::Solve, e))?;
    Ok((program, solution))
}

/// Transfers the environment's requirements into a solved dispatching model.
///
/// Agent-side failures are recorded in the outcome; only configuration,
/// prompt-budget and backend failures are returned as errors. The
/// ground-truth oracle is never consulted.
pub fn run_transfer(
    env: &TerminalEnv,
    kb: &mut KnowledgeBase,
    backend: &mut dyn Backend,
    config: &WorkflowConfig,
    clock: &dyn Clock,
) -> Result<TransferOutcome, TransferError> {
    config.validate()?;
    let started = clock.now_secs();
    let retrieved: Option<RetrievedContext> =
        config.use_rag.then(|| kb.retrieve(&RetrievalQuery::for_env(env), config.k_shot));
    let max = config.effective_max_iterations();
    let mut corrections: Vec<String> = Vec::new();
    let mut attempts: Vec<AttemptRecord> = Vec::new();
    let mut solved: Option<(String, Solution)> = None;
    let mut scheme = String::new();

    for index in 1..=max {
        let attempt_start = clock.now_secs();
        let mut exchanges = Vec::new();
        let mut ask = |role, ctx: &PromptContext<'_>| -> Result<String, TransferError> {
            let bundle = render_prompt(role, ctx, config.prompt_budget_tokens)?;
            let completion = llm::complete(backend, &bundle)?;
            exchanges.push(Exchange { role, system: bundle.system, user: bundle.user, completion: completion.clone() });
            Ok(completion)
        };
        let mut ctx =
            PromptContext { env, knowledge: retrieved.as_ref(), scheme: None, failed: None, corrections: &corrections };
        if index == 1 || config.rerun_modeler {
            scheme = ask(ExpertRole::Modeler, &ctx)?;
        }
        ctx.scheme = Some(&scheme);
        let coder_output = ask(ExpertRole::Coder, &ctx)?;

        let mut extracted = None;
        let result = execute(&coder_output, env, config, clock, &mut extracted);
        let (stage_reached, error, reflection) = match result {
            Ok(done) => {
                solved = Some(done);
                (Stage::Solved, None, None)
            }
            Err(err) => {
                let reflection = if index < max {
                    ctx.failed = Some(FailedAttempt {
                        program: extracted.as_deref().unwrap_or(&coder_output),
                        error: &err.message,
                    });
                    Some(parse_reflection(&ask(ExpertRole::Debugger, &ctx)?))
                } else {
                    None
                };
                (err.stage, Some(err), reflection)
            }
        };
        if let Some(r) = &reflection {
            corrections.push(r.correction.clone());
        }
        attempts.push(AttemptRecord {
            index,
            modeler_scheme: scheme.clone(),
            coder_output,
            extracted_program: extracted,
            stage_reached,
            error,
            reflection,
            exchanges,
            wall_time_secs: clock.now_secs() - attempt_start,
        });
        if solved.is_some() {
            break;
        }
    }

    let iterations = attempts.len();
    let (status, final_program, solution, accumulated) = match solved {
        Some((program, solution)) => {
            let accumulated = if config.accumulate_on_success {
                let description = env.reqs.texts.join(" ");
                let ex = kb.accumulate(env, &program, &description).expect("a program that solved passes validation");
                Some(ex.id.clone())
            } else {
                None
            };
            (TransferStatus::Solved, Some(program), Some(solution), accumulated)
        }
        None => (TransferStatus::Exhausted, None, None, None),
    };
    Ok(TransferOutcome {
        status,
        final_program,
        solution,
        attempts,
        iterations,
        total_wall_time_secs: clock.now_secs() - started,
        accumulated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::FrozenClock;
    use crate::env::{generate_instances, ExpertiseLevel, ScenarioKind};
    use crate::llm::{MockScript, ScriptEntry, ScriptedBackend};
    use alloc::vec;

    const GOOD: &str = "```vds-dsl\nmodel closure\nobjective minimize total_travel_time\nconstraints {\n  flow_balance all\n  remove_edge (6, 7)\n  remove_edge (7, 6)\n}\n```";
    const NO_BRACE: &str = "```vds-dsl\nmodel closure\nobjective minimize total_travel_time\nconstraints {\n  flow_balance all\n  remove_edge (6, 7)\n  remove_edge (7, 6)\n```";

    fn env() -> TerminalEnv {
        generate_instances(42, ScenarioKind::RoadClosure, 1).unwrap()[0].env(ExpertiseLevel::Engineer).unwrap()
    }

    fn texts(v: &[&str]) -> Vec<ScriptEntry> {
        v.iter().map(|s| ScriptEntry::Text((*s).into())).collect()
    }

    fn run(script: MockScript, config: &WorkflowConfig) -> (TransferOutcome, KnowledgeBase) {
        let mut kb = KnowledgeBase::default();
        let mut backend = ScriptedBackend::new(script);
        let out = run_transfer(&env(), &mut kb, &mut backend, config, &FrozenClock).unwrap();
        (out, kb)
    }

    #[test]
    fn first_try_success() {
        let (out, kb) = run(
            MockScript { modeler: texts(&["scheme"]), coder: texts(&[GOOD]), debugger: vec![] },
            &WorkflowConfig::default(),
        );
        assert_eq!(out.status, TransferStatus::Solved);
        assert_eq!(out.iterations, 1);
        assert!(out.attempts[0].reflection.is_none());
        assert_eq!(kb.exemplars().len(), 1);
        assert_eq!(out.accumulated.as_deref(), Some("accumulated-001"));
    }

    #[test]
    fn parse_error_then_fix() {
        let script = MockScript {
            modeler: texts(&["scheme 1", "scheme 2"]),
            coder: texts(&[NO_BRACE, GOOD]),
            debugger: texts(&["DIAGNOSIS: missing brace CORRECTION: close the constraints block"]),
        };
        let (out, _) = run(script, &WorkflowConfig::default());
        assert_eq!(out.status, TransferStatus::Solved);
        assert_eq!(out.iterations, 2);
        assert_eq!(out.attempts[0].stage_reached, Stage::Parse);
        let r = out.attempts[0].reflection.as_ref().unwrap();
        assert_eq!(r.correction, "close the constraints block");
        for ex in &out.attempts[1].exchanges {
            assert!(ex.user.contains("1. close the constraints block"), "{:?}", ex.role);
        }
        assert!(out.attempts[1].reflection.is_none());
    }

    #[test]
    fn without_self_correction_one_attempt() {
        let script = MockScript {
            modeler: texts(&["scheme 1", "scheme 2"]),
            coder: texts(&[NO_BRACE, GOOD]),
            debugger: texts(&["fix it"]),
        };
        let config = WorkflowConfig { use_self_correction: false, ..WorkflowConfig::default() };
        let (out, kb) = run(script, &config);
        assert_eq!(out.status, TransferStatus::Exhausted);
        assert_eq!(out.iterations, 1);
        assert!(!out.executed());
        assert!(kb.exemplars().is_empty());
    }

    #[test]
    fn three_failures_exhaust() {
        let script = MockScript {
            modeler: texts(&["a", "b", "c"]),
            coder: texts(&[
                "no block",
                NO_BRACE,
                "```vds-dsl\nmodel m objective minimize total_travel_time constraints { }\n```",
            ]),
            debugger: texts(&["d1", "d2"]),
        };
        let (out, _) = run(script, &WorkflowConfig::default());
        assert_eq!(out.status, TransferStatus::Exhausted);
        assert_eq!(out.iterations, 3);
        let stages: Vec<Stage> = out.attempts.iter().map(|a| a.stage_reached).collect();
        assert_eq!(stages, [Stage::Extract, Stage::Parse, Stage::Static]);
        assert!(out.attempts[2].reflection.is_none());
        assert_eq!(classify_stage_error(out.attempts[2].error.as_ref().unwrap()), FailureClass::Syntax);
        let last_modeler = &out.attempts[2].exchanges[0];
        let (i, j) = (last_modeler.user.find("1. d1").unwrap(), last_modeler.user.find("2. d2").unwrap());
        assert!(i < j);
    }

    #[test]
    fn coder_only_repair_reuses_scheme() {
        let script =
            MockScript { modeler: texts(&["only scheme"]), coder: texts(&[NO_BRACE, GOOD]), debugger: texts(&["fix"]) };
        let config = WorkflowConfig { rerun_modeler: false, ..WorkflowConfig::default() };
        let (out, _) = run(script, &config);
        assert_eq!(out.iterations, 2);
        assert_eq!(out.attempts[1].modeler_scheme, "only scheme");
        assert_eq!(out.attempts[1].exchanges.len(), 1);
    }

    #[test]
    fn exhausted_script_is_backend_error() {
        let mut kb = KnowledgeBase::default();
        let mut backend = ScriptedBackend::new(MockScript { modeler: texts(&["s"]), ..MockScript::default() });
        let err = run_transfer(&env(), &mut kb, &mut backend, &WorkflowConfig::default(), &FrozenClock).unwrap_err();
        assert!(matches!(err, TransferError::Backend(BackendError::Exhausted { .. })));
    }

    #[test]
    fn zero_iterations_rejected() {
        let mut kb = KnowledgeBase::default();
        let mut backend = ScriptedBackend::new(MockScript::default());
        let config = WorkflowConfig { max_iterations: 0, ..WorkflowConfig::default() };
        assert!(matches!(
            run_transfer(&env(), &mut kb, &mut backend, &config, &FrozenClock),
            Err(TransferError::Config(_))
        ));
    }
}
