//! Command-line interface.
//!
//! Exit codes: 0 success, 1 agent exhausted or scenario infeasible, 2
//! configuration or IO error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use portagent_core::bench::{Ablation, SuiteConfig};
use portagent_core::env::{generate_instances, ExpertiseLevel, ScenarioKind};
use portagent_core::knowledge::{Exemplar, KnowledgeBase};
use portagent_core::solver::{oracle_solve, SolveErrorKind, DEFAULT_TIME_LIMIT_SECS};
use portagent_core::workflow::{run_transfer, TransferStatus, WorkflowConfig};

use crate::bench::{run_benchmark, write_outputs};
use crate::clock::SystemClock;
use crate::mock::LlmChoice;
use crate::{fixtures, io, kb_store};

#[derive(Debug, Parser)]
#[command(
    name = "portagent",
    version,
    about = "Turns natural-language terminal requirements into solved AGV dispatching models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the expert workflow on one environment.
    Run(RunArgs),
    /// Run a benchmark suite and write reports.
    Bench(BenchArgs),
    /// Solve a structured scenario directly.
    Oracle(OracleArgs),
    /// Inspect or extend a knowledge-base directory.
    Kb {
        #[command(subcommand)]
        command: KbCommand,
    },
    /// Write one of the shipped mock scripts.
    Mockgen(MockgenArgs),
    /// Write the input files of one benchmark instance.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub net: PathBuf,
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub reqs: PathBuf,
    /// Knowledge-base directory; the built-in seed base when omitted.
    #[arg(long)]
    pub kb: Option<PathBuf>,
    /// `mock:<script.json>` or `http`.
    #[arg(long)]
    pub llm: String,
    #[arg(long, default_value_t = 1)]
    pub kshot: usize,
    #[arg(long, default_value_t = 3)]
    pub max_iter: usize,
    #[arg(long)]
    pub no_rag: bool,
    #[arg(long)]
    pub no_self_correction: bool,
    /// Same switches as `bench --ablation`.
    #[arg(long, value_parser = parse_ablation)]
    pub ablation: Option<Ablation>,
    #[arg(long, default_value_t = DEFAULT_TIME_LIMIT_SECS)]
    pub time_limit: f64,
    /// Write the full transfer trace here.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Write the solution here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Append a successful program to the `--kb` directory.
    #[arg(long, requires = "kb")]
    pub persist_kb: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// `default` or a suite JSON file.
    #[arg(long, default_value = "default")]
    pub suite: String,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `mock:<script.json>` or `http`.
    #[arg(long)]
    pub llm: String,
    #[arg(long)]
    pub kshot: Option<usize>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long, value_parser = parse_ablation)]
    pub ablation: Option<Ablation>,
    #[arg(long)]
    pub kb: Option<PathBuf>,
    /// Let later instances retrieve exemplars accumulated earlier in the run.
    #[arg(long)]
    pub within_run_learning: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub net: PathBuf,
    #[arg(long)]
    pub config: PathBuf,
    /// Scenario spec JSON; `{}` for none.
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, default_value = "solution.json")]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum KbCommand {
    /// Print primitive and exemplar ids.
    List {
        #[arg(long)]
        kb: Option<PathBuf>,
    },
    /// Validate an exemplar file and add it to the base.
    Add {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        exemplar: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct MockgenArgs {
    /// golden, fault_injection, parse_then_fix or three_failures.
    pub name: String,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_parser = parse_scenario)]
    pub scenario: ScenarioKind,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// 1-based instance number within the scenario.
    #[arg(long, default_value_t = 1)]
    pub index: usize,
    #[arg(long, value_parser = parse_level, default_value = "engineer")]
    pub level: ExpertiseLevel,
    #[arg(long)]
    pub out_dir: PathBuf,
}

fn parse_ablation(s: &str) -> Result<Ablation, String> {
    Ablation::parse(s).ok_or_else(|| format!("expected none, no-rag or no-self-correction, got {s:?}"))
}

fn parse_scenario(s: &str) -> Result<ScenarioKind, String> {
    ScenarioKind::parse(s)
        .ok_or_else(|| format!("expected road_closure, forbidden_edge_vehicle or designated_route, got {s:?}"))
}

fn parse_level(s: &str) -> Result<ExpertiseLevel, String> {
    ExpertiseLevel::ALL.into_iter().find(|l| l.as_str() == s).ok_or_else(|| format!("unknown expertise level {s:?}"))
}

/// Outcome of a command that did not hit a configuration error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Failed,
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

pub fn execute(cli: Cli) -> Result<Status> {
    match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Kb { command } => cmd_kb(command),
        Command::Mockgen(a) => cmd_mockgen(a),
        Command::Generate(a) => cmd_generate(a),
    }
}

fn load_kb(dir: Option<&Path>) -> Result<KnowledgeBase> {
    match dir {
        Some(d) => Ok(kb_store::load(d)?),
        None => Ok(kb_store::seed()),
    }
}

fn cmd_run(a: RunArgs) -> Result<Status> {
    let env = io::load_environment(&a.net, &a.config, &a.reqs)?;
    let mut kb = load_kb(a.kb.as_deref())?;
    let before = kb.exemplars().len();
    let llm = LlmChoice::parse(&a.llm).map_err(|e| anyhow!(e))?;
    let mut backend = llm.backend_for("run", None).map_err(|e| anyhow!(e))?;
    let ablation = a.ablation.unwrap_or_default();
    let config = WorkflowConfig {
        max_iterations: a.max_iter,
        k_shot: a.kshot,
        use_rag: !a.no_rag && ablation != Ablation::NoRag,
        use_self_correction: !a.no_self_correction && ablation != Ablation::NoSelfCorrection,
        solve_time_limit_secs: a.time_limit,
        ..WorkflowConfig::default()
    };
    let clock = SystemClock::new();
    let outcome = run_transfer(&env, &mut kb, &mut *backend, &config, &clock)?;

    if let Some(path) = &a.trace {
        io::write_json(path, &outcome)?;
    }
    if let (Some(path), Some(sol)) = (&a.out, &outcome.solution) {
        io::write_json(path, sol)?;
    }
    if a.persist_kb {
        if let (Some(dir), Some(ex)) = (&a.kb, kb.exemplars().get(before)) {
            let path = kb_store::save_exemplar(dir, ex)?;
            println!("persisted {} to {}", ex.id, path.display());
        }
    }

    let status = match outcome.status {
        TransferStatus::Solved => "solved",
        TransferStatus::Exhausted => "exhausted",
    };
    println!("status: {status}");
    println!("iterations: {}", outcome.iterations);
    match &outcome.solution {
        Some(s) => println!("Z: {}", s.objective),
        None => {
            if let Some(err) = outcome.last_attempt().and_then(|at| at.error.as_ref()) {
                println!("last error ({}): {}", err.stage.as_str(), err.message);
            }
        }
    }
    Ok(if outcome.status == TransferStatus::Solved { Status::Ok } else { Status::Failed })
}

fn cmd_bench(a: BenchArgs) -> Result<Status> {
    let mut suite =
        if a.suite == "default" { SuiteConfig::default() } else { io::read_json::<SuiteConfig>(Path::new(&a.suite))? };
    if let Some(seed) = a.seed {
        suite.seed = seed;
    }
    if let Some(k) = a.kshot {
        suite.workflow.k_shot = k;
    }
    if let Some(m) = a.max_iter {
        suite.workflow.max_iterations = m;
    }
    if let Some(ab) = a.ablation {
        suite.ablation = ab;
    }
    suite.within_run_learning |= a.within_run_learning;
    suite.validate()?;
    let kb = load_kb(a.kb.as_deref())?;
    let llm = LlmChoice::parse(&a.llm).map_err(|e| anyhow!(e))?;
    let clock = SystemClock::new();
    let run = run_benchmark(&suite, &kb, &llm, &clock)?;
    write_outputs(&a.out, &run)?;

    let o = &run.report.aggregates.overall;
    println!("config: {}", run.report.config.label);
    println!("instances: {}", o.n_total);
    println!("CER: {:.4} ({}/{})", o.cer, o.n_executed, o.n_total);
    println!("SSR: {:.4} ({}/{})", o.ssr, o.n_solved, o.n_total);
    println!("mean iterations: {:.4}", o.mean_iterations);
    for (cat, n) in &o.failures {
        println!("failure {}: {n}", cat.as_str());
    }
    println!("report: {}", a.out.join("report.json").display());
    Ok(Status::Ok)
}

fn cmd_oracle(a: OracleArgs) -> Result<Status> {
    let env = io::load_network_and_fleet(&a.net, &a.config)?;
    let spec = io::read_scenario(&a.scenario)?;
    let clock = SystemClock::new();
    match oracle_solve(&env, &spec, DEFAULT_TIME_LIMIT_SECS, &clock) {
        Ok(sol) => {
            for p in &sol.plans {
                let path: Vec<String> = p.path.iter().map(ToString::to_string).collect();
                println!("{} ({}): cost {} path {}", p.vehicle, p.task, p.cost, path.join(" -> "));
            }
            println!("Z: {}", sol.objective);
            io::write_json(&a.out, &sol)?;
            Ok(Status::Ok)
        }
        Err(e) if e.kind.is_bind() => bail!("scenario does not match the environment: {e}"),
        Err(e) => {
            debug_assert!(matches!(
                e.kind,
                SolveErrorKind::Infeasible | SolveErrorKind::Timeout | SolveErrorKind::DegenerateEdgeReuse
            ));
            println!("infeasible: {e}");
            Ok(Status::Failed)
        }
    }
}

fn cmd_kb(command: KbCommand) -> Result<Status> {
    match command {
        KbCommand::List { kb } => {
            let base = load_kb(kb.as_deref())?;
            for p in base.primitives() {
                println!("primitive {} [{}] {}", p.id, p.category, p.title);
            }
            for e in base.exemplars() {
                println!("exemplar {} {}", e.id, e.description);
            }
            println!("{} primitives, {} exemplars", base.primitives().len(), base.exemplars().len());
        }
        KbCommand::Add { kb, exemplar } => {
            let ex: Exemplar = io::read_json(&exemplar)?;
            let path = kb_store::add(&kb, ex).with_context(|| format!("rejected {}", exemplar.display()))?;
            println!("added {}", path.display());
        }
    }
    Ok(Status::Ok)
}

fn cmd_mockgen(a: MockgenArgs) -> Result<Status> {
    let text = fixtures::generate(&a.name, a.seed).map_err(|e| anyhow!(e))?;
    match &a.out {
        Some(p) => io::write_atomic(p, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(Status::Ok)
}

fn cmd_generate(a: GenerateArgs) -> Result<Status> {
    if a.index == 0 {
        bail!("--index is 1-based");
    }
    let bases = generate_instances(a.seed, a.scenario, a.index)?;
    let base = bases.last().expect("index >= 1 yields instances");
    let env = base.env(a.level)?;
    io::write_json(&a.out_dir.join("network.json"), &env.net.to_file())?;
    io::write_json(&a.out_dir.join("config.json"), &env.config)?;
    io::write_json(&a.out_dir.join("requirements.json"), &env.reqs)?;
    io::write_json(&a.out_dir.join("scenario.json"), &base.spec)?;
    println!("wrote {} ({})", a.out_dir.display(), base.id(a.level));
    Ok(Status::Ok)
}
