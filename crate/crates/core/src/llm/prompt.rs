use alloc::format;
use alloc::string::String;
use core::fmt::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ExpertRole;
use crate::dsl::{FENCE_TAG, GRAMMAR};
use crate::env::TerminalEnv;
use crate::knowledge::RetrievedContext;

pub const DEFAULT_PROMPT_BUDGET_TOKENS: usize = 100_000;

const NONE: &str = "(none)";

/// The program and error from the attempt the Debugger is asked about.
#[derive(Debug, Clone, Copy)]
pub struct FailedAttempt<'a> {
    /// Extracted program, or the raw Coder output when extraction failed.
    pub program: &'a str,
    pub error: &'a str,
}

/// Everything a role prompt may draw on.
#[derive(Debug, Clone, Copy)]
pub struct PromptContext<'a> {
    pub env: &'a TerminalEnv,
    /// `None` when retrieval is disabled.
    pub knowledge: Option<&'a RetrievedContext>,
    pub scheme: Option<&'a str>,
    pub failed: Option<FailedAttempt<'a>>,
    /// Correction instructions from earlier attempts, oldest first.
    pub corrections: &'a [String],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub role: ExpertRole,
    pub system: String,
    pub user: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("{role} prompt is missing its {section} section")]
    MissingContext { role: ExpertRole, section: &'static str },
    #[error("{role} prompt needs about {tokens} tokens, over the budget of {budget}")]
    OverBudget { role: ExpertRole, tokens: usize, budget: usize },
}

/// Token estimate used for the budget: characters / 4, rounded up.
pub fn estimate_tokens(text: &str) -> usize {
    text.chars().count().div_ceil(4)
}

const MODELER_SYSTEM: &str = "You are the Modeler of a virtual expert team that configures vehicle \
dispatching systems for automated container terminals. Read the terminal environment and the \
operational requirements, then reason step by step and write a precise modeling scheme: the \
decision variables, the objective and every constraint, stated in terms of concrete nodes, \
directed edges, vehicles and tasks. Output the reasoning followed by the scheme. Do not write code.";

const DEBUGGER_SYSTEM: &str = "You are the Debugger of a virtual expert team that configures \
vehicle dispatching systems. A generated program failed static analysis or execution. Identify \
the root cause, then give a short instruction that tells the Modeler and the Coder how to fix it. \
Reply with exactly two sections, in this order:\nDIAGNOSIS: <root cause>\nCORRECTION: <instruction>";

fn coder_system() -> String {
    format!(
        "You are the Coder of a virtual expert team that configures vehicle dispatching systems. \
Translate the modeling scheme into a program in the {FENCE_TAG} language.\n\n\
Grammar:\n{GRAMMAR}\n\
INT is a node id, STRING is a double-quoted vehicle or task id and `#` starts a comment. \
remove_edge deletes one directed edge for every vehicle; forbid_edge deletes one directed edge \
for a single vehicle; require_subpath forces consecutive nodes somewhere on the path; \
require_exact_path fixes the whole path from origin to destination. A two-way restriction needs \
both directions.\n\n\
Reply with exactly one fenced code block tagged {FENCE_TAG}, for example:\n\
```{FENCE_TAG}\nmodel example\nobjective minimize total_travel_time\nconstraints {{\n  flow_balance all\n}}\n```"
    )
}

fn section(out: &mut String, title: &str, body: &str) {
    let body = body.trim_end();
    let _ = write!(out, "## {title}\n{}\n\n", if body.is_empty() { NONE } else { body });
}

fn knowledge_sections(out: &mut String, knowledge: Option<&RetrievedContext>) {
    let Some(ctx) = knowledge else {
        out.push_str("## Knowledge retrieval\ndisabled\n\n");
        return;
    };
    let mut prims = String::new();
    for p in &ctx.primitives {
        let _ = write!(prims, "### {} [{}] {}\n{}\n\n", p.id, p.category, p.title, p.body.trim_end());
    }
    section(out, "Modeling primitives", &prims);
    let mut exs = String::new();
    for (i, s) in ctx.exemplars.iter().enumerate() {
        let e = &s.exemplar;
        let _ = write!(
            exs,
            "### Exemplar {}: {}\nDescription: {}\nEnvironment: {}\n```{FENCE_TAG}\n{}\n```\n\n",
            i + 1,
            e.id,
            e.description.trim(),
            e.env_digest.trim(),
            e.program.trim_end(),
        );
    }
    section(out, "Exemplars", &exs);
}

fn corrections_section(out: &mut String, corrections: &[String]) {
    let mut body = String::new();
    for (i, c) in corrections.iter().enumerate() {
        let _ = writeln!(body, "{}. {}", i + 1, c);
    }
    section(out, "Correction instructions", &body);
}

/// Assembles the system and user prompt for `role`.
///
/// Sections are always emitted in a fixed order with a `## ` header and
/// `(none)` when empty. The Coder needs a scheme and the Debugger needs a
/// failed attempt.
pub fn render_prompt(
    role: ExpertRole,
    ctx: &PromptContext<'_>,
    budget_tokens: usize,
) -> Result<PromptBundle, PromptError> {
    let missing = |section| PromptError::MissingContext { role, section };
    let mut user = String::new();
    let reqs: String = ctx.env.reqs.texts.iter().map(|t| format!("- {t}\n")).collect();
    section(&mut user, "Requirements", &reqs);
    let _ = write!(user, "## Expertise level\n{}\n\n", ctx.env.reqs.expertise_level.as_str());
    section(&mut user, "Environment", &ctx.env.digest());
    knowledge_sections(&mut user, ctx.knowledge);

    let system = match role {
        ExpertRole::Modeler => String::from(MODELER_SYSTEM),
        ExpertRole::Coder => {
            let scheme = ctx.scheme.ok_or(missing("modeling scheme"))?;
            section(&mut user, "Modeling scheme", scheme);
            coder_system()
        }
        ExpertRole::Debugger => {
            let failed = ctx.failed.ok_or(missing("failed program"))?;
            section(&mut user, "Modeling scheme", ctx.scheme.unwrap_or(""));
            section(&mut user, "Failed program", failed.program);
            section(&mut user, "Error", failed.error);
            String::from(DEBUGGER_SYSTEM)
        }
    };
    corrections_section(&mut user, ctx.corrections);
    while user.ends_with("\n\n") {
        user.pop();
    }

    let tokens = estimate_tokens(&system) + estimate_tokens(&user);
    if tokens > budget_tokens {
        return Err(PromptError::OverBudget { role, tokens, budget: budget_tokens });
    }
    Ok(PromptBundle { role, system, user })
}
