//! Prompt assembly for the three LLM-facing expert roles, the completion
//! backend abstraction and reflection parsing.

mod backend;
mod prompt;
mod reflection;

use core::fmt;

use serde::{Deserialize, Serialize};

pub use backend::{complete, Backend, BackendError, MockScript, ScriptEntry, ScriptedBackend};
pub use prompt::{
    estimate_tokens, render_prompt, FailedAttempt, PromptBundle, PromptContext, PromptError,
    DEFAULT_PROMPT_BUDGET_TOKENS,
};
pub use reflection::{parse_reflection, Reflection};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpertRole {
    Modeler,
    Coder,
    Debugger,
}

impl ExpertRole {
    pub const ALL: [ExpertRole; 3] = [ExpertRole::Modeler, ExpertRole::Coder, ExpertRole::Debugger];

    pub fn as_str(self) -> &'static str {
        match self {
            ExpertRole::Modeler => "modeler",
            ExpertRole::Coder => "coder",
            ExpertRole::Debugger => "debugger",
        }
    }
}

impl fmt::Display for ExpertRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
