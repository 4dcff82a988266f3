use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{ExpertRole, PromptBundle};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("backend exhausted: no scripted {role} response for call {call}")]
    Exhausted { role: ExpertRole, call: usize },
    #[error("malformed completion: {0}")]
    Format(String),
}

/// A source of completions. Implementations see the full bundle, including
/// the role, and return the raw model text.
pub trait Backend {
    fn complete(&mut self, bundle: &PromptBundle) -> Result<String, BackendError>;
}

impl<B: Backend + ?Sized> Backend for &mut B {
    fn complete(&mut self, bundle: &PromptBundle) -> Result<String, BackendError> {
        (**self).complete(bundle)
    }
}

/// Calls the backend and rejects blank completions.
pub fn complete(backend: &mut dyn Backend, bundle: &PromptBundle) -> Result<String, BackendError> {
    let text = backend.complete(bundle)?;
    if text.trim().is_empty() {
        return Err(BackendError::Format(String::from("empty completion")));
    }
    Ok(text)
}

/// One scripted response. A conditional entry picks its text by whether
/// the rendered prompt (system and user) contains a needle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScriptEntry {
    Text(String),
    Conditional {
        if_prompt_contains: String,
        then: String,
        #[serde(rename = "else")]
        otherwise: String,
    },
}

impl ScriptEntry {
    fn resolve(&self, bundle: &PromptBundle) -> &str {
        match self {
            ScriptEntry::Text(t) => t,
            ScriptEntry::Conditional { if_prompt_contains, then, otherwise } => {
                let hit = bundle.system.contains(if_prompt_contains.as_str())
                    || bundle.user.contains(if_prompt_contains.as_str());
                if hit {
                    then
                } else {
                    otherwise
                }
            }
        }
    }
}

/// Per-role response lists, consumed in call order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockScript {
    #[serde(default)]
    pub modeler: Vec<ScriptEntry>,
    #[serde(default)]
    pub coder: Vec<ScriptEntry>,
    #[serde(default)]
    pub debugger: Vec<ScriptEntry>,
}

impl MockScript {
    pub fn entries(&self, role: ExpertRole) -> &[ScriptEntry] {
        match role {
            ExpertRole::Modeler => &self.modeler,
            ExpertRole::Coder => &self.coder,
            ExpertRole::Debugger => &self.debugger,
        }
    }
}

/// Deterministic backend replaying a [`MockScript`].
#[derive(Debug, Clone)]
pub struct ScriptedBackend {
    script: MockScript,
    calls: [usize; 3],
}

impl ScriptedBackend {
    pub fn new(script: MockScript) -> Self {
        ScriptedBackend { script, calls: [0; 3] }
    }

    /// Number of calls served so far for `role`.
    pub fn calls(&self, role: ExpertRole) -> usize {
        self.calls[role as usize]
    }
}

impl Backend for ScriptedBackend {
    fn complete(&mut self, bundle: &PromptBundle) -> Result<String, BackendError> {
        let n = &mut self.calls[bundle.role as usize];
        let entry = self
            .script
            .entries(bundle.role)
            .get(*n)
            .ok_or(BackendError::Exhausted { role: bundle.role, call: *n + 1 })?;
        *n += 1;
        Ok(String::from(entry.resolve(bundle)))
    }
}
