//! Mock script files and the `--llm` backend choice.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use portagent_core::env::ScenarioKind;
use portagent_core::llm::{Backend, MockScript, ScriptedBackend};
use serde::{Deserialize, Serialize};

use crate::http::HttpBackend;
use crate::io::{self, IoError};

/// Scripts for a whole suite, resolved per instance: an entry under
/// `by_instance` wins over `by_scenario`, which wins over `default`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteScript {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<MockScript>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub by_scenario: BTreeMap<ScenarioKind, MockScript>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub by_instance: BTreeMap<String, MockScript>,
}

/// A mock file holds either one per-role script, replayed fresh for every
/// run, or a suite script.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MockFile {
    Suite(SuiteScript),
    Script(MockScript),
}

impl MockFile {
    pub fn load(path: &Path) -> Result<Self, IoError> {
        let text = io::read_text(path)?;
        let value: serde_json::Value = io::decode_json(&path.display().to_string(), &text)?;
        let suite_keys = ["default", "by_scenario", "by_instance"];
        let is_suite =
            value.as_object().is_some_and(|o| !o.is_empty() && o.keys().all(|k| suite_keys.contains(&k.as_str())));
        if is_suite {
            io::decode_json(&path.display().to_string(), &text).map(MockFile::Suite)
        } else {
            io::decode_json(&path.display().to_string(), &text).map(MockFile::Script)
        }
    }

    pub fn resolve(&self, instance: &str, scenario: Option<ScenarioKind>) -> Option<&MockScript> {
        match self {
            MockFile::Script(s) => Some(s),
            MockFile::Suite(s) => s
                .by_instance
                .get(instance)
                .or_else(|| scenario.and_then(|k| s.by_scenario.get(&k)))
                .or(s.default.as_ref()),
        }
    }
}

/// Parsed `--llm` value.
#[derive(Debug, Clone)]
pub enum LlmChoice {
    Mock { path: PathBuf, file: MockFile },
    Http(HttpBackend),
}

impl LlmChoice {
    /// Accepts `mock:<path>` or `http`.
    pub fn parse(spec: &str) -> Result<Self, String> {
        if let Some(path) = spec.strip_prefix("mock:") {
            let path = PathBuf::from(path);
            let file = MockFile::load(&path).map_err(|e| e.to_string())?;
            Ok(LlmChoice::Mock { path, file })
        } else if spec == "http" {
            HttpBackend::from_env().map(LlmChoice::Http)
        } else {
            Err(format!("--llm must be mock:<script.json> or http, got {spec:?}"))
        }
    }

    /// Label recorded in reports.
    pub fn label(&self) -> String {
        match self {
            LlmChoice::Mock { path, .. } => {
                format!("mock:{}", path.file_name().unwrap_or(path.as_os_str()).to_string_lossy())
            }
            LlmChoice::Http(_) => "http".into(),
        }
    }

    /// A fresh backend for one run.
    pub fn backend_for(
        &self,
        instance: &str,
        scenario: Option<ScenarioKind>,
    ) -> Result<Box<dyn Backend + Send>, String> {
        match self {
            LlmChoice::Mock { file, .. } => file
                .resolve(instance, scenario)
                .map(|s| Box::new(ScriptedBackend::new(s.clone())) as Box<dyn Backend + Send>)
                .ok_or_else(|| format!("mock file has no script for instance {instance}")),
            LlmChoice::Http(h) => Ok(Box::new(h.clone())),
        }
    }
}
