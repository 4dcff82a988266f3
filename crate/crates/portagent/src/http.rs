//! Chat-completions HTTP backend.

use std::thread;
use std::time::Duration;

use portagent_core::llm::{Backend, BackendError, PromptBundle};
use serde_json::{json, Value};

pub const ENV_URL: &str = "PORTAGENT_LLM_URL";
pub const ENV_MODEL: &str = "PORTAGENT_LLM_MODEL";
pub const ENV_KEY: &str = "PORTAGENT_LLM_KEY";

/// Posts `{"model", "temperature": 0, "messages": [system, user]}` and takes
/// the first choice. Clones share the connection pool, so one clone per
/// concurrent run is cheap.
#[derive(Clone)]
pub struct HttpBackend {
    agent: ureq::Agent,
    url: String,
    model: String,
    key: Option<String>,
    retries: u32,
    backoff: Duration,
}

impl std::fmt::Debug for HttpBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpBackend")
            .field("url", &self.url)
            .field("model", &self.model)
            .field("key", &self.key.as_ref().map(|_| "<set>"))
            .finish()
    }
}

impl HttpBackend {
    pub fn new(url: impl Into<String>, model: impl Into<String>, key: Option<String>) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(600)))
            .http_status_as_error(false)
            .build()
            .into();
        HttpBackend { agent, url: url.into(), model: model.into(), key, retries: 2, backoff: Duration::from_secs(2) }
    }

    /// Reads the endpoint, model and key from the environment.
    pub fn from_env() -> Result<Self, String> {
        let var = |name: &str| std::env::var(name).ok().filter(|v| !v.is_empty());
        let url = var(ENV_URL).ok_or_else(|| format!("{ENV_URL} is not set"))?;
        let model = var(ENV_MODEL).ok_or_else(|| format!("{ENV_MODEL} is not set"))?;
        Ok(HttpBackend::new(url, model, var(ENV_KEY)))
    }

    pub fn with_retry(mut self, retries: u32, backoff: Duration) -> Self {
        self.retries = retries;
        self.backoff = backoff;
        self
    }

    pub fn request_body(&self, bundle: &PromptBundle) -> Value {
        json!({
            "model": self.model,
            "temperature": 0,
            "messages": [
                {"role": "system", "content": bundle.system},
                {"role": "user", "content": bundle.user},
            ],
        })
    }

    fn attempt(&self, body: &Value) -> Result<String, BackendError> {
        let mut req = self.agent.post(&self.url).header("Content-Type", "application/json");
        if let Some(key) = &self.key {
            req = req.header("Authorization", format!("Bearer {key}"));
        }
        let mut resp = req.send_json(body).map_err(|e| BackendError::Transport(e.to_string()))?;
        let status = resp.status();
        let text = resp.body_mut().read_to_string().map_err(|e| BackendError::Transport(e.to_string()))?;
        if !status.is_success() {
            let snippet: String = text.chars().take(300).collect();
            return Err(BackendError::Transport(format!("HTTP {status}: {snippet}")));
        }
        extract_completion(&text)
    }
}

/// First choice's `message.content`, or `text` for completion-style APIs.
pub fn extract_completion(body: &str) -> Result<String, BackendError> {
    let v: Value =
        serde_json::from_str(body).map_err(|e| BackendError::Format(format!("response is not JSON: {e}")))?;
    let choice = v.get("choices").and_then(|c| c.get(0));
    choice
        .and_then(|c| c.pointer("/message/content").or_else(|| c.get("text")))
        .and_then(Value::as_str)
        .map(str::to_owned)
        .ok_or_else(|| BackendError::Format("response has no choices[0] text".into()))
}

impl Backend for HttpBackend {
    fn complete(&mut self, bundle: &PromptBundle) -> Result<String, BackendError> {
        let body = self.request_body(bundle);
        let mut tries = 0;
        loop {
            match self.attempt(&body) {
                Err(BackendError::Transport(_)) if tries < self.retries => {
                    tries += 1;
                    thread::sleep(self.backoff);
                }
                other => return other,
            }
        }
    }
}
