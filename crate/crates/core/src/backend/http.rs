use std::time::Duration;

use serde::Deserialize;
use serde_json::json;

use super::{Backend, BackendError, CompletionRequest, CompletionResponse, TokenUsage};

pub const DEFAULT_ENDPOINT: &str = "https://api.openai.com/v1/completions";
pub const DEFAULT_API_KEY_ENV: &str = "OPENAI_API_KEY";

/// Client for an OpenAI-style `/v1/completions` endpoint.
pub struct HttpBackend {
    endpoint: String,
    api_key: Option<String>,
    agent: ureq::Agent,
}

#[derive(Deserialize)]
struct Choice {
    text: String,
}

#[derive(Deserialize)]
struct Usage {
    #[serde(default)]
    prompt_tokens: u64,
    #[serde(default)]
    completion_tokens: u64,
}

#[derive(Deserialize)]
struct Reply {
    choices: Vec<Choice>,
    #[serde(default)]
    usage: Option<Usage>,
}

fn transient(message: impl Into<String>) -> BackendError {
    BackendError::Transport { message: message.into(), transient: true }
}

impl HttpBackend {
    pub fn new(endpoint: impl Into<String>, api_key: Option<String>, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(timeout))
            .build()
            .new_agent();
        HttpBackend { endpoint: endpoint.into(), api_key, agent }
    }

    /// Reads the key from `key_env`; a missing key is only an error once the server rejects the call.
    pub fn from_env(endpoint: impl Into<String>, key_env: &str) -> Self {
        Self::new(endpoint, std::env::var(key_env).ok(), Duration::from_secs(120))
    }

    fn classify(status: u16, body: String) -> BackendError {
        match status {
            401 | 403 => BackendError::Auth(body),
            400 if body.contains("maximum context length") || body.contains("context_length") => {
                BackendError::ContextLength(body)
            }
            408 | 409 | 429 | 500..=599 => BackendError::Transport { message: format!("HTTP {status}: {body}"), transient: true },
            _ => BackendError::Http { status, body },
        }
    }
}

impl Backend for HttpBackend {
    fn id(&self) -> String {
        format!("http:{}", self.endpoint)
    }

    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, BackendError> {
        let mut payload = json!({
            "model": request.model,
            "prompt": request.prompt,
            "temperature": request.temperature,
            "top_p": request.top_p,
            "max_tokens": request.max_tokens,
        });
        if let Some(stop) = &request.stop {
            payload["stop"] = json!(stop);
        }
        let mut call = self.agent.post(&self.endpoint).header("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            call = call.header("Authorization", &format!("Bearer {key}"));
        }
        let mut response = call.send_json(&payload).map_err(|e| match e {
            ureq::Error::Io(_) | ureq::Error::Timeout(_) | ureq::Error::ConnectionFailed | ureq::Error::HostNotFound => {
                transient(e.to_string())
            }
            other => BackendError::Transport { message: other.to_string(), transient: false },
        })?;
        let status = response.status().as_u16();
        if status != 200 {
            let body = response.body_mut().read_to_string().unwrap_or_default();
            return Err(Self::classify(status, body));
        }
        let reply: Reply = response
            .body_mut()
            .read_json()
            .map_err(|e| BackendError::Transport { message: format!("malformed completion body: {e}"), transient: false })?;
        let text = reply
            .choices
            .into_iter()
            .next()
            .map(|c| c.text)
            .ok_or_else(|| BackendError::Transport { message: "completion has no choices".into(), transient: false })?;
        let usage = reply
            .usage
            .map(|u| TokenUsage { prompt_tokens: u.prompt_tokens, completion_tokens: u.completion_tokens })
            .unwrap_or_default();
        Ok(CompletionResponse { text, usage, backend_id: self.id(), cached: false })
    }
}
