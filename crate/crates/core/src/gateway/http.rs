//! JSON chat-completion backend over HTTP.
//!
//! Speaks the common `POST {endpoint}/chat/completions` shape: messages in,
//! `choices[0].message.content` out. The auth token is read from an
//! environment variable named in the config so secrets never live in config
//! files.

use super::{BackendError, ChatRequest, LlmBackend};
use serde::Deserialize;
use serde_json::json;
use std::time::Duration;

pub struct HttpBackend {
    endpoint: String,
    model: String,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

#[derive(Deserialize)]
struct CompletionChoiceMessage {
    content: String,
}

#[derive(Deserialize)]
struct CompletionChoice {
    message: CompletionChoiceMessage,
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<CompletionChoice>,
}

impl HttpBackend {
    pub fn new(endpoint: &str, model: &str, api_key_env: Option<&str>) -> Result<Self, BackendError> {
        let api_key = match api_key_env {
            Some(var) => Some(std::env::var(var).map_err(|_| {
                BackendError::Rejected(format!("auth environment variable {var} is not set"))
            })?),
            None => None,
        };
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(120))
            .build()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        Ok(Self {
            endpoint: endpoint.trim_end_matches('/').to_string(),
            model: model.to_string(),
            api_key,
            client,
        })
    }
}

impl LlmBackend for HttpBackend {
    fn complete(&self, request: &ChatRequest) -> Result<String, BackendError> {
        let url = format!("{}/chat/completions", self.endpoint);
        let body = json!({
            "model": self.model,
            "messages": [{"role": "user", "content": request.rendered_prompt}],
            "max_tokens": request.max_output_tokens,
            "temperature": request.temperature,
        });
        let mut req = self.client.post(&url).json(&body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req
            .send()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        let status = resp.status();
        if status.is_server_error() {
            return Err(BackendError::Transport(format!("server error {status}")));
        }
        if !status.is_success() {
            let text = resp.text().unwrap_or_default();
            return Err(BackendError::Rejected(format!("{status}: {text}")));
        }
        let parsed: CompletionResponse = resp
            .json()
            .map_err(|e| BackendError::Rejected(format!("malformed completion payload: {e}")))?;
        parsed
            .choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or_else(|| BackendError::Rejected("completion had no choices".into()))
    }

    fn name(&self) -> &str {
        "http"
    }
}
