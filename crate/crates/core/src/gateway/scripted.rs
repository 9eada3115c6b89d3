//! Deterministic scripted backend.
//!
//! A transcript maps requests to canned responses, either by exact request
//! key or by an ordered substring-pattern list (every `contains` present,
//! no `absent` present; first matching entry wins). Lookup must be total
//! for a test scenario: an unmatched request is an error, never a silent
//! default.

use super::{BackendError, ChatRequest, LlmBackend};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScriptEntry {
    /// Exact request-key match; takes precedence over patterns when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub contains: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub absent: Vec<String>,
    pub response: String,
}

impl ScriptEntry {
    fn matches(&self, request: &ChatRequest) -> bool {
        if let Some(key) = &self.key {
            return *key == request.request_key;
        }
        if self.contains.is_empty() {
            return false;
        }
        self.contains.iter().all(|s| request.rendered_prompt.contains(s.as_str()))
            && self.absent.iter().all(|s| !request.rendered_prompt.contains(s.as_str()))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScriptedTranscript {
    pub version: u32,
    pub entries: Vec<ScriptEntry>,
}

pub struct ScriptedBackend {
    transcript: ScriptedTranscript,
}

impl ScriptedBackend {
    pub fn new(transcript: ScriptedTranscript) -> Self {
        Self { transcript }
    }

    pub fn from_file(path: &Path) -> Result<Self, BackendError> {
        let body = fs::read_to_string(path)
            .map_err(|e| BackendError::Transport(format!("read transcript {}: {e}", path.display())))?;
        let transcript: ScriptedTranscript = serde_json::from_str(&body)
            .map_err(|e| BackendError::Transport(format!("parse transcript {}: {e}", path.display())))?;
        Ok(Self::new(transcript))
    }

    /// Convenience for unit tests: contains-pattern entries only.
    pub fn from_patterns(entries: Vec<(Vec<&str>, &str)>) -> Self {
        Self::new(ScriptedTranscript {
            version: 1,
            entries: entries
                .into_iter()
                .map(|(contains, response)| ScriptEntry {
                    key: None,
                    contains: contains.into_iter().map(String::from).collect(),
                    absent: Vec::new(),
                    response: response.to_string(),
                })
                .collect(),
        })
    }
}

impl LlmBackend for ScriptedBackend {
    fn complete(&self, request: &ChatRequest) -> Result<String, BackendError> {
        for entry in &self.transcript.entries {
            if entry.matches(request) {
                return Ok(entry.response.clone());
            }
        }
        let preview: String = request.rendered_prompt.chars().take(240).collect();
        Err(BackendError::Unscripted { preview })
    }

    fn name(&self) -> &str {
        "scripted"
    }
}
