//! Pipeline configuration: one TOML or JSON file. Secrets never live here;
//! the HTTP backend reads its token from the environment variable named in
//! the config. Relative paths resolve against the config file's directory.

use crate::recommendations::Guidelines;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const MIN_CONTEXT_BUDGET: usize = 1024;

fn default_context_budget() -> usize {
    32000
}

fn default_active_contract_keywords() -> Vec<String> {
    vec![
        "contrato assinado".to_string(),
        "contrato vigente".to_string(),
        "contrato nº".to_string(),
    ]
}

fn default_step_budget() -> usize {
    6
}

fn default_fan_out() -> usize {
    5
}

fn default_delay_doc_budget() -> usize {
    8
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config {path}: {message}")]
    Load { path: String, message: String },
    #[error("context budget {0} is below the minimum {MIN_CONTEXT_BUDGET}")]
    BudgetTooSmall(usize),
    #[error("referenced path does not exist: {0}")]
    MissingPath(String),
    #[error("unsupported config extension (expected .toml or .json): {0}")]
    UnknownFormat(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackendConfig {
    /// Deterministic transcript replay.
    Scripted { transcript: PathBuf },
    /// JSON chat-completion endpoint; the auth token comes from
    /// `api_key_env` when set.
    Http {
        endpoint: String,
        model: String,
        #[serde(default)]
        api_key_env: Option<String>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentConfig {
    /// Steps per criterion/allegation agent loop.
    #[serde(default = "default_step_budget")]
    pub step_budget: usize,
    /// Passages retrieved per query.
    #[serde(default = "default_fan_out")]
    pub fan_out: usize,
    /// Documents given individual delay-detection calls before batching.
    #[serde(default = "default_delay_doc_budget")]
    pub delay_doc_budget: usize,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            step_budget: default_step_budget(),
            fan_out: default_fan_out(),
            delay_doc_budget: default_delay_doc_budget(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CostConfig {
    /// Price per 1000 prompt tokens.
    #[serde(default)]
    pub input_per_1k: f64,
    /// Price per 1000 completion tokens.
    #[serde(default)]
    pub output_per_1k: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub backend: BackendConfig,
    #[serde(default = "default_context_budget")]
    pub context_budget_tokens: usize,
    /// Corpus slug -> JSON-lines file with {corpus, doc_id, text} rows.
    /// The case-documents corpus is always built from the bundle.
    #[serde(default)]
    pub corpora: BTreeMap<String, PathBuf>,
    /// Basic-information form schema (JSON list of fields); the built-in
    /// 26-field schema applies when unset.
    #[serde(default)]
    pub form_schema: Option<PathBuf>,
    /// Field name -> hand-crafted retrieval query.
    #[serde(default)]
    pub crafted_queries: BTreeMap<String, String>,
    #[serde(default = "default_active_contract_keywords")]
    pub active_contract_keywords: Vec<String>,
    /// Exemplar text shown when extracting allegations and requests.
    #[serde(default)]
    pub allegations_example: Option<String>,
    /// Drafting guidelines/exemplars for instruction sections.
    #[serde(default)]
    pub exemplars: Guidelines,
    /// Reranker over BM25 candidates: "identity" (default) or "none".
    #[serde(default)]
    pub reranker: Option<String>,
    #[serde(default)]
    pub rate_limit_rpm: u32,
    #[serde(default)]
    pub agent: AgentConfig,
    #[serde(default)]
    pub cost: CostConfig,
    /// Pin every timestamp and report zero latencies; required for
    /// byte-reproducible runs.
    #[serde(default)]
    pub fixed_timestamp: Option<u64>,
    /// Treat a primary extraction whose invalid-character ratio exceeds
    /// this as failed, forcing the OCR fallback. Off by default.
    #[serde(default)]
    pub quality_veto_threshold: Option<f64>,
    /// Canned OCR output per doc id for the stub backend.
    #[serde(default)]
    pub ocr_stub_texts: BTreeMap<String, String>,
}

impl PipelineConfig {
    /// Minimal scripted-backend config for tests and embedded runs.
    pub fn scripted(transcript: PathBuf) -> Self {
        Self {
            backend: BackendConfig::Scripted { transcript },
            context_budget_tokens: default_context_budget(),
            corpora: BTreeMap::new(),
            form_schema: None,
            crafted_queries: BTreeMap::new(),
            active_contract_keywords: default_active_contract_keywords(),
            allegations_example: None,
            exemplars: Guidelines::default(),
            reranker: None,
            rate_limit_rpm: 0,
            agent: AgentConfig::default(),
            cost: CostConfig::default(),
            fixed_timestamp: Some(0),
            quality_veto_threshold: None,
            ocr_stub_texts: BTreeMap::new(),
        }
    }

    /// Load from TOML or JSON, resolve relative paths against the config's
    /// directory, and validate.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let body = fs::read_to_string(path).map_err(|e| ConfigError::Load {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let mut config: PipelineConfig = match path
            .extension()
            .and_then(|e| e.to_str())
            .unwrap_or_default()
        {
            "toml" => toml::from_str(&body).map_err(|e| ConfigError::Load {
                path: path.display().to_string(),
                message: e.to_string(),
            })?,
            "json" => serde_json::from_str(&body).map_err(|e| ConfigError::Load {
                path: path.display().to_string(),
                message: e.to_string(),
            })?,
            other => return Err(ConfigError::UnknownFormat(other.to_string())),
        };
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        config.resolve_paths(base);
        config.validate()?;
        Ok(config)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&p);
            }
        };
        if let BackendConfig::Scripted { transcript } = &mut self.backend {
            resolve(transcript);
        }
        for path in self.corpora.values_mut() {
            resolve(path);
        }
        if let Some(schema) = &mut self.form_schema {
            resolve(schema);
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.context_budget_tokens < MIN_CONTEXT_BUDGET {
            return Err(ConfigError::BudgetTooSmall(self.context_budget_tokens));
        }
        let mut referenced: Vec<&PathBuf> = self.corpora.values().collect();
        if let BackendConfig::Scripted { transcript } = &self.backend {
            referenced.push(transcript);
        }
        if let Some(schema) = &self.form_schema {
            referenced.push(schema);
        }
        for path in referenced {
            if !path.exists() {
                return Err(ConfigError::MissingPath(path.display().to_string()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_toml_with_defaults_and_resolves_paths() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("transcript.json"), r#"{"version":1,"entries":[]}"#).unwrap();
        let config_path = dir.path().join("config.toml");
        fs::write(
            &config_path,
            "[backend]\nkind = \"scripted\"\ntranscript = \"transcript.json\"\n",
        )
        .unwrap();
        let config = PipelineConfig::load(&config_path).unwrap();
        assert_eq!(config.context_budget_tokens, 32000);
        assert_eq!(config.agent.step_budget, 6);
        assert_eq!(config.active_contract_keywords.len(), 3);
        match &config.backend {
            BackendConfig::Scripted { transcript } => assert!(transcript.is_absolute()),
            other => panic!("unexpected backend {other:?}"),
        }
    }

    #[test]
    fn budget_floor_is_enforced() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("t.json"), "{}").unwrap();
        let mut config = PipelineConfig::scripted(dir.path().join("t.json"));
        config.context_budget_tokens = 100;
        assert!(matches!(
            config.validate(),
            Err(ConfigError::BudgetTooSmall(100))
        ));
    }

    #[test]
    fn missing_referenced_paths_fail_at_load() {
        let config = PipelineConfig::scripted(PathBuf::from("/nonexistent/transcript.json"));
        assert!(matches!(
            config.validate(),
            Err(ConfigError::MissingPath(_))
        ));
    }

    #[test]
    fn json_config_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("t.json"), r#"{"version":1,"entries":[]}"#).unwrap();
        let config = PipelineConfig::scripted(dir.path().join("t.json"));
        let config_path = dir.path().join("config.json");
        fs::write(&config_path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
        let loaded = PipelineConfig::load(&config_path).unwrap();
        assert_eq!(loaded.fixed_timestamp, Some(0));
    }
}
