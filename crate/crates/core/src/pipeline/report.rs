//! Per-stage run accounting: status, wall time, tokens, estimated cost.
//! The report is returned to the caller (and printed by the CLI), never
//! persisted into the workspace, so reruns stay byte-reproducible.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageStatus {
    Ran,
    /// Inputs digest matched the persisted envelope; nothing re-executed.
    SkippedFresh,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: String,
    pub status: StageStatus,
    pub duration_ms: u64,
    pub tokens_in: usize,
    pub tokens_out: usize,
    pub estimated_cost: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub case_id: String,
    pub stages: Vec<StageReport>,
    pub total_duration_ms: u64,
    pub total_tokens_in: usize,
    pub total_tokens_out: usize,
    pub total_estimated_cost: f64,
}

impl RunReport {
    pub fn new(case_id: &str, stages: Vec<StageReport>) -> Self {
        let total_duration_ms = stages.iter().map(|s| s.duration_ms).sum();
        let total_tokens_in = stages.iter().map(|s| s.tokens_in).sum();
        let total_tokens_out = stages.iter().map(|s| s.tokens_out).sum();
        let total_estimated_cost = stages.iter().map(|s| s.estimated_cost).sum();
        Self {
            case_id: case_id.to_string(),
            stages,
            total_duration_ms,
            total_tokens_in,
            total_tokens_out,
            total_estimated_cost,
        }
    }

    pub fn stage(&self, name: &str) -> Option<&StageReport> {
        self.stages.iter().find(|s| s.stage == name)
    }
}
