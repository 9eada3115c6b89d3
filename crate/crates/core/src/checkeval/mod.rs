//! Checklist-based text evaluation.
//!
//! The model composes a checklist of atomic elements from one text, then
//! judges the other text item by item. Precision is the candidate-derived
//! checklist verified against the reference; recall is the reference-derived
//! checklist verified against the candidate; F1 is their harmonic mean.

pub mod correlation;
pub mod harness;
pub mod stats;

pub use correlation::{kendall_tau, spearman};
pub use harness::{benchmark_harness, BenchmarkRow, CorrelationResult};
pub use stats::{aggregate_stats, AggregateStats, StatBlock};

use crate::gateway::{truncate_to_budget, Gateway, GatewayError};
use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const CHECKLIST_OUTPUT_TOKENS: usize = 2048;
const JUDGE_OUTPUT_TOKENS: usize = 1024;
const TEXT_SNIPPET_TOKENS: usize = 6000;

#[derive(Debug, Error)]
pub enum CheckEvalError {
    #[error("model output contained no checklist items")]
    ChecklistParse,
    #[error("judgment count mismatch after reprompt: expected {expected}, got {got}")]
    JudgmentParse { expected: usize, got: usize },
    #[error("input is empty")]
    EmptyInput,
    #[error("length mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("need at least two observations, got {0}")]
    InsufficientLength(usize),
    #[error("correlation undefined: zero variance in {0}")]
    Undefined(&'static str),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChecklistSource {
    Reference,
    Candidate,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChecklistItem {
    pub item_id: String,
    pub statement: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checklist {
    pub source: ChecklistSource,
    pub items: Vec<ChecklistItem>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ItemJudgment {
    pub item_id: String,
    pub present: bool,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct EvalScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl EvalScores {
    /// F1 is `2PR/(P+R)` when `P+R > 0`, else zero.
    pub fn from_precision_recall(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self {
            precision,
            recall,
            f1,
        }
    }
}

static CHECKLIST_ITEM: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"^\s*(?:\d+[.)]\s*|[-*]\s+)(.+)$").expect("valid regex"));
static JUDGMENT_LINE: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"^\s*(\d+)\s*[.):]\s*(yes|no)\b").expect("valid regex"));

/// Parse enumerated or bulleted lines into checklist items, flattening any
/// nesting (every bullet line counts, in order).
pub fn parse_checklist_items(response: &str) -> Vec<String> {
    response
        .lines()
        .filter_map(|line| CHECKLIST_ITEM.captures(line))
        .map(|caps| caps[1].trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

/// Ask the model to compose a checklist of the elements in `text`.
pub fn generate_checklist(
    text: &str,
    source: ChecklistSource,
    gateway: &Gateway,
) -> Result<Checklist, CheckEvalError> {
    if text.trim().is_empty() {
        return Err(CheckEvalError::EmptyInput);
    }
    let body = truncate_to_budget(text, TEXT_SNIPPET_TOKENS, gateway.tokenizer())?;
    let source_name = match source {
        ChecklistSource::Reference => "reference",
        ChecklistSource::Candidate => "candidate",
    };
    let prompt = format!(
        "## Task: compose-checklist\nsource: {source_name}\n\nCompose a checklist of the \
         elements that should be present in a document consistent with the text below. \
         Write one atomic verifiable element per line, as a numbered list.\n\nText:\n{body}\n"
    );
    let response = gateway.complete(&prompt, CHECKLIST_OUTPUT_TOKENS)?.text;
    let statements = parse_checklist_items(&response);
    if statements.is_empty() {
        return Err(CheckEvalError::ChecklistParse);
    }
    Ok(Checklist {
        source,
        items: statements
            .into_iter()
            .enumerate()
            .map(|(i, statement)| ChecklistItem {
                item_id: (i + 1).to_string(),
                statement,
            })
            .collect(),
    })
}

fn parse_judgments(response: &str, expected: usize) -> Vec<(usize, bool)> {
    let mut out = Vec::new();
    for line in response.lines() {
        if let Some(caps) = JUDGMENT_LINE.captures(line.trim().to_lowercase().as_str()) {
            let number: usize = caps[1].parse().unwrap_or(0);
            if number >= 1 && number <= expected && !out.iter().any(|(n, _)| *n == number) {
                out.push((number, &caps[2] == "yes"));
            }
        }
    }
    out
}

/// Judge whether each checklist item is present in `target_text`; exactly
/// one judgment per item. A count mismatch earns one reprompt.
pub fn judge_against(
    checklist: &Checklist,
    target_text: &str,
    gateway: &Gateway,
) -> Result<Vec<ItemJudgment>, CheckEvalError> {
    if checklist.items.is_empty() || target_text.trim().is_empty() {
        return Err(CheckEvalError::EmptyInput);
    }
    let body = truncate_to_budget(target_text, TEXT_SNIPPET_TOKENS, gateway.tokenizer())?;
    let listing = checklist
        .items
        .iter()
        .enumerate()
        .map(|(i, item)| format!("{}. {}", i + 1, item.statement))
        .collect::<Vec<_>>()
        .join("\n");
    let prompt = format!(
        "## Task: judge-checklist\nitems: {}\n\nFor each checklist element below, decide \
         whether it is present in the target text.\n\nChecklist:\n{listing}\n\nTarget \
         text:\n{body}\n\nReply with one line per element: \"<number>. yes\" or \
         \"<number>. no\".\n",
        checklist.items.len()
    );
    let expected = checklist.items.len();

    let response = gateway.complete(&prompt, JUDGE_OUTPUT_TOKENS)?.text;
    let mut parsed = parse_judgments(&response, expected);
    if parsed.len() != expected {
        let reprompt = format!(
            "{prompt}\nReminder: reply with exactly {expected} lines, one per element, \
             formatted \"<number>. yes\" or \"<number>. no\".\n"
        );
        let response = gateway.complete(&reprompt, JUDGE_OUTPUT_TOKENS)?.text;
        parsed = parse_judgments(&response, expected);
        if parsed.len() != expected {
            return Err(CheckEvalError::JudgmentParse {
                expected,
                got: parsed.len(),
            });
        }
    }

    parsed.sort_by_key(|(n, _)| *n);
    Ok(parsed
        .into_iter()
        .map(|(n, present)| ItemJudgment {
            item_id: checklist.items[n - 1].item_id.clone(),
            present,
        })
        .collect())
}

/// Fraction of judged-present items.
pub fn presence_ratio(judgments: &[ItemJudgment]) -> f64 {
    if judgments.is_empty() {
        return 0.0;
    }
    judgments.iter().filter(|j| j.present).count() as f64 / judgments.len() as f64
}

/// Score a candidate text against a reference text.
pub fn score_pair(
    reference_text: &str,
    candidate_text: &str,
    gateway: &Gateway,
) -> Result<EvalScores, CheckEvalError> {
    if reference_text.trim().is_empty() || candidate_text.trim().is_empty() {
        return Err(CheckEvalError::EmptyInput);
    }
    // Recall: reference-derived checklist verified against the candidate.
    let reference_checklist =
        generate_checklist(reference_text, ChecklistSource::Reference, gateway)?;
    let recall_judgments = judge_against(&reference_checklist, candidate_text, gateway)?;
    let recall = presence_ratio(&recall_judgments);

    // Precision: candidate-derived checklist verified against the reference.
    let candidate_checklist =
        generate_checklist(candidate_text, ChecklistSource::Candidate, gateway)?;
    let precision_judgments = judge_against(&candidate_checklist, reference_text, gateway)?;
    let precision = presence_ratio(&precision_judgments);

    Ok(EvalScores::from_precision_recall(precision, recall))
}
