//! Danger-in-delay analysis: a hard-coded rule flow the model cannot
//! override.
//!
//! Steps run strictly in order: flag draft-contract documents so they are
//! excluded from later steps (unless the case has fewer than five documents,
//! in which case everything is considered), detect an active or signed
//! contract (keyword search plus model verification over retrieved
//! passages), detect delay or cancellation events (model judgment only),
//! then decide the verdict from the two booleans. The model's only role is
//! reporting what the documents say; the decision is a pure function.

pub mod fumus;

pub use fumus::{
    classify_allegation_fumus, fumus_report, FumusClassification, FumusLabel, FumusReport,
};

use crate::gateway::{truncate_to_budget, Gateway, GatewayError, SearchTools};
use crate::ingest::ExtractedDocument;
use crate::retrieval::{CorpusId, RetrievalError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exact phrase marking draft-contract documents.
pub const DRAFT_CONTRACT_PHRASE: &str = "minuta de contrato";
/// Below this many documents, no draft-contract exclusion happens.
pub const MIN_DOCS_FOR_EXCLUSION: usize = 5;

const DETECT_OUTPUT_TOKENS: usize = 256;
const DRAFT_OUTPUT_TOKENS: usize = 1024;
const DOC_SNIPPET_TOKENS: usize = 1500;

#[derive(Debug, Error)]
pub enum PrecautionaryError {
    #[error("drafted paragraph contradicts the {verdict:?} verdict after regeneration")]
    DraftMismatch { verdict: PericulumVerdict },
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PericulumVerdict {
    Accepted,
    Rejected,
}

/// Presence of a condition plus the documents evidencing it; the evidence
/// list is nonempty exactly when the condition is present.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct PresenceFinding {
    pub present: bool,
    pub evidence_doc_ids: Vec<String>,
}

impl PresenceFinding {
    pub fn absent() -> Self {
        Self {
            present: false,
            evidence_doc_ids: Vec::new(),
        }
    }
}

/// The findings dictionary: flagged documents, the two detections with
/// their evidence, and the suggested verdict.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct PericulumFinding {
    pub draft_contract_doc_ids: Vec<String>,
    pub active_contract: PresenceFinding,
    pub delay_event: PresenceFinding,
    pub verdict: PericulumVerdict,
}

impl PericulumFinding {
    /// The verdict is always derived from the detections; callers cannot
    /// set it independently.
    pub fn new(
        draft_contract_doc_ids: Vec<String>,
        active_contract: PresenceFinding,
        delay_event: PresenceFinding,
    ) -> Self {
        let verdict = decide_periculum(active_contract.present, delay_event.present);
        Self {
            draft_contract_doc_ids,
            active_contract,
            delay_event,
            verdict,
        }
    }
}

/// Stage product: the findings dictionary plus the drafted paragraph.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct PericulumOutput {
    pub finding: PericulumFinding,
    pub paragraph: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct DraftContractFlags {
    pub flagged: Vec<String>,
    pub considered: Vec<String>,
}

/// Flag documents containing the exact draft-contract phrase
/// (case-insensitive) so later steps skip them. Cases with fewer than five
/// documents keep everything.
pub fn flag_draft_contract_docs(docs: &[ExtractedDocument]) -> DraftContractFlags {
    if docs.len() < MIN_DOCS_FOR_EXCLUSION {
        return DraftContractFlags {
            flagged: Vec::new(),
            considered: docs.iter().map(|d| d.doc_id.clone()).collect(),
        };
    }
    let mut flagged = Vec::new();
    let mut considered = Vec::new();
    for doc in docs {
        if doc.text.to_lowercase().contains(DRAFT_CONTRACT_PHRASE) {
            flagged.push(doc.doc_id.clone());
        } else {
            considered.push(doc.doc_id.clone());
        }
    }
    DraftContractFlags { flagged, considered }
}

/// Hard-coded decision table. An active contract means there is no danger
/// in delay (the court cannot prevent a contract from coming into force);
/// a delay event means execution is already halted; only the absence of
/// both accepts the urgency claim.
pub fn decide_periculum(active_contract: bool, delay_event: bool) -> PericulumVerdict {
    if active_contract || delay_event {
        PericulumVerdict::Rejected
    } else {
        PericulumVerdict::Accepted
    }
}

fn parse_present(response: &str) -> Option<bool> {
    response.lines().find_map(|line| {
        let rest = line.trim().strip_prefix("PRESENT:")?.trim().to_lowercase();
        if rest.starts_with("yes") {
            Some(true)
        } else if rest.starts_with("no") {
            Some(false)
        } else {
            None
        }
    })
}

fn parse_docs_line(response: &str) -> Vec<String> {
    response
        .lines()
        .find_map(|line| line.trim().strip_prefix("DOCS:"))
        .map(|rest| {
            rest.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect()
        })
        .unwrap_or_default()
}

/// Detect an active or signed contract: directly via the configured keyword
/// phrases, indirectly by asking the model to verify over passages retrieved
/// from the case index. Both paths only ever cite considered documents.
pub fn detect_active_contract(
    considered: &[&ExtractedDocument],
    tools: &dyn SearchTools,
    keywords: &[String],
    gateway: &Gateway,
    fan_out: usize,
) -> Result<PresenceFinding, PrecautionaryError> {
    assert!(!considered.is_empty(), "considered documents must be nonempty");

    let mut evidence: Vec<String> = Vec::new();
    for doc in considered {
        let lowered = doc.text.to_lowercase();
        if keywords.iter().any(|k| lowered.contains(&k.to_lowercase())) {
            evidence.push(doc.doc_id.clone());
        }
    }
    let direct_hit = !evidence.is_empty();

    // Indirect path: retrieve candidate passages and let the model verify.
    let considered_ids: Vec<&str> = considered.iter().map(|d| d.doc_id.as_str()).collect();
    let query = keywords.join(" ");
    let mut llm_yes = false;
    match tools.search(CorpusId::CaseDocuments, &query, fan_out) {
        Ok(hits) => {
            let hits: Vec<_> = hits
                .into_iter()
                .filter(|h| considered_ids.contains(&h.hit.doc_id.as_str()))
                .collect();
            if !hits.is_empty() {
                let passages = hits
                    .iter()
                    .enumerate()
                    .map(|(i, h)| {
                        let snippet = gateway.tokenizer().prefix(&h.text, 220);
                        format!("[{}] (doc:{}) {}", i + 1, h.hit.doc_id, snippet)
                    })
                    .collect::<Vec<_>>()
                    .join("\n");
                let prompt = format!(
                    "## Task: verify-active-contract\n\nDo these passages show a goods or service \
                     provision contract that has been signed or is active?\n\nPassages:\n{passages}\n\n\
                     Reply with \"PRESENT: yes\" or \"PRESENT: no\"; when yes, add a second line \
                     \"DOCS: <comma-separated doc ids>\".\n"
                );
                let response = gateway.complete(&prompt, DETECT_OUTPUT_TOKENS)?.text;
                match parse_present(&response) {
                    Some(true) => {
                        llm_yes = true;
                        let cited: Vec<String> = parse_docs_line(&response)
                            .into_iter()
                            .filter(|d| considered_ids.contains(&d.as_str()))
                            .collect();
                        if cited.is_empty() {
                            // Fall back to the documents the model was shown.
                            for h in &hits {
                                if !evidence.contains(&h.hit.doc_id) {
                                    evidence.push(h.hit.doc_id.clone());
                                }
                            }
                        } else {
                            for d in cited {
                                if !evidence.contains(&d) {
                                    evidence.push(d);
                                }
                            }
                        }
                    }
                    Some(false) => {}
                    None => {
                        gateway.flag(
                            "active-contract verification unparseable; treated as no indirect signal",
                        );
                    }
                }
            }
        }
        Err(RetrievalError::EmptyQuery) => {
            gateway.flag("active-contract keyword query tokenized to nothing");
        }
        Err(e) => return Err(e.into()),
    }

    Ok(PresenceFinding {
        present: direct_hit || llm_yes,
        evidence_doc_ids: evidence,
    })
}

/// Detect delay, cancellation, or impediment events. No keyword path: the
/// model judges document content directly, one call per document up to
/// `per_doc_budget`, then one batched call for the remainder.
pub fn detect_delay_events(
    considered: &[&ExtractedDocument],
    gateway: &Gateway,
    per_doc_budget: usize,
) -> Result<PresenceFinding, PrecautionaryError> {
    assert!(!considered.is_empty(), "considered documents must be nonempty");

    let mut evidence: Vec<String> = Vec::new();
    let (individual, batched) = considered.split_at(per_doc_budget.min(considered.len()));

    for doc in individual {
        let body = truncate_to_budget(&doc.text, DOC_SNIPPET_TOKENS, gateway.tokenizer())
            .map_err(PrecautionaryError::Gateway)?;
        let prompt = format!(
            "## Task: detect-delay-events\ndoc: {}\n\nDoes this document evidence any event \
             delaying, canceling, suspending, or impeding a contract from entering into \
             force?\n\nDocument:\n{body}\n\nReply with \"PRESENT: yes\" or \"PRESENT: no\".\n",
            doc.doc_id
        );
        match judged_present(gateway, &prompt)? {
            Some(true) => evidence.push(doc.doc_id.clone()),
            Some(false) => {}
            None => {
                gateway.flag(format!(
                    "delay detection unparseable twice for doc {}; treated as absent",
                    doc.doc_id
                ));
            }
        }
    }

    if !batched.is_empty() {
        let blocks = batched
            .iter()
            .map(|doc| {
                let body = gateway.tokenizer().prefix(&doc.text, 300);
                format!("doc {}:\n{}", doc.doc_id, body)
            })
            .collect::<Vec<_>>()
            .join("\n\n");
        let prompt = format!(
            "## Task: detect-delay-events (batch)\n\nFor each document below, does it evidence \
             any event delaying, canceling, suspending, or impeding a contract from entering \
             into force?\n\n{blocks}\n\nReply with one line per document, formatted \
             \"<doc_id>: yes\" or \"<doc_id>: no\".\n"
        );
        let response = gateway.complete(&prompt, DETECT_OUTPUT_TOKENS)?.text;
        let mut any_line = false;
        for doc in batched {
            for line in response.lines() {
                if let Some(rest) = line.trim().strip_prefix(&format!("{}:", doc.doc_id)) {
                    any_line = true;
                    if rest.trim().to_lowercase().starts_with("yes") {
                        evidence.push(doc.doc_id.clone());
                    }
                }
            }
        }
        if !any_line {
            gateway.flag("batched delay detection response had no recognizable lines");
        }
    }

    Ok(PresenceFinding {
        present: !evidence.is_empty(),
        evidence_doc_ids: evidence,
    })
}

/// One parse attempt plus one reprompt; `None` means both were unparseable.
fn judged_present(gateway: &Gateway, prompt: &str) -> Result<Option<bool>, PrecautionaryError> {
    let response = gateway.complete(prompt, DETECT_OUTPUT_TOKENS)?.text;
    if let Some(v) = parse_present(&response) {
        return Ok(Some(v));
    }
    let reprompt =
        format!("{prompt}\nReminder: reply with exactly \"PRESENT: yes\" or \"PRESENT: no\".\n");
    let response = gateway.complete(&reprompt, DETECT_OUTPUT_TOKENS)?.text;
    Ok(parse_present(&response))
}

/// Draft the paragraph stating the verdict and citing the evidence. The
/// draft must contain the verdict word; one regeneration is attempted
/// before giving up.
pub fn draft_periculum_text(
    finding: &PericulumFinding,
    gateway: &Gateway,
) -> Result<String, PrecautionaryError> {
    let verdict_word = match finding.verdict {
        PericulumVerdict::Accepted => "accepted",
        PericulumVerdict::Rejected => "rejected",
    };
    let summary = serde_json::to_string_pretty(finding).expect("serializable finding");
    let prompt = format!(
        "## Task: draft-periculum-paragraph\n\nDecision rules: the danger-in-delay claim is \
         rejected when an active or signed contract exists (the court cannot prevent a contract \
         from coming into force) or when events show contracting was delayed, canceled, or \
         impeded; it is accepted only when neither holds.\n\nFindings:\n{summary}\n\n\
         Write one paragraph for the instruction document stating that the danger-in-delay \
         claim was {verdict_word}, citing the evidence document ids.\n"
    );

    let draft = gateway.complete(&prompt, DRAFT_OUTPUT_TOKENS)?.text;
    if draft.to_lowercase().contains(verdict_word) {
        return Ok(draft);
    }
    gateway.flag("periculum draft contradicted the verdict; regenerating once");
    let retry_prompt = format!(
        "{prompt}\nThe previous draft did not state the {verdict_word} verdict. Rewrite the \
         paragraph; it must contain the word \"{verdict_word}\".\n"
    );
    let draft = gateway.complete(&retry_prompt, DRAFT_OUTPUT_TOKENS)?.text;
    if draft.to_lowercase().contains(verdict_word) {
        Ok(draft)
    } else {
        Err(PrecautionaryError::DraftMismatch {
            verdict: finding.verdict,
        })
    }
}
