//! Legal-grounding analysis: classify each allegation as grounded in law,
//! not grounded, or inconclusive via a search-backed agent.
//!
//! The agent searches the case documents, the statutes corpus, and the
//! jurisprudence corpus. A non-inconclusive conclusion requires at least
//! one search; a conclusion without evidence is downgraded to inconclusive
//! with an audit flag, as is step-budget exhaustion.

use super::PrecautionaryError;
use crate::extraction::EnumeratedItem;
use crate::gateway::react::{RecordingTools, RestrictedTools};
use crate::gateway::{react_loop, Gateway, SearchTools, TraceStatus};
use crate::retrieval::{Citation, CorpusId};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FumusLabel {
    GroundedInLaw,
    NotGrounded,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FumusClassification {
    pub allegation_index: usize,
    pub label: FumusLabel,
    pub rationale: String,
    pub citations: Vec<Citation>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FumusReport {
    pub classifications: Vec<FumusClassification>,
    pub summary: String,
}

/// Corpora the grounding agent may search.
pub const FUMUS_CORPORA: [CorpusId; 3] = [
    CorpusId::CaseDocuments,
    CorpusId::StatutesFederalLaw,
    CorpusId::Jurisprudence,
];

fn parse_fumus_label(conclusion: &str) -> Option<(FumusLabel, String)> {
    let lowered = conclusion.trim().to_lowercase();
    // "not grounded" contains "grounded"; check it first.
    let (label, prefix_len) = if lowered.starts_with("not grounded in law") {
        (FumusLabel::NotGrounded, "not grounded in law".len())
    } else if lowered.starts_with("not grounded") {
        (FumusLabel::NotGrounded, "not grounded".len())
    } else if lowered.starts_with("grounded in law") {
        (FumusLabel::GroundedInLaw, "grounded in law".len())
    } else if lowered.starts_with("inconclusive") {
        (FumusLabel::Inconclusive, "inconclusive".len())
    } else {
        return None;
    };
    let rest = conclusion.trim()[prefix_len..]
        .trim_start_matches([' ', ':', ',', ';', '-', '—'])
        .trim()
        .to_string();
    let rationale = if rest.is_empty() {
        conclusion.trim().to_string()
    } else {
        rest
    };
    Some((label, rationale))
}

/// Classify one allegation. Requires the external corpora to be indexed.
pub fn classify_allegation_fumus(
    allegation: &EnumeratedItem,
    tools: &dyn SearchTools,
    gateway: &Gateway,
    step_budget: usize,
    fan_out: usize,
) -> Result<FumusClassification, PrecautionaryError> {
    assert!(!allegation.text.is_empty(), "allegation text must be nonempty");

    let available = tools.available();
    let allowed: Vec<CorpusId> = FUMUS_CORPORA
        .iter()
        .copied()
        .filter(|c| available.contains(c))
        .collect();
    let restricted = RestrictedTools::new(tools, allowed);
    let recording = RecordingTools::new(&restricted);

    let task_prompt = format!(
        "## Task: legal-grounding\nallegation {}: {}\n\nSearch the statutes and jurisprudence \
         corpora for the laws this allegation invokes and for precedent, then conclude with \
         one of: grounded in law, not grounded in law, inconclusive — followed by a short \
         justification.",
        allegation.index, allegation.text
    );
    let trace = react_loop(gateway, &recording, &task_prompt, step_budget, fan_out)?;
    let citations = recording.citations();

    if trace.status == TraceStatus::BudgetExhausted {
        gateway.flag(format!(
            "allegation {}: step budget exhausted, classification defaulted to inconclusive",
            allegation.index
        ));
        return Ok(FumusClassification {
            allegation_index: allegation.index,
            label: FumusLabel::Inconclusive,
            rationale: "The grounding agent exhausted its step budget before reaching a \
                        conclusion."
                .to_string(),
            citations,
        });
    }

    let conclusion = trace.conclusion().to_string();
    let Some((label, rationale)) = parse_fumus_label(&conclusion) else {
        gateway.flag(format!(
            "allegation {}: unparseable grounding conclusion, defaulted to inconclusive",
            allegation.index
        ));
        return Ok(FumusClassification {
            allegation_index: allegation.index,
            label: FumusLabel::Inconclusive,
            rationale: format!("The agent's conclusion could not be classified: {conclusion}"),
            citations,
        });
    };

    // A non-inconclusive label needs at least one search behind it.
    if label != FumusLabel::Inconclusive && !trace.searched() {
        gateway.flag(format!(
            "allegation {}: concluded without searching, downgraded to inconclusive",
            allegation.index
        ));
        return Ok(FumusClassification {
            allegation_index: allegation.index,
            label: FumusLabel::Inconclusive,
            rationale: format!(
                "The agent concluded without consulting any corpus; original conclusion: \
                 {conclusion}"
            ),
            citations,
        });
    }

    Ok(FumusClassification {
        allegation_index: allegation.index,
        label,
        rationale,
        citations,
    })
}

/// Classify every allegation and synthesize the summary paragraph.
pub fn fumus_report(
    allegations: &[EnumeratedItem],
    tools: &dyn SearchTools,
    gateway: &Gateway,
    step_budget: usize,
    fan_out: usize,
) -> Result<FumusReport, PrecautionaryError> {
    let mut classifications = Vec::with_capacity(allegations.len());
    for allegation in allegations {
        classifications.push(classify_allegation_fumus(
            allegation,
            tools,
            gateway,
            step_budget,
            fan_out,
        )?);
    }
    let summary = summarize(&classifications);
    Ok(FumusReport {
        classifications,
        summary,
    })
}

fn summarize(classifications: &[FumusClassification]) -> String {
    let count = |label: FumusLabel| {
        classifications
            .iter()
            .filter(|c| c.label == label)
            .count()
    };
    let grounded = count(FumusLabel::GroundedInLaw);
    let not_grounded = count(FumusLabel::NotGrounded);
    let inconclusive = count(FumusLabel::Inconclusive);
    let mut out = format!(
        "Of the {} allegation(s), {grounded} appear grounded in law, {not_grounded} not \
         grounded, and {inconclusive} inconclusive.",
        classifications.len()
    );
    for c in classifications {
        let word = match c.label {
            FumusLabel::GroundedInLaw => "grounded in law",
            FumusLabel::NotGrounded => "not grounded in law",
            FumusLabel::Inconclusive => "inconclusive",
        };
        out.push_str(&format!(" Allegation {}: {word}.", c.allegation_index));
    }
    out
}
