//! Admissibility examination: one search-and-reason agent per criterion.
//!
//! Each criterion runs its own agent loop over the four corpora, the label
//! is parsed from the agent's conclusion, and the supporting rationale comes
//! from an evidence-grounded reasoning pass over everything the agent
//! retrieved. Criteria are examined in enum order; a content-level failure
//! on one criterion (exhausted budget, unparseable verdict) degrades that
//! verdict to not-applicable with an audit flag instead of aborting the
//! other four, while infrastructure failures (unscripted request, transport)
//! abort the examination.

use crate::gateway::react::RecordingTools;
use crate::gateway::{cot_reason, react_loop, Gateway, GatewayError, SearchTools, TraceStatus};
use crate::retrieval::Citation;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Legitimacy,
    Competency,
    ExistenceOfEvidence,
    PublicInterest,
    ClearWriting,
}

impl Criterion {
    pub const ALL: [Criterion; 5] = [
        Criterion::Legitimacy,
        Criterion::Competency,
        Criterion::ExistenceOfEvidence,
        Criterion::PublicInterest,
        Criterion::ClearWriting,
    ];

    pub fn slug(&self) -> &'static str {
        match self {
            Criterion::Legitimacy => "legitimacy",
            Criterion::Competency => "competency",
            Criterion::ExistenceOfEvidence => "existence_of_evidence",
            Criterion::PublicInterest => "public_interest",
            Criterion::ClearWriting => "clear_writing",
        }
    }

    /// Question the agent is asked to settle.
    pub fn question(&self) -> &'static str {
        match self {
            Criterion::Legitimacy => {
                "Was the case submitted by a legitimate plaintiff, as defined in the court's bylaws?"
            }
            Criterion::Competency => {
                "Does the alleged wrongdoing fall within the jurisdiction of the court?"
            }
            Criterion::ExistenceOfEvidence => {
                "Is there enough evidence supporting the plaintiff's claims?"
            }
            Criterion::PublicInterest => {
                "Is the case of public interest, considering potential monetary or non-monetary damage to the federal government?"
            }
            Criterion::ClearWriting => {
                "Is the main document written clearly and objectively?"
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictLabel {
    Yes,
    No,
    Partial,
    NotApplicable,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriterionVerdict {
    pub criterion: Criterion,
    pub label: VerdictLabel,
    pub rationale: String,
    pub citations: Vec<Citation>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub verdicts: Vec<CriterionVerdict>,
    pub overall_admissible: bool,
}

#[derive(Debug, Error)]
pub enum AdmissibilityError {
    #[error("criterion {criterion:?}: could not parse verdict from conclusion {conclusion:?}")]
    VerdictParse {
        criterion: Criterion,
        conclusion: String,
    },
    #[error(transparent)]
    Gateway(#[from] GatewayError),
}

/// The case is admissible iff no criterion is labeled No. Partial and
/// not-applicable verdicts do not block admission; the policy lives here so
/// it can change in one place.
pub fn aggregate_admissibility(verdicts: &[CriterionVerdict]) -> bool {
    !verdicts.iter().any(|v| v.label == VerdictLabel::No)
}

fn parse_label(conclusion: &str) -> Option<VerdictLabel> {
    let lowered = conclusion.trim().to_lowercase();
    // "not applicable" must be checked before "no".
    if lowered.starts_with("not applicable") {
        Some(VerdictLabel::NotApplicable)
    } else if lowered.starts_with("yes") {
        Some(VerdictLabel::Yes)
    } else if lowered.starts_with("partial") {
        Some(VerdictLabel::Partial)
    } else if lowered.starts_with("no") {
        Some(VerdictLabel::No)
    } else {
        None
    }
}

/// Examine one criterion with a search-and-reason agent.
pub fn examine_criterion(
    criterion: Criterion,
    case_context: &str,
    tools: &dyn SearchTools,
    gateway: &Gateway,
    step_budget: usize,
    fan_out: usize,
) -> Result<CriterionVerdict, AdmissibilityError> {
    let recording = RecordingTools::new(tools);
    let task_prompt = format!(
        "## Task: admissibility-examination\ncriterion: {}\n\n{}\n\nCase context:\n{}\n\n\
         Search the corpora for supporting or opposing evidence, then conclude with one of: \
         yes, no, partial, not applicable — followed by a short justification.",
        criterion.slug(),
        criterion.question(),
        case_context,
    );

    let trace = react_loop(gateway, &recording, &task_prompt, step_budget, fan_out)?;
    let citations = recording.citations();

    if trace.status == TraceStatus::BudgetExhausted {
        gateway.flag(format!(
            "criterion {}: step budget exhausted, verdict defaulted to not applicable",
            criterion.slug()
        ));
        return Ok(CriterionVerdict {
            criterion,
            label: VerdictLabel::NotApplicable,
            rationale: "The examination agent exhausted its step budget before reaching a \
                        conclusion; the criterion was left unassessed."
                .to_string(),
            citations,
        });
    }

    let conclusion = trace.conclusion().to_string();
    let label = parse_label(&conclusion).ok_or_else(|| AdmissibilityError::VerdictParse {
        criterion,
        conclusion: conclusion.clone(),
    })?;

    let evidence = recording.evidence_texts();
    let rationale = if evidence.is_empty() {
        conclusion
    } else {
        let question = format!(
            "{} The examining agent concluded: {conclusion}",
            criterion.question()
        );
        cot_reason(gateway, &question, &evidence)?.rationale_paragraph
    };

    Ok(CriterionVerdict {
        criterion,
        label,
        rationale,
        citations,
    })
}

/// Run all five criteria in enum order and aggregate the outcome.
pub fn examine_all(
    case_context: &str,
    tools: &dyn SearchTools,
    gateway: &Gateway,
    step_budget: usize,
    fan_out: usize,
) -> Result<AdmissibilityReport, AdmissibilityError> {
    let mut verdicts = Vec::with_capacity(Criterion::ALL.len());
    for criterion in Criterion::ALL {
        match examine_criterion(criterion, case_context, tools, gateway, step_budget, fan_out) {
            Ok(verdict) => verdicts.push(verdict),
            Err(AdmissibilityError::VerdictParse { conclusion, .. }) => {
                gateway.flag(format!(
                    "criterion {}: unparseable verdict, defaulted to not applicable",
                    criterion.slug()
                ));
                verdicts.push(CriterionVerdict {
                    criterion,
                    label: VerdictLabel::NotApplicable,
                    rationale: format!(
                        "The agent's conclusion could not be mapped to a verdict label: {conclusion}"
                    ),
                    citations: Vec::new(),
                });
            }
            Err(AdmissibilityError::Gateway(e)) => match e {
                GatewayError::MalformedAction { .. } | GatewayError::Parse(_) => {
                    gateway.flag(format!(
                        "criterion {}: {e}; verdict defaulted to not applicable",
                        criterion.slug()
                    ));
                    verdicts.push(CriterionVerdict {
                        criterion,
                        label: VerdictLabel::NotApplicable,
                        rationale: format!("The examination failed: {e}"),
                        citations: Vec::new(),
                    });
                }
                other => return Err(other.into()),
            },
        }
    }
    let overall_admissible = aggregate_admissibility(&verdicts);
    Ok(AdmissibilityReport {
        verdicts,
        overall_admissible,
    })
}
