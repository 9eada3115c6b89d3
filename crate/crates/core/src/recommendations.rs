//! Instruction draft assembly from independent, regenerable sections.
//!
//! Each of the five sections is drafted by the model from guidelines,
//! optional exemplar text, and the stage outputs it depends on; the digest
//! of those inputs is recorded on the section so staleness is checkable.
//! Regenerating one section leaves every other section bit-identical, so a
//! correction never forces reprocessing the whole case.

use crate::admissibility::AdmissibilityReport;
use crate::digest::digest_json;
use crate::extraction::{AllegationList, FilledForm};
use crate::gateway::{Gateway, GatewayError};
use crate::precautionary::{FumusReport, PericulumOutput};
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::collections::BTreeMap;
use thiserror::Error;

const SECTION_OUTPUT_TOKENS: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionId {
    BasicInfo,
    ClaimsRequests,
    Admissibility,
    Precautionary,
    Recommendations,
}

impl SectionId {
    pub const ALL: [SectionId; 5] = [
        SectionId::BasicInfo,
        SectionId::ClaimsRequests,
        SectionId::Admissibility,
        SectionId::Precautionary,
        SectionId::Recommendations,
    ];

    pub fn slug(&self) -> &'static str {
        match self {
            SectionId::BasicInfo => "basic_info",
            SectionId::ClaimsRequests => "claims_requests",
            SectionId::Admissibility => "admissibility",
            SectionId::Precautionary => "precautionary",
            SectionId::Recommendations => "recommendations",
        }
    }

    /// Canonical section header in the rendered instruction document.
    pub fn header(&self) -> &'static str {
        match self {
            SectionId::BasicInfo => "Basic Information",
            SectionId::ClaimsRequests => "Claims and Requests",
            SectionId::Admissibility => "Admissibility Examination",
            SectionId::Precautionary => "Precautionary Measures",
            SectionId::Recommendations => "Recommendations",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct InstructionSection {
    pub section_id: SectionId,
    pub text: String,
    /// Digest of the stage outputs this section consumed, recorded at
    /// generation time.
    pub inputs_digest: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct InstructionDraft {
    pub case_id: String,
    /// All five sections, in canonical order.
    pub sections: Vec<InstructionSection>,
    pub generated_at: u64,
}

/// Everything the section generators may consume.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct StageProducts {
    pub basic_info: Option<FilledForm>,
    pub allegations: Option<AllegationList>,
    pub admissibility: Option<AdmissibilityReport>,
    pub periculum: Option<PericulumOutput>,
    pub fumus: Option<FumusReport>,
}

/// Drafting guidance: a global text and optional per-section exemplars
/// (either granularity works; both are concatenated into the prompt).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Guidelines {
    #[serde(default)]
    pub global: Option<String>,
    /// Keyed by section slug.
    #[serde(default)]
    pub per_section: BTreeMap<String, String>,
}

#[derive(Debug, Error)]
pub enum RecommendationError {
    #[error("section {section:?} requires stage output {stage}")]
    MissingStage {
        section: SectionId,
        stage: &'static str,
    },
    #[error("model returned an empty section for {0:?}")]
    EmptySection(SectionId),
    #[error("assembly error: {0}")]
    Assembly(String),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
}

fn require<'a, T>(
    value: &'a Option<T>,
    section: SectionId,
    stage: &'static str,
) -> Result<&'a T, RecommendationError> {
    value
        .as_ref()
        .ok_or(RecommendationError::MissingStage { section, stage })
}

/// The inputs a section consumes, as one canonical JSON value. The digest
/// of this value is the section's `inputs_digest`.
fn section_inputs(
    section_id: SectionId,
    products: &StageProducts,
) -> Result<serde_json::Value, RecommendationError> {
    let value = match section_id {
        SectionId::BasicInfo => json!({
            "basic_info": require(&products.basic_info, section_id, "basic_info")?,
        }),
        SectionId::ClaimsRequests => json!({
            "allegations": require(&products.allegations, section_id, "allegations")?,
        }),
        SectionId::Admissibility => json!({
            "admissibility": require(&products.admissibility, section_id, "admissibility")?,
        }),
        SectionId::Precautionary => json!({
            "periculum": require(&products.periculum, section_id, "periculum")?,
            "fumus": require(&products.fumus, section_id, "fumus")?,
        }),
        // The merits material is the allegations plus the grounding
        // rationales; there is no separate merits stage.
        SectionId::Recommendations => json!({
            "admissibility": require(&products.admissibility, section_id, "admissibility")?,
            "periculum": require(&products.periculum, section_id, "periculum")?,
            "fumus": require(&products.fumus, section_id, "fumus")?,
            "allegations": require(&products.allegations, section_id, "allegations")?,
        }),
    };
    Ok(value)
}

/// Draft one section from its stage inputs.
pub fn generate_section(
    section_id: SectionId,
    products: &StageProducts,
    guidelines: &Guidelines,
    gateway: &Gateway,
) -> Result<InstructionSection, RecommendationError> {
    let inputs = section_inputs(section_id, products)?;
    let inputs_digest = digest_json(&inputs);

    let mut guidance = String::new();
    if let Some(global) = &guidelines.global {
        guidance.push_str(global);
        guidance.push('\n');
    }
    if let Some(section) = guidelines.per_section.get(section_id.slug()) {
        guidance.push_str(section);
        guidance.push('\n');
    }
    if guidance.is_empty() {
        guidance.push_str("none\n");
    }

    let prompt = format!(
        "## Task: draft-instruction-section\nsection: {}\n\nGuidelines and exemplars:\n{}\n\
         Inputs:\n{}\n\nWrite the \"{}\" section of the instruction document as clear prose, \
         reflecting the inputs faithfully.\n",
        section_id.slug(),
        guidance,
        serde_json::to_string_pretty(&inputs).expect("serializable inputs"),
        section_id.header(),
    );
    let text = gateway.complete(&prompt, SECTION_OUTPUT_TOKENS)?.text.trim().to_string();
    if text.is_empty() {
        return Err(RecommendationError::EmptySection(section_id));
    }
    Ok(InstructionSection {
        section_id,
        text,
        inputs_digest,
    })
}

/// Assemble the five sections into a draft, validating exactly one section
/// per id and ordering them canonically.
pub fn assemble_instruction(
    case_id: &str,
    sections: Vec<InstructionSection>,
    generated_at: u64,
) -> Result<InstructionDraft, RecommendationError> {
    let mut by_id: BTreeMap<SectionId, InstructionSection> = BTreeMap::new();
    for section in sections {
        if by_id.insert(section.section_id, section.clone()).is_some() {
            return Err(RecommendationError::Assembly(format!(
                "duplicate section {:?}",
                section.section_id
            )));
        }
    }
    let mut ordered = Vec::with_capacity(SectionId::ALL.len());
    for id in SectionId::ALL {
        match by_id.remove(&id) {
            Some(section) => ordered.push(section),
            None => {
                return Err(RecommendationError::Assembly(format!(
                    "missing section {id:?}"
                )))
            }
        }
    }
    Ok(InstructionDraft {
        case_id: case_id.to_string(),
        sections: ordered,
        generated_at,
    })
}

/// Regenerate exactly one section; every other section is carried over
/// untouched.
pub fn regenerate_section(
    draft: &InstructionDraft,
    section_id: SectionId,
    products: &StageProducts,
    guidelines: &Guidelines,
    gateway: &Gateway,
    generated_at: u64,
) -> Result<InstructionDraft, RecommendationError> {
    let fresh = generate_section(section_id, products, guidelines, gateway)?;
    let sections = draft
        .sections
        .iter()
        .map(|s| {
            if s.section_id == section_id {
                fresh.clone()
            } else {
                s.clone()
            }
        })
        .collect();
    Ok(InstructionDraft {
        case_id: draft.case_id.clone(),
        sections,
        generated_at,
    })
}

/// Render the draft as markdown with fixed headers; byte-stable for
/// identical sections.
pub fn render_markdown(draft: &InstructionDraft) -> String {
    let mut out = format!("# Instruction — Case {}\n", draft.case_id);
    for section in &draft.sections {
        out.push_str("\n## ");
        out.push_str(section.section_id.header());
        out.push_str("\n\n");
        out.push_str(&section.text);
        out.push('\n');
    }
    out
}
