//! Extraction of the plaintiff's allegations and requests from the main
//! document, in source order.
//!
//! The prompt carries instructions, an exemplar, the rules (enumerate in
//! the order items appear), and the document text. The response is parsed
//! as two enumerated sections; items are reindexed 1..n in order of
//! appearance so indices are always contiguous regardless of the model's
//! numbering.

use super::ExtractionError;
use crate::gateway::{truncate_to_budget, Gateway, PromptTemplate};
use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

const ALLEGATIONS_OUTPUT_TOKENS: usize = 2048;

const ALLEGATIONS_PROMPT: &str = "\
## Instructions

You are an intelligent agent capable of reasoning and interpreting legal documents. \
You are given a case main document and an example of the allegations and requests to \
be extracted from the case main document. You must extract the allegations and \
requests from the case's main document.

## Example

You must provide a list of allegations and requests similar to the example provided below:

{example}

## Rules

You must follow the rules below:
1. Identify the allegations and requests presented by the plaintiff. They can be \
related to various aspects, including, but not limited to, the violation of a law, \
regulation, or contract.
2. Enumerate the allegations and requests in the same order as they appear in the \
case main document.
3. Reply with a section \"ALLEGATIONS:\" listing one numbered allegation per line, \
then a section \"REQUESTS:\" listing one numbered request per line.

{document}
";

const DEFAULT_EXAMPLE: &str = "\
ALLEGATIONS:
1. The defendant awarded the contract without a public bidding procedure.
2. The contract price exceeds the market reference by 40%.
REQUESTS:
1. Suspend the ongoing procurement.
2. Fine the responsible official.";

static ITEM_LINE: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"^\s*(?:\d+[.)]\s*|-\s+)(.+)$").expect("valid regex"));

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct EnumeratedItem {
    /// 1-based, contiguous, in source-document order.
    pub index: usize,
    pub text: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct AllegationList {
    pub allegations: Vec<EnumeratedItem>,
    pub requests: Vec<EnumeratedItem>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Allegations,
    Requests,
}

fn section_header(line: &str) -> Option<Section> {
    let normalized = line.trim().trim_end_matches(':').to_lowercase();
    match normalized.as_str() {
        "allegations" | "alegações" | "alegacoes" => Some(Section::Allegations),
        "requests" | "pedidos" => Some(Section::Requests),
        _ => None,
    }
}

/// Parse a two-section enumerated response. Sections may appear in either
/// order; a response containing neither section header is an error.
pub fn parse_allegation_response(response: &str) -> Result<AllegationList, ExtractionError> {
    let mut current = Section::None;
    let mut seen_any = false;
    let mut allegations = Vec::new();
    let mut requests = Vec::new();

    for line in response.lines() {
        if let Some(section) = section_header(line) {
            current = section;
            seen_any = true;
            continue;
        }
        if current == Section::None {
            continue;
        }
        if let Some(caps) = ITEM_LINE.captures(line) {
            let text = caps[1].trim().to_string();
            if text.is_empty() {
                continue;
            }
            match current {
                Section::Allegations => allegations.push(text),
                Section::Requests => requests.push(text),
                Section::None => unreachable!(),
            }
        }
    }

    if !seen_any {
        return Err(ExtractionError::AllegationParse);
    }

    let number = |items: Vec<String>| {
        items
            .into_iter()
            .enumerate()
            .map(|(i, text)| EnumeratedItem { index: i + 1, text })
            .collect()
    };
    Ok(AllegationList {
        allegations: number(allegations),
        requests: number(requests),
    })
}

/// Prompt the model with the structured extraction template and parse the
/// enumerated response.
pub fn extract_allegations_requests(
    main_text: &str,
    example: Option<&str>,
    gateway: &Gateway,
) -> Result<AllegationList, ExtractionError> {
    assert!(!main_text.is_empty(), "main document must be nonempty");

    let template = PromptTemplate::new("allegations-requests", ALLEGATIONS_PROMPT);
    let budget = gateway
        .context_budget()
        .saturating_sub(ALLEGATIONS_OUTPUT_TOKENS + 1024)
        .max(1);
    let document = truncate_to_budget(main_text, budget, gateway.tokenizer())
        .map_err(ExtractionError::Gateway)?;
    let vars: BTreeMap<String, String> = [
        (
            "example".to_string(),
            example.unwrap_or(DEFAULT_EXAMPLE).to_string(),
        ),
        ("document".to_string(), document),
    ]
    .into();
    let prompt = template.render(&vars).map_err(ExtractionError::Gateway)?;
    let response = gateway.complete(&prompt, ALLEGATIONS_OUTPUT_TOKENS)?.text;
    parse_allegation_response(&response)
}
