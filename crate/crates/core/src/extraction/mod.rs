//! Basic-information form filling.
//!
//! Three phases, cheapest first:
//! 1. prompt with the schema and the first two pages of the main document;
//! 2. for each still-missing field, let the model compose a query over the
//!    case-documents index and extract from the retrieved passages;
//! 3. run the configured hand-crafted query for each remaining field, then
//!    a single final extraction pass over the gathered evidence.
//!
//! Absent values are allowed only after all three phases. Every filled
//! value carries its provenance and, for retrieved values, the top hit's
//! document id.

pub mod allegations;
pub mod schema;

pub use allegations::{extract_allegations_requests, AllegationList, EnumeratedItem};
pub use schema::{FormField, FormSchema, SchemaError};

use crate::gateway::{truncate_to_budget, Gateway, GatewayError, SearchTools};
use crate::ingest::CHARS_PER_PAGE;
use crate::retrieval::{CorpusId, RetrievalError};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Passages retrieved per field lookup.
const FIELD_FAN_OUT: usize = 5;
const FORM_OUTPUT_TOKENS: usize = 2048;
const QUERY_OUTPUT_TOKENS: usize = 128;
const PASSAGE_SNIPPET_TOKENS: usize = 220;

#[derive(Debug, Error)]
pub enum ExtractionError {
    #[error("form response contained no recognizable field/value lines after reprompt")]
    FormParse,
    #[error("response lacked both an allegations and a requests section")]
    AllegationParse,
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    FirstPages,
    RagSearch,
    CraftedQuery,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq, Eq)]
pub struct FieldFill {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source_doc_id: Option<String>,
}

/// One entry per schema field, always; value may be absent.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct FilledForm {
    pub fields: BTreeMap<String, FieldFill>,
}

impl FilledForm {
    fn empty(schema: &FormSchema) -> Self {
        Self {
            fields: schema
                .fields
                .iter()
                .map(|f| (f.name.clone(), FieldFill::default()))
                .collect(),
        }
    }

    pub fn missing_fields<'s>(&self, schema: &'s FormSchema) -> Vec<&'s FormField> {
        schema
            .fields
            .iter()
            .filter(|f| {
                self.fields
                    .get(&f.name)
                    .map_or(true, |fill| fill.value.is_none())
            })
            .collect()
    }
}

/// First two pages of a text without page markers: two synthetic page
/// windows of [`CHARS_PER_PAGE`] characters.
pub fn first_two_pages(text: &str) -> &str {
    match text.char_indices().nth(2 * CHARS_PER_PAGE) {
        Some((byte, _)) => &text[..byte],
        None => text,
    }
}

fn parse_form_lines(
    response: &str,
    schema: &FormSchema,
) -> BTreeMap<String, Option<String>> {
    let mut out = BTreeMap::new();
    for line in response.lines() {
        let Some((name, value)) = line.split_once(':') else {
            continue;
        };
        let name = name.trim().trim_start_matches('-').trim();
        if !schema.contains(name) {
            continue;
        }
        let value = value.trim();
        if value.eq_ignore_ascii_case("unknown") || value.is_empty() {
            out.insert(name.to_string(), None);
        } else {
            out.insert(name.to_string(), Some(value.to_string()));
        }
    }
    out
}

fn field_list_block(fields: &[&FormField]) -> String {
    fields
        .iter()
        .map(|f| format!("- {}: {}", f.name, f.description))
        .collect::<Vec<_>>()
        .join("\n")
}

fn render_passages(gateway: &Gateway, hits: &[crate::retrieval::ScoredPassage]) -> String {
    hits.iter()
        .enumerate()
        .map(|(i, h)| {
            let snippet = gateway.tokenizer().prefix(&h.text, PASSAGE_SNIPPET_TOKENS);
            format!("[{}] (doc:{}) {}", i + 1, h.hit.doc_id, snippet)
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Fill the basic-information form. The main document must be nonempty and
/// the case-documents index built.
pub fn extract_basic_info(
    case_id: &str,
    main_text: &str,
    schema: &FormSchema,
    tools: &dyn SearchTools,
    crafted_queries: &BTreeMap<String, String>,
    gateway: &Gateway,
) -> Result<FilledForm, ExtractionError> {
    assert!(!main_text.is_empty(), "main document must be nonempty");

    let mut form = FilledForm::empty(schema);

    // Phase 1: schema descriptions plus the first two pages.
    let all_fields: Vec<&FormField> = schema.fields.iter().collect();
    let phase1_prompt = format!(
        "## Task: extract-basic-info (phase 1)\n\nCase: {case_id}\n\n\
         You are extracting record-keeping information from the main document of an audit case.\n\
         For each field below reply with one line \"name: value\". Use \"name: UNKNOWN\" when the\n\
         document does not state the value.\n\nFields:\n{}\n\nDocument (first two pages):\n{}\n",
        field_list_block(&all_fields),
        first_two_pages(main_text),
    );
    let parsed = form_completion(gateway, &phase1_prompt, schema)?;
    for (name, value) in parsed {
        if let Some(value) = value {
            form.fields.insert(
                name,
                FieldFill {
                    value: Some(value),
                    provenance: Some(Provenance::FirstPages),
                    source_doc_id: None,
                },
            );
        }
    }

    // Phase 2: model-composed queries over the case index, field by field.
    let missing: Vec<String> = form
        .missing_fields(schema)
        .iter()
        .map(|f| f.name.clone())
        .collect();
    for name in missing {
        let field = schema
            .fields
            .iter()
            .find(|f| f.name == name)
            .expect("missing field came from schema");
        let query_prompt = format!(
            "## Task: compose-search-query\n\nCase: {case_id}\n\n\
             Compose one search query over the case documents to locate the value of field\n\
             \"{}\" ({}). Reply with a single line \"QUERY: <terms>\".\n",
            field.name, field.description
        );
        let response = gateway.complete(&query_prompt, QUERY_OUTPUT_TOKENS)?.text;
        let Some(query) = response
            .lines()
            .find_map(|l| l.trim().strip_prefix("QUERY:"))
            .map(str::trim)
            .filter(|q| !q.is_empty())
        else {
            gateway.flag(format!("phase-2 query composition unparseable for field {name}"));
            continue;
        };

        let hits = match tools.search(CorpusId::CaseDocuments, query, FIELD_FAN_OUT) {
            Ok(hits) if !hits.is_empty() => hits,
            Ok(_) => continue,
            Err(RetrievalError::EmptyQuery) => {
                gateway.flag(format!("phase-2 query for field {name} tokenized to nothing"));
                continue;
            }
            Err(e) => return Err(e.into()),
        };

        let extract_prompt = format!(
            "## Task: extract-field-from-passages\n\nCase: {case_id}\nField: {} ({})\n\nPassages:\n{}\n\n\
             Reply with a single line \"{}: <value>\" or \"{}: UNKNOWN\".\n",
            field.name,
            field.description,
            render_passages(gateway, &hits),
            field.name,
            field.name,
        );
        let response = gateway.complete(&extract_prompt, QUERY_OUTPUT_TOKENS)?.text;
        if let Some(Some(value)) = parse_form_lines(&response, schema).remove(&name) {
            form.fields.insert(
                name,
                FieldFill {
                    value: Some(value),
                    provenance: Some(Provenance::RagSearch),
                    source_doc_id: Some(hits[0].hit.doc_id.clone()),
                },
            );
        }
    }

    // Phase 3: configured crafted queries, then one final extraction pass.
    let remaining: Vec<String> = form
        .missing_fields(schema)
        .iter()
        .map(|f| f.name.clone())
        .filter(|name| crafted_queries.contains_key(name))
        .collect();
    if !remaining.is_empty() {
        let mut evidence_blocks = Vec::new();
        let mut first_doc: BTreeMap<String, String> = BTreeMap::new();
        for name in &remaining {
            let field = schema
                .fields
                .iter()
                .find(|f| &f.name == name)
                .expect("remaining field came from schema");
            let query = &crafted_queries[name];
            let hits = match tools.search(CorpusId::CaseDocuments, query, FIELD_FAN_OUT) {
                Ok(hits) => hits,
                Err(RetrievalError::EmptyQuery) => Vec::new(),
                Err(e) => return Err(e.into()),
            };
            if let Some(first) = hits.first() {
                first_doc.insert(name.clone(), first.hit.doc_id.clone());
            }
            evidence_blocks.push(format!(
                "Field: {} ({})\nEvidence:\n{}",
                field.name,
                field.description,
                if hits.is_empty() {
                    "none".to_string()
                } else {
                    render_passages(gateway, &hits)
                }
            ));
        }
        let final_prompt = format!(
            "## Task: extract-remaining-fields\n\nCase: {case_id}\n\n\
             For each field below reply with one line \"name: value\" or \"name: UNKNOWN\".\n\n{}\n",
            evidence_blocks.join("\n\n")
        );
        let parsed = form_completion(gateway, &final_prompt, schema)?;
        for name in &remaining {
            if let Some(Some(value)) = parsed.get(name).cloned() {
                form.fields.insert(
                    name.clone(),
                    FieldFill {
                        value: Some(value),
                        provenance: Some(Provenance::CraftedQuery),
                        source_doc_id: first_doc.get(name).cloned(),
                    },
                );
            }
        }
    }

    Ok(form)
}

/// Complete a form prompt, accepting only responses with at least one
/// recognizable field line; one reprompt before giving up.
fn form_completion(
    gateway: &Gateway,
    prompt: &str,
    schema: &FormSchema,
) -> Result<BTreeMap<String, Option<String>>, ExtractionError> {
    let budget = gateway.context_budget().saturating_sub(FORM_OUTPUT_TOKENS + 64);
    let prompt = truncate_to_budget(prompt, budget.max(1), gateway.tokenizer())
        .map_err(ExtractionError::Gateway)?;
    let response = gateway.complete(&prompt, FORM_OUTPUT_TOKENS)?.text;
    let parsed = parse_form_lines(&response, schema);
    if !parsed.is_empty() {
        return Ok(parsed);
    }
    let reprompt = format!(
        "{prompt}\nReminder: reply with one line per field, formatted exactly as \"name: value\" \
         (or \"name: UNKNOWN\").\n"
    );
    let response = gateway.complete(&reprompt, FORM_OUTPUT_TOKENS)?.text;
    let parsed = parse_form_lines(&response, schema);
    if parsed.is_empty() {
        return Err(ExtractionError::FormParse);
    }
    Ok(parsed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::Clock;
    use crate::gateway::ScriptedBackend;
    use crate::retrieval::{CorpusStore, Index, IndexedPassage};

    fn two_field_schema() -> FormSchema {
        FormSchema::new(vec![
            FormField {
                name: "case_id".into(),
                description: "docket number".into(),
                required: true,
            },
            FormField {
                name: "contract_value".into(),
                description: "contract value".into(),
                required: false,
            },
        ])
        .unwrap()
    }

    fn case_store() -> CorpusStore {
        let mut store = CorpusStore::new();
        store.register(
            Index::build(
                CorpusId::CaseDocuments,
                vec![IndexedPassage::new(
                    CorpusId::CaseDocuments,
                    "procurement-doc",
                    "procurement-doc#w0",
                    "termo de contrato com valor global de R$ 500.000,00",
                )],
            )
            .unwrap(),
        );
        store
    }

    fn gateway(entries: Vec<(Vec<&str>, &str)>) -> Gateway {
        Gateway::builder(Box::new(ScriptedBackend::from_patterns(entries)), 32000)
            .clock(Clock::Fixed(0))
            .build()
    }

    #[test]
    fn all_values_in_first_pages_means_no_search() {
        let gw = gateway(vec![(
            vec!["phase 1"],
            "case_id: TC-001\ncontract_value: R$ 10,00",
        )]);
        let form = extract_basic_info(
            "TC-001",
            "main text",
            &two_field_schema(),
            &case_store(),
            &BTreeMap::new(),
            &gw,
        )
        .unwrap();
        assert_eq!(form.fields["case_id"].value.as_deref(), Some("TC-001"));
        assert_eq!(
            form.fields["case_id"].provenance,
            Some(Provenance::FirstPages)
        );
        // Exactly one completion, no query compositions.
        assert_eq!(gw.audit().requests().len(), 1);
    }

    #[test]
    fn missing_field_resolved_by_rag_search_with_source_doc() {
        let gw = gateway(vec![
            (vec!["phase 1"], "case_id: TC-002\ncontract_value: UNKNOWN"),
            (vec!["compose-search-query"], "QUERY: valor global contrato"),
            (
                vec!["extract-field-from-passages"],
                "contract_value: R$ 500.000,00",
            ),
        ]);
        let form = extract_basic_info(
            "TC-002",
            "main text",
            &two_field_schema(),
            &case_store(),
            &BTreeMap::new(),
            &gw,
        )
        .unwrap();
        let fill = &form.fields["contract_value"];
        assert_eq!(fill.value.as_deref(), Some("R$ 500.000,00"));
        assert_eq!(fill.provenance, Some(Provenance::RagSearch));
        assert_eq!(fill.source_doc_id.as_deref(), Some("procurement-doc"));
    }

    #[test]
    fn crafted_query_phase_fills_last_resort_fields() {
        let gw = gateway(vec![
            (vec!["phase 1"], "case_id: TC-003\ncontract_value: UNKNOWN"),
            (vec!["compose-search-query"], "QUERY: nothing_matches_this"),
            (
                vec!["extract-remaining-fields"],
                "contract_value: R$ 500.000,00",
            ),
        ]);
        let crafted: BTreeMap<String, String> = [(
            "contract_value".to_string(),
            "valor global contrato".to_string(),
        )]
        .into();
        let form = extract_basic_info(
            "TC-003",
            "main text",
            &two_field_schema(),
            &case_store(),
            &crafted,
            &gw,
        )
        .unwrap();
        let fill = &form.fields["contract_value"];
        assert_eq!(fill.provenance, Some(Provenance::CraftedQuery));
        assert_eq!(fill.source_doc_id.as_deref(), Some("procurement-doc"));
    }

    #[test]
    fn value_may_stay_absent_after_all_phases() {
        let gw = gateway(vec![
            (vec!["phase 1"], "case_id: TC-004\ncontract_value: UNKNOWN"),
            (vec!["compose-search-query"], "QUERY: nothing_matches_this"),
        ]);
        let form = extract_basic_info(
            "TC-004",
            "main text",
            &two_field_schema(),
            &case_store(),
            &BTreeMap::new(),
            &gw,
        )
        .unwrap();
        assert!(form.fields["contract_value"].value.is_none());
        assert!(form.fields["contract_value"].provenance.is_none());
    }

    #[test]
    fn form_keys_always_equal_schema_names() {
        let gw = gateway(vec![
            (vec!["phase 1"], "case_id: TC-005\ncontract_value: UNKNOWN"),
            (vec!["compose-search-query"], "QUERY: zz_no_match"),
        ]);
        let schema = two_field_schema();
        let form = extract_basic_info(
            "TC-005",
            "main",
            &schema,
            &case_store(),
            &BTreeMap::new(),
            &gw,
        )
        .unwrap();
        let keys: Vec<&str> = form.fields.keys().map(String::as_str).collect();
        let mut names = schema.field_names();
        names.sort();
        assert_eq!(keys, names);
    }

    #[test]
    fn unparseable_form_reprompts_then_errors() {
        let gw = gateway(vec![(vec!["phase 1"], "I cannot fill forms today.")]);
        let err = extract_basic_info(
            "TC-006",
            "main",
            &two_field_schema(),
            &case_store(),
            &BTreeMap::new(),
            &gw,
        )
        .unwrap_err();
        assert!(matches!(err, ExtractionError::FormParse));
        // Initial attempt plus one reprompt.
        assert_eq!(gw.audit().requests().len(), 2);
    }

    #[test]
    #[should_panic(expected = "main document must be nonempty")]
    fn empty_main_document_is_a_precondition_violation() {
        let gw = gateway(vec![]);
        let _ = extract_basic_info(
            "TC-007",
            "",
            &two_field_schema(),
            &case_store(),
            &BTreeMap::new(),
            &gw,
        );
    }

    #[test]
    fn rerun_with_same_transcript_is_identical() {
        let entries = vec![
            (vec!["phase 1"], "case_id: TC-008\ncontract_value: UNKNOWN"),
            (vec!["compose-search-query"], "QUERY: valor global contrato"),
            (
                vec!["extract-field-from-passages"],
                "contract_value: R$ 500.000,00",
            ),
        ];
        let run = |entries: Vec<(Vec<&str>, &str)>| {
            let gw = gateway(entries);
            extract_basic_info(
                "TC-008",
                "main",
                &two_field_schema(),
                &case_store(),
                &BTreeMap::new(),
                &gw,
            )
            .unwrap()
        };
        assert_eq!(run(entries.clone()), run(entries));
    }

    #[test]
    fn first_two_pages_cuts_at_char_boundary() {
        let text = "é".repeat(7000);
        let cut = first_two_pages(&text);
        assert_eq!(cut.chars().count(), 6000);
        let short = "short";
        assert_eq!(first_two_pages(short), short);
    }
}
