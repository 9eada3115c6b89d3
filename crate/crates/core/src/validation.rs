//! Validation-table construction from standardized instruction documents.
//!
//! Closed-case instructions follow a fixed five-section layout; sections are
//! isolated with regular expressions and the admissibility/precautionary
//! labels extracted from their standardized annotations. Header strings and
//! label patterns ship in config with defaults covering the English and
//! Portuguese label forms.

use crate::admissibility::{Criterion, VerdictLabel};
use crate::recommendations::SectionId;
use csv::WriterBuilder;
use regex::Regex;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ValidationError {
    #[error("section {0} not found")]
    SectionNotFound(&'static str),
    #[error("malformed instruction: {0}")]
    MalformedInstruction(String),
    #[error("label for {0} not found or unrecognized")]
    LabelParse(String),
    #[error("invalid pattern in validation config: {0}")]
    BadPattern(String),
    #[error("csv: {0}")]
    Csv(String),
}

/// A closed-case instruction document under analysis. Well-formed documents
/// carry all five canonical headers exactly once, in order; parsing reports
/// violations per document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StandardInstruction {
    pub case_id: String,
    pub full_text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecautionaryCriterion {
    Periculum,
    ReversePericulum,
    Fumus,
}

impl PrecautionaryCriterion {
    pub const ALL: [PrecautionaryCriterion; 3] = [
        PrecautionaryCriterion::Periculum,
        PrecautionaryCriterion::ReversePericulum,
        PrecautionaryCriterion::Fumus,
    ];

    pub fn display(&self) -> &'static str {
        match self {
            PrecautionaryCriterion::Periculum => "Periculum in mora",
            PrecautionaryCriterion::ReversePericulum => "Reverse periculum in mora",
            PrecautionaryCriterion::Fumus => "Fumus boni iuris",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecautionaryValue {
    Dismissed,
    Configured,
    Inconclusive,
    NotAnalyzed,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct AdmissibilityLabel {
    pub criterion: Criterion,
    pub value: VerdictLabel,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct PrecautionaryLabel {
    pub criterion: PrecautionaryCriterion,
    pub value: PrecautionaryValue,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ValidationRecord {
    pub case_id: String,
    pub basic_info: BTreeMap<String, String>,
    pub claims_text: String,
    pub requests_text: String,
    pub admissibility: Vec<AdmissibilityLabel>,
    pub precautionary: Vec<PrecautionaryLabel>,
    pub recommendations_text: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationFailure {
    pub case_id: String,
    pub error: String,
}

fn criterion_display(criterion: Criterion) -> &'static str {
    match criterion {
        Criterion::Legitimacy => "Legitimacy",
        Criterion::Competency => "Competency",
        Criterion::ExistenceOfEvidence => "Existence of evidence",
        Criterion::PublicInterest => "Public interest",
        Criterion::ClearWriting => "Clear writing",
    }
}

/// Header strings and label patterns; defaults match the canonical layout
/// written by the instruction assembler, with label alternatives in English
/// and Portuguese.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationConfig {
    /// Section slug -> header text (matched as a whole `##` heading line).
    #[serde(default = "default_headers")]
    pub section_headers: BTreeMap<String, String>,
    /// Verdict label -> alternation pattern (anchored at the value start).
    #[serde(default = "default_admissibility_patterns")]
    pub admissibility_patterns: BTreeMap<String, String>,
    #[serde(default = "default_precautionary_patterns")]
    pub precautionary_patterns: BTreeMap<String, String>,
}

fn default_headers() -> BTreeMap<String, String> {
    SectionId::ALL
        .iter()
        .map(|id| (id.slug().to_string(), id.header().to_string()))
        .collect()
}

fn default_admissibility_patterns() -> BTreeMap<String, String> {
    [
        ("not_applicable", "not applicable|não aplicável|nao aplicavel"),
        ("yes", "yes|sim"),
        ("partial", "partial|parcial"),
        ("no", "no|não|nao"),
    ]
    .iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}

fn default_precautionary_patterns() -> BTreeMap<String, String> {
    [
        ("not_analyzed", "not analyzed|não analisado|nao analisado"),
        ("dismissed", "dismissed|afastado"),
        ("configured", "configured|configurado"),
        ("inconclusive", "inconclusive|inconclusivo"),
    ]
    .iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            section_headers: default_headers(),
            admissibility_patterns: default_admissibility_patterns(),
            precautionary_patterns: default_precautionary_patterns(),
        }
    }
}

/// Compiled matcher for one config.
pub struct ValidationRules {
    headers: BTreeMap<SectionId, String>,
    // Ordered: more specific labels first so e.g. "Not applicable" is not
    // swallowed by "no".
    admissibility_values: Vec<(VerdictLabel, Regex)>,
    precautionary_values: Vec<(PrecautionaryValue, Regex)>,
}

impl ValidationRules {
    pub fn compile(config: &ValidationConfig) -> Result<Self, ValidationError> {
        let mut headers = BTreeMap::new();
        for id in SectionId::ALL {
            let header = config
                .section_headers
                .get(id.slug())
                .cloned()
                .unwrap_or_else(|| id.header().to_string());
            headers.insert(id, header);
        }
        let compile = |pattern: &str| -> Result<Regex, ValidationError> {
            Regex::new(&format!("(?i)^(?:{pattern})"))
                .map_err(|e| ValidationError::BadPattern(e.to_string()))
        };
        let admissibility_values = vec![
            (
                VerdictLabel::NotApplicable,
                compile(&config.admissibility_patterns["not_applicable"])?,
            ),
            (VerdictLabel::Yes, compile(&config.admissibility_patterns["yes"])?),
            (
                VerdictLabel::Partial,
                compile(&config.admissibility_patterns["partial"])?,
            ),
            (VerdictLabel::No, compile(&config.admissibility_patterns["no"])?),
        ];
        let precautionary_values = vec![
            (
                PrecautionaryValue::NotAnalyzed,
                compile(&config.precautionary_patterns["not_analyzed"])?,
            ),
            (
                PrecautionaryValue::Dismissed,
                compile(&config.precautionary_patterns["dismissed"])?,
            ),
            (
                PrecautionaryValue::Configured,
                compile(&config.precautionary_patterns["configured"])?,
            ),
            (
                PrecautionaryValue::Inconclusive,
                compile(&config.precautionary_patterns["inconclusive"])?,
            ),
        ];
        Ok(Self {
            headers,
            admissibility_values,
            precautionary_values,
        })
    }

    fn header_line_positions(&self, text: &str, id: SectionId) -> Vec<(usize, usize)> {
        let header = &self.headers[&id];
        let pattern = Regex::new(&format!(r"(?m)^##\s*{}\s*$", regex::escape(header)))
            .expect("escaped header is a valid pattern");
        pattern
            .find_iter(text)
            .map(|m| (m.start(), m.end()))
            .collect()
    }
}

/// Text strictly between the section's header line and the next section
/// header (or end of document).
pub fn isolate_section(
    doc: &StandardInstruction,
    section_id: SectionId,
    rules: &ValidationRules,
) -> Result<String, ValidationError> {
    let own = rules.header_line_positions(&doc.full_text, section_id);
    match own.len() {
        0 => return Err(ValidationError::SectionNotFound(section_id.header())),
        1 => {}
        n => {
            return Err(ValidationError::MalformedInstruction(format!(
                "header {} appears {n} times",
                section_id.header()
            )))
        }
    }
    let (_, body_start) = own[0];

    // The section ends at the closest following header of any section.
    let mut end = doc.full_text.len();
    for id in SectionId::ALL {
        for (start, _) in rules.header_line_positions(&doc.full_text, id) {
            if start > body_start && start < end {
                end = start;
            }
        }
    }
    Ok(doc.full_text[body_start..end].trim().to_string())
}

fn find_label_line<'a>(section: &'a str, name: &str) -> Option<&'a str> {
    section.lines().find_map(|line| {
        let line = line.trim().trim_start_matches('-').trim();
        let rest = line.strip_prefix(name)?;
        let rest = rest.trim_start();
        rest.strip_prefix(':').map(str::trim)
    })
}

/// Extract the five admissibility labels and three precautionary labels
/// from their sections; the format is standardized, so an unmatched
/// criterion is an error.
pub fn extract_labels(
    doc: &StandardInstruction,
    rules: &ValidationRules,
) -> Result<(Vec<AdmissibilityLabel>, Vec<PrecautionaryLabel>), ValidationError> {
    let admissibility_section = isolate_section(doc, SectionId::Admissibility, rules)?;
    let mut admissibility = Vec::with_capacity(5);
    for criterion in Criterion::ALL {
        let name = criterion_display(criterion);
        let value_text = find_label_line(&admissibility_section, name)
            .ok_or_else(|| ValidationError::LabelParse(name.to_string()))?;
        let value = rules
            .admissibility_values
            .iter()
            .find(|(_, re)| re.is_match(value_text))
            .map(|(label, _)| *label)
            .ok_or_else(|| ValidationError::LabelParse(format!("{name}: {value_text}")))?;
        admissibility.push(AdmissibilityLabel { criterion, value });
    }

    let precautionary_section = isolate_section(doc, SectionId::Precautionary, rules)?;
    let mut precautionary = Vec::with_capacity(3);
    for criterion in PrecautionaryCriterion::ALL {
        let name = criterion.display();
        let value_text = find_label_line(&precautionary_section, name)
            .ok_or_else(|| ValidationError::LabelParse(name.to_string()))?;
        let value = rules
            .precautionary_values
            .iter()
            .find(|(_, re)| re.is_match(value_text))
            .map(|(label, _)| *label)
            .ok_or_else(|| ValidationError::LabelParse(format!("{name}: {value_text}")))?;
        precautionary.push(PrecautionaryLabel { criterion, value });
    }

    Ok((admissibility, precautionary))
}

fn split_claims_requests(section: &str) -> (String, String) {
    let mut claims = Vec::new();
    let mut requests = Vec::new();
    let mut current: Option<&mut Vec<&str>> = None;
    for line in section.lines() {
        let trimmed = line.trim();
        if trimmed.eq_ignore_ascii_case("claims:") {
            current = Some(&mut claims);
            continue;
        }
        if trimmed.eq_ignore_ascii_case("requests:") {
            current = Some(&mut requests);
            continue;
        }
        if let Some(bucket) = current.as_deref_mut() {
            bucket.push(line);
        } else {
            claims.push(line);
        }
    }
    (
        claims.join("\n").trim().to_string(),
        requests.join("\n").trim().to_string(),
    )
}

fn parse_basic_info(section: &str) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for line in section.lines() {
        let line = line.trim().trim_start_matches('-').trim();
        if let Some((name, value)) = line.split_once(':') {
            let name = name.trim();
            let value = value.trim();
            if !name.is_empty() && !value.is_empty() && !name.contains(' ') {
                out.insert(name.to_string(), value.to_string());
            }
        }
    }
    out
}

/// Parse one instruction document into a validation record.
pub fn parse_record(
    doc: &StandardInstruction,
    rules: &ValidationRules,
) -> Result<ValidationRecord, ValidationError> {
    let basic_section = isolate_section(doc, SectionId::BasicInfo, rules)?;
    let claims_section = isolate_section(doc, SectionId::ClaimsRequests, rules)?;
    let recommendations_text = isolate_section(doc, SectionId::Recommendations, rules)?;
    let (admissibility, precautionary) = extract_labels(doc, rules)?;
    let (claims_text, requests_text) = split_claims_requests(&claims_section);
    Ok(ValidationRecord {
        case_id: doc.case_id.clone(),
        basic_info: parse_basic_info(&basic_section),
        claims_text,
        requests_text,
        admissibility,
        precautionary,
        recommendations_text,
    })
}

/// Build the table over many documents, collecting per-document failures
/// instead of aborting.
pub fn build_validation_table(
    docs: &[StandardInstruction],
    rules: &ValidationRules,
) -> (Vec<ValidationRecord>, Vec<ValidationFailure>) {
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for doc in docs {
        match parse_record(doc, rules) {
            Ok(record) => records.push(record),
            Err(e) => failures.push(ValidationFailure {
                case_id: doc.case_id.clone(),
                error: e.to_string(),
            }),
        }
    }
    (records, failures)
}

/// Render a record back into a standardized instruction document. This is
/// the layout `parse_record` recovers exactly, which the round-trip
/// property tests rely on.
pub fn synthesize_instruction(record: &ValidationRecord) -> StandardInstruction {
    let mut text = format!("# Instruction — Case {}\n", record.case_id);

    text.push_str("\n## Basic Information\n\n");
    for (name, value) in &record.basic_info {
        text.push_str(&format!("- {name}: {value}\n"));
    }

    text.push_str("\n## Claims and Requests\n\nClaims:\n");
    text.push_str(&record.claims_text);
    text.push_str("\nRequests:\n");
    text.push_str(&record.requests_text);
    text.push('\n');

    text.push_str("\n## Admissibility Examination\n\n");
    for label in &record.admissibility {
        let value = match label.value {
            VerdictLabel::Yes => "Yes (met)",
            VerdictLabel::No => "No (not met)",
            VerdictLabel::Partial => "Partial (partially met)",
            VerdictLabel::NotApplicable => "Not applicable",
        };
        text.push_str(&format!("- {}: {}\n", criterion_display(label.criterion), value));
    }

    text.push_str("\n## Precautionary Measures\n\n");
    for label in &record.precautionary {
        let value = match label.value {
            PrecautionaryValue::Dismissed => "Dismissed (rejected)",
            PrecautionaryValue::Configured => "Configured (accepted)",
            PrecautionaryValue::Inconclusive => "Inconclusive",
            PrecautionaryValue::NotAnalyzed => "Not analyzed",
        };
        text.push_str(&format!("- {}: {}\n", label.criterion.display(), value));
    }

    text.push_str("\n## Recommendations\n\n");
    text.push_str(&record.recommendations_text);
    text.push('\n');

    StandardInstruction {
        case_id: record.case_id.clone(),
        full_text: text,
    }
}

/// One JSON record per line.
pub fn records_to_jsonl(records: &[ValidationRecord]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("serializable record"))
        .map(|line| line + "\n")
        .collect()
}

/// Label columns only: case id, five admissibility verdicts, three
/// precautionary outcomes.
pub fn records_to_label_csv(records: &[ValidationRecord]) -> Result<String, ValidationError> {
    let mut writer = WriterBuilder::new().from_writer(Vec::new());
    let mut header = vec!["case_id".to_string()];
    header.extend(Criterion::ALL.iter().map(|c| c.slug().to_string()));
    header.extend(
        PrecautionaryCriterion::ALL
            .iter()
            .map(|c| format!("{c:?}").to_lowercase()),
    );
    writer
        .write_record(&header)
        .map_err(|e| ValidationError::Csv(e.to_string()))?;
    for record in records {
        let mut row = vec![record.case_id.clone()];
        for criterion in Criterion::ALL {
            let value = record
                .admissibility
                .iter()
                .find(|l| l.criterion == criterion)
                .map(|l| format!("{:?}", l.value))
                .unwrap_or_default();
            row.push(value);
        }
        for criterion in PrecautionaryCriterion::ALL {
            let value = record
                .precautionary
                .iter()
                .find(|l| l.criterion == criterion)
                .map(|l| format!("{:?}", l.value))
                .unwrap_or_default();
            row.push(value);
        }
        writer
            .write_record(&row)
            .map_err(|e| ValidationError::Csv(e.to_string()))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| ValidationError::Csv(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| ValidationError::Csv(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rules() -> ValidationRules {
        ValidationRules::compile(&ValidationConfig::default()).unwrap()
    }

    fn sample_record(case: &str) -> ValidationRecord {
        ValidationRecord {
            case_id: case.to_string(),
            basic_info: [
                ("case_id".to_string(), case.to_string()),
                ("plaintiff_name".to_string(), "Maria Souza".to_string()),
            ]
            .into(),
            claims_text: "1. Overpricing in the works contract.".into(),
            requests_text: "1. Suspend the procurement.".into(),
            admissibility: Criterion::ALL
                .iter()
                .map(|c| AdmissibilityLabel {
                    criterion: *c,
                    value: VerdictLabel::Yes,
                })
                .collect(),
            precautionary: vec![
                PrecautionaryLabel {
                    criterion: PrecautionaryCriterion::Periculum,
                    value: PrecautionaryValue::Dismissed,
                },
                PrecautionaryLabel {
                    criterion: PrecautionaryCriterion::ReversePericulum,
                    value: PrecautionaryValue::NotAnalyzed,
                },
                PrecautionaryLabel {
                    criterion: PrecautionaryCriterion::Fumus,
                    value: PrecautionaryValue::Configured,
                },
            ],
            recommendations_text: "Hear the case and notify the agency.".into(),
        }
    }

    #[test]
    fn isolates_each_section_exactly() {
        let doc = synthesize_instruction(&sample_record("tc-1"));
        let rules = rules();
        let basic = isolate_section(&doc, SectionId::BasicInfo, &rules).unwrap();
        assert!(basic.contains("plaintiff_name: Maria Souza"));
        assert!(!basic.contains("##"));
        let recs = isolate_section(&doc, SectionId::Recommendations, &rules).unwrap();
        assert_eq!(recs, "Hear the case and notify the agency.");
    }

    #[test]
    fn last_section_extends_to_end_of_file() {
        let doc = StandardInstruction {
            case_id: "tc".into(),
            full_text: "## Recommendations\n\nfinal text\nmore lines".into(),
        };
        let out = isolate_section(&doc, SectionId::Recommendations, &rules()).unwrap();
        assert_eq!(out, "final text\nmore lines");
    }

    #[test]
    fn missing_header_is_section_not_found() {
        let doc = StandardInstruction {
            case_id: "tc".into(),
            full_text: "## Basic Information\n\nx\n".into(),
        };
        assert!(matches!(
            isolate_section(&doc, SectionId::Recommendations, &rules()),
            Err(ValidationError::SectionNotFound(_))
        ));
    }

    #[test]
    fn duplicate_header_is_malformed() {
        let doc = StandardInstruction {
            case_id: "tc".into(),
            full_text: "## Recommendations\n\na\n\n## Recommendations\n\nb\n".into(),
        };
        assert!(matches!(
            isolate_section(&doc, SectionId::Recommendations, &rules()),
            Err(ValidationError::MalformedInstruction(_))
        ));
    }

    #[test]
    fn extracts_paper_style_labels() {
        let doc = synthesize_instruction(&sample_record("tc-2"));
        let (admissibility, precautionary) = extract_labels(&doc, &rules()).unwrap();
        assert_eq!(admissibility.len(), 5);
        assert!(admissibility.iter().all(|l| l.value == VerdictLabel::Yes));
        assert_eq!(precautionary[0].value, PrecautionaryValue::Dismissed);
        assert_eq!(precautionary[2].value, PrecautionaryValue::Configured);
    }

    #[test]
    fn unknown_label_token_fails() {
        let mut doc = synthesize_instruction(&sample_record("tc-3"));
        doc.full_text = doc.full_text.replace("Yes (met)", "Maybe (unsure)");
        assert!(matches!(
            extract_labels(&doc, &rules()),
            Err(ValidationError::LabelParse(_))
        ));
    }

    #[test]
    fn portuguese_label_forms_parse() {
        let mut doc = synthesize_instruction(&sample_record("tc-4"));
        doc.full_text = doc
            .full_text
            .replace("Yes (met)", "Sim (atendido)")
            .replace("Dismissed (rejected)", "Afastado (rejeitado)")
            .replace("Configured (accepted)", "Configurado (aceito)")
            .replace("Not analyzed", "Não analisado");
        let (admissibility, precautionary) = extract_labels(&doc, &rules()).unwrap();
        assert!(admissibility.iter().all(|l| l.value == VerdictLabel::Yes));
        assert_eq!(precautionary[0].value, PrecautionaryValue::Dismissed);
        assert_eq!(precautionary[1].value, PrecautionaryValue::NotAnalyzed);
    }

    #[test]
    fn table_collects_failures_without_aborting() {
        let good1 = synthesize_instruction(&sample_record("tc-a"));
        let good2 = synthesize_instruction(&sample_record("tc-b"));
        let bad = StandardInstruction {
            case_id: "tc-bad".into(),
            full_text: "not an instruction at all".into(),
        };
        let (records, failures) =
            build_validation_table(&[good1, bad, good2], &rules());
        assert_eq!(records.len(), 2);
        assert_eq!(failures.len(), 1);
        assert_eq!(failures[0].case_id, "tc-bad");
    }

    #[test]
    fn empty_input_is_an_empty_table() {
        let (records, failures) = build_validation_table(&[], &rules());
        assert!(records.is_empty());
        assert!(failures.is_empty());
    }

    #[test]
    fn round_trip_sample() {
        let record = sample_record("tc-rt");
        let doc = synthesize_instruction(&record);
        let parsed = parse_record(&doc, &rules()).unwrap();
        assert_eq!(parsed, record);
    }

    #[test]
    fn csv_has_one_row_per_record_plus_header() {
        let records = vec![sample_record("a"), sample_record("b")];
        let csv = records_to_label_csv(&records).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("case_id,legitimacy,"));
        assert!(lines[1].contains("Dismissed"));
    }

    fn label_strategy() -> impl Strategy<Value = VerdictLabel> {
        prop_oneof![
            Just(VerdictLabel::Yes),
            Just(VerdictLabel::No),
            Just(VerdictLabel::Partial),
            Just(VerdictLabel::NotApplicable),
        ]
    }

    fn precautionary_strategy() -> impl Strategy<Value = PrecautionaryValue> {
        prop_oneof![
            Just(PrecautionaryValue::Dismissed),
            Just(PrecautionaryValue::Configured),
            Just(PrecautionaryValue::Inconclusive),
            Just(PrecautionaryValue::NotAnalyzed),
        ]
    }

    prop_compose! {
        fn record_strategy()(
            case_n in 1u32..10000,
            info in proptest::collection::btree_map("[a-z_]{1,12}", "[A-Za-z0-9 ]{1,24}", 0..6),
            claims in "[A-Za-z0-9 ,.]{1,80}",
            requests in "[A-Za-z0-9 ,.]{1,80}",
            admissibility in proptest::collection::vec(label_strategy(), 5),
            precautionary in proptest::collection::vec(precautionary_strategy(), 3),
            recommendations in "[A-Za-z0-9 ,.]{1,120}",
        ) -> ValidationRecord {
            ValidationRecord {
                case_id: format!("tc-{case_n}"),
                basic_info: info.into_iter()
                    .map(|(k, v)| (k, v.trim().to_string()))
                    .filter(|(_, v)| !v.is_empty())
                    .collect(),
                claims_text: claims.trim().to_string(),
                requests_text: requests.trim().to_string(),
                admissibility: Criterion::ALL.iter().zip(admissibility)
                    .map(|(c, value)| AdmissibilityLabel { criterion: *c, value }).collect(),
                precautionary: PrecautionaryCriterion::ALL.iter().zip(precautionary)
                    .map(|(c, value)| PrecautionaryLabel { criterion: *c, value }).collect(),
                recommendations_text: recommendations.trim().to_string(),
            }
        }
    }

    proptest! {
        #[test]
        fn synthesized_records_round_trip(record in record_strategy()) {
            let doc = synthesize_instruction(&record);
            let parsed = parse_record(&doc, &rules()).unwrap();
            prop_assert_eq!(parsed, record);
        }
    }
}
