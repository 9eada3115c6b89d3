//! Basic-information form schema.
//!
//! The default schema ships with 26 record-keeping fields; deployments
//! override it from config, so nothing downstream assumes a particular
//! membership — only that names are unique and ordered.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FormField {
    pub name: String,
    /// Explanation sent to the model along with the field name.
    pub description: String,
    #[serde(default)]
    pub required: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FormSchema {
    pub fields: Vec<FormField>,
}

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("schema file {path}: {message}")]
    File { path: String, message: String },
    #[error("duplicate field name {0}")]
    DuplicateField(String),
    #[error("schema has no fields")]
    Empty,
}

impl FormSchema {
    pub fn new(fields: Vec<FormField>) -> Result<Self, SchemaError> {
        if fields.is_empty() {
            return Err(SchemaError::Empty);
        }
        let mut seen = BTreeSet::new();
        for f in &fields {
            if !seen.insert(f.name.clone()) {
                return Err(SchemaError::DuplicateField(f.name.clone()));
            }
        }
        Ok(Self { fields })
    }

    pub fn load(path: &Path) -> Result<Self, SchemaError> {
        let body = fs::read_to_string(path).map_err(|e| SchemaError::File {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let raw: Vec<FormField> = serde_json::from_str(&body).map_err(|e| SchemaError::File {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::new(raw)
    }

    pub fn field_names(&self) -> Vec<&str> {
        self.fields.iter().map(|f| f.name.as_str()).collect()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.fields.iter().any(|f| f.name == name)
    }
}

impl Default for FormSchema {
    fn default() -> Self {
        let fields = [
            ("case_id", "docket number identifying the case"),
            ("case_type", "procedural class of the case (complaint, audit, appeal)"),
            ("filing_date", "date the case was filed"),
            ("filing_channel", "channel through which the case arrived (portal, mail, referral)"),
            ("plaintiff_name", "full name of the person or entity filing the claim"),
            ("plaintiff_id", "taxpayer or registry identifier of the plaintiff"),
            ("plaintiff_type", "whether the plaintiff is an individual, company, or public body"),
            ("defendant_name", "name of the party accused of wrongdoing"),
            ("defendant_id", "taxpayer or registry identifier of the defendant"),
            ("responsible_agency", "federal agency or entity whose funds are involved"),
            ("municipality", "municipality where the events took place"),
            ("state", "state where the events took place"),
            ("amount_involved", "monetary amount at stake in the claims"),
            ("currency", "currency of the amount involved"),
            ("contract_number", "identifier of the contract under dispute"),
            ("contract_value", "total value of the contract under dispute"),
            ("contract_duration", "duration or validity period of the contract"),
            ("contract_object", "object or scope of the contract"),
            ("contract_status", "whether the contract is draft, signed, active, or concluded"),
            ("procurement_procedure", "procurement modality used (bidding, direct award)"),
            ("procurement_number", "identifier of the procurement procedure"),
            ("legal_basis", "statutes or rules the claims invoke"),
            ("urgency_claimed", "whether the plaintiff asks for urgent precautionary action"),
            ("requested_action", "action the plaintiff asks the court to take"),
            ("related_cases", "docket numbers of related cases, if any"),
            ("case_summary", "one-paragraph summary of the facts of the case"),
        ];
        Self {
            fields: fields
                .iter()
                .map(|(name, description)| FormField {
                    name: name.to_string(),
                    description: description.to_string(),
                    required: false,
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_schema_has_26_unique_fields() {
        let schema = FormSchema::default();
        assert_eq!(schema.fields.len(), 26);
        let names: BTreeSet<_> = schema.field_names().into_iter().collect();
        assert_eq!(names.len(), 26);
    }

    #[test]
    fn duplicate_names_rejected() {
        let fields = vec![
            FormField {
                name: "a".into(),
                description: String::new(),
                required: false,
            },
            FormField {
                name: "a".into(),
                description: String::new(),
                required: false,
            },
        ];
        assert!(matches!(
            FormSchema::new(fields),
            Err(SchemaError::DuplicateField(_))
        ));
    }

    #[test]
    fn loads_from_json_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("schema.json");
        fs::write(
            &path,
            r#"[{"name":"case_id","description":"id"},{"name":"summary","description":"s"}]"#,
        )
        .unwrap();
        let schema = FormSchema::load(&path).unwrap();
        assert_eq!(schema.fields.len(), 2);
    }
}
