//! Prompt templates with named `{placeholder}` substitution.
//!
//! The required-variable set and the placeholders appearing in the body are
//! kept equal by construction; a validating constructor is provided for
//! templates loaded from config.

use super::GatewayError;
use once_cell::sync::Lazy;
use regex::Regex;
use std::collections::{BTreeMap, BTreeSet};

static PLACEHOLDER: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"\{([A-Za-z_][A-Za-z0-9_]*)\}").expect("valid regex"));

#[derive(Debug, Clone)]
pub struct PromptTemplate {
    pub template_id: String,
    body: String,
    required_vars: BTreeSet<String>,
}

impl PromptTemplate {
    /// Build a template, deriving the required variables from the body.
    pub fn new(template_id: impl Into<String>, body: impl Into<String>) -> Self {
        let body = body.into();
        let required_vars = PLACEHOLDER
            .captures_iter(&body)
            .map(|c| c[1].to_string())
            .collect();
        Self {
            template_id: template_id.into(),
            body,
            required_vars,
        }
    }

    /// Build a template validating that the declared variable set matches
    /// the placeholders in the body exactly.
    pub fn with_declared_vars(
        template_id: impl Into<String>,
        body: impl Into<String>,
        declared: impl IntoIterator<Item = String>,
    ) -> Result<Self, GatewayError> {
        let template = Self::new(template_id, body);
        let declared: BTreeSet<String> = declared.into_iter().collect();
        if declared != template.required_vars {
            return Err(GatewayError::Parse(format!(
                "template {} declares variables {:?} but body uses {:?}",
                template.template_id, declared, template.required_vars
            )));
        }
        Ok(template)
    }

    pub fn required_vars(&self) -> &BTreeSet<String> {
        &self.required_vars
    }

    /// Substitute every placeholder. Missing variables error in body order;
    /// extra variables are ignored.
    pub fn render(&self, vars: &BTreeMap<String, String>) -> Result<String, GatewayError> {
        let mut out = String::with_capacity(self.body.len());
        let mut last = 0usize;
        for caps in PLACEHOLDER.captures_iter(&self.body) {
            let whole = caps.get(0).expect("capture 0");
            let name = &caps[1];
            let value = vars
                .get(name)
                .ok_or_else(|| GatewayError::MissingVariable(name.to_string()))?;
            out.push_str(&self.body[last..whole.start()]);
            out.push_str(value);
            last = whole.end();
        }
        out.push_str(&self.body[last..]);
        Ok(out)
    }
}
