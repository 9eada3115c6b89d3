//! Reason-and-act agent loop over the registered corpora.
//!
//! The action grammar is a rigid line protocol so parsing and scripting stay
//! deterministic. Each step the model replies:
//!
//! ```text
//! Thought: <reasoning>
//! Action: search[<corpus>] <query>
//! ```
//!
//! or concludes with `Action: conclude <answer>`. A malformed reply earns
//! one reprompt with a format reminder; a second failure is an error. Every
//! step is an independent completion; the loop carries history in the
//! prompt.

use super::{Gateway, GatewayError};
use crate::retrieval::{CorpusId, CorpusStore, RetrievalError, ScoredPassage};
use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};

/// Tokens of passage text quoted per hit in an observation.
const OBSERVATION_SNIPPET_TOKENS: usize = 160;
/// Output reservation for one agent step.
const STEP_OUTPUT_TOKENS: usize = 512;

static SEARCH_ACTION: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"^Action:\s*search\[([a-z_]+)\]\s*(.+)$").expect("valid regex"));
static CONCLUDE_ACTION: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"^Action:\s*conclude\s*(.*)$").expect("valid regex"));

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AgentAction {
    Search { corpus: CorpusId, query: String },
    Conclude { answer: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentStep {
    pub thought: String,
    pub action: AgentAction,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observation: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceStatus {
    Concluded,
    BudgetExhausted,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentTrace {
    pub steps: Vec<AgentStep>,
    pub status: TraceStatus,
}

impl AgentTrace {
    /// Answer of the final conclude step (empty for a forced conclusion).
    pub fn conclusion(&self) -> &str {
        match self.steps.last().map(|s| &s.action) {
            Some(AgentAction::Conclude { answer }) => answer,
            _ => "",
        }
    }

    /// True when at least one search action ran before the conclusion.
    pub fn searched(&self) -> bool {
        self.steps
            .iter()
            .any(|s| matches!(s.action, AgentAction::Search { .. }))
    }
}

/// Search functions the agent may call, one per corpus.
pub trait SearchTools: Sync {
    fn search(
        &self,
        corpus: CorpusId,
        query: &str,
        k: usize,
    ) -> Result<Vec<ScoredPassage>, RetrievalError>;
    fn available(&self) -> Vec<CorpusId>;
}

impl SearchTools for CorpusStore {
    fn search(
        &self,
        corpus: CorpusId,
        query: &str,
        k: usize,
    ) -> Result<Vec<ScoredPassage>, RetrievalError> {
        CorpusStore::search(self, corpus, query, k)
    }

    fn available(&self) -> Vec<CorpusId> {
        self.registered()
    }
}

/// Tool wrapper that records every retrieved passage, so callers can turn
/// exactly what the agent saw into citations and reasoning evidence.
pub struct RecordingTools<'a> {
    inner: &'a dyn SearchTools,
    seen: std::sync::Mutex<Vec<ScoredPassage>>,
}

impl<'a> RecordingTools<'a> {
    pub fn new(inner: &'a dyn SearchTools) -> Self {
        Self {
            inner,
            seen: std::sync::Mutex::new(Vec::new()),
        }
    }

    /// Every citation observed, deduplicated in first-seen order.
    pub fn citations(&self) -> Vec<crate::retrieval::Citation> {
        let seen = self.seen.lock().expect("recording tools lock");
        let mut out: Vec<crate::retrieval::Citation> = Vec::new();
        for hit in seen.iter() {
            let citation = hit.citation();
            if !out.contains(&citation) {
                out.push(citation);
            }
        }
        out
    }

    /// Passage texts observed, deduplicated by passage id in first-seen order.
    pub fn evidence_texts(&self) -> Vec<String> {
        let seen = self.seen.lock().expect("recording tools lock");
        let mut ids = std::collections::BTreeSet::new();
        let mut out = Vec::new();
        for hit in seen.iter() {
            if ids.insert(hit.hit.passage_id.clone()) {
                out.push(hit.text.clone());
            }
        }
        out
    }

    pub fn saw_anything(&self) -> bool {
        !self.seen.lock().expect("recording tools lock").is_empty()
    }
}

impl SearchTools for RecordingTools<'_> {
    fn search(
        &self,
        corpus: CorpusId,
        query: &str,
        k: usize,
    ) -> Result<Vec<ScoredPassage>, RetrievalError> {
        let hits = self.inner.search(corpus, query, k)?;
        self.seen
            .lock()
            .expect("recording tools lock")
            .extend(hits.iter().cloned());
        Ok(hits)
    }

    fn available(&self) -> Vec<CorpusId> {
        self.inner.available()
    }
}

/// A tool view restricted to a subset of corpora.
pub struct RestrictedTools<'a, T: SearchTools + ?Sized> {
    inner: &'a T,
    allowed: Vec<CorpusId>,
}

impl<'a, T: SearchTools + ?Sized> RestrictedTools<'a, T> {
    pub fn new(inner: &'a T, allowed: Vec<CorpusId>) -> Self {
        Self { inner, allowed }
    }
}

impl<T: SearchTools + ?Sized> SearchTools for RestrictedTools<'_, T> {
    fn search(
        &self,
        corpus: CorpusId,
        query: &str,
        k: usize,
    ) -> Result<Vec<ScoredPassage>, RetrievalError> {
        if !self.allowed.contains(&corpus) {
            return Err(RetrievalError::CorpusNotRegistered(corpus));
        }
        self.inner.search(corpus, query, k)
    }

    fn available(&self) -> Vec<CorpusId> {
        self.allowed.clone()
    }
}

fn format_reminder() -> &'static str {
    "Reminder: reply with exactly two lines, 'Thought: <reasoning>' followed by \
     'Action: search[<corpus>] <query>' or 'Action: conclude <answer>'."
}

fn parse_step(response: &str, available: &[CorpusId]) -> Option<(String, AgentAction)> {
    let mut thought = None;
    for line in response.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("Thought:") {
            if thought.is_none() {
                thought = Some(rest.trim().to_string());
            }
        } else if let Some(caps) = SEARCH_ACTION.captures(line) {
            let corpus = CorpusId::from_slug(&caps[1])?;
            if !available.contains(&corpus) {
                return None;
            }
            let query = caps[2].trim().to_string();
            if query.is_empty() {
                return None;
            }
            return Some((thought?, AgentAction::Search { corpus, query }));
        } else if let Some(caps) = CONCLUDE_ACTION.captures(line) {
            return Some((thought?, AgentAction::Conclude {
                answer: caps[1].trim().to_string(),
            }));
        }
    }
    None
}

fn render_observation(gateway: &Gateway, outcome: Result<Vec<ScoredPassage>, RetrievalError>) -> String {
    match outcome {
        Ok(hits) if hits.is_empty() => "no results".to_string(),
        Ok(hits) => hits
            .iter()
            .map(|h| {
                let snippet = gateway
                    .tokenizer()
                    .prefix(&h.text, OBSERVATION_SNIPPET_TOKENS);
                format!(
                    "[corpus:{} doc:{} passage:{} score:{:.4}] {}",
                    h.hit.corpus.slug(),
                    h.hit.doc_id,
                    h.hit.passage_id,
                    h.hit.rerank_score.unwrap_or(h.hit.bm25_score),
                    snippet
                )
            })
            .collect::<Vec<_>>()
            .join("\n"),
        Err(e) => format!("search error: {e}"),
    }
}

fn render_history(steps: &[AgentStep]) -> String {
    let mut out = String::new();
    for step in steps {
        out.push_str("Thought: ");
        out.push_str(&step.thought);
        out.push('\n');
        match &step.action {
            AgentAction::Search { corpus, query } => {
                out.push_str(&format!("Action: search[{}] {}\n", corpus.slug(), query));
            }
            AgentAction::Conclude { answer } => {
                out.push_str(&format!("Action: conclude {answer}\n"));
            }
        }
        if let Some(obs) = &step.observation {
            out.push_str("Observation: ");
            out.push_str(obs);
            out.push('\n');
        }
    }
    out
}

/// Run the agent loop until it concludes or `max_steps` is reached; in the
/// latter case a conclusion step is forced and the trace is marked
/// budget-exhausted.
pub fn react_loop(
    gateway: &Gateway,
    tools: &dyn SearchTools,
    task_prompt: &str,
    max_steps: usize,
    fan_out: usize,
) -> Result<AgentTrace, GatewayError> {
    assert!(max_steps >= 1, "max_steps must be >= 1");
    let corpora: Vec<&str> = tools.available().iter().map(|c| c.slug()).collect();
    let header = format!(
        "{task_prompt}\n\nRespond with exactly two lines:\nThought: <your reasoning>\nAction: search[<corpus>] <query>\nor\nAction: conclude <final answer>\n\nCorpora available for search: {}\n",
        corpora.join(", ")
    );

    let mut steps: Vec<AgentStep> = Vec::new();
    for _ in 0..max_steps {
        let mut prompt = header.clone();
        if !steps.is_empty() {
            prompt.push('\n');
            prompt.push_str(&render_history(&steps));
        }

        let response = gateway.complete(&prompt, STEP_OUTPUT_TOKENS)?.text;
        let parsed = match parse_step(&response, &tools.available()) {
            Some(p) => p,
            None => {
                let reprompt = format!("{prompt}\n{}\n", format_reminder());
                let retry = gateway.complete(&reprompt, STEP_OUTPUT_TOKENS)?.text;
                match parse_step(&retry, &tools.available()) {
                    Some(p) => p,
                    None => {
                        return Err(GatewayError::MalformedAction { response: retry });
                    }
                }
            }
        };

        let (thought, action) = parsed;
        match action {
            AgentAction::Conclude { answer } => {
                steps.push(AgentStep {
                    thought,
                    action: AgentAction::Conclude { answer },
                    observation: None,
                });
                return Ok(AgentTrace {
                    steps,
                    status: TraceStatus::Concluded,
                });
            }
            AgentAction::Search { corpus, query } => {
                let observation =
                    render_observation(gateway, tools.search(corpus, &query, fan_out));
                steps.push(AgentStep {
                    thought,
                    action: AgentAction::Search { corpus, query },
                    observation: Some(observation),
                });
            }
        }
    }

    gateway.flag("agent step budget exhausted without conclusion");
    steps.push(AgentStep {
        thought: "step budget exhausted".to_string(),
        action: AgentAction::Conclude {
            answer: String::new(),
        },
        observation: None,
    });
    Ok(AgentTrace {
        steps,
        status: TraceStatus::BudgetExhausted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::Clock;
    use crate::gateway::{Gateway, ScriptedBackend};
    use crate::retrieval::{Index, IndexedPassage};

    fn store() -> CorpusStore {
        let mut store = CorpusStore::new();
        store.register(
            Index::build(
                CorpusId::CaseDocuments,
                vec![IndexedPassage::new(
                    CorpusId::CaseDocuments,
                    "doc-1",
                    "doc-1#w0",
                    "contrato assinado em janeiro",
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
    fn search_then_conclude_is_a_two_step_trace() {
        let gw = gateway(vec![
            (
                vec!["find the contract", "Observation:"],
                "Thought: enough evidence\nAction: conclude contract exists",
            ),
            (
                vec!["find the contract"],
                "Thought: must look\nAction: search[case_documents] contrato",
            ),
        ]);
        let trace = react_loop(&gw, &store(), "find the contract", 5, 3).unwrap();
        assert_eq!(trace.steps.len(), 2);
        assert_eq!(trace.status, TraceStatus::Concluded);
        assert!(trace.steps[0].observation.as_ref().unwrap().contains("doc-1"));
        assert_eq!(trace.conclusion(), "contract exists");
        assert!(trace.searched());
    }

    #[test]
    fn immediate_conclude_is_a_one_step_trace() {
        let gw = gateway(vec![(
            vec!["trivial task"],
            "Thought: nothing to do\nAction: conclude done",
        )]);
        let trace = react_loop(&gw, &store(), "trivial task", 5, 3).unwrap();
        assert_eq!(trace.steps.len(), 1);
        assert_eq!(trace.status, TraceStatus::Concluded);
        assert!(!trace.searched());
    }

    #[test]
    fn never_concluding_forces_conclusion_at_budget() {
        let gw = gateway(vec![(
            vec!["endless task"],
            "Thought: keep digging\nAction: search[case_documents] contrato",
        )]);
        let trace = react_loop(&gw, &store(), "endless task", 3, 3).unwrap();
        // 3 search steps + forced conclude.
        assert_eq!(trace.steps.len(), 4);
        assert_eq!(trace.status, TraceStatus::BudgetExhausted);
        assert!(matches!(
            trace.steps.last().unwrap().action,
            AgentAction::Conclude { .. }
        ));
        // Exhaustion is flagged for the audit log.
        assert_eq!(gw.audit().lines().iter().filter(|l| matches!(l, crate::gateway::AuditLine::Event(_))).count(), 1);
    }

    #[test]
    fn malformed_action_gets_one_reprompt() {
        let gw = gateway(vec![
            (
                vec!["task x", "Reminder:"],
                "Thought: fixed\nAction: conclude ok",
            ),
            (vec!["task x"], "I will just chat instead of acting."),
        ]);
        let trace = react_loop(&gw, &store(), "task x", 5, 3).unwrap();
        assert_eq!(trace.conclusion(), "ok");
    }

    #[test]
    fn malformed_twice_is_an_error() {
        let gw = gateway(vec![(vec!["task y"], "nonsense forever")]);
        let err = react_loop(&gw, &store(), "task y", 5, 3).unwrap_err();
        assert!(matches!(err, GatewayError::MalformedAction { .. }));
    }

    #[test]
    fn unknown_corpus_is_malformed() {
        let gw = gateway(vec![(
            vec!["task z"],
            "Thought: t\nAction: search[jurisprudence] contrato",
        )]);
        // jurisprudence is not registered in this store.
        let err = react_loop(&gw, &store(), "task z", 5, 3).unwrap_err();
        assert!(matches!(err, GatewayError::MalformedAction { .. }));
    }

    #[test]
    fn every_search_step_has_an_observation() {
        let gw = gateway(vec![
            (
                vec!["obs task", "Observation:"],
                "Thought: done\nAction: conclude fine",
            ),
            (
                vec!["obs task"],
                "Thought: look\nAction: search[case_documents] nada_presente",
            ),
        ]);
        let trace = react_loop(&gw, &store(), "obs task", 5, 3).unwrap();
        for step in &trace.steps {
            match &step.action {
                AgentAction::Search { .. } => assert!(step.observation.is_some()),
                AgentAction::Conclude { .. } => assert!(step.observation.is_none()),
            }
        }
    }
}
