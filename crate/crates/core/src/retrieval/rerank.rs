//! Reranking stage behind the retrieval interface.
//!
//! The production neural reranker is a model integration, not core logic;
//! what ships here is the contract plus the identity reranker (default) and
//! a scripted one for test fixtures.

use super::ScoredPassage;
use std::collections::BTreeMap;

pub trait Reranker: Send + Sync {
    /// New scores, one per candidate, in candidate order.
    fn rescore(&self, query: &str, candidates: &[ScoredPassage]) -> Vec<f64>;
}

/// Keeps the BM25 ordering: rerank score equals the BM25 score.
pub struct IdentityReranker;

impl Reranker for IdentityReranker {
    fn rescore(&self, _query: &str, candidates: &[ScoredPassage]) -> Vec<f64> {
        candidates.iter().map(|c| c.hit.bm25_score).collect()
    }
}

/// Fixture reranker: scores looked up per passage id, default 0.0.
#[derive(Default)]
pub struct ScriptedReranker {
    scores: BTreeMap<String, f64>,
}

impl ScriptedReranker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, passage_id: &str, score: f64) {
        self.scores.insert(passage_id.to_string(), score);
    }
}

impl Reranker for ScriptedReranker {
    fn rescore(&self, _query: &str, candidates: &[ScoredPassage]) -> Vec<f64> {
        candidates
            .iter()
            .map(|c| self.scores.get(&c.hit.passage_id).copied().unwrap_or(0.0))
            .collect()
    }
}
