//! BM25 retrieval over the case's documents and the three external corpora,
//! with an optional reranking stage.
//!
//! Search result ordering is fully deterministic: hits sort by effective
//! score (rerank score when a reranker ran, BM25 otherwise) descending,
//! with ties broken by (doc_id, passage_id) ascending.

pub mod corpus;
pub mod index;
pub mod rerank;
pub mod tokenize;

pub use corpus::{load_corpus_jsonl, window_passages, CorpusStore, PASSAGE_OVERLAP, PASSAGE_WINDOW};
pub use index::{Index, IndexedPassage, BM25_B, BM25_K1};
pub use rerank::{IdentityReranker, Reranker, ScriptedReranker};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The four addressable corpora.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusId {
    Jurisprudence,
    StatutesFederalLaw,
    InternalCodes,
    CaseDocuments,
}

impl CorpusId {
    pub const ALL: [CorpusId; 4] = [
        CorpusId::Jurisprudence,
        CorpusId::StatutesFederalLaw,
        CorpusId::InternalCodes,
        CorpusId::CaseDocuments,
    ];

    /// Stable identifier used in the agent action grammar and file names.
    pub fn slug(&self) -> &'static str {
        match self {
            CorpusId::Jurisprudence => "jurisprudence",
            CorpusId::StatutesFederalLaw => "statutes_federal_law",
            CorpusId::InternalCodes => "internal_codes",
            CorpusId::CaseDocuments => "case_documents",
        }
    }

    pub fn from_slug(slug: &str) -> Option<CorpusId> {
        CorpusId::ALL.iter().copied().find(|c| c.slug() == slug)
    }
}

#[derive(Debug, Error)]
pub enum RetrievalError {
    #[error("corpus {0:?} has no passages")]
    EmptyCorpus(CorpusId),
    #[error("invalid passage: {0}")]
    InvalidPassage(String),
    #[error("passage {0} not found in index")]
    PassageNotFound(String),
    #[error("query tokenizes to no terms")]
    EmptyQuery,
    #[error("corpus {0:?} is not registered")]
    CorpusNotRegistered(CorpusId),
    #[error("corpus file {path}: {message}")]
    CorpusFile { path: String, message: String },
}

/// A scored passage reference in a result list.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SearchHit {
    pub passage_id: String,
    pub corpus: CorpusId,
    pub doc_id: String,
    pub bm25_score: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rerank_score: Option<f64>,
    /// 1-based, contiguous within a result list.
    pub rank: usize,
}

/// A hit together with its passage text, for feeding prompts.
#[derive(Debug, Clone)]
pub struct ScoredPassage {
    pub hit: SearchHit,
    pub text: String,
}

/// A resolvable reference to a retrieved passage.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct Citation {
    pub corpus: CorpusId,
    pub doc_id: String,
    pub passage_id: String,
}

impl ScoredPassage {
    pub fn citation(&self) -> Citation {
        Citation {
            corpus: self.hit.corpus,
            doc_id: self.hit.doc_id.clone(),
            passage_id: self.hit.passage_id.clone(),
        }
    }
}

/// Retrieve the top `k` passages for a free-text query. Only passages
/// containing at least one query term are candidates. When a reranker is
/// given it rescores the BM25 top-k and the list is reordered by rerank
/// score; without one, `rerank_score` stays absent.
pub fn search(
    index: &Index,
    query: &str,
    k: usize,
    reranker: Option<&dyn Reranker>,
) -> Result<Vec<ScoredPassage>, RetrievalError> {
    let terms = tokenize::tokenize(query);
    if terms.is_empty() {
        return Err(RetrievalError::EmptyQuery);
    }

    let mut scored = index.score_matches(&terms);
    // Deterministic order: score desc, then (doc_id, passage_id) asc.
    scored.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| {
                let pa = &index.passages()[a.0];
                let pb = &index.passages()[b.0];
                (&pa.doc_id, &pa.passage_id).cmp(&(&pb.doc_id, &pb.passage_id))
            })
    });
    scored.truncate(k);

    let mut hits: Vec<ScoredPassage> = scored
        .into_iter()
        .map(|(pos, score)| {
            let p = &index.passages()[pos];
            ScoredPassage {
                hit: SearchHit {
                    passage_id: p.passage_id.clone(),
                    corpus: p.corpus,
                    doc_id: p.doc_id.clone(),
                    bm25_score: score,
                    rerank_score: None,
                    rank: 0,
                },
                text: p.text.clone(),
            }
        })
        .collect();

    if let Some(reranker) = reranker {
        let scores = reranker.rescore(query, &hits);
        for (hit, score) in hits.iter_mut().zip(scores) {
            hit.hit.rerank_score = Some(score);
        }
        hits.sort_by(|a, b| {
            b.hit
                .rerank_score
                .partial_cmp(&a.hit.rerank_score)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| {
                    (&a.hit.doc_id, &a.hit.passage_id).cmp(&(&b.hit.doc_id, &b.hit.passage_id))
                })
        });
    }

    for (i, hit) in hits.iter_mut().enumerate() {
        hit.hit.rank = i + 1;
    }
    Ok(hits)
}
