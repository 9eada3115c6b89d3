//! Immutable per-corpus inverted index with Okapi BM25 scoring.
//!
//! Parameters are pinned (`k1 = 1.2`, `b = 0.75`,
//! `idf = ln(1 + (N - df + 0.5) / (df + 0.5))`) so scores are reproducible
//! and testable against an independent scorer. Each occurrence of a query
//! term contributes its term score, so a duplicated query term counts twice.

use super::tokenize::tokenize;
use super::{CorpusId, RetrievalError};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const BM25_K1: f64 = 1.2;
pub const BM25_B: f64 = 0.75;

/// Serialized index format version; bump on layout changes.
pub const INDEX_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexedPassage {
    pub passage_id: String,
    pub corpus: CorpusId,
    pub doc_id: String,
    pub text: String,
    pub token_count: usize,
}

impl IndexedPassage {
    pub fn new(corpus: CorpusId, doc_id: impl Into<String>, passage_id: impl Into<String>, text: impl Into<String>) -> Self {
        let text = text.into();
        let token_count = tokenize(&text).len();
        Self {
            passage_id: passage_id.into(),
            corpus,
            doc_id: doc_id.into(),
            text,
            token_count,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Posting {
    /// Position in the passage list.
    passage: usize,
    term_frequency: usize,
}

/// Build-once index over one corpus.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Index {
    pub format_version: u32,
    pub corpus: CorpusId,
    passages: Vec<IndexedPassage>,
    /// Ordered so serialized indexes are byte-stable.
    postings: BTreeMap<String, Vec<Posting>>,
    avgdl: f64,
}

impl Index {
    /// Index a nonempty passage list. Passage ids must be unique within the
    /// corpus and texts nonempty.
    pub fn build(corpus: CorpusId, passages: Vec<IndexedPassage>) -> Result<Self, RetrievalError> {
        if passages.is_empty() {
            return Err(RetrievalError::EmptyCorpus(corpus));
        }
        let mut seen = std::collections::BTreeSet::new();
        for p in &passages {
            if p.text.is_empty() {
                return Err(RetrievalError::InvalidPassage(format!(
                    "{}: empty text",
                    p.passage_id
                )));
            }
            if !seen.insert(&p.passage_id) {
                return Err(RetrievalError::InvalidPassage(format!(
                    "duplicate passage_id {}",
                    p.passage_id
                )));
            }
        }

        let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
        let mut total_len = 0usize;
        for (i, passage) in passages.iter().enumerate() {
            let tokens = tokenize(&passage.text);
            total_len += tokens.len();
            let mut tf: BTreeMap<String, usize> = BTreeMap::new();
            for t in tokens {
                *tf.entry(t).or_insert(0) += 1;
            }
            for (term, count) in tf {
                postings.entry(term).or_default().push(Posting {
                    passage: i,
                    term_frequency: count,
                });
            }
        }
        let avgdl = total_len as f64 / passages.len() as f64;
        Ok(Index {
            format_version: INDEX_FORMAT_VERSION,
            corpus,
            passages,
            postings,
            avgdl,
        })
    }

    pub fn len(&self) -> usize {
        self.passages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.passages.is_empty()
    }

    pub fn avgdl(&self) -> f64 {
        self.avgdl
    }

    /// Document frequency of a term.
    pub fn df(&self, term: &str) -> usize {
        self.postings.get(term).map_or(0, |p| p.len())
    }

    pub fn passages(&self) -> &[IndexedPassage] {
        &self.passages
    }

    pub fn passage(&self, passage_id: &str) -> Option<&IndexedPassage> {
        self.passages.iter().find(|p| p.passage_id == passage_id)
    }

    fn idf(&self, term: &str) -> f64 {
        let n = self.passages.len() as f64;
        let df = self.df(term) as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    fn saturation(&self, tf: f64, len: f64) -> f64 {
        (tf * (BM25_K1 + 1.0)) / (tf + BM25_K1 * (1.0 - BM25_B + BM25_B * len / self.avgdl))
    }

    /// BM25 score of one passage against a tokenized query.
    pub fn score(&self, query_terms: &[String], passage_id: &str) -> Result<f64, RetrievalError> {
        let pos = self
            .passages
            .iter()
            .position(|p| p.passage_id == passage_id)
            .ok_or_else(|| RetrievalError::PassageNotFound(passage_id.to_string()))?;
        Ok(self.score_at(query_terms, pos))
    }

    fn score_at(&self, query_terms: &[String], pos: usize) -> f64 {
        let len = self.passages[pos].token_count as f64;
        let mut total = 0.0;
        for term in query_terms {
            if let Some(postings) = self.postings.get(term) {
                if let Some(p) = postings.iter().find(|p| p.passage == pos) {
                    total += self.idf(term) * self.saturation(p.term_frequency as f64, len);
                }
            }
        }
        total
    }

    /// Scores for every passage containing at least one query term, as
    /// (passage index, score) pairs. A matched term always contributes a
    /// positive score, so matching passages are exactly those with score > 0.
    pub(super) fn score_matches(&self, query_terms: &[String]) -> Vec<(usize, f64)> {
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        for term in query_terms {
            if let Some(postings) = self.postings.get(term) {
                let idf = self.idf(term);
                for p in postings {
                    let len = self.passages[p.passage].token_count as f64;
                    *acc.entry(p.passage).or_insert(0.0) +=
                        idf * self.saturation(p.term_frequency as f64, len);
                }
            }
        }
        acc.into_iter().collect()
    }
}
