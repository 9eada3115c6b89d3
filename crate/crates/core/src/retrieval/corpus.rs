//! Corpus ingestion and the multi-corpus store served to agent loops.
//!
//! External corpora arrive as JSON-lines, one document per line:
//! `{"corpus": "...", "doc_id": "...", "text": "..."}`. Documents are cut
//! into fixed token windows so retrieval granularity is reproducible.

use super::index::{Index, IndexedPassage};
use super::rerank::Reranker;
use super::{search, CorpusId, RetrievalError, ScoredPassage};
use crate::retrieval::tokenize::tokenize;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

/// Window size and overlap, in tokens.
pub const PASSAGE_WINDOW: usize = 512;
pub const PASSAGE_OVERLAP: usize = 128;

#[derive(Debug, Deserialize)]
struct CorpusLine {
    corpus: CorpusId,
    doc_id: String,
    text: String,
}

/// Cut a document into passages of [`PASSAGE_WINDOW`] tokens advancing by
/// window minus overlap; window boundaries follow the token positions in the
/// original text so passage text is a true substring of the document.
pub fn window_passages(corpus: CorpusId, doc_id: &str, text: &str) -> Vec<IndexedPassage> {
    // Locate token spans (byte offsets) with the same rules as `tokenize`.
    let mut spans: Vec<(usize, usize)> = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in text.char_indices() {
        if c.is_alphanumeric() {
            if start.is_none() {
                start = Some(i);
            }
        } else if let Some(s) = start.take() {
            spans.push((s, i));
        }
    }
    if let Some(s) = start {
        spans.push((s, text.len()));
    }

    if spans.is_empty() {
        return Vec::new();
    }

    let stride = PASSAGE_WINDOW - PASSAGE_OVERLAP;
    let mut passages = Vec::new();
    let mut window_start = 0usize;
    let mut window_index = 0usize;
    loop {
        let window_end = (window_start + PASSAGE_WINDOW).min(spans.len());
        let byte_start = spans[window_start].0;
        let byte_end = spans[window_end - 1].1;
        passages.push(IndexedPassage::new(
            corpus,
            doc_id,
            format!("{doc_id}#w{window_index}"),
            &text[byte_start..byte_end],
        ));
        if window_end == spans.len() {
            break;
        }
        window_start += stride;
        window_index += 1;
    }
    passages
}

/// Parse a JSON-lines corpus file into windowed passages, keyed by corpus.
pub fn load_corpus_jsonl(path: &Path) -> Result<BTreeMap<CorpusId, Vec<IndexedPassage>>, RetrievalError> {
    let body = fs::read_to_string(path).map_err(|e| RetrievalError::CorpusFile {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let mut out: BTreeMap<CorpusId, Vec<IndexedPassage>> = BTreeMap::new();
    for (lineno, line) in body.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: CorpusLine = serde_json::from_str(line).map_err(|e| RetrievalError::CorpusFile {
            path: path.display().to_string(),
            message: format!("line {}: {e}", lineno + 1),
        })?;
        out.entry(row.corpus)
            .or_default()
            .extend(window_passages(row.corpus, &row.doc_id, &row.text));
    }
    Ok(out)
}

/// Indexes for every registered corpus, plus the reranker choice, behind the
/// search interface handed to agent loops.
pub struct CorpusStore {
    indexes: BTreeMap<CorpusId, Index>,
    reranker: Option<Box<dyn Reranker>>,
}

impl CorpusStore {
    pub fn new() -> Self {
        Self {
            indexes: BTreeMap::new(),
            reranker: None,
        }
    }

    pub fn with_reranker(mut self, reranker: Box<dyn Reranker>) -> Self {
        self.reranker = Some(reranker);
        self
    }

    pub fn register(&mut self, index: Index) {
        self.indexes.insert(index.corpus, index);
    }

    pub fn registered(&self) -> Vec<CorpusId> {
        self.indexes.keys().copied().collect()
    }

    pub fn index(&self, corpus: CorpusId) -> Option<&Index> {
        self.indexes.get(&corpus)
    }

    pub fn search(
        &self,
        corpus: CorpusId,
        query: &str,
        k: usize,
    ) -> Result<Vec<ScoredPassage>, RetrievalError> {
        let index = self
            .indexes
            .get(&corpus)
            .ok_or(RetrievalError::CorpusNotRegistered(corpus))?;
        search(index, query, k, self.reranker.as_deref())
    }
}

impl Default for CorpusStore {
    fn default() -> Self {
        Self::new()
    }
}
