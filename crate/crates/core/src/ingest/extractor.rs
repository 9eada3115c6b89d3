//! Pluggable text-extraction backends.
//!
//! The primary extractor reads the source file as text; the OCR backend is
//! an integration point and ships as a stub that serves pre-configured text
//! (or fails when it has none). Real PDF parsing and OCR engines plug in
//! behind [`TextExtractor`].

use super::RawDocument;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExtractorError {
    #[error("unreadable file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Backend(String),
}

/// Output of a single extraction attempt. `page_count` is `None` when the
/// container carries no page markers and the synthetic page rule applies.
#[derive(Debug, Clone)]
pub struct RawExtraction {
    pub text: String,
    pub page_count: Option<usize>,
}

pub trait TextExtractor: Send + Sync {
    fn extract(&self, doc: &RawDocument) -> Result<RawExtraction, ExtractorError>;
    fn name(&self) -> &str;
    /// Whether the backend tolerates concurrent calls. The pipeline
    /// serializes calls to any extractor that reports false.
    fn concurrent_safe(&self) -> bool {
        true
    }
}

/// Reads the document's source file as UTF-8 text (lossily, so undecodable
/// bytes surface as replacement characters and count against extraction
/// quality).
pub struct PlainTextExtractor {
    root: PathBuf,
}

impl PlainTextExtractor {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    fn resolve(&self, doc: &RawDocument) -> PathBuf {
        let p = Path::new(&doc.source_path);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.root.join(p)
        }
    }
}

impl TextExtractor for PlainTextExtractor {
    fn extract(&self, doc: &RawDocument) -> Result<RawExtraction, ExtractorError> {
        let path = self.resolve(doc);
        let bytes = fs::read(&path).map_err(|source| ExtractorError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(RawExtraction {
            text: String::from_utf8_lossy(&bytes).into_owned(),
            page_count: None,
        })
    }

    fn name(&self) -> &str {
        "plain-text"
    }
}

/// OCR stand-in: serves configured text per doc id and fails for anything
/// else, which is what the fallback error path needs in tests.
#[derive(Default)]
pub struct OcrStub {
    canned: BTreeMap<String, String>,
}

impl OcrStub {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_text(mut self, doc_id: impl Into<String>, text: impl Into<String>) -> Self {
        self.canned.insert(doc_id.into(), text.into());
        self
    }
}

impl TextExtractor for OcrStub {
    fn extract(&self, doc: &RawDocument) -> Result<RawExtraction, ExtractorError> {
        match self.canned.get(&doc.doc_id) {
            Some(text) => Ok(RawExtraction {
                text: text.clone(),
                page_count: None,
            }),
            None => Err(ExtractorError::Backend(format!(
                "no OCR result configured for {}",
                doc.doc_id
            ))),
        }
    }

    fn name(&self) -> &str {
        "ocr-stub"
    }

    fn concurrent_safe(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::DocKind;

    #[test]
    fn plain_text_reads_relative_to_root() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a.txt"), "hello").unwrap();
        let doc = RawDocument {
            doc_id: "a".into(),
            source_path: "a.txt".into(),
            byte_size: 5,
            declared_kind: DocKind::Main,
            has_structured_data: false,
            has_images_or_handwriting: false,
        };
        let ext = PlainTextExtractor::new(dir.path());
        assert_eq!(ext.extract(&doc).unwrap().text, "hello");
    }

    #[test]
    fn plain_text_missing_file_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let doc = RawDocument {
            doc_id: "a".into(),
            source_path: "missing.txt".into(),
            byte_size: 0,
            declared_kind: DocKind::Main,
            has_structured_data: false,
            has_images_or_handwriting: false,
        };
        let ext = PlainTextExtractor::new(dir.path());
        assert!(matches!(ext.extract(&doc), Err(ExtractorError::Io { .. })));
    }

    #[test]
    fn ocr_stub_serves_configured_text() {
        let stub = OcrStub::new().with_text("scan-1", "ocr body");
        let doc = RawDocument {
            doc_id: "scan-1".into(),
            source_path: "x".into(),
            byte_size: 0,
            declared_kind: DocKind::Supporting,
            has_structured_data: false,
            has_images_or_handwriting: false,
        };
        assert_eq!(stub.extract(&doc).unwrap().text, "ocr body");
        let other = RawDocument {
            doc_id: "scan-2".into(),
            ..doc
        };
        assert!(stub.extract(&other).is_err());
    }
}
