//! Document ingestion: searchability classification, text extraction with
//! OCR fallback, extraction quality, and the difficulty rubric.
//!
//! A character is *searchable* when it is a valid, visible scalar: anything
//! except the replacement character U+FFFD, control characters other than
//! `\n` `\r` `\t`, and whitespace. A character is *invalid* when it is the
//! replacement character or a disallowed control character. The extraction
//! quality metric is the ratio of invalid characters over all characters.

pub mod bundle;
pub mod extractor;

pub use bundle::{CaseBundle, ManifestDoc};
pub use extractor::{ExtractorError, OcrStub, PlainTextExtractor, RawExtraction, TextExtractor};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Characters per synthetic page when the source container carries no page
/// markers.
pub const CHARS_PER_PAGE: usize = 3000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocKind {
    Main,
    Supporting,
}

/// A document as listed in the case manifest, before extraction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawDocument {
    pub doc_id: String,
    pub source_path: String,
    pub byte_size: u64,
    pub declared_kind: DocKind,
    /// Content flags for the difficulty rubric; the manifest may declare
    /// them, otherwise they default to false.
    #[serde(default)]
    pub has_structured_data: bool,
    #[serde(default)]
    pub has_images_or_handwriting: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractorUsed {
    PrimaryText,
    OcrFallback,
}

/// Extracted text plus the metadata the rest of the pipeline keys on.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtractedDocument {
    pub doc_id: String,
    pub text: String,
    pub page_count: usize,
    pub invalid_char_count: usize,
    pub total_char_count: usize,
    pub extractor_used: ExtractorUsed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DifficultyClass {
    Easy,
    Medium,
    Hard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Searchability {
    Searchable,
    Unsearchable,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("extraction failed for {doc_id}: primary: {primary}; fallback: {fallback}")]
    ExtractionFailed {
        doc_id: String,
        primary: String,
        fallback: String,
    },
    #[error("extraction quality undefined: document has zero characters")]
    QualityUndefined,
    #[error("invalid manifest: {0}")]
    InvalidManifest(String),
}

fn is_invalid_char(c: char) -> bool {
    c == '\u{FFFD}' || (c.is_control() && !matches!(c, '\n' | '\r' | '\t'))
}

fn is_searchable_char(c: char) -> bool {
    !is_invalid_char(c) && !c.is_whitespace()
}

/// Count of searchable characters in `text`.
pub fn searchable_char_count(text: &str) -> usize {
    text.chars().filter(|c| is_searchable_char(*c)).count()
}

/// Count of invalid characters in `text`.
pub fn invalid_char_count(text: &str) -> usize {
    text.chars().filter(|c| is_invalid_char(*c)).count()
}

/// Classify a document from its primary extractor output: unsearchable iff
/// the output contains zero searchable characters.
pub fn classify_searchability(_doc: &RawDocument, probe_text: &str) -> Searchability {
    if searchable_char_count(probe_text) == 0 {
        Searchability::Unsearchable
    } else {
        Searchability::Searchable
    }
}

/// Synthetic page count for containers without page markers: one page per
/// [`CHARS_PER_PAGE`] characters, minimum one.
pub fn synthetic_page_count(text: &str) -> usize {
    text.chars().count().div_ceil(CHARS_PER_PAGE).max(1)
}

/// Extract text through the primary extractor, falling back to the OCR
/// backend iff the primary path produced zero searchable characters (or
/// failed outright). Both paths empty or failing is a hard error carrying
/// both causes.
pub fn extract_text(
    doc: &RawDocument,
    primary: &dyn TextExtractor,
    fallback: &dyn TextExtractor,
) -> Result<ExtractedDocument, IngestError> {
    extract_text_with_veto(doc, primary, fallback, None)
}

/// Like [`extract_text`], but a primary extraction whose invalid-character
/// ratio exceeds `quality_veto` (when set) is treated as failed and the
/// fallback attempted. Off by default; opting in relaxes the
/// fallback-only-on-zero-searchable rule.
pub fn extract_text_with_veto(
    doc: &RawDocument,
    primary: &dyn TextExtractor,
    fallback: &dyn TextExtractor,
    quality_veto: Option<f64>,
) -> Result<ExtractedDocument, IngestError> {
    let primary_outcome = primary.extract(doc);
    let primary_failure: String;
    match &primary_outcome {
        Ok(raw) if searchable_char_count(&raw.text) > 0 => {
            let candidate = finish(doc, raw, ExtractorUsed::PrimaryText);
            let ratio = candidate.invalid_char_count as f64 / candidate.total_char_count as f64;
            match quality_veto {
                Some(threshold) if ratio > threshold => {
                    primary_failure = format!(
                        "invalid-character ratio {ratio:.4} exceeds veto threshold {threshold}"
                    );
                }
                _ => return Ok(candidate),
            }
        }
        Ok(_) => primary_failure = "zero searchable characters".to_string(),
        Err(e) => primary_failure = e.to_string(),
    }

    match fallback.extract(doc) {
        Ok(raw) if searchable_char_count(&raw.text) > 0 => {
            Ok(finish(doc, &raw, ExtractorUsed::OcrFallback))
        }
        Ok(_) => Err(IngestError::ExtractionFailed {
            doc_id: doc.doc_id.clone(),
            primary: primary_failure,
            fallback: "zero searchable characters".to_string(),
        }),
        Err(e) => Err(IngestError::ExtractionFailed {
            doc_id: doc.doc_id.clone(),
            primary: primary_failure,
            fallback: e.to_string(),
        }),
    }
}

fn finish(doc: &RawDocument, raw: &RawExtraction, used: ExtractorUsed) -> ExtractedDocument {
    let page_count = raw.page_count.unwrap_or_else(|| synthetic_page_count(&raw.text));
    ExtractedDocument {
        doc_id: doc.doc_id.clone(),
        text: raw.text.clone(),
        page_count,
        invalid_char_count: invalid_char_count(&raw.text),
        total_char_count: raw.text.chars().count(),
        extractor_used: used,
    }
}

/// Ratio of invalid characters over all characters, in `[0, 1]`.
/// Zero means a clean extraction.
pub fn extraction_quality(doc: &ExtractedDocument) -> Result<f64, IngestError> {
    if doc.total_char_count == 0 {
        return Err(IngestError::QualityUndefined);
    }
    Ok(doc.invalid_char_count as f64 / doc.total_char_count as f64)
}

/// Difficulty rubric over page count and content flags.
///
/// Hard: over 25 pages. Medium: up to 25 pages with structured data or
/// images/handwriting, and also the rubric gap of 11-25 plain pages.
/// Easy: up to 10 plain pages.
pub fn classify_difficulty(
    page_count: usize,
    has_structured: bool,
    has_images_or_handwriting: bool,
) -> DifficultyClass {
    if page_count > 25 {
        DifficultyClass::Hard
    } else if has_structured || has_images_or_handwriting {
        DifficultyClass::Medium
    } else if page_count <= 10 {
        DifficultyClass::Easy
    } else {
        DifficultyClass::Medium
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw_doc(id: &str) -> RawDocument {
        RawDocument {
            doc_id: id.to_string(),
            source_path: format!("{id}.txt"),
            byte_size: 0,
            declared_kind: DocKind::Supporting,
            has_structured_data: false,
            has_images_or_handwriting: false,
        }
    }

    #[test]
    fn searchability_nonempty_text() {
        let doc = raw_doc("d1");
        assert_eq!(
            classify_searchability(&doc, "Contrato nº 42 ..."),
            Searchability::Searchable
        );
    }

    #[test]
    fn searchability_empty_text() {
        let doc = raw_doc("d1");
        assert_eq!(classify_searchability(&doc, ""), Searchability::Unsearchable);
    }

    #[test]
    fn searchability_replacement_chars_only() {
        // Two replacement characters: both invalid, zero searchable.
        let doc = raw_doc("d1");
        assert_eq!(searchable_char_count("\u{FFFD}\u{FFFD}"), 0);
        assert_eq!(
            classify_searchability(&doc, "\u{FFFD}\u{FFFD}"),
            Searchability::Unsearchable
        );
    }

    #[test]
    fn whitespace_only_is_unsearchable() {
        let doc = raw_doc("d1");
        assert_eq!(classify_searchability(&doc, " \t\n  "), Searchability::Unsearchable);
    }

    struct FixedExtractor(Result<String, String>);
    impl TextExtractor for FixedExtractor {
        fn extract(&self, _doc: &RawDocument) -> Result<RawExtraction, ExtractorError> {
            match &self.0 {
                Ok(text) => Ok(RawExtraction {
                    text: text.clone(),
                    page_count: None,
                }),
                Err(msg) => Err(ExtractorError::Backend(msg.clone())),
            }
        }
        fn name(&self) -> &str {
            "fixed"
        }
    }

    #[test]
    fn extract_prefers_primary_when_searchable() {
        let doc = raw_doc("d1");
        let primary = FixedExtractor(Ok("x".repeat(1200)));
        let fallback = FixedExtractor(Ok("ocr text".to_string()));
        let out = extract_text(&doc, &primary, &fallback).unwrap();
        assert_eq!(out.extractor_used, ExtractorUsed::PrimaryText);
        assert_eq!(out.total_char_count, 1200);
    }

    #[test]
    fn extract_falls_back_on_empty_primary() {
        let doc = raw_doc("d1");
        let primary = FixedExtractor(Ok(String::new()));
        let fallback = FixedExtractor(Ok("o".repeat(300)));
        let out = extract_text(&doc, &primary, &fallback).unwrap();
        assert_eq!(out.extractor_used, ExtractorUsed::OcrFallback);
        assert_eq!(out.total_char_count, 300);
    }

    #[test]
    fn extract_fails_when_both_empty() {
        let doc = raw_doc("d1");
        let primary = FixedExtractor(Ok(String::new()));
        let fallback = FixedExtractor(Ok(String::new()));
        let err = extract_text(&doc, &primary, &fallback).unwrap_err();
        match err {
            IngestError::ExtractionFailed { primary, fallback, .. } => {
                assert!(primary.contains("zero searchable"));
                assert!(fallback.contains("zero searchable"));
            }
            other => panic!("unexpected error: {other:?}"),
        }
    }

    #[test]
    fn extract_never_uses_fallback_with_one_searchable_char() {
        let doc = raw_doc("d1");
        let primary = FixedExtractor(Ok("   a   ".to_string()));
        let fallback = FixedExtractor(Ok("full ocr output".to_string()));
        let out = extract_text(&doc, &primary, &fallback).unwrap();
        assert_eq!(out.extractor_used, ExtractorUsed::PrimaryText);
    }

    #[test]
    fn quality_is_invalid_over_total() {
        let doc = ExtractedDocument {
            doc_id: "d".into(),
            text: String::new(),
            page_count: 1,
            invalid_char_count: 5,
            total_char_count: 100,
            extractor_used: ExtractorUsed::PrimaryText,
        };
        assert_eq!(extraction_quality(&doc).unwrap(), 0.05);
    }

    #[test]
    fn quality_zero_invalid() {
        let doc = ExtractedDocument {
            doc_id: "d".into(),
            text: String::new(),
            page_count: 1,
            invalid_char_count: 0,
            total_char_count: 100,
            extractor_used: ExtractorUsed::PrimaryText,
        };
        assert_eq!(extraction_quality(&doc).unwrap(), 0.0);
    }

    #[test]
    fn quality_undefined_for_empty_document() {
        let doc = ExtractedDocument {
            doc_id: "d".into(),
            text: String::new(),
            page_count: 1,
            invalid_char_count: 0,
            total_char_count: 0,
            extractor_used: ExtractorUsed::PrimaryText,
        };
        assert!(matches!(
            extraction_quality(&doc),
            Err(IngestError::QualityUndefined)
        ));
    }

    #[test]
    fn quality_monotone_in_invalid_count() {
        let mut prev = -1.0;
        for invalid in 0..=100 {
            let doc = ExtractedDocument {
                doc_id: "d".into(),
                text: String::new(),
                page_count: 1,
                invalid_char_count: invalid,
                total_char_count: 100,
                extractor_used: ExtractorUsed::PrimaryText,
            };
            let q = extraction_quality(&doc).unwrap();
            assert!(q >= prev);
            prev = q;
        }
    }

    #[test]
    fn difficulty_boundary_grid() {
        use DifficultyClass::*;
        // 3 page-count bands x structured x images, exhaustively.
        let cases = [
            (8, false, false, Easy),
            (8, true, false, Medium),
            (8, false, true, Medium),
            (8, true, true, Medium),
            (20, false, false, Medium), // rubric gap: 11-25 plain pages
            (20, true, false, Medium),
            (20, false, true, Medium),
            (20, true, true, Medium),
            (30, false, false, Hard),
            (30, true, false, Hard),
            (30, false, true, Hard),
            (30, true, true, Hard),
        ];
        for (pages, structured, images, expected) in cases {
            assert_eq!(
                classify_difficulty(pages, structured, images),
                expected,
                "pages={pages} structured={structured} images={images}"
            );
        }
    }

    #[test]
    fn difficulty_exact_boundaries() {
        use DifficultyClass::*;
        assert_eq!(classify_difficulty(10, false, false), Easy);
        assert_eq!(classify_difficulty(11, false, false), Medium);
        assert_eq!(classify_difficulty(25, true, true), Medium);
        assert_eq!(classify_difficulty(26, true, true), Hard);
        assert_eq!(classify_difficulty(0, false, false), Easy);
    }

    #[test]
    fn quality_veto_forces_fallback() {
        let doc = raw_doc("d1");
        // 2 invalid of 4 chars: ratio 0.5.
        let primary = FixedExtractor(Ok("a\u{FFFD}\u{FFFD}b".to_string()));
        let fallback = FixedExtractor(Ok("clean ocr text".to_string()));
        let vetoed = extract_text_with_veto(&doc, &primary, &fallback, Some(0.25)).unwrap();
        assert_eq!(vetoed.extractor_used, ExtractorUsed::OcrFallback);
        // Without the veto (default), the primary result stands.
        let kept = extract_text_with_veto(&doc, &primary, &fallback, None).unwrap();
        assert_eq!(kept.extractor_used, ExtractorUsed::PrimaryText);
        // Threshold not exceeded: primary stands.
        let kept = extract_text_with_veto(&doc, &primary, &fallback, Some(0.5)).unwrap();
        assert_eq!(kept.extractor_used, ExtractorUsed::PrimaryText);
    }

    #[test]
    fn synthetic_pages() {
        assert_eq!(synthetic_page_count(""), 1);
        assert_eq!(synthetic_page_count(&"a".repeat(2999)), 1);
        assert_eq!(synthetic_page_count(&"a".repeat(3000)), 1);
        assert_eq!(synthetic_page_count(&"a".repeat(3001)), 2);
        assert_eq!(synthetic_page_count(&"a".repeat(9000)), 3);
    }
}
