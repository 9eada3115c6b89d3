//! Case bundle loading from a manifest directory.
//!
//! A bundle directory contains `manifest.json` plus the listed source files.
//! Exactly one document is declared as the main complaint document; the
//! rest are supporting evidence.

use super::{DocKind, IngestError, RawDocument};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestDoc {
    pub doc_id: String,
    pub path: String,
    pub declared_kind: DocKind,
    #[serde(default)]
    pub has_structured_data: bool,
    #[serde(default)]
    pub has_images_or_handwriting: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Manifest {
    case_id: String,
    documents: Vec<ManifestDoc>,
}

#[derive(Debug, Clone)]
pub struct CaseBundle {
    pub case_id: String,
    pub root: PathBuf,
    pub docs: Vec<RawDocument>,
}

impl CaseBundle {
    /// Load and validate `manifest.json` from `dir`. Doc ids must be unique
    /// and exactly one document must be declared main.
    pub fn load(dir: &Path) -> Result<Self, IngestError> {
        let manifest_path = dir.join("manifest.json");
        let bytes = fs::read(&manifest_path).map_err(|source| IngestError::Io {
            path: manifest_path.display().to_string(),
            source,
        })?;
        let manifest: Manifest = serde_json::from_slice(&bytes)
            .map_err(|e| IngestError::InvalidManifest(e.to_string()))?;

        let mut seen = BTreeSet::new();
        let mut main_count = 0usize;
        let mut docs = Vec::with_capacity(manifest.documents.len());
        for entry in &manifest.documents {
            if !seen.insert(entry.doc_id.clone()) {
                return Err(IngestError::InvalidManifest(format!(
                    "duplicate doc_id {}",
                    entry.doc_id
                )));
            }
            if entry.declared_kind == DocKind::Main {
                main_count += 1;
            }
            let source = dir.join(&entry.path);
            let byte_size = fs::metadata(&source).map(|m| m.len()).unwrap_or(0);
            docs.push(RawDocument {
                doc_id: entry.doc_id.clone(),
                source_path: entry.path.clone(),
                byte_size,
                declared_kind: entry.declared_kind,
                has_structured_data: entry.has_structured_data,
                has_images_or_handwriting: entry.has_images_or_handwriting,
            });
        }
        if main_count != 1 {
            return Err(IngestError::InvalidManifest(format!(
                "expected exactly one main document, found {main_count}"
            )));
        }
        Ok(CaseBundle {
            case_id: manifest.case_id,
            root: dir.to_path_buf(),
            docs,
        })
    }

    pub fn main_doc(&self) -> &RawDocument {
        self.docs
            .iter()
            .find(|d| d.declared_kind == DocKind::Main)
            .expect("bundle validated to contain one main document")
    }
}
