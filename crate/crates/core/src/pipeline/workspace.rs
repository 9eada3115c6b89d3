//! Case workspace layout and stage-output persistence.
//!
//! ```text
//! <workspace>/
//!   case.json            case id + bundle path
//!   extracted/<doc>.json extracted documents
//!   indexes/<corpus>.json serialized indexes
//!   stages/<stage>.json  stage envelopes {schema_version, inputs_digest, payload}
//!   instruction.md       rendered draft
//!   instruction.json     structured draft (sections + digests)
//!   audit.log            JSON-lines request log
//!   .lock                single-writer lock, held for the run's duration
//! ```
//!
//! Stage outputs are written atomically (temp file + rename) so a crash
//! between stages never leaves a half-written envelope, and a stage is
//! fresh exactly when its recorded inputs digest matches the recomputed one.

use super::stages::StageId;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::fs::{self, File, OpenOptions};
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const STAGE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum WorkspaceError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("workspace is locked by another writer: {0}")]
    Locked(String),
    #[error("workspace missing case metadata (case.json); run the pipeline first")]
    NoCaseMeta,
}

fn io_err(path: &Path, source: std::io::Error) -> WorkspaceError {
    WorkspaceError::Io {
        path: path.display().to_string(),
        source,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaseMeta {
    pub case_id: String,
    pub bundle_dir: PathBuf,
    pub schema_version: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageEnvelope<T> {
    pub schema_version: u32,
    pub stage: String,
    pub inputs_digest: String,
    pub payload_digest: String,
    pub payload: T,
}

#[derive(Debug, Clone)]
pub struct CaseWorkspace {
    root: PathBuf,
}

impl CaseWorkspace {
    /// Open (creating directories as needed) the workspace at `root`.
    pub fn open(root: &Path) -> Result<Self, WorkspaceError> {
        for sub in ["extracted", "indexes", "stages"] {
            let dir = root.join(sub);
            fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        }
        Ok(Self {
            root: root.to_path_buf(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn extracted_path(&self, doc_id: &str) -> PathBuf {
        self.root.join("extracted").join(format!("{doc_id}.json"))
    }

    pub fn index_path(&self, corpus_slug: &str) -> PathBuf {
        self.root.join("indexes").join(format!("{corpus_slug}.json"))
    }

    pub fn stage_path(&self, stage: StageId) -> PathBuf {
        self.root.join("stages").join(format!("{}.json", stage.name()))
    }

    pub fn instruction_md_path(&self) -> PathBuf {
        self.root.join("instruction.md")
    }

    pub fn instruction_json_path(&self) -> PathBuf {
        self.root.join("instruction.json")
    }

    pub fn audit_log_path(&self) -> PathBuf {
        self.root.join("audit.log")
    }

    fn case_meta_path(&self) -> PathBuf {
        self.root.join("case.json")
    }

    pub fn write_case_meta(&self, meta: &CaseMeta) -> Result<(), WorkspaceError> {
        self.write_json_atomic(&self.case_meta_path(), meta)
    }

    pub fn read_case_meta(&self) -> Result<CaseMeta, WorkspaceError> {
        let path = self.case_meta_path();
        if !path.exists() {
            return Err(WorkspaceError::NoCaseMeta);
        }
        self.read_json(&path)
    }

    /// Atomic JSON write: temp file in the same directory, then rename.
    pub fn write_json_atomic<T: Serialize>(
        &self,
        path: &Path,
        value: &T,
    ) -> Result<(), WorkspaceError> {
        let body = serde_json::to_string_pretty(value).map_err(|e| WorkspaceError::Json {
            path: path.display().to_string(),
            source: e,
        })?;
        self.write_bytes_atomic(path, body.as_bytes())
    }

    pub fn write_bytes_atomic(&self, path: &Path, bytes: &[u8]) -> Result<(), WorkspaceError> {
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, bytes).map_err(|e| io_err(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| io_err(path, e))?;
        Ok(())
    }

    pub fn read_json<T: DeserializeOwned>(&self, path: &Path) -> Result<T, WorkspaceError> {
        let body = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        serde_json::from_str(&body).map_err(|e| WorkspaceError::Json {
            path: path.display().to_string(),
            source: e,
        })
    }

    pub fn write_stage<T: Serialize>(
        &self,
        stage: StageId,
        inputs_digest: &str,
        payload: &T,
    ) -> Result<StageEnvelope<serde_json::Value>, WorkspaceError> {
        let payload_value = serde_json::to_value(payload).map_err(|e| WorkspaceError::Json {
            path: self.stage_path(stage).display().to_string(),
            source: e,
        })?;
        let envelope = StageEnvelope {
            schema_version: STAGE_SCHEMA_VERSION,
            stage: stage.name().to_string(),
            inputs_digest: inputs_digest.to_string(),
            payload_digest: crate::digest::digest_json(&payload_value),
            payload: payload_value,
        };
        self.write_json_atomic(&self.stage_path(stage), &envelope)?;
        Ok(envelope)
    }

    /// The persisted envelope for `stage`, if any.
    pub fn read_stage(
        &self,
        stage: StageId,
    ) -> Result<Option<StageEnvelope<serde_json::Value>>, WorkspaceError> {
        let path = self.stage_path(stage);
        if !path.exists() {
            return Ok(None);
        }
        Ok(Some(self.read_json(&path)?))
    }

    pub fn read_stage_payload<T: DeserializeOwned>(
        &self,
        stage: StageId,
    ) -> Result<Option<T>, WorkspaceError> {
        match self.read_stage(stage)? {
            None => Ok(None),
            Some(envelope) => {
                let payload =
                    serde_json::from_value(envelope.payload).map_err(|e| WorkspaceError::Json {
                        path: self.stage_path(stage).display().to_string(),
                        source: e,
                    })?;
                Ok(Some(payload))
            }
        }
    }
}

/// Single writer per workspace; the lock file disappears when the guard
/// drops (including on stage failure, but not on SIGKILL — a stale lock
/// surfaces as an error naming the file).
pub struct LockGuard {
    path: PathBuf,
}

impl LockGuard {
    pub fn acquire(workspace: &CaseWorkspace) -> Result<Self, WorkspaceError> {
        let path = workspace.root().join(".lock");
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut file) => {
                use std::io::Write;
                let _ = writeln!(file, "pid {}", std::process::id());
                Ok(Self { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                Err(WorkspaceError::Locked(path.display().to_string()))
            }
            Err(e) => Err(io_err(&path, e)),
        }
    }
}

impl Drop for LockGuard {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// Ensure a file exists (used for audit.log so empty runs still leave one).
pub fn touch(path: &Path) -> Result<(), WorkspaceError> {
    if !path.exists() {
        File::create(path).map_err(|e| io_err(path, e))?;
    }
    Ok(())
}
