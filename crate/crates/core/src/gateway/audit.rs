//! Request audit log: one JSON line per completion, plus flagged events
//! (budget exhaustion, parse fallbacks) that reviewers should see.

use serde::{Deserialize, Serialize};
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::sync::Mutex;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct AuditRecord {
    pub stage: String,
    pub request_key: String,
    pub tokens_in: usize,
    pub tokens_out: usize,
    pub latency_ms: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct AuditEvent {
    pub stage: String,
    pub event: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(untagged)]
pub enum AuditLine {
    Request(AuditRecord),
    Event(AuditEvent),
}

#[derive(Default)]
pub struct AuditLog {
    lines: Mutex<Vec<AuditLine>>,
    sink: Mutex<Option<File>>,
}

impl AuditLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Append new lines to `path` as they are recorded. Appending (not
    /// truncating) keeps a resumed run's log equal to an uninterrupted one.
    pub fn attach_file(&self, path: &Path) -> std::io::Result<()> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        *self.sink.lock().expect("audit sink lock") = Some(file);
        Ok(())
    }

    pub fn record_request(&self, record: AuditRecord) {
        self.push(AuditLine::Request(record));
    }

    pub fn record_event(&self, stage: &str, event: impl Into<String>) {
        self.push(AuditLine::Event(AuditEvent {
            stage: stage.to_string(),
            event: event.into(),
        }));
    }

    fn push(&self, line: AuditLine) {
        if let Some(file) = self.sink.lock().expect("audit sink lock").as_mut() {
            let json = serde_json::to_string(&line).expect("serializable audit line");
            let _ = writeln!(file, "{json}");
            let _ = file.flush();
        }
        self.lines.lock().expect("audit lines lock").push(line);
    }

    pub fn lines(&self) -> Vec<AuditLine> {
        self.lines.lock().expect("audit lines lock").clone()
    }

    pub fn requests(&self) -> Vec<AuditRecord> {
        self.lines()
            .into_iter()
            .filter_map(|l| match l {
                AuditLine::Request(r) => Some(r),
                AuditLine::Event(_) => None,
            })
            .collect()
    }

    /// Total tokens (in + out) logged so far for `stage`, or for the whole
    /// run when `stage` is `None`.
    pub fn total_tokens(&self, stage: Option<&str>) -> (usize, usize) {
        self.requests()
            .iter()
            .filter(|r| stage.map_or(true, |s| r.stage == s))
            .fold((0, 0), |(i, o), r| (i + r.tokens_in, o + r.tokens_out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn totals_accumulate_monotonically() {
        let log = AuditLog::new();
        let mut last = 0;
        for i in 1..=5 {
            log.record_request(AuditRecord {
                stage: "s".into(),
                request_key: format!("k{i}"),
                tokens_in: 10,
                tokens_out: 5,
                latency_ms: 0,
            });
            let (tin, tout) = log.total_tokens(None);
            assert!(tin + tout > last);
            last = tin + tout;
        }
        assert_eq!(log.total_tokens(Some("s")), (50, 25));
        assert_eq!(log.total_tokens(Some("other")), (0, 0));
    }

    #[test]
    fn file_sink_appends_jsonl() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("audit.log");
        let log = AuditLog::new();
        log.attach_file(&path).unwrap();
        log.record_request(AuditRecord {
            stage: "a".into(),
            request_key: "k".into(),
            tokens_in: 1,
            tokens_out: 2,
            latency_ms: 0,
        });
        log.record_event("a", "note");
        let body = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = body.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].contains("\"request_key\":\"k\""));
        assert!(lines[1].contains("\"event\":\"note\""));
    }
}
