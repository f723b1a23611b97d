use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::ModelFamilyArtifact;
use crate::dataset::Attribute;
use crate::error::FieldIssue;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum View {
    Matrix,
    Text,
}

/// A user's choice of model, one line of the selection log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRecord {
    pub timestamp: String,
    pub session_id: String,
    /// `None` when the user picked without a protected attribute selected.
    pub attribute: Option<Attribute>,
    pub threshold: f64,
    pub model_id: String,
    pub view: View,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rationale: Option<String>,
}

pub fn validate_selection(record: &SelectionRecord, artifact: &ModelFamilyArtifact) -> Result<()> {
    let mut issues = Vec::new();
    if record.timestamp.trim().is_empty() {
        issues.push(FieldIssue::new("timestamp", "must not be empty"));
    }
    if record.session_id.trim().is_empty() {
        issues.push(FieldIssue::new("session_id", "must not be empty"));
    }
    if artifact.model(&record.model_id).is_none() {
        issues.push(FieldIssue::new(
            "model_id",
            format!("unknown model `{}`", record.model_id),
        ));
    }
    if artifact.threshold_index(record.threshold).is_none() {
        issues.push(FieldIssue::new(
            "threshold",
            format!("{} is not on the served threshold grid", record.threshold),
        ));
    }
    if let Some(a) = record.attribute {
        if a != artifact.attribute() {
            issues.push(FieldIssue::new(
                "attribute",
                format!("`{a}` is not served (available: {})", artifact.attribute()),
            ));
        }
    }
    if issues.is_empty() {
        Ok(())
    } else {
        Err(Error::Selection(issues))
    }
}

fn encode_line(record: &SelectionRecord) -> Vec<u8> {
    let mut line = serde_json::to_vec(record).expect("selection serializes");
    line.push(b'\n');
    line
}

/// Append one line under an exclusive file lock and flush it to disk.
fn write_line(path: &Path, line: &[u8]) -> Result<()> {
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    file.lock().map_err(|e| Error::io(path, e))?;
    let written = file.write_all(line).and_then(|_| file.sync_data());
    let unlocked = file.unlock();
    written.and(unlocked).map_err(|e| Error::io(path, e))
}

/// Validate `record` against `artifact` and append it to the log at `log_path`.
pub fn append_selection(
    record: &SelectionRecord,
    log_path: &Path,
    artifact: &ModelFamilyArtifact,
) -> Result<()> {
    validate_selection(record, artifact)?;
    write_line(log_path, &encode_line(record))
}

pub fn read_selections(path: &Path) -> Result<Vec<SelectionRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| {
            Error::Integrity(format!("{} line {}: {e}", path.display(), i + 1))
        })?;
        out.push(record);
    }
    Ok(out)
}

/// An append-only selection log with a per-process sequence counter.
///
/// Appends through one `SelectionLog` are serialized; the file lock taken
/// for each write also excludes other processes.
#[derive(Debug)]
pub struct SelectionLog {
    path: PathBuf,
    appended: Mutex<u64>,
}

impl SelectionLog {
    /// Open (creating if needed) and check every existing line.
    pub fn open(path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        let existing = read_selections(&path)?.len() as u64;
        Ok(SelectionLog {
            path,
            appended: Mutex::new(existing),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Records in the log, counting those present when it was opened.
    pub fn len(&self) -> u64 {
        *self.appended.lock().expect("selection log lock")
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Validate and append; returns the record's 1-based sequence number.
    pub fn append(&self, record: &SelectionRecord, artifact: &ModelFamilyArtifact) -> Result<u64> {
        validate_selection(record, artifact)?;
        let line = encode_line(record);
        let mut count = self.appended.lock().expect("selection log lock");
        write_line(&self.path, &line)?;
        *count += 1;
        Ok(*count)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionSummary {
    pub total: u64,
    pub by_model: BTreeMap<String, u64>,
    pub by_threshold: BTreeMap<String, u64>,
    pub by_view: BTreeMap<String, u64>,
}

pub fn summarize(records: &[SelectionRecord]) -> SelectionSummary {
    let mut s = SelectionSummary::default();
    for r in records {
        s.total += 1;
        *s.by_model.entry(r.model_id.clone()).or_default() += 1;
        *s.by_threshold.entry(r.threshold.to_string()).or_default() += 1;
        let view = match r.view {
            View::Matrix => "matrix",
            View::Text => "text",
        };
        *s.by_view.entry(view.to_string()).or_default() += 1;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(model: &str, threshold: f64) -> SelectionRecord {
        SelectionRecord {
            timestamp: "2024-01-01T00:00:00Z".into(),
            session_id: "s1".into(),
            attribute: Some(Attribute::Race),
            threshold,
            model_id: model.into(),
            view: View::Matrix,
            rationale: None,
        }
    }

    #[test]
    fn summary_counts() {
        let s = summarize(&[rec("m001", 0.45), rec("m001", 0.5), rec("m002", 0.45)]);
        assert_eq!(s.total, 3);
        assert_eq!(s.by_model["m001"], 2);
        assert_eq!(s.by_model["m002"], 1);
        assert_eq!(s.by_threshold["0.45"], 2);
        assert_eq!(s.by_threshold["0.5"], 1);
    }

    #[test]
    fn line_format_is_one_object() {
        let line = encode_line(&rec("m001", 0.45));
        assert_eq!(line.iter().filter(|&&b| b == b'\n').count(), 1);
        let text = std::str::from_utf8(&line).unwrap();
        assert!(text.starts_with("{\"timestamp\":"));
        assert!(!text.contains("rationale"));
        let back: SelectionRecord = serde_json::from_str(text).unwrap();
        assert_eq!(back, rec("m001", 0.45));
    }

    #[test]
    fn corrupt_line_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("log.jsonl");
        std::fs::write(&path, "{\"oops\": 1}\n").unwrap();
        let err = read_selections(&path).unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
        assert!(SelectionLog::open(&path).is_err());
    }
}
