use serde::{Deserialize, Serialize};

use super::SCHEMA_VERSION;
use crate::dataset::{DefendantRecord, FilterReport};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceReport {
    pub parsed_rows: usize,
    pub rejected_rows: usize,
    pub filter: FilterReport,
}

/// Filtered records as written by `ingest` and read by `build`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetDocument {
    pub schema_version: u64,
    pub source: SourceReport,
    pub records: Vec<DefendantRecord>,
}

impl DatasetDocument {
    pub fn new(source: SourceReport, records: Vec<DefendantRecord>) -> Self {
        DatasetDocument {
            schema_version: SCHEMA_VERSION,
            source,
            records,
        }
    }

    pub fn export(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("dataset serializes");
        bytes.push(b'\n');
        bytes
    }

    pub fn load(bytes: &[u8]) -> Result<Self> {
        let doc: DatasetDocument = serde_json::from_slice(bytes)?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found: doc.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        if doc.records.len() != doc.source.filter.kept {
            return Err(Error::Integrity(format!(
                "dataset holds {} records but its filter report kept {}",
                doc.records.len(),
                doc.source.filter.kept
            )));
        }
        Ok(doc)
    }
}
