//! The model family artifact, the canonical dataset file and the selection
//! log.
//!
//! Documents are JSON. Struct fields serialize in declaration order and
//! floats use the shortest representation that round-trips, so exporting the
//! same artifact always yields the same bytes.

mod dataset_file;
mod selection;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

pub use dataset_file::{DatasetDocument, SourceReport};
pub use selection::{
    append_selection, read_selections, summarize, validate_selection, SelectionLog,
    SelectionRecord, SelectionSummary, View,
};

use crate::classifier::{LogisticModel, TrainConfig};
use crate::dataset::Attribute;
use crate::frontier::{pareto_front, CandidateFailure, FrontierPoint, FrontierSet, GridConfig, GridPoint};
use crate::metrics::{GroupConfusion, SweepCurve, ThresholdGrid, THRESHOLD_MATCH_TOLERANCE};
use crate::{Error, Result};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalScope {
    /// Train and test records together.
    Full,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetDescriptor {
    pub records: usize,
    pub per_group_n: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub eval_size: usize,
    pub eval_scope: EvalScope,
    pub train_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupLabels {
    pub a0: String,
    pub a1: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub sample: u64,
    pub split: u64,
    pub train: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracySummary {
    pub threshold: f64,
    pub train: f64,
    pub test: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactMetadata {
    pub dataset: DatasetDescriptor,
    pub attribute: Attribute,
    pub group_labels: GroupLabels,
    pub seeds: Seeds,
    pub thresholds: ThresholdGrid,
    pub grid: GridConfig,
    pub train_config: TrainConfig,
    pub feature_names: Vec<String>,
    pub encoding_warnings: Vec<String>,
    pub unweighted_model_id: String,
    pub unweighted_accuracy: AccuracySummary,
    pub failures: Vec<CandidateFailure>,
    pub build_timestamp: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEntry {
    pub model_id: String,
    pub grid: GridPoint,
    pub model: LogisticModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationEntry {
    pub model_id: String,
    pub threshold: f64,
    pub group_confusion: GroupConfusion,
}

/// A trained model family with every (model, threshold) evaluation
/// precomputed.
///
/// `evaluations` is model-major: entry `m * thresholds + t` belongs to
/// `models[m]` at `thresholds[t]`. `frontiers` has one set per threshold in
/// grid order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFamilyArtifact {
    pub schema_version: u64,
    pub metadata: ArtifactMetadata,
    pub models: Vec<ModelEntry>,
    /// Threshold sweep of the unweighted model.
    pub sweep: SweepCurve,
    pub frontiers: Vec<FrontierSet>,
    pub evaluations: Vec<EvaluationEntry>,
}

#[derive(Deserialize)]
struct VersionProbe {
    schema_version: u64,
}

fn integrity(msg: impl Into<String>) -> Error {
    Error::Integrity(msg.into())
}

impl ModelFamilyArtifact {
    pub fn export(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("artifact serializes");
        bytes.push(b'\n');
        bytes
    }

    /// Parse and fully validate an exported artifact.
    pub fn load(bytes: &[u8]) -> Result<Self> {
        let probe: VersionProbe = serde_json::from_slice(bytes)?;
        if probe.schema_version != SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found: probe.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        let artifact: ModelFamilyArtifact = serde_json::from_slice(bytes)?;
        artifact.validate()?;
        Ok(artifact)
    }

    pub fn attribute(&self) -> Attribute {
        self.metadata.attribute
    }

    pub fn thresholds(&self) -> &[f64] {
        self.metadata.thresholds.values()
    }

    pub fn threshold_index(&self, threshold: f64) -> Option<usize> {
        self.metadata.thresholds.position(threshold)
    }

    fn model_index(&self, model_id: &str) -> Option<usize> {
        self.models.iter().position(|m| m.model_id == model_id)
    }

    pub fn model(&self, model_id: &str) -> Option<&ModelEntry> {
        self.models.iter().find(|m| m.model_id == model_id)
    }

    pub fn evaluation(&self, model_id: &str, threshold: f64) -> Option<&EvaluationEntry> {
        let m = self.model_index(model_id)?;
        let t = self.threshold_index(threshold)?;
        self.evaluations.get(m * self.thresholds().len() + t)
    }

    pub fn frontier(&self, attribute: Attribute, threshold: f64) -> Option<&FrontierSet> {
        if attribute != self.attribute() {
            return None;
        }
        self.frontiers.get(self.threshold_index(threshold)?)
    }

    /// Re-check every structural invariant.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found: self.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        let meta = &self.metadata;
        let thresholds = meta.thresholds.values();
        let attribute = meta.attribute;
        let dim = meta.feature_names.len();

        if self.models.is_empty() {
            return Err(integrity("artifact has no models"));
        }
        let mut ids = HashSet::new();
        for m in &self.models {
            if !ids.insert(m.model_id.as_str()) {
                return Err(integrity(format!("duplicate model_id {}", m.model_id)));
            }
            if m.model.dim() != dim || m.model.normalization.dim() != dim {
                return Err(integrity(format!(
                    "model {} has dimension {}, features have {dim}",
                    m.model_id,
                    m.model.dim()
                )));
            }
            if !m.model.is_finite() {
                return Err(integrity(format!("model {} has non-finite parameters", m.model_id)));
            }
        }
        if !ids.contains(meta.unweighted_model_id.as_str()) {
            return Err(integrity(format!(
                "unweighted model_id {} is not among the models",
                meta.unweighted_model_id
            )));
        }

        if self.evaluations.len() != self.models.len() * thresholds.len() {
            return Err(integrity(format!(
                "expected {} evaluations, found {}",
                self.models.len() * thresholds.len(),
                self.evaluations.len()
            )));
        }
        for (k, e) in self.evaluations.iter().enumerate() {
            let (m, t) = (k / thresholds.len(), k % thresholds.len());
            if e.model_id != self.models[m].model_id || e.threshold != thresholds[t] {
                return Err(integrity(format!(
                    "evaluation {k} is ({}, {}), expected ({}, {})",
                    e.model_id, e.threshold, self.models[m].model_id, thresholds[t]
                )));
            }
            if e.group_confusion.attribute != attribute {
                return Err(integrity(format!("evaluation {k} uses another attribute")));
            }
            if e.group_confusion.overall().total() != meta.dataset.eval_size as u64 {
                return Err(integrity(format!(
                    "evaluation {k} counts {} records, eval set has {}",
                    e.group_confusion.overall().total(),
                    meta.dataset.eval_size
                )));
            }
        }

        if self.frontiers.len() != thresholds.len() {
            return Err(integrity(format!(
                "expected {} frontiers, found {}",
                thresholds.len(),
                self.frontiers.len()
            )));
        }
        for (t, (frontier, &threshold)) in self.frontiers.iter().zip(thresholds).enumerate() {
            if frontier.attribute != attribute || frontier.threshold != threshold {
                return Err(integrity(format!(
                    "frontier {t} is for ({}, {}), expected ({attribute}, {threshold})",
                    frontier.attribute, frontier.threshold
                )));
            }
            for p in &frontier.points {
                let Some(m) = self.model_index(&p.model_id) else {
                    return Err(integrity(format!(
                        "frontier at {threshold} references unknown model_id {}",
                        p.model_id
                    )));
                };
                let e = &self.evaluations[m * thresholds.len() + t];
                if e.group_confusion != p.group_confusion || self.models[m].grid != p.grid {
                    return Err(integrity(format!(
                        "frontier point {} at {threshold} disagrees with its evaluation",
                        p.model_id
                    )));
                }
            }
            frontier.check_pareto()?;
            let all: Vec<FrontierPoint> = self
                .models
                .iter()
                .enumerate()
                .map(|(m, entry)| {
                    FrontierPoint::new(
                        entry.model_id.clone(),
                        entry.grid,
                        threshold,
                        self.evaluations[m * thresholds.len() + t].group_confusion,
                    )
                })
                .collect();
            if pareto_front(&all) != frontier.points {
                return Err(integrity(format!(
                    "frontier at {threshold} is not the Pareto set of the family"
                )));
            }
        }

        let sweep_thresholds: Vec<f64> = self.sweep.points.iter().map(|p| p.threshold).collect();
        if sweep_thresholds != thresholds {
            return Err(integrity("sweep thresholds differ from the threshold grid"));
        }
        self.sweep.check_monotone()?;
        let u = self.model_index(&meta.unweighted_model_id).expect("checked above");
        for (t, p) in self.sweep.points.iter().enumerate() {
            if self.evaluations[u * thresholds.len() + t].group_confusion.overall() != p.counts {
                return Err(integrity(format!(
                    "sweep at {} disagrees with the unweighted model's evaluation",
                    p.threshold
                )));
            }
        }
        Ok(())
    }
}

/// Whether `threshold` names a point of `grid` (within matching tolerance).
pub fn on_grid(grid: &[f64], threshold: f64) -> bool {
    grid.iter()
        .any(|t| (t - threshold).abs() <= THRESHOLD_MATCH_TOLERANCE)
}
