//! Request handling as plain functions of the loaded artifact.

use serde::{Deserialize, Serialize};
use tradeoff_core::artifact::{
    AccuracySummary, DatasetDescriptor, GroupLabels, ModelFamilyArtifact, Seeds, SelectionLog,
    SelectionRecord, View,
};
use tradeoff_core::dataset::Attribute;
use tradeoff_core::frontier::GridPoint;
use tradeoff_core::metrics::{ConfusionCounts, GroupConfusion};
use tradeoff_core::{Error, FieldIssue};

use crate::error::ApiError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetadataDoc {
    pub schema_version: u64,
    pub dataset: DatasetDescriptor,
    pub attributes: Vec<Attribute>,
    pub group_labels: GroupLabels,
    pub thresholds: Vec<f64>,
    pub model_ids: Vec<String>,
    pub unweighted_model_id: String,
    pub unweighted_accuracy: AccuracySummary,
    pub seeds: Seeds,
}

pub fn metadata(artifact: &ModelFamilyArtifact) -> MetadataDoc {
    let meta = &artifact.metadata;
    MetadataDoc {
        schema_version: artifact.schema_version,
        dataset: meta.dataset.clone(),
        attributes: vec![meta.attribute],
        group_labels: meta.group_labels.clone(),
        thresholds: artifact.thresholds().to_vec(),
        model_ids: artifact.models.iter().map(|m| m.model_id.clone()).collect(),
        unweighted_model_id: meta.unweighted_model_id.clone(),
        unweighted_accuracy: meta.unweighted_accuracy,
        seeds: meta.seeds,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierPointDoc {
    pub model_id: String,
    pub errors: u64,
    pub disparity: u64,
    pub grid: GridPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierDoc {
    pub attribute: Attribute,
    pub threshold: f64,
    /// Ascending disparity.
    pub points: Vec<FrontierPointDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationResponse {
    pub model_id: String,
    pub threshold: f64,
    pub overall: ConfusionCounts,
    pub errors: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub by_group: Option<GroupConfusion>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disparity: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionAck {
    pub sequence: u64,
    pub timestamp: String,
}

fn threshold_strings(artifact: &ModelFamilyArtifact) -> Vec<String> {
    artifact.thresholds().iter().map(f64::to_string).collect()
}

fn required<'a>(name: &str, value: Option<&'a str>) -> Result<&'a str, ApiError> {
    value.ok_or_else(|| ApiError::bad_request(format!("missing query parameter `{name}`")))
}

/// Parse a threshold and snap it to the served grid.
fn grid_threshold(artifact: &ModelFamilyArtifact, raw: &str) -> Result<f64, ApiError> {
    let value: f64 = raw
        .trim()
        .parse()
        .map_err(|_| ApiError::bad_request(format!("threshold `{raw}` is not a number")))?;
    artifact
        .threshold_index(value)
        .map(|i| artifact.thresholds()[i])
        .ok_or_else(|| {
            ApiError::not_found(format!("threshold {value} is not on the served grid"))
                .with_valid_values(threshold_strings(artifact))
        })
}

fn served_attribute(artifact: &ModelFamilyArtifact, raw: &str) -> Result<Attribute, ApiError> {
    let not_found = || {
        ApiError::not_found(format!("attribute `{raw}` is not served"))
            .with_valid_values(vec![artifact.attribute().to_string()])
    };
    let attribute: Attribute = raw.parse().map_err(|_| not_found())?;
    if attribute == artifact.attribute() {
        Ok(attribute)
    } else {
        Err(not_found())
    }
}

pub fn frontier(
    artifact: &ModelFamilyArtifact,
    attribute: Option<&str>,
    threshold: Option<&str>,
) -> Result<FrontierDoc, ApiError> {
    let attribute = served_attribute(artifact, required("attribute", attribute)?)?;
    let threshold = grid_threshold(artifact, required("threshold", threshold)?)?;
    let set = artifact
        .frontier(attribute, threshold)
        .expect("validated artifact has a frontier per grid threshold");
    Ok(FrontierDoc {
        attribute,
        threshold: set.threshold,
        points: set
            .points
            .iter()
            .map(|p| FrontierPointDoc {
                model_id: p.model_id.clone(),
                errors: p.errors,
                disparity: p.disparity,
                grid: p.grid,
            })
            .collect(),
    })
}

pub fn evaluation(
    artifact: &ModelFamilyArtifact,
    model: Option<&str>,
    threshold: Option<&str>,
    attribute: Option<&str>,
) -> Result<EvaluationResponse, ApiError> {
    let model = required("model", model)?;
    if artifact.model(model).is_none() {
        return Err(ApiError::not_found(format!("unknown model `{model}`")).with_valid_values(
            artifact.models.iter().map(|m| m.model_id.clone()).collect(),
        ));
    }
    let threshold = grid_threshold(artifact, required("threshold", threshold)?)?;
    let attribute = attribute
        .filter(|a| !a.is_empty())
        .map(|a| served_attribute(artifact, a))
        .transpose()?;
    let entry = artifact
        .evaluation(model, threshold)
        .expect("validated artifact has every evaluation");
    let gc = entry.group_confusion;
    let overall = gc.overall();
    Ok(EvaluationResponse {
        model_id: entry.model_id.clone(),
        threshold: entry.threshold,
        overall,
        errors: overall.errors(),
        by_group: attribute.map(|_| gc),
        disparity: attribute.map(|_| gc.disparity()),
    })
}

/// Selection body as sent by clients; every field is checked individually.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct SelectionRequest {
    pub timestamp: Option<String>,
    pub session_id: Option<String>,
    pub attribute: Option<String>,
    pub threshold: Option<f64>,
    pub model_id: Option<String>,
    pub view: Option<String>,
    pub rationale: Option<String>,
}

impl SelectionRequest {
    /// Convert to a record, stamping `now` when the client sent no timestamp.
    pub fn into_record(self, now: String) -> Result<SelectionRecord, Vec<FieldIssue>> {
        let mut issues = Vec::new();
        let mut need = |name: &str, present: bool| {
            if !present {
                issues.push(FieldIssue::new(name, "is required"));
            }
        };
        need("session_id", self.session_id.is_some());
        need("model_id", self.model_id.is_some());
        need("threshold", self.threshold.is_some());
        need("view", self.view.is_some());

        let attribute = match self.attribute.as_deref() {
            None | Some("") => None,
            Some(a) => match a.parse::<Attribute>() {
                Ok(a) => Some(a),
                Err(_) => {
                    issues.push(FieldIssue::new("attribute", format!("unknown attribute `{a}`")));
                    None
                }
            },
        };
        let view = match self.view.as_deref() {
            Some("matrix") => Some(View::Matrix),
            Some("text") => Some(View::Text),
            Some(v) => {
                issues.push(FieldIssue::new("view", format!("`{v}` is not matrix or text")));
                None
            }
            None => None,
        };
        if !issues.is_empty() {
            return Err(issues);
        }
        Ok(SelectionRecord {
            timestamp: self.timestamp.unwrap_or(now),
            session_id: self.session_id.expect("checked"),
            attribute,
            threshold: self.threshold.expect("checked"),
            model_id: self.model_id.expect("checked"),
            view: view.expect("checked"),
            rationale: self.rationale.filter(|r| !r.is_empty()),
        })
    }
}

/// Validate and durably append a selection. Blocking.
pub fn post_selection(
    artifact: &ModelFamilyArtifact,
    log: &SelectionLog,
    body: &[u8],
    now: String,
) -> Result<SelectionAck, ApiError> {
    let request: SelectionRequest = serde_json::from_slice(body)
        .map_err(|e| ApiError::bad_request(format!("selection body is not valid: {e}")))?;
    let mut record = request.into_record(now).map_err(ApiError::invalid_selection)?;
    if let Some(i) = artifact.threshold_index(record.threshold) {
        record.threshold = artifact.thresholds()[i];
    }
    match log.append(&record, artifact) {
        Ok(sequence) => Ok(SelectionAck {
            sequence,
            timestamp: record.timestamp,
        }),
        Err(Error::Selection(issues)) => Err(ApiError::invalid_selection(issues)),
        Err(e) => Err(ApiError::internal(e.to_string())),
    }
}
