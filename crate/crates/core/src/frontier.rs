//! Model families over the error/disparity trade-off.
//!
//! Candidates come from a group-by-label cost-reweighting grid: group a1's
//! positive examples are weighted by `alpha`, its negative examples by
//! `beta`, and group a0 keeps unit weight. Each candidate is evaluated at
//! every threshold and the non-dominated (errors, disparity) points form the
//! frontier for that threshold.

use serde::{Deserialize, Serialize};

use crate::artifact::{
    AccuracySummary, ArtifactMetadata, DatasetDescriptor, EvalScope, EvaluationEntry, GroupLabels,
    ModelEntry, ModelFamilyArtifact, Seeds, SCHEMA_VERSION,
};
use crate::classifier::{classify, predict_scores, train, LogisticModel, TrainConfig};
use crate::dataset::{encode, split, Attribute, BalancedDataset, FeatureMatrix, Group};
use crate::metrics::{confusion, group_confusion, sweep_scores, GroupConfusion, ThresholdGrid};
use crate::parallel::{ordered_map, Schedule};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    /// Values per axis.
    pub levels: usize,
    /// Each multiplier spans `[1/range, range]`.
    pub range: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            levels: 9,
            range: 4.0,
        }
    }
}

/// Example-weight multipliers for group a1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    /// Weight of a1 examples with label 1.
    pub alpha: f64,
    /// Weight of a1 examples with label 0.
    pub beta: f64,
}

impl GridPoint {
    pub const UNWEIGHTED: GridPoint = GridPoint {
        alpha: 1.0,
        beta: 1.0,
    };

    pub fn weight(&self, group: Group, label: bool) -> f64 {
        match (group, label) {
            (Group::A0, _) => 1.0,
            (Group::A1, true) => self.alpha,
            (Group::A1, false) => self.beta,
        }
    }
}

/// `levels` log-spaced values per axis on `[1/range, range]`, alpha-major.
///
/// Odd `levels` put 1 on both axes. For even `levels` the unweighted point
/// is not on the lattice and is appended after it.
pub fn weight_grid(config: &GridConfig) -> Result<Vec<GridPoint>> {
    if config.levels == 0 {
        return Err(Error::InvalidArgument("grid levels must be >= 1".into()));
    }
    if !(config.range > 1.0 && config.range.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "grid range must be > 1, got {}",
            config.range
        )));
    }
    let k = config.levels;
    let values: Vec<f64> = if k == 1 {
        vec![1.0]
    } else {
        (0..k)
            .map(|j| config.range.powf(2.0 * j as f64 / (k - 1) as f64 - 1.0))
            .collect()
    };
    let mut grid: Vec<GridPoint> = values
        .iter()
        .flat_map(|&alpha| values.iter().map(move |&beta| GridPoint { alpha, beta }))
        .collect();
    if k.is_multiple_of(2) {
        grid.push(GridPoint::UNWEIGHTED);
    }
    Ok(grid)
}

pub fn example_weights(grid: &GridPoint, labels: &[bool], groups: &[Group]) -> Vec<f64> {
    labels
        .iter()
        .zip(groups)
        .map(|(&y, &g)| grid.weight(g, y))
        .collect()
}

/// Zero-padded ids, so lexicographic order is grid order.
pub fn model_id(index: usize, total: usize) -> String {
    let width = total.saturating_sub(1).to_string().len().max(3);
    format!("m{index:0width$}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub model_id: String,
    pub grid: GridPoint,
    pub model: LogisticModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateFailure {
    pub model_id: String,
    pub grid: GridPoint,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    /// Successful candidates in grid order.
    pub candidates: Vec<Candidate>,
    pub failures: Vec<CandidateFailure>,
}

/// Train one model per grid point. Failures are collected, not fatal.
pub fn generate_candidates(
    train_matrix: &FeatureMatrix,
    grid: &[GridPoint],
    config: &TrainConfig,
    schedule: Schedule,
) -> CandidateSet {
    let outcomes = ordered_map(grid, schedule, |i, point| {
        let weights = example_weights(point, &train_matrix.labels, &train_matrix.groups);
        let id = model_id(i, grid.len());
        let trained = train(train_matrix, &weights, config).and_then(|model| {
            if model.is_finite() {
                Ok(model)
            } else {
                Err(Error::NonFinite("model parameters"))
            }
        });
        match trained {
            Ok(model) => Ok(Candidate {
                model_id: id,
                grid: *point,
                model,
            }),
            Err(e) => Err(CandidateFailure {
                model_id: id,
                grid: *point,
                reason: e.to_string(),
            }),
        }
    });

    let mut set = CandidateSet {
        candidates: Vec::new(),
        failures: Vec::new(),
    };
    for outcome in outcomes {
        match outcome {
            Ok(c) => set.candidates.push(c),
            Err(f) => {
                log::warn!("candidate {} failed: {}", f.model_id, f.reason);
                set.failures.push(f);
            }
        }
    }
    set
}

/// One candidate's position in (errors, disparity) space at one threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub model_id: String,
    pub grid: GridPoint,
    pub threshold: f64,
    pub errors: u64,
    pub disparity: u64,
    pub group_confusion: GroupConfusion,
}

impl FrontierPoint {
    pub fn new(model_id: String, grid: GridPoint, threshold: f64, gc: GroupConfusion) -> Self {
        FrontierPoint {
            model_id,
            grid,
            threshold,
            errors: gc.overall().errors(),
            disparity: gc.disparity(),
            group_confusion: gc,
        }
    }

    /// Stored errors and disparity agree with the stored group counts.
    pub fn is_consistent(&self) -> bool {
        self.errors == self.group_confusion.overall().errors()
            && self.disparity == self.group_confusion.disparity()
    }
}

pub fn evaluate_candidates(
    candidates: &[Candidate],
    eval: &FeatureMatrix,
    attribute: Attribute,
    threshold: f64,
) -> Result<Vec<FrontierPoint>> {
    candidates
        .iter()
        .map(|c| {
            let scores = predict_scores(&c.model, &eval.raw)?;
            let gc = group_confusion(&classify(&scores, threshold), &eval.labels, &eval.groups, attribute)?;
            Ok(FrontierPoint::new(c.model_id.clone(), c.grid, threshold, gc))
        })
        .collect()
}

/// Anything with two minimised integer objectives and a tie-break id.
pub trait Objectives {
    fn errors(&self) -> u64;
    fn disparity(&self) -> u64;
    fn id(&self) -> &str;
}

impl Objectives for FrontierPoint {
    fn errors(&self) -> u64 {
        self.errors
    }
    fn disparity(&self) -> u64 {
        self.disparity
    }
    fn id(&self) -> &str {
        &self.model_id
    }
}

/// Keep the points no other point weakly dominates, one per distinct
/// (errors, disparity) pair (the lowest id), sorted by ascending disparity.
pub fn pareto_front<T: Objectives + Clone>(points: &[T]) -> Vec<T> {
    let mut order: Vec<&T> = points.iter().collect();
    order.sort_by(|a, b| {
        a.errors()
            .cmp(&b.errors())
            .then(a.disparity().cmp(&b.disparity()))
            .then_with(|| a.id().cmp(b.id()))
    });
    // Scanning by ascending errors, a point survives iff its disparity is
    // strictly below everything seen so far.
    let mut best = u64::MAX;
    let mut front = Vec::new();
    for p in order {
        if p.disparity() < best {
            best = p.disparity();
            front.push(p.clone());
        }
    }
    front.reverse();
    front
}

/// The frontier at one threshold, ascending by disparity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierSet {
    pub attribute: Attribute,
    pub threshold: f64,
    pub points: Vec<FrontierPoint>,
}

impl FrontierSet {
    /// No point weakly dominates another, and errors fall as disparity rises.
    pub fn check_pareto(&self) -> Result<()> {
        let pts = &self.points;
        if pts.is_empty() {
            return Err(Error::Integrity("empty frontier".into()));
        }
        for w in pts.windows(2) {
            if !(w[0].disparity < w[1].disparity && w[0].errors > w[1].errors) {
                return Err(Error::Integrity(format!(
                    "frontier at {} {} is not a strict staircase between {} and {}",
                    self.attribute, self.threshold, w[0].model_id, w[1].model_id
                )));
            }
        }
        for p in pts {
            if !p.is_consistent() {
                return Err(Error::Integrity(format!(
                    "frontier point {} disagrees with its group counts",
                    p.model_id
                )));
            }
            if p.threshold != self.threshold || p.group_confusion.attribute != self.attribute {
                return Err(Error::Integrity(format!(
                    "frontier point {} belongs to another frontier",
                    p.model_id
                )));
            }
        }
        Ok(())
    }

    pub fn min_disparity(&self) -> &FrontierPoint {
        &self.points[0]
    }

    pub fn max_disparity(&self) -> &FrontierPoint {
        &self.points[self.points.len() - 1]
    }
}

/// Pareto-filter points that share one attribute and threshold.
pub fn pareto_filter(points: &[FrontierPoint]) -> Result<FrontierSet> {
    let first = points
        .first()
        .ok_or_else(|| Error::InvalidArgument("cannot filter an empty point set".into()))?;
    let (attribute, threshold) = (first.group_confusion.attribute, first.threshold);
    if points
        .iter()
        .any(|p| p.threshold != threshold || p.group_confusion.attribute != attribute)
    {
        return Err(Error::InvalidArgument(
            "points mix thresholds or attributes".into(),
        ));
    }
    Ok(FrontierSet {
        attribute,
        threshold,
        points: pareto_front(points),
    })
}

/// Everything needed to turn a balanced dataset into a model family.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyConfig {
    pub thresholds: ThresholdGrid,
    pub grid: GridConfig,
    pub train: TrainConfig,
    pub train_fraction: f64,
    pub split_seed: u64,
    pub eval_scope: EvalScope,
    /// Threshold at which the unweighted model's accuracy is reported.
    pub accuracy_threshold: f64,
    pub build_timestamp: Option<String>,
    pub schedule: Schedule,
}

impl FamilyConfig {
    pub fn new(split_seed: u64) -> Self {
        FamilyConfig {
            thresholds: ThresholdGrid::default(),
            grid: GridConfig::default(),
            train: TrainConfig::default(),
            train_fraction: 0.7,
            split_seed,
            eval_scope: EvalScope::Full,
            accuracy_threshold: 0.5,
            build_timestamp: None,
            schedule: Schedule::default(),
        }
    }
}

/// Split, encode, train every grid candidate once, evaluate each at every
/// threshold, and Pareto-filter per threshold.
pub fn build_family(dataset: &BalancedDataset, config: &FamilyConfig) -> Result<ModelFamilyArtifact> {
    let parts = split(dataset, config.train_fraction, config.split_seed)?;
    let matrix = encode(dataset, &parts.train)?;
    let train_matrix = matrix.subset(&parts.train);
    let test_matrix = matrix.subset(&parts.test);
    let eval_matrix = match config.eval_scope {
        EvalScope::Full => &matrix,
        EvalScope::Test => &test_matrix,
    };

    let grid = weight_grid(&config.grid)?;
    let unweighted_index = grid
        .iter()
        .position(|g| *g == GridPoint::UNWEIGHTED)
        .expect("weight grid always contains the unweighted point");
    let set = generate_candidates(&train_matrix, &grid, &config.train, config.schedule);
    let unweighted_id = model_id(unweighted_index, grid.len());
    let unweighted = set
        .candidates
        .iter()
        .find(|c| c.model_id == unweighted_id)
        .ok_or_else(|| {
            let reason = set
                .failures
                .iter()
                .find(|f| f.model_id == unweighted_id)
                .map_or("missing".to_string(), |f| f.reason.clone());
            Error::InvalidArgument(format!("unweighted model failed to train: {reason}"))
        })?;

    let thresholds = config.thresholds.values();
    let attribute = dataset.attribute;
    let per_model: Vec<Vec<GroupConfusion>> =
        ordered_map(&set.candidates, config.schedule, |_, c| -> Result<_> {
            let scores = predict_scores(&c.model, &eval_matrix.raw)?;
            thresholds
                .iter()
                .map(|&t| group_confusion(&classify(&scores, t), &eval_matrix.labels, &eval_matrix.groups, attribute))
                .collect()
        })
        .into_iter()
        .collect::<Result<_>>()?;

    let mut frontiers = Vec::with_capacity(thresholds.len());
    for (ti, &t) in thresholds.iter().enumerate() {
        let points: Vec<FrontierPoint> = set
            .candidates
            .iter()
            .zip(&per_model)
            .map(|(c, evals)| FrontierPoint::new(c.model_id.clone(), c.grid, t, evals[ti]))
            .collect();
        frontiers.push(pareto_filter(&points)?);
    }

    let evaluations = set
        .candidates
        .iter()
        .zip(&per_model)
        .flat_map(|(c, evals)| {
            thresholds
                .iter()
                .zip(evals)
                .map(|(&threshold, &group_confusion)| EvaluationEntry {
                    model_id: c.model_id.clone(),
                    threshold,
                    group_confusion,
                })
        })
        .collect();

    let eval_scores = predict_scores(&unweighted.model, &eval_matrix.raw)?;
    let sweep = sweep_scores(&eval_scores, &eval_matrix.labels, &config.thresholds)?;
    let accuracy = |m: &FeatureMatrix| -> Result<f64> {
        let scores = predict_scores(&unweighted.model, &m.raw)?;
        Ok(confusion(&classify(&scores, config.accuracy_threshold), &m.labels)?.accuracy())
    };
    let unweighted_accuracy = AccuracySummary {
        threshold: config.accuracy_threshold,
        train: accuracy(&train_matrix)?,
        test: accuracy(&test_matrix)?,
    };

    let names = attribute.group_names();
    let artifact = ModelFamilyArtifact {
        schema_version: SCHEMA_VERSION,
        metadata: ArtifactMetadata {
            dataset: DatasetDescriptor {
                records: dataset.len(),
                per_group_n: dataset.per_group_n,
                train_size: parts.train.len(),
                test_size: parts.test.len(),
                eval_size: eval_matrix.len(),
                eval_scope: config.eval_scope,
                train_fraction: config.train_fraction,
            },
            attribute,
            group_labels: GroupLabels {
                a0: names[0].to_string(),
                a1: names[1].to_string(),
            },
            seeds: Seeds {
                sample: dataset.seed,
                split: config.split_seed,
                train: config.train.seed,
            },
            thresholds: config.thresholds.clone(),
            grid: config.grid,
            train_config: config.train.clone(),
            feature_names: matrix.normalization.feature_names.clone(),
            encoding_warnings: matrix.warnings.clone(),
            unweighted_model_id: unweighted_id,
            unweighted_accuracy,
            failures: set.failures.clone(),
            build_timestamp: config.build_timestamp.clone(),
        },
        models: set
            .candidates
            .into_iter()
            .map(|c| ModelEntry {
                model_id: c.model_id,
                grid: c.grid,
                model: c.model,
            })
            .collect(),
        sweep,
        frontiers,
        evaluations,
    };
    artifact.validate()?;
    Ok(artifact)
}
