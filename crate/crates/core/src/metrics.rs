//! Confusion counts, per-group counts, the count-based disparity measure and
//! threshold sweeps.

use serde::{Deserialize, Serialize};

use crate::classifier::{classify, predict_scores, LogisticModel};
use crate::dataset::{Attribute, FeatureMatrix, Group};
use crate::{Error, Result};

/// Positive means "predicted to re-offend".
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn errors(&self) -> u64 {
        self.fp + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            n => (self.tp + self.tn) as f64 / n as f64,
        }
    }

    fn record(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }
}

impl std::ops::Add for ConfusionCounts {
    type Output = ConfusionCounts;

    fn add(self, o: ConfusionCounts) -> ConfusionCounts {
        ConfusionCounts {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
            tn: self.tn + o.tn,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupConfusion {
    pub attribute: Attribute,
    #[serde(rename = "group_a0")]
    pub a0: ConfusionCounts,
    #[serde(rename = "group_a1")]
    pub a1: ConfusionCounts,
}

impl GroupConfusion {
    pub fn overall(&self) -> ConfusionCounts {
        self.a0 + self.a1
    }

    pub fn group(&self, group: Group) -> &ConfusionCounts {
        match group {
            Group::A0 => &self.a0,
            Group::A1 => &self.a1,
        }
    }

    pub fn disparity(&self) -> u64 {
        disparity(self)
    }
}

fn check_len(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::LengthMismatch { left: a, right: b })
    }
}

pub fn confusion(predictions: &[bool], labels: &[bool]) -> Result<ConfusionCounts> {
    check_len(predictions.len(), labels.len())?;
    let mut counts = ConfusionCounts::default();
    for (&p, &y) in predictions.iter().zip(labels) {
        counts.record(p, y);
    }
    Ok(counts)
}

pub fn group_confusion(
    predictions: &[bool],
    labels: &[bool],
    groups: &[Group],
    attribute: Attribute,
) -> Result<GroupConfusion> {
    check_len(predictions.len(), labels.len())?;
    check_len(predictions.len(), groups.len())?;
    let mut gc = GroupConfusion {
        attribute,
        a0: ConfusionCounts::default(),
        a1: ConfusionCounts::default(),
    };
    for ((&p, &y), &g) in predictions.iter().zip(labels).zip(groups) {
        match g {
            Group::A0 => gc.a0.record(p, y),
            Group::A1 => gc.a1.record(p, y),
        }
    }
    Ok(gc)
}

/// `max(|FP(a1) - FP(a0)|, |FN(a1) - FN(a0)|)`, in counts.
pub fn disparity(gc: &GroupConfusion) -> u64 {
    gc.a1.fp.abs_diff(gc.a0.fp).max(gc.a1.fn_.abs_diff(gc.a0.fn_))
}

/// Strictly increasing decision thresholds in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ThresholdGrid(Vec<f64>);

/// Grid values are snapped to this resolution so `0.45` is the nearest
/// double to 0.45, not an accumulated sum.
const GRID_RESOLUTION: f64 = 1e9;

/// Two thresholds closer than this are the same grid point.
pub const THRESHOLD_MATCH_TOLERANCE: f64 = 1e-9;

impl ThresholdGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("threshold grid is empty".into()));
        }
        if values.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::InvalidArgument(
                "thresholds must lie in [0, 1]".into(),
            ));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "thresholds must be strictly increasing".into(),
            ));
        }
        Ok(ThresholdGrid(values))
    }

    /// `start, start + step, ...` up to and including `stop` (within rounding).
    pub fn from_range(start: f64, stop: f64, step: f64) -> Result<Self> {
        if step.is_nan() || step <= 0.0 || !start.is_finite() || !stop.is_finite() || stop < start {
            return Err(Error::InvalidArgument(format!(
                "invalid threshold range {start}:{stop}:{step}"
            )));
        }
        let span = (stop - start) / step;
        let count = (span + 1e-9).floor() as usize + 1;
        let values = (0..count)
            .map(|i| ((start + i as f64 * step) * GRID_RESOLUTION).round() / GRID_RESOLUTION)
            .collect();
        Self::new(values)
    }

    /// Parse `start:stop:step`.
    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        let bad = || Error::InvalidArgument(format!("threshold spec `{spec}` is not start:stop:step"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        Self::from_range(nums[0], nums[1], nums[2])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Index of the grid point matching `threshold`.
    pub fn position(&self, threshold: f64) -> Option<usize> {
        self.0
            .iter()
            .position(|t| (t - threshold).abs() <= THRESHOLD_MATCH_TOLERANCE)
    }
}

impl Default for ThresholdGrid {
    /// 0.00 to 1.00 in steps of 0.05.
    fn default() -> Self {
        ThresholdGrid::from_range(0.0, 1.0, 0.05).expect("valid default grid")
    }
}

impl TryFrom<Vec<f64>> for ThresholdGrid {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        ThresholdGrid::new(v)
    }
}

impl From<ThresholdGrid> for Vec<f64> {
    fn from(g: ThresholdGrid) -> Vec<f64> {
        g.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub threshold: f64,
    pub counts: ConfusionCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCurve {
    pub points: Vec<SweepPoint>,
}

impl SweepCurve {
    /// Thresholds strictly increasing, fp non-increasing, fn non-decreasing.
    pub fn check_monotone(&self) -> Result<()> {
        for w in self.points.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if a.threshold >= b.threshold {
                return Err(Error::Integrity("sweep thresholds not increasing".into()));
            }
            if b.counts.fp > a.counts.fp {
                return Err(Error::Integrity(format!(
                    "sweep fp increases between {} and {}",
                    a.threshold, b.threshold
                )));
            }
            if b.counts.fn_ < a.counts.fn_ {
                return Err(Error::Integrity(format!(
                    "sweep fn decreases between {} and {}",
                    a.threshold, b.threshold
                )));
            }
        }
        Ok(())
    }
}

/// Confusion counts of fixed scores at every grid threshold.
pub fn sweep_scores(scores: &[f64], labels: &[bool], grid: &ThresholdGrid) -> Result<SweepCurve> {
    check_len(scores.len(), labels.len())?;
    let points = grid
        .values()
        .iter()
        .map(|&t| {
            Ok(SweepPoint {
                threshold: t,
                counts: confusion(&classify(scores, t), labels)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(SweepCurve { points })
}

pub fn threshold_sweep(
    model: &LogisticModel,
    eval: &FeatureMatrix,
    grid: &ThresholdGrid,
) -> Result<SweepCurve> {
    let scores = predict_scores(model, &eval.raw)?;
    sweep_scores(&scores, &eval.labels, grid)
}
