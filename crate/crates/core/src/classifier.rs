//! Weighted, L2-regularised logistic regression fitted by deterministic
//! gradient descent from the zero vector.
//!
//! The objective is
//!
//! ```text
//! sum_i w_i * logloss(y_i, sigmoid(b + c.x_i)) + (l2 / 2) * |c|^2
//! ```
//!
//! with the intercept `b` unpenalised. Step sizes and the stopping rule are
//! both expressed per unit of total example weight, so multiplying every
//! weight and `l2` by the same constant leaves the iterates unchanged.

use serde::{Deserialize, Serialize};

use crate::dataset::{FeatureMatrix, Normalization};
use crate::{Error, Result};

/// Coefficients and intercept in normalized feature space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
}

impl Params {
    pub fn zeros(dim: usize) -> Self {
        Params {
            coefficients: vec![0.0; dim],
            intercept: 0.0,
        }
    }

    fn margin(&self, row: &[f64]) -> f64 {
        self.intercept
            + self
                .coefficients
                .iter()
                .zip(row)
                .map(|(c, x)| c * x)
                .sum::<f64>()
    }

    fn inf_norm(&self) -> f64 {
        self.coefficients
            .iter()
            .fold(self.intercept.abs(), |m, g| m.max(g.abs()))
    }
}

/// Step-size schedule, in units of the inverse Lipschitz bound of the
/// per-unit-weight loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepRule {
    /// `scale / L / sqrt(1 + t / decay_iterations)`
    Diminishing { scale: f64, decay_iterations: f64 },
    /// `scale / L`
    Constant { scale: f64 },
}

impl StepRule {
    fn step(&self, iteration: usize, lipschitz: f64) -> f64 {
        match *self {
            StepRule::Diminishing {
                scale,
                decay_iterations,
            } => scale / lipschitz / (1.0 + iteration as f64 / decay_iterations).sqrt(),
            StepRule::Constant { scale } => scale / lipschitz,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            StepRule::Diminishing {
                scale,
                decay_iterations,
            } => scale > 0.0 && scale <= 2.0 && decay_iterations > 0.0,
            StepRule::Constant { scale } => scale > 0.0 && scale <= 2.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid step rule {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub l2_lambda: f64,
    pub max_iterations: usize,
    /// Bound on the infinity norm of the gradient divided by total weight.
    pub gradient_tolerance: f64,
    pub step_rule: StepRule,
    /// Unused by the optimizer (it starts at zero); recorded for provenance.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            l2_lambda: 1e-4,
            max_iterations: 5000,
            gradient_tolerance: 1e-6,
            step_rule: StepRule::Diminishing {
                scale: 1.0,
                decay_iterations: 1000.0,
            },
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::InvalidArgument("max_iterations must be >= 1".into()));
        }
        if self.gradient_tolerance.is_nan() || self.gradient_tolerance <= 0.0 {
            return Err(Error::InvalidArgument("gradient_tolerance must be > 0".into()));
        }
        if !(self.l2_lambda >= 0.0 && self.l2_lambda.is_finite()) {
            return Err(Error::InvalidArgument("l2_lambda must be finite and >= 0".into()));
        }
        self.step_rule.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    /// Gradient steps taken.
    pub iterations: usize,
    pub converged: bool,
    pub initial_loss: f64,
    pub final_loss: f64,
    /// Infinity norm of the final gradient divided by total weight.
    pub final_gradient_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub normalization: Normalization,
    pub l2_lambda: f64,
    pub training: TrainingSummary,
}

impl LogisticModel {
    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    pub fn params(&self) -> Params {
        Params {
            coefficients: self.coefficients.clone(),
            intercept: self.intercept,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.intercept.is_finite() && self.coefficients.iter().all(|c| c.is_finite())
    }
}

const MAX_SCORE: f64 = 1.0 - f64::EPSILON / 2.0;

/// Logistic function, clamped to the open interval (0, 1).
pub fn sigmoid(z: f64) -> f64 {
    let s = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    s.clamp(f64::MIN_POSITIVE, MAX_SCORE)
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Weighted negative log-likelihood plus `l2/2 * |coef|^2`, and its exact
/// gradient. `features` are rows in the space `params` live in.
pub fn loss_and_gradient(
    params: &Params,
    features: &[Vec<f64>],
    labels: &[bool],
    weights: &[f64],
    l2_lambda: f64,
) -> Result<(f64, Params)> {
    if features.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: features.len(),
            right: labels.len(),
        });
    }
    if weights.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: weights.len(),
            right: labels.len(),
        });
    }
    let dim = params.coefficients.len();
    if let Some(row) = features.iter().find(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: row.len(),
        });
    }
    if !params.intercept.is_finite() || params.coefficients.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite("parameters"));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidArgument(
            "weights must be finite and non-negative".into(),
        ));
    }
    if !l2_lambda.is_finite() {
        return Err(Error::NonFinite("l2_lambda"));
    }

    let mut loss = 0.0;
    let mut grad = Params::zeros(dim);
    for ((row, &y), &w) in features.iter().zip(labels).zip(weights) {
        if w == 0.0 {
            continue;
        }
        let z = params.margin(row);
        let y = y as u8 as f64;
        loss += w * (softplus(z) - y * z);
        let r = w * (sigmoid(z) - y);
        grad.intercept += r;
        for (g, x) in grad.coefficients.iter_mut().zip(row) {
            *g += r * x;
        }
    }
    let mut penalty = 0.0;
    for (g, c) in grad.coefficients.iter_mut().zip(&params.coefficients) {
        penalty += c * c;
        *g += l2_lambda * c;
    }
    loss += 0.5 * l2_lambda * penalty;
    if !loss.is_finite() {
        return Err(Error::NonFinite("loss"));
    }
    Ok((loss, grad))
}

/// Fit on rows that are already in the space the returned parameters live in.
pub fn fit(
    features: &[Vec<f64>],
    labels: &[bool],
    weights: &[f64],
    config: &TrainConfig,
) -> Result<(Params, TrainingSummary)> {
    config.validate()?;
    if features.len() != labels.len() || weights.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: if features.len() != labels.len() {
                features.len()
            } else {
                weights.len()
            },
        });
    }
    let dim = features.first().map_or(0, Vec::len);
    let positive = labels.iter().zip(weights).any(|(&y, &w)| y && w > 0.0);
    let negative = labels.iter().zip(weights).any(|(&y, &w)| !y && w > 0.0);
    if !(positive && negative) {
        return Err(Error::InvalidArgument(
            "need at least one positive-weight example of each label".into(),
        ));
    }

    let total_weight: f64 = weights.iter().sum();
    let curvature: f64 = features
        .iter()
        .zip(weights)
        .map(|(row, w)| w * (1.0 + row.iter().map(|x| x * x).sum::<f64>()))
        .sum();
    // Upper bound on the Hessian's largest eigenvalue, per unit weight.
    let lipschitz = (0.25 * curvature + config.l2_lambda) / total_weight;

    let diverged = |iteration| move |e: Error| match e {
        Error::NonFinite(_) => Error::Diverged { iteration },
        other => other,
    };

    let mut params = Params::zeros(dim);
    let (initial_loss, mut grad) =
        loss_and_gradient(&params, features, labels, weights, config.l2_lambda)
            .map_err(diverged(0))?;
    let mut loss = initial_loss;
    let mut iterations = 0;
    let mut grad_norm = grad.inf_norm() / total_weight;

    while grad_norm > config.gradient_tolerance && iterations < config.max_iterations {
        let step = config.step_rule.step(iterations, lipschitz) / total_weight;
        params.intercept -= step * grad.intercept;
        for (c, g) in params.coefficients.iter_mut().zip(&grad.coefficients) {
            *c -= step * g;
        }
        iterations += 1;
        (loss, grad) = loss_and_gradient(&params, features, labels, weights, config.l2_lambda)
            .map_err(diverged(iterations))?;
        grad_norm = grad.inf_norm() / total_weight;
    }

    Ok((
        params,
        TrainingSummary {
            iterations,
            converged: grad_norm <= config.gradient_tolerance,
            initial_loss,
            final_loss: loss,
            final_gradient_norm: grad_norm,
        },
    ))
}

/// Train on `matrix` with per-example `weights`. The model keeps a copy of
/// the matrix's normalization.
pub fn train(matrix: &FeatureMatrix, weights: &[f64], config: &TrainConfig) -> Result<LogisticModel> {
    let rows = matrix.normalized_rows();
    let (params, training) = fit(&rows, &matrix.labels, weights, config)?;
    Ok(LogisticModel {
        coefficients: params.coefficients,
        intercept: params.intercept,
        normalization: matrix.normalization.clone(),
        l2_lambda: config.l2_lambda,
        training,
    })
}

/// Re-offense probabilities for raw (unscaled) feature rows.
pub fn predict_scores(model: &LogisticModel, raw_rows: &[Vec<f64>]) -> Result<Vec<f64>> {
    if model.normalization.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            actual: model.normalization.dim(),
        });
    }
    let params = model.params();
    raw_rows
        .iter()
        .map(|row| {
            if row.len() != model.dim() {
                return Err(Error::DimensionMismatch {
                    expected: model.dim(),
                    actual: row.len(),
                });
            }
            Ok(sigmoid(params.margin(&model.normalization.apply(row))))
        })
        .collect()
}

/// `score >= threshold` predicts re-offense.
pub fn classify(scores: &[f64], threshold: f64) -> Vec<bool> {
    scores.iter().map(|&s| s >= threshold).collect()
}
