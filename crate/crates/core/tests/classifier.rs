mod common;

use proptest::prelude::*;
use tradeoff_core::classifier::{fit, loss_and_gradient, predict_scores, train, Params, TrainConfig};
use tradeoff_core::dataset::{encode, split};

/// (rows, labels, weights, params, l2) with dimension <= 10 and n <= 50.
fn instance() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<bool>, Vec<f64>, Params, f64)> {
    (1usize..=10, 1usize..=50).prop_flat_map(|(dim, n)| {
        (
            prop::collection::vec(prop::collection::vec(-3.0..3.0f64, dim), n),
            prop::collection::vec(any::<bool>(), n),
            prop::collection::vec(0.0..4.0f64, n),
            prop::collection::vec(-2.0..2.0f64, dim),
            -2.0..2.0f64,
            0.0..1.0f64,
        )
            .prop_map(|(rows, labels, weights, coefficients, intercept, l2)| {
                (rows, labels, weights, Params { coefficients, intercept }, l2)
            })
    })
}

fn trainable(labels: &[bool], weights: &[f64]) -> bool {
    let seen = |y: bool| labels.iter().zip(weights).any(|(&l, &w)| l == y && w > 0.0);
    seen(true) && seen(false)
}

/// Central differences, one coordinate at a time; the intercept is last.
fn numeric_gradient(params: &Params, rows: &[Vec<f64>], labels: &[bool], weights: &[f64], l2: f64) -> Vec<f64> {
    let h = 1e-5;
    let loss = |p: &Params| loss_and_gradient(p, rows, labels, weights, l2).unwrap().0;
    let dim = params.coefficients.len();
    (0..=dim)
        .map(|j| {
            let (mut up, mut down) = (params.clone(), params.clone());
            if j < dim {
                up.coefficients[j] += h;
                down.coefficients[j] -= h;
            } else {
                up.intercept += h;
                down.intercept -= h;
            }
            (loss(&up) - loss(&down)) / (2.0 * h)
        })
        .collect()
}

fn flatten(p: &Params) -> Vec<f64> {
    p.coefficients.iter().copied().chain([p.intercept]).collect()
}

fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm(&diff) / norm(a).max(norm(b)).max(1e-8)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn gradient_matches_central_differences((rows, labels, weights, params, l2) in instance()) {
        let (_, grad) = loss_and_gradient(&params, &rows, &labels, &weights, l2).unwrap();
        let numeric = numeric_gradient(&params, &rows, &labels, &weights, l2);
        let err = relative_error(&flatten(&grad), &numeric);
        prop_assert!(err < 1e-5, "relative error {err}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn scaling_weights_and_penalty_by_a_power_of_two_is_invisible(
        (rows, labels, weights, _, l2) in instance(),
        exponent in -6i32..=6,
    ) {
        prop_assume!(trainable(&labels, &weights));
        let c = 2f64.powi(exponent);
        let config = TrainConfig { l2_lambda: l2, max_iterations: 300, ..TrainConfig::default() };
        let scaled_config = TrainConfig { l2_lambda: l2 * c, ..config.clone() };
        let scaled: Vec<f64> = weights.iter().map(|w| w * c).collect();
        let (a, sa) = fit(&rows, &labels, &weights, &config).unwrap();
        let (b, sb) = fit(&rows, &labels, &scaled, &scaled_config).unwrap();
        prop_assert_eq!(a, b);
        prop_assert_eq!(sa.iterations, sb.iterations);
    }

    #[test]
    fn training_never_increases_the_loss((rows, labels, weights, _, l2) in instance()) {
        prop_assume!(trainable(&labels, &weights));
        let config = TrainConfig { l2_lambda: l2, max_iterations: 500, ..TrainConfig::default() };
        let (params, summary) = fit(&rows, &labels, &weights, &config).unwrap();
        prop_assert!(summary.final_loss <= summary.initial_loss);
        let (loss, _) = loss_and_gradient(&params, &rows, &labels, &weights, l2).unwrap();
        prop_assert_eq!(loss, summary.final_loss);
    }
}

#[test]
fn training_is_deterministic_and_scores_replay() {
    let data = common::synthetic_race(300, 3);
    let parts = split(&data, 0.7, 3).unwrap();
    let matrix = encode(&data, &parts.train).unwrap();
    let train_matrix = matrix.subset(&parts.train);
    let weights = vec![1.0; train_matrix.len()];
    let a = train(&train_matrix, &weights, &TrainConfig::default()).unwrap();
    let b = train(&train_matrix, &weights, &TrainConfig::default()).unwrap();
    assert_eq!(a, b);
    assert!(a.training.converged, "{:?}", a.training);

    // Scores through the stored normalization equal the fitted linear map
    // applied to the rows the optimizer saw.
    let scores = predict_scores(&a, &train_matrix.raw).unwrap();
    let direct: Vec<f64> = train_matrix
        .normalized_rows()
        .iter()
        .map(|row| {
            let z = a.intercept + a.coefficients.iter().zip(row).map(|(c, x)| c * x).sum::<f64>();
            tradeoff_core::classifier::sigmoid(z)
        })
        .collect();
    assert_eq!(scores, direct);

    // A serialized model predicts identically.
    let json = serde_json::to_string(&a).unwrap();
    let back = serde_json::from_str(&json).unwrap();
    assert_eq!(predict_scores(&back, &train_matrix.raw).unwrap(), scores);
    assert!(scores.iter().all(|&s| s > 0.0 && s < 1.0));
}
