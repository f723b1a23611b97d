//! Families of recidivism classifiers that trade accuracy against group
//! disparity.
//!
//! The pipeline runs `dataset` (parse, filter, balance, split, encode) into
//! `classifier` (weighted logistic regression), scores candidates with
//! `metrics`, builds per-threshold Pareto frontiers in `frontier`, and
//! stores the result with `artifact`.

pub mod artifact;
pub mod classifier;
pub mod dataset;
mod error;
pub mod frontier;
pub mod metrics;
pub mod parallel;

pub use error::{Error, FieldIssue, Result};
