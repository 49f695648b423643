use std::time::{Duration, Instant};

use ndarray::{Array2, Axis};
use thiserror::Error;

use super::SearchError;
use crate::dataset::random_split;
use crate::learners::multi::fit_multi_label_until;
use crate::learners::{Deadline, LearnError};
use crate::metrics;
use crate::rng;
use crate::space::ComponentInstance;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("evaluation of {pipeline} failed: {reason}")]
pub struct EvaluationFailed {
    pub pipeline: String,
    pub reason: String,
}

/// Scores a pipeline by repeated validation. Implementations must be
/// deterministic in `(pipeline, seed, repetitions)` whenever the deadline
/// does not interrupt them.
pub trait CandidateEvaluator: Sync {
    fn evaluate(
        &self,
        pipeline: &ComponentInstance,
        seed: u64,
        repetitions: usize,
        deadline: Deadline,
    ) -> Result<Vec<f64>, EvaluationFailed>;
}

/// The search portion of a dataset: encoded features, labels and the
/// original row indices they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchData {
    pub features: Array2<f64>,
    pub labels: Array2<u8>,
    pub rows: Vec<usize>,
}

impl SearchData {
    pub fn new(features: Array2<f64>, labels: Array2<u8>, rows: Vec<usize>) -> Result<Self, SearchError> {
        let n = labels.nrows();
        if n < 10 {
            return Err(SearchError::TooFewInstances(n));
        }
        assert_eq!(features.nrows(), n, "feature and label rows differ");
        assert_eq!(rows.len(), n, "row index count differs");
        Ok(SearchData { features, labels, rows })
    }

    pub fn n_instances(&self) -> usize {
        self.labels.nrows()
    }
}

/// Loss = 1 − instance F-measure on 30% holdouts of repeated 70/30 splits
/// seeded `seed + 1`, `seed + 2`, ….
#[derive(Debug, Clone)]
pub struct ValidationEvaluator {
    data: SearchData,
}

impl ValidationEvaluator {
    pub fn new(data: SearchData) -> Self {
        ValidationEvaluator { data }
    }

    pub fn data(&self) -> &SearchData {
        &self.data
    }
}

impl CandidateEvaluator for ValidationEvaluator {
    fn evaluate(
        &self,
        pipeline: &ComponentInstance,
        seed: u64,
        repetitions: usize,
        deadline: Deadline,
    ) -> Result<Vec<f64>, EvaluationFailed> {
        validate(&self.data, pipeline, seed, repetitions, deadline)
    }
}

fn validate(
    data: &SearchData,
    pipeline: &ComponentInstance,
    seed: u64,
    repetitions: usize,
    deadline: Deadline,
) -> Result<Vec<f64>, EvaluationFailed> {
    let fail = |reason: String| EvaluationFailed {
        pipeline: pipeline.to_string(),
        reason,
    };
    let spec = pipeline.to_ml_spec().map_err(|e| fail(e.to_string()))?;
    let n = data.n_instances();
    let mut losses = Vec::with_capacity(repetitions);
    for r in 1..=repetitions as u64 {
        if deadline.expired() {
            break;
        }
        let split = random_split(n, 0.7, seed.wrapping_add(r)).map_err(|e| fail(e.to_string()))?;
        let x = data.features.select(Axis(0), &split.train_indices);
        let y = data.labels.select(Axis(0), &split.train_indices);
        let fitted = fit_multi_label_until(&spec, x.view(), y.view(), rng::derive_seed(seed, "fit", r), deadline);
        let model = match fitted {
            Ok(m) => m,
            Err(LearnError::Timeout) => break,
            Err(e) if losses.is_empty() => return Err(fail(e.to_string())),
            Err(_) => {
                losses.push(1.0);
                break;
            }
        };
        let xv = data.features.select(Axis(0), &split.test_indices);
        let yv = data.labels.select(Axis(0), &split.test_indices);
        let out = model.predict(xv.view()).map_err(|e| fail(e.to_string()))?;
        let f = metrics::instance_f_measure(yv.view(), out.labels.view()).expect("shapes agree");
        losses.push(1.0 - f);
    }
    if losses.is_empty() {
        return Err(fail("no repetition finished within the limit".into()));
    }
    Ok(losses)
}

/// One candidate evaluation with an optional per-candidate time limit.
pub fn evaluate_candidate(
    pipeline: &ComponentInstance,
    data: &SearchData,
    seed: u64,
    repetitions: usize,
    limit: Option<Duration>,
) -> Result<Vec<f64>, EvaluationFailed> {
    let deadline = Deadline::from_option(limit.map(|l| Instant::now() + l));
    validate(data, pipeline, seed, repetitions, deadline)
}
