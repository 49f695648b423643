//! Single-label (multi-class) learners, the innermost pipeline layer.
//!
//! Base learners accept instance weights so AdaBoostM1 can reweight them
//! directly. Meta learners wrap exactly one base learner and may not wrap
//! another meta learner.

mod bayes;
mod ensemble;
mod knn;
mod logistic;
mod tree;

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::{argmax, Deadline, LearnError};
use crate::rng;

pub use logistic::objective_and_gradient;

/// Features plus class ids in `0..class_count`.
#[derive(Debug, Clone)]
pub struct SlDataset {
    pub features: Array2<f64>,
    pub targets: Vec<usize>,
    pub class_count: usize,
}

impl SlDataset {
    pub fn new(features: Array2<f64>, targets: Vec<usize>, class_count: usize) -> Result<Self, LearnError> {
        if targets.is_empty() {
            return Err(LearnError::EmptyData);
        }
        if features.nrows() != targets.len() {
            return Err(LearnError::UnsupportedSpec(format!(
                "{} feature rows for {} targets",
                features.nrows(),
                targets.len()
            )));
        }
        if class_count == 0 || targets.iter().any(|&t| t >= class_count) {
            return Err(LearnError::UnsupportedSpec(format!(
                "targets outside 0..{class_count}"
            )));
        }
        Ok(SlDataset {
            features,
            targets,
            class_count,
        })
    }
}

/// A single-label learner with its fixed hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SlSpec {
    ZeroR,
    DecisionStump,
    DecisionTree { max_depth: usize, min_leaf: usize },
    NaiveBayes,
    Logistic { epochs: usize, learning_rate: f64, l2: f64 },
    Knn { k: usize },
    Bagging { members: usize, bootstrap: bool, base: Box<SlSpec> },
    AdaBoostM1 { rounds: usize, base: Box<SlSpec> },
    RandomSubspace { members: usize, feature_fraction: f64, base: Box<SlSpec> },
}

impl SlSpec {
    pub fn decision_tree() -> Self {
        SlSpec::DecisionTree {
            max_depth: 20,
            min_leaf: 2,
        }
    }

    pub fn logistic() -> Self {
        SlSpec::Logistic {
            epochs: 100,
            learning_rate: 0.1,
            l2: 1e-4,
        }
    }

    pub fn knn() -> Self {
        SlSpec::Knn { k: 5 }
    }

    pub fn bagging(base: SlSpec) -> Self {
        SlSpec::Bagging {
            members: 10,
            bootstrap: true,
            base: Box::new(base),
        }
    }

    pub fn ada_boost(base: SlSpec) -> Self {
        SlSpec::AdaBoostM1 {
            rounds: 10,
            base: Box::new(base),
        }
    }

    pub fn random_subspace(base: SlSpec) -> Self {
        SlSpec::RandomSubspace {
            members: 10,
            feature_fraction: 0.5,
            base: Box::new(base),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SlSpec::ZeroR => "ZeroR",
            SlSpec::DecisionStump => "DecisionStump",
            SlSpec::DecisionTree { .. } => "DecisionTree",
            SlSpec::NaiveBayes => "NaiveBayes",
            SlSpec::Logistic { .. } => "Logistic",
            SlSpec::Knn { .. } => "KNN",
            SlSpec::Bagging { .. } => "Bagging",
            SlSpec::AdaBoostM1 { .. } => "AdaBoostM1",
            SlSpec::RandomSubspace { .. } => "RandomSubspace",
        }
    }

    pub fn base(&self) -> Option<&SlSpec> {
        match self {
            SlSpec::Bagging { base, .. } | SlSpec::AdaBoostM1 { base, .. } | SlSpec::RandomSubspace { base, .. } => {
                Some(base)
            }
            _ => None,
        }
    }

    pub fn is_meta(&self) -> bool {
        self.base().is_some()
    }

    pub fn validate(&self) -> Result<(), LearnError> {
        let bad = |msg: String| Err(LearnError::UnsupportedSpec(msg));
        match self {
            SlSpec::DecisionTree { max_depth, min_leaf } if *max_depth == 0 || *min_leaf == 0 => {
                bad("DecisionTree needs positive depth and leaf size".into())
            }
            SlSpec::Knn { k: 0 } => bad("KNN needs k ≥ 1".into()),
            SlSpec::Logistic { epochs, learning_rate, l2 }
                if *epochs == 0 || !(*learning_rate > 0.0) || !(*l2 >= 0.0) =>
            {
                bad("Logistic needs positive epochs and rate, nonnegative L2".into())
            }
            SlSpec::Bagging { members: 0, .. }
            | SlSpec::AdaBoostM1 { rounds: 0, .. }
            | SlSpec::RandomSubspace { members: 0, .. } => bad(format!("{} needs at least one member", self.name())),
            SlSpec::RandomSubspace { feature_fraction, .. } if !(*feature_fraction > 0.0 && *feature_fraction <= 1.0) => {
                bad("RandomSubspace feature fraction must lie in (0, 1]".into())
            }
            _ => match self.base() {
                Some(base) if base.is_meta() => bad(format!("{} cannot wrap meta learner {}", self.name(), base.name())),
                Some(base) => base.validate(),
                None => Ok(()),
            },
        }
    }
}

/// A fitted single-label model.
#[derive(Debug, Clone)]
pub struct SlModel {
    class_count: usize,
    n_features: usize,
    inner: Inner,
}

#[derive(Debug, Clone)]
enum Inner {
    Constant(Vec<f64>),
    Tree(tree::Tree),
    NaiveBayes(bayes::GaussianNb),
    Logistic(logistic::Softmax),
    Knn(knn::Knn),
    Average(Vec<ensemble::Member>),
    Boost(Vec<(f64, SlModel)>),
}

impl SlModel {
    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    fn check_width(&self, x: &ArrayView2<f64>) -> Result<(), LearnError> {
        if x.ncols() == self.n_features {
            Ok(())
        } else {
            Err(LearnError::ShapeMismatch {
                expected: self.n_features,
                got: x.ncols(),
            })
        }
    }

    /// Rows are nonnegative and sum to 1.
    pub fn predict_class_scores(&self, x: ArrayView2<f64>) -> Result<Array2<f64>, LearnError> {
        self.check_width(&x)?;
        Ok(self.scores_unchecked(x))
    }

    fn scores_unchecked(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let c = self.class_count;
        match &self.inner {
            Inner::Constant(dist) => {
                let mut out = Array2::zeros((x.nrows(), c));
                for mut row in out.outer_iter_mut() {
                    row.iter_mut().zip(dist).for_each(|(o, d)| *o = *d);
                }
                out
            }
            Inner::Tree(t) => t.scores(x, c),
            Inner::NaiveBayes(nb) => nb.scores(x),
            Inner::Logistic(l) => l.scores(x),
            Inner::Knn(k) => k.scores(x),
            Inner::Average(members) => ensemble::average_scores(members, x, c),
            Inner::Boost(rounds) => ensemble::boosted_scores(rounds, x, c),
        }
    }

    /// Argmax of [`Self::predict_class_scores`], ties toward the smaller id.
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<usize>, LearnError> {
        let scores = self.predict_class_scores(x)?;
        Ok(scores
            .outer_iter()
            .map(|row| argmax(row.as_slice().expect("standard layout")))
            .collect())
    }
}

pub fn fit_single_label(spec: &SlSpec, data: &SlDataset, seed: u64) -> Result<SlModel, LearnError> {
    fit_single_label_until(spec, data, seed, Deadline::NONE)
}

pub fn fit_single_label_until(
    spec: &SlSpec,
    data: &SlDataset,
    seed: u64,
    deadline: Deadline,
) -> Result<SlModel, LearnError> {
    spec.validate()?;
    let weights = vec![1.0; data.targets.len()];
    fit_weighted(spec, data.features.view(), &data.targets, data.class_count, &weights, seed, deadline)
}

pub fn predict_single_label(model: &SlModel, x: ArrayView2<f64>) -> Result<Vec<usize>, LearnError> {
    model.predict(x)
}

pub fn predict_class_scores(model: &SlModel, x: ArrayView2<f64>) -> Result<Array2<f64>, LearnError> {
    model.predict_class_scores(x)
}

/// `n` uniform draws with replacement from `0..n`.
pub fn bootstrap_indices(n: usize, seed: u64) -> Vec<usize> {
    let mut stream = rng::stream(seed, "bootstrap", 0);
    (0..n).map(|_| rng::below(&mut stream, n)).collect()
}

/// Weighted class frequencies; unweighted counts if all weights vanish.
fn class_distribution(targets: &[usize], weights: &[f64], c: usize) -> Vec<f64> {
    let mut dist = vec![0.0; c];
    for (&t, &w) in targets.iter().zip(weights) {
        dist[t] += w;
    }
    let total: f64 = dist.iter().sum();
    if total > 0.0 {
        dist.iter_mut().for_each(|d| *d /= total);
    } else {
        dist.iter_mut().for_each(|d| *d = 0.0);
        for &t in targets {
            dist[t] += 1.0 / targets.len() as f64;
        }
    }
    dist
}

fn fit_weighted(
    spec: &SlSpec,
    x: ArrayView2<f64>,
    y: &[usize],
    c: usize,
    w: &[f64],
    seed: u64,
    deadline: Deadline,
) -> Result<SlModel, LearnError> {
    if y.is_empty() {
        return Err(LearnError::EmptyData);
    }
    deadline.check()?;
    let model = |inner| SlModel {
        class_count: c,
        n_features: x.ncols(),
        inner,
    };
    let dist = class_distribution(y, w, c);
    // Single observed class: every learner degenerates to the majority rule.
    if dist.iter().filter(|&&p| p > 0.0).count() <= 1 {
        return Ok(model(Inner::Constant(dist)));
    }
    let inner = match spec {
        SlSpec::ZeroR => Inner::Constant(dist),
        SlSpec::DecisionStump => Inner::Tree(tree::Tree::fit(x, y, c, w, 1, 1, deadline)?),
        SlSpec::DecisionTree { max_depth, min_leaf } => {
            Inner::Tree(tree::Tree::fit(x, y, c, w, *max_depth, *min_leaf, deadline)?)
        }
        SlSpec::NaiveBayes => Inner::NaiveBayes(bayes::GaussianNb::fit(x, y, c, w)),
        SlSpec::Logistic {
            epochs,
            learning_rate,
            l2,
        } => Inner::Logistic(logistic::Softmax::fit(x, y, c, w, *epochs, *learning_rate, *l2, deadline)?),
        SlSpec::Knn { k } => Inner::Knn(knn::Knn::fit(x, y, c, w, *k)),
        SlSpec::Bagging {
            members,
            bootstrap,
            base,
        } => Inner::Average(ensemble::bagging(base, x, y, c, *members, *bootstrap, seed, deadline)?),
        SlSpec::RandomSubspace {
            members,
            feature_fraction,
            base,
        } => Inner::Average(ensemble::random_subspace(
            base,
            x,
            y,
            c,
            *members,
            *feature_fraction,
            seed,
            deadline,
        )?),
        SlSpec::AdaBoostM1 { rounds, base } => Inner::Boost(ensemble::ada_boost(base, x, y, c, *rounds, seed, deadline)?),
    };
    Ok(model(inner))
}

fn select_rows(x: ArrayView2<f64>, y: &[usize], rows: &[usize]) -> (Array2<f64>, Vec<usize>) {
    (x.select(Axis(0), rows), rows.iter().map(|&i| y[i]).collect())
}
