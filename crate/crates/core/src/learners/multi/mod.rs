//! Multi-label learners.
//!
//! ML-base strategies reduce the problem to single-label learning:
//! - `BR`: one binary learner per label;
//! - `CC`: binary learners along a seeded label order, each also seeing the
//!   earlier labels (true labels while training, predicted ones at inference);
//! - `LC`: one multi-class learner over observed label combinations;
//! - `PS`: `LC` after pruning rare combinations;
//! - `RAkEL`: `LC` on random k-label subsets, combined by per-label voting;
//! - `MajorityLabelSet`: the modal training label vector.
//!
//! ML-meta wrappers (`BaggingML`, `EnsembleML`, `RandomSubspaceML`) average
//! the scores of ten members of one ML-base learner and threshold at 0.5.

mod powerset;

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::single::{bootstrap_indices, fit_single_label_until, SlDataset, SlModel, SlSpec};
use super::{argmax, Deadline, LearnError};
use crate::rng;

pub use powerset::{label_powerset_decode, label_powerset_encode, prune_label_sets, LpCodebook};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MlSpec {
    BinaryRelevance { base: SlSpec },
    ClassifierChain { base: SlSpec },
    LabelCombination { base: SlSpec },
    PrunedSets { min_count: usize, max_subsets: usize, base: SlSpec },
    /// `subsets: None` means `⌈2m/k⌉`.
    Rakel { k: usize, subsets: Option<usize>, base: SlSpec },
    MajorityLabelSet,
    BaggingMl { members: usize, child: Box<MlSpec> },
    EnsembleMl { members: usize, sample_fraction: f64, child: Box<MlSpec> },
    RandomSubspaceMl { members: usize, feature_fraction: f64, child: Box<MlSpec> },
}

impl MlSpec {
    pub fn pruned_sets(base: SlSpec) -> Self {
        MlSpec::PrunedSets {
            min_count: 2,
            max_subsets: 2,
            base,
        }
    }

    pub fn rakel(base: SlSpec) -> Self {
        MlSpec::Rakel {
            k: 3,
            subsets: None,
            base,
        }
    }

    pub fn bagging_ml(child: MlSpec) -> Self {
        MlSpec::BaggingMl {
            members: 10,
            child: Box::new(child),
        }
    }

    pub fn ensemble_ml(child: MlSpec) -> Self {
        MlSpec::EnsembleMl {
            members: 10,
            sample_fraction: 0.67,
            child: Box::new(child),
        }
    }

    pub fn random_subspace_ml(child: MlSpec) -> Self {
        MlSpec::RandomSubspaceMl {
            members: 10,
            feature_fraction: 0.5,
            child: Box::new(child),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MlSpec::BinaryRelevance { .. } => "BR",
            MlSpec::ClassifierChain { .. } => "CC",
            MlSpec::LabelCombination { .. } => "LC",
            MlSpec::PrunedSets { .. } => "PS",
            MlSpec::Rakel { .. } => "RAkEL",
            MlSpec::MajorityLabelSet => "MajorityLabelSet",
            MlSpec::BaggingMl { .. } => "BaggingML",
            MlSpec::EnsembleMl { .. } => "EnsembleML",
            MlSpec::RandomSubspaceMl { .. } => "RandomSubspaceML",
        }
    }

    pub fn child(&self) -> Option<&MlSpec> {
        match self {
            MlSpec::BaggingMl { child, .. } | MlSpec::EnsembleMl { child, .. } | MlSpec::RandomSubspaceMl { child, .. } => {
                Some(child)
            }
            _ => None,
        }
    }

    pub fn base(&self) -> Option<&SlSpec> {
        match self {
            MlSpec::BinaryRelevance { base }
            | MlSpec::ClassifierChain { base }
            | MlSpec::LabelCombination { base }
            | MlSpec::PrunedSets { base, .. }
            | MlSpec::Rakel { base, .. } => Some(base),
            _ => None,
        }
    }

    pub fn is_meta(&self) -> bool {
        self.child().is_some()
    }

    pub fn validate(&self) -> Result<(), LearnError> {
        let bad = |msg: String| Err(LearnError::UnsupportedSpec(msg));
        match self {
            MlSpec::PrunedSets { min_count: 0, .. } => return bad("PS needs min_count ≥ 1".into()),
            MlSpec::Rakel { k: 0, .. } | MlSpec::Rakel { subsets: Some(0), .. } => {
                return bad("RAkEL needs k ≥ 1 and at least one subset".into())
            }
            MlSpec::BaggingMl { members: 0, .. }
            | MlSpec::EnsembleMl { members: 0, .. }
            | MlSpec::RandomSubspaceMl { members: 0, .. } => return bad(format!("{} needs members", self.name())),
            MlSpec::EnsembleMl { sample_fraction: f, .. } | MlSpec::RandomSubspaceMl { feature_fraction: f, .. }
                if !(*f > 0.0 && *f <= 1.0) =>
            {
                return bad(format!("{} fraction must lie in (0, 1]", self.name()))
            }
            _ => {}
        }
        if let Some(child) = self.child() {
            if child.is_meta() {
                return bad(format!("{} cannot wrap meta learner {}", self.name(), child.name()));
            }
            child.validate()?;
        }
        if let Some(base) = self.base() {
            base.validate()?;
        }
        Ok(())
    }
}

/// Binary predictions and per-label scores in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiLabelOutput {
    pub labels: Array2<u8>,
    pub scores: Array2<f64>,
}

#[derive(Debug, Clone)]
pub struct MlModel {
    labels: usize,
    n_features: usize,
    inner: Inner,
}

#[derive(Debug, Clone)]
enum Inner {
    Binary(Vec<SlModel>),
    Chain { order: Vec<usize>, models: Vec<SlModel> },
    Powerset(PowersetModel),
    Rakel(Vec<(Vec<usize>, PowersetModel)>),
    Constant(Vec<u8>),
    Ensemble(Vec<(Option<Vec<usize>>, MlModel)>),
}

#[derive(Debug, Clone)]
struct PowersetModel {
    codebook: LpCodebook,
    model: SlModel,
}

impl PowersetModel {
    fn fit(
        base: &SlSpec,
        x: ArrayView2<f64>,
        y: ArrayView2<u8>,
        seed: u64,
        deadline: Deadline,
    ) -> Result<Self, LearnError> {
        let (ids, codebook) = label_powerset_encode(y);
        let data = SlDataset::new(x.to_owned(), ids, codebook.len())?;
        let model = fit_single_label_until(base, &data, seed, deadline)?;
        Ok(PowersetModel { codebook, model })
    }

    fn predict(&self, x: ArrayView2<f64>) -> MultiLabelOutput {
        let class_scores = self.model.scores_or_panic(x);
        let m = self.codebook.patterns()[0].len();
        let mut labels = Array2::zeros((x.nrows(), m));
        let mut scores = Array2::zeros((x.nrows(), m));
        for (i, row) in class_scores.outer_iter().enumerate() {
            let p = row.as_slice().expect("standard layout");
            let best = self.codebook.pattern(argmax(p)).expect("model classes come from the codebook");
            labels.row_mut(i).iter_mut().zip(best).for_each(|(o, b)| *o = *b);
            for (id, pattern) in self.codebook.patterns().iter().enumerate() {
                for (j, &bit) in pattern.iter().enumerate() {
                    scores[[i, j]] += p[id] * f64::from(bit);
                }
            }
        }
        MultiLabelOutput { labels, scores }
    }
}

impl SlModel {
    fn scores_or_panic(&self, x: ArrayView2<f64>) -> Array2<f64> {
        self.predict_class_scores(x).expect("feature width checked by the multi-label model")
    }
}

fn binary_targets(column: ndarray::ArrayView1<u8>) -> Vec<usize> {
    column.iter().map(|&b| usize::from(b)).collect()
}

fn label_seed(seed: u64, label: usize) -> u64 {
    rng::derive_seed(seed, "label", label as u64)
}

/// `count` subsets of `k` distinct labels from `0..m`, each sorted.
///
/// Collections are redrawn until their union covers every label; after 100
/// failed draws, uncovered labels are patched into the last subsets, replacing
/// labels that are covered elsewhere.
pub fn draw_label_subsets(m: usize, k: usize, count: usize, seed: u64) -> Result<Vec<Vec<usize>>, LearnError> {
    if k == 0 || k > m {
        return Err(LearnError::InvalidK { k, m });
    }
    if count * k < m {
        return Err(LearnError::UncoverableLabels { count, k, m });
    }
    let mut subsets = Vec::new();
    for attempt in 0..100u64 {
        subsets = (0..count)
            .map(|i| {
                let mut s = rng::sample_indices(m, k, &mut rng::stream(seed, "rakel", attempt * count as u64 + i as u64));
                s.sort_unstable();
                s
            })
            .collect::<Vec<_>>();
        if coverage(&subsets, m).iter().all(|&c| c > 0) {
            return Ok(subsets);
        }
    }
    let mut cover = coverage(&subsets, m);
    for label in 0..m {
        if cover[label] > 0 {
            continue;
        }
        'patch: for s in (0..count).rev() {
            if let Some(pos) = subsets[s].iter().position(|&l| cover[l] > 1) {
                cover[subsets[s][pos]] -= 1;
                subsets[s][pos] = label;
                subsets[s].sort_unstable();
                cover[label] += 1;
                break 'patch;
            }
        }
    }
    Ok(subsets)
}

fn coverage(subsets: &[Vec<usize>], m: usize) -> Vec<usize> {
    let mut cover = vec![0; m];
    for s in subsets {
        for &l in s {
            cover[l] += 1;
        }
    }
    cover
}

pub fn fit_multi_label(spec: &MlSpec, x: ArrayView2<f64>, y: ArrayView2<u8>, seed: u64) -> Result<MlModel, LearnError> {
    fit_multi_label_until(spec, x, y, seed, Deadline::NONE)
}

pub fn fit_multi_label_until(
    spec: &MlSpec,
    x: ArrayView2<f64>,
    y: ArrayView2<u8>,
    seed: u64,
    deadline: Deadline,
) -> Result<MlModel, LearnError> {
    spec.validate()?;
    fit(spec, x, y, seed, deadline)
}

fn fit(spec: &MlSpec, x: ArrayView2<f64>, y: ArrayView2<u8>, seed: u64, deadline: Deadline) -> Result<MlModel, LearnError> {
    let (n, m) = y.dim();
    if n == 0 {
        return Err(LearnError::EmptyData);
    }
    if x.nrows() != n {
        return Err(LearnError::UnsupportedSpec(format!("{} feature rows for {n} label rows", x.nrows())));
    }
    deadline.check()?;
    let inner = match spec {
        MlSpec::BinaryRelevance { base } => Inner::Binary(
            (0..m)
                .map(|j| {
                    let data = SlDataset::new(x.to_owned(), binary_targets(y.column(j)), 2)?;
                    fit_single_label_until(base, &data, label_seed(seed, j), deadline)
                })
                .collect::<Result<_, _>>()?,
        ),
        MlSpec::ClassifierChain { base } => {
            let mut order: Vec<usize> = (0..m).collect();
            rng::shuffle(&mut order, &mut rng::stream(seed, "cc-order", 0));
            let mut augmented = x.to_owned();
            let mut models = Vec::with_capacity(m);
            for &j in &order {
                let data = SlDataset::new(augmented.clone(), binary_targets(y.column(j)), 2)?;
                models.push(fit_single_label_until(base, &data, label_seed(seed, j), deadline)?);
                let col = y.column(j).mapv(f64::from);
                augmented.push_column(col.view()).expect("row counts match");
            }
            Inner::Chain { order, models }
        }
        MlSpec::LabelCombination { base } => Inner::Powerset(PowersetModel::fit(base, x, y, seed, deadline)?),
        MlSpec::PrunedSets {
            min_count,
            max_subsets,
            base,
        } => {
            let kept = prune_label_sets(y, *min_count, *max_subsets);
            if kept.is_empty() {
                Inner::Powerset(PowersetModel::fit(base, x, y, seed, deadline)?)
            } else {
                let rows: Vec<usize> = kept.iter().map(|(i, _)| *i).collect();
                let flat: Vec<u8> = kept.iter().flat_map(|(_, v)| v.iter().copied()).collect();
                let labels = Array2::from_shape_vec((kept.len(), m), flat).expect("consistent widths");
                let xs = x.select(Axis(0), &rows);
                Inner::Powerset(PowersetModel::fit(base, xs.view(), labels.view(), seed, deadline)?)
            }
        }
        MlSpec::Rakel { k, subsets, base } => {
            let k = (*k).min(m);
            let count = subsets.unwrap_or((2 * m).div_ceil(k));
            let draws = draw_label_subsets(m, k, count, seed)?;
            Inner::Rakel(
                draws
                    .into_iter()
                    .enumerate()
                    .map(|(i, cols)| {
                        let ys = y.select(Axis(1), &cols);
                        let member_seed = rng::derive_seed(seed, "rakel-member", i as u64);
                        PowersetModel::fit(base, x, ys.view(), member_seed, deadline).map(|p| (cols, p))
                    })
                    .collect::<Result<_, _>>()?,
            )
        }
        MlSpec::MajorityLabelSet => {
            let (ids, book) = label_powerset_encode(y);
            let mut counts = vec![0usize; book.len()];
            ids.iter().for_each(|&i| counts[i] += 1);
            // Ties resolve to the earliest-appearing vector (smallest id).
            let modal = (0..counts.len()).fold(0, |best, i| if counts[i] > counts[best] { i } else { best });
            Inner::Constant(book.pattern(modal).expect("nonempty").to_vec())
        }
        MlSpec::BaggingMl { members, child } => Inner::Ensemble(
            (0..*members)
                .map(|i| {
                    let member_seed = rng::derive_seed(seed, "ml-member", i as u64);
                    let rows = bootstrap_indices(n, member_seed);
                    fit_rows(child, x, y, &rows, member_seed, deadline).map(|model| (None, model))
                })
                .collect::<Result<_, _>>()?,
        ),
        MlSpec::EnsembleMl {
            members,
            sample_fraction,
            child,
        } => {
            let size = ((sample_fraction * n as f64).ceil() as usize).clamp(1, n);
            Inner::Ensemble(
                (0..*members)
                    .map(|i| {
                        let member_seed = rng::derive_seed(seed, "ml-member", i as u64);
                        let mut rows = rng::sample_indices(n, size, &mut rng::stream(member_seed, "subsample", 0));
                        rows.sort_unstable();
                        fit_rows(child, x, y, &rows, member_seed, deadline).map(|model| (None, model))
                    })
                    .collect::<Result<_, _>>()?,
            )
        }
        MlSpec::RandomSubspaceMl {
            members,
            feature_fraction,
            child,
        } => {
            let d = x.ncols();
            let width = ((feature_fraction * d as f64).ceil() as usize).clamp(d.min(1), d);
            Inner::Ensemble(
                (0..*members)
                    .map(|i| {
                        let member_seed = rng::derive_seed(seed, "ml-member", i as u64);
                        let mut cols = rng::sample_indices(d, width, &mut rng::stream(member_seed, "subspace", 0));
                        cols.sort_unstable();
                        let xs = x.select(Axis(1), &cols);
                        fit(child, xs.view(), y, member_seed, deadline).map(|model| (Some(cols), model))
                    })
                    .collect::<Result<_, _>>()?,
            )
        }
    };
    Ok(MlModel {
        labels: m,
        n_features: x.ncols(),
        inner,
    })
}

fn fit_rows(
    spec: &MlSpec,
    x: ArrayView2<f64>,
    y: ArrayView2<u8>,
    rows: &[usize],
    seed: u64,
    deadline: Deadline,
) -> Result<MlModel, LearnError> {
    let xs = x.select(Axis(0), rows);
    let ys = y.select(Axis(0), rows);
    fit(spec, xs.view(), ys.view(), seed, deadline)
}

impl MlModel {
    pub fn n_labels(&self) -> usize {
        self.labels
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Result<MultiLabelOutput, LearnError> {
        if x.ncols() != self.n_features {
            return Err(LearnError::ShapeMismatch {
                expected: self.n_features,
                got: x.ncols(),
            });
        }
        Ok(self.predict_unchecked(x))
    }

    fn predict_unchecked(&self, x: ArrayView2<f64>) -> MultiLabelOutput {
        let (n, m) = (x.nrows(), self.labels);
        let mut labels = Array2::zeros((n, m));
        let mut scores = Array2::zeros((n, m));
        match &self.inner {
            Inner::Binary(models) => {
                for (j, model) in models.iter().enumerate() {
                    let s = model.scores_or_panic(x);
                    for i in 0..n {
                        scores[[i, j]] = s[[i, 1]];
                        labels[[i, j]] = u8::from(s[[i, 1]] > s[[i, 0]]);
                    }
                }
            }
            Inner::Chain { order, models } => {
                let mut augmented = x.to_owned();
                for (&j, model) in order.iter().zip(models) {
                    let s = model.scores_or_panic(augmented.view());
                    for i in 0..n {
                        scores[[i, j]] = s[[i, 1]];
                        labels[[i, j]] = u8::from(s[[i, 1]] > s[[i, 0]]);
                    }
                    let col = labels.column(j).mapv(f64::from);
                    augmented.push_column(col.view()).expect("row counts match");
                }
            }
            Inner::Powerset(p) => return p.predict(x),
            Inner::Rakel(members) => {
                let mut covering = vec![0usize; m];
                for (cols, p) in members {
                    let out = p.predict(x);
                    for (c, &j) in cols.iter().enumerate() {
                        covering[j] += 1;
                        for i in 0..n {
                            scores[[i, j]] += f64::from(out.labels[[i, c]]);
                        }
                    }
                }
                for j in 0..m {
                    for i in 0..n {
                        scores[[i, j]] /= covering[j].max(1) as f64;
                        labels[[i, j]] = u8::from(scores[[i, j]] >= 0.5);
                    }
                }
            }
            Inner::Constant(v) => {
                for i in 0..n {
                    for j in 0..m {
                        labels[[i, j]] = v[j];
                        scores[[i, j]] = f64::from(v[j]);
                    }
                }
            }
            Inner::Ensemble(members) => {
                for (cols, model) in members {
                    let out = match cols {
                        Some(cols) => model.predict_unchecked(x.select(Axis(1), cols).view()),
                        None => model.predict_unchecked(x),
                    };
                    scores += &out.scores;
                }
                scores /= members.len() as f64;
                labels = scores.mapv(|s| u8::from(s >= 0.5));
            }
        }
        MultiLabelOutput { labels, scores }
    }
}

pub fn predict_multi_label(model: &MlModel, x: ArrayView2<f64>) -> Result<MultiLabelOutput, LearnError> {
    model.predict(x)
}
