//! Multi-label datasets: ARFF input (MEKA `-C` convention), a fixed numeric
//! feature encoding, and seeded train/test splits.

mod arff;

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng;

pub use arff::{parse_arff, write_arff};

/// Missing-value marker inside [`LabeledDataset::features`].
pub const MISSING: f64 = f64::NAN;

#[derive(Debug, Error, PartialEq)]
pub enum DatasetError {
    #[error("relation name carries no `-C <labels>` option")]
    MissingLabelCount,
    #[error("label count {requested} does not fit {attributes} attributes")]
    LabelCountOutOfRange { requested: i64, attributes: usize },
    #[error("label attribute `{0}` is not nominal {{0,1}}")]
    NonBinaryLabel(String),
    #[error("line {line}: malformed row: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("line {line}: value `{value}` is not a category of `{attribute}`")]
    UnknownCategory {
        line: usize,
        attribute: String,
        value: String,
    },
    #[error("attribute `{name}` has unsupported type `{kind}`")]
    UnsupportedAttributeType { name: String, kind: String },
    #[error("line {line}: {reason}")]
    MalformedHeader { line: usize, reason: String },
    #[error("duplicate attribute name `{0}`")]
    DuplicateAttribute(String),
    #[error("dataset has no instances")]
    Empty,
    #[error("split of {n} rows at fraction {fraction} leaves one side empty")]
    DegenerateSplit { n: usize, fraction: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AttributeKind {
    Numeric,
    Nominal(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeSpec {
    pub name: String,
    pub kind: AttributeKind,
}

impl AttributeSpec {
    /// Number of encoded columns this attribute expands to.
    pub fn width(&self) -> usize {
        match &self.kind {
            AttributeKind::Numeric => 1,
            AttributeKind::Nominal(cats) => cats.len(),
        }
    }
}

/// Instances with a raw feature block and an `n × m` binary label block.
///
/// Nominal feature values are stored as category indices; missing values are
/// [`MISSING`].
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    pub relation_name: String,
    pub attributes: Vec<AttributeSpec>,
    pub label_names: Vec<String>,
    pub features: Array2<f64>,
    pub labels: Array2<u8>,
}

impl PartialEq for LabeledDataset {
    fn eq(&self, other: &Self) -> bool {
        self.relation_name == other.relation_name
            && self.attributes == other.attributes
            && self.label_names == other.label_names
            && self.labels == other.labels
            && self.features.dim() == other.features.dim()
            && self
                .features
                .iter()
                .zip(other.features.iter())
                .all(|(a, b)| a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()))
    }
}

impl LabeledDataset {
    pub fn n_instances(&self) -> usize {
        self.labels.nrows()
    }

    pub fn n_labels(&self) -> usize {
        self.labels.ncols()
    }

    /// Rows `indices` of this dataset, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            relation_name: self.relation_name.clone(),
            attributes: self.attributes.clone(),
            label_names: self.label_names.clone(),
            features: self.features.select(Axis(0), indices),
            labels: self.labels.select(Axis(0), indices),
        }
    }
}

/// Column statistics for the fixed feature encoding: numeric columns pass
/// through with mean imputation, nominal columns are one-hot expanded and a
/// missing nominal value becomes an all-zero block.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureEncoding {
    attributes: Vec<AttributeSpec>,
    means: Vec<f64>,
}

impl FeatureEncoding {
    /// Learns imputation means from `data`'s rows.
    pub fn fit(data: &LabeledDataset) -> Self {
        let means = data
            .attributes
            .iter()
            .enumerate()
            .map(|(j, attr)| match attr.kind {
                AttributeKind::Numeric => {
                    let (sum, count) = data
                        .features
                        .column(j)
                        .iter()
                        .filter(|v| !v.is_nan())
                        .fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
                    if count == 0 {
                        0.0
                    } else {
                        sum / count as f64
                    }
                }
                AttributeKind::Nominal(_) => 0.0,
            })
            .collect();
        FeatureEncoding {
            attributes: data.attributes.clone(),
            means,
        }
    }

    pub fn width(&self) -> usize {
        self.attributes.iter().map(AttributeSpec::width).sum()
    }

    pub fn transform(&self, raw: ArrayView2<f64>) -> Array2<f64> {
        let mut out = Array2::zeros((raw.nrows(), self.width()));
        for (i, row) in raw.outer_iter().enumerate() {
            let mut col = 0;
            for (j, attr) in self.attributes.iter().enumerate() {
                let v = row[j];
                match &attr.kind {
                    AttributeKind::Numeric => {
                        out[[i, col]] = if v.is_nan() { self.means[j] } else { v };
                    }
                    AttributeKind::Nominal(_) => {
                        if !v.is_nan() {
                            out[[i, col + v as usize]] = 1.0;
                        }
                    }
                }
                col += attr.width();
            }
        }
        out
    }
}

/// Numeric `n × d′` encoding of the whole dataset.
pub fn encode_features(data: &LabeledDataset) -> Array2<f64> {
    FeatureEncoding::fit(data).transform(data.features.view())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPair {
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

/// Size of the training side for `n` rows at `fraction`: `⌈fraction · n⌉`.
pub fn train_size(n: usize, fraction: f64) -> usize {
    // Guard against products like 0.7 * 10 landing a hair above an integer.
    (fraction * n as f64 - 1e-9).ceil().max(0.0) as usize
}

/// Seeded Fisher–Yates shuffle of `0..n`; the first `⌈fraction · n⌉` indices
/// are the training side.
pub fn random_split(n: usize, fraction: f64, seed: u64) -> Result<SplitPair, DatasetError> {
    let k = train_size(n, fraction);
    if !(fraction > 0.0 && fraction < 1.0) || k == 0 || k >= n {
        return Err(DatasetError::DegenerateSplit { n, fraction });
    }
    let mut order: Vec<usize> = (0..n).collect();
    rng::shuffle(&mut order, &mut rng::stream(seed, "split", 0));
    let test_indices = order.split_off(k);
    Ok(SplitPair {
        train_indices: order,
        test_indices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toy(attrs: Vec<AttributeSpec>, features: Array2<f64>) -> LabeledDataset {
        let n = features.nrows();
        LabeledDataset {
            relation_name: "t".into(),
            attributes: attrs,
            label_names: vec!["y".into()],
            features,
            labels: Array2::zeros((n, 1)),
        }
    }

    #[test]
    fn one_hot_and_mean_imputation() {
        let attrs = vec![
            AttributeSpec {
                name: "a".into(),
                kind: AttributeKind::Numeric,
            },
            AttributeSpec {
                name: "c".into(),
                kind: AttributeKind::Nominal(vec!["a".into(), "b".into(), "c".into()]),
            },
            AttributeSpec {
                name: "b".into(),
                kind: AttributeKind::Numeric,
            },
        ];
        let raw = ndarray::array![[1.0, 1.0, 5.0], [MISSING, MISSING, 5.0], [3.0, 2.0, 5.0]];
        let enc = encode_features(&toy(attrs, raw));
        assert_eq!(enc.ncols(), 5);
        assert_eq!(enc.column(0).to_vec(), vec![1.0, 2.0, 3.0]);
        assert_eq!(enc.row(0).to_vec(), vec![1.0, 0.0, 1.0, 0.0, 5.0]);
        assert_eq!(enc.row(1).to_vec(), vec![2.0, 0.0, 0.0, 0.0, 5.0]);
        assert_eq!(enc.row(2).to_vec(), vec![3.0, 0.0, 0.0, 1.0, 5.0]);
    }

    #[test]
    fn all_missing_numeric_imputes_zero() {
        let attrs = vec![AttributeSpec {
            name: "a".into(),
            kind: AttributeKind::Numeric,
        }];
        let enc = encode_features(&toy(attrs, ndarray::array![[MISSING], [MISSING]]));
        assert_eq!(enc.column(0).to_vec(), vec![0.0, 0.0]);
    }

    #[test]
    fn split_cardinalities() {
        let s = random_split(10, 0.7, 1).unwrap();
        assert_eq!(s.train_indices.len(), 7);
        assert_eq!(s.test_indices.len(), 3);
        assert_eq!(s, random_split(10, 0.7, 1).unwrap());
        assert!(matches!(
            random_split(1, 0.5, 1),
            Err(DatasetError::DegenerateSplit { .. })
        ));
        assert!(matches!(
            random_split(3, 0.99, 1),
            Err(DatasetError::DegenerateSplit { .. })
        ));
    }

    #[test]
    fn split_membership_matches_uniform_shuffle() {
        use statrs::distribution::{Binomial, Discrete};
        // Per-index train counts over 100 seeds follow Binomial(100, 0.7) under
        // a uniform shuffle; compare the share of indices inside 0.7 ± 0.05.
        let mut hits = vec![0u64; 1000];
        for seed in 0..100 {
            for i in random_split(1000, 0.7, seed).unwrap().train_indices {
                hits[i] += 1;
            }
        }
        let mean = hits.iter().sum::<u64>() as f64 / (1000.0 * 100.0);
        assert!((mean - 0.7).abs() < 1e-12);
        let binom = Binomial::new(0.7, 100).unwrap();
        let expected: f64 = (65..=75).map(|k| binom.pmf(k)).sum();
        let observed = hits.iter().filter(|&&h| (65..=75).contains(&h)).count() as f64 / 1000.0;
        assert!((observed - expected).abs() < 0.05, "{observed} vs {expected}");
    }

    proptest! {
        #[test]
        fn split_is_exact_partition(n in 2usize..400, fraction in 0.01f64..0.99, seed in any::<u64>()) {
            match random_split(n, fraction, seed) {
                Ok(s) => {
                    prop_assert_eq!(s.train_indices.len(), train_size(n, fraction));
                    let mut all: Vec<usize> = s.train_indices.iter().chain(&s.test_indices).copied().collect();
                    all.sort_unstable();
                    prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
                }
                Err(DatasetError::DegenerateSplit { .. }) => {
                    let k = train_size(n, fraction);
                    prop_assert!(k == 0 || k >= n);
                }
                Err(e) => prop_assert!(false, "unexpected {e}"),
            }
        }
    }
}
