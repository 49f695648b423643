//! Fixture datasets: three seeded generators and two bundled ARFF samples.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use rand::RngExt;
use serde::{Deserialize, Serialize};

use crate::dataset::{parse_arff, AttributeKind, AttributeSpec, LabeledDataset};
use crate::rng;

/// Dense sample with nominal features and missing values (4 labels).
pub const HABITAT_ARFF: &str = include_str!("../../fixtures/habitat.arff");
/// Sparse term-count sample (5 labels).
pub const TOPICS_ARFF: &str = include_str!("../../fixtures/topics.arff");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixtureKind {
    /// Labels depend on features only, independently of each other.
    Independent,
    /// Each label depends on the previous one as well as on the features.
    Chain,
    /// Two labels with `P(1,1) = P(0,0) = 0.4`, `P(1,0) = 0.2` and a single
    /// constant feature.
    Dependence,
    Habitat,
    Topics,
}

impl FixtureKind {
    pub const ALL: [FixtureKind; 5] = [
        FixtureKind::Independent,
        FixtureKind::Chain,
        FixtureKind::Dependence,
        FixtureKind::Habitat,
        FixtureKind::Topics,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FixtureKind::Independent => "independent",
            FixtureKind::Chain => "chain",
            FixtureKind::Dependence => "dependence",
            FixtureKind::Habitat => "habitat",
            FixtureKind::Topics => "topics",
        }
    }

    pub fn is_generated(self) -> bool {
        !matches!(self, FixtureKind::Habitat | FixtureKind::Topics)
    }
}

impl fmt::Display for FixtureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FixtureKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FixtureKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown fixture `{s}`"))
    }
}

/// The fixture of `kind`. Generated kinds use `n` rows and `seed`; bundled
/// samples ignore both.
pub fn fixture(kind: FixtureKind, n: usize, seed: u64) -> LabeledDataset {
    match kind {
        FixtureKind::Independent => independent(n, seed),
        FixtureKind::Chain => chain(n, seed),
        FixtureKind::Dependence => dependence(n, seed),
        FixtureKind::Habitat => parse_arff(HABITAT_ARFF).expect("bundled sample parses"),
        FixtureKind::Topics => parse_arff(TOPICS_ARFF).expect("bundled sample parses"),
    }
}

fn numeric(prefix: &str, d: usize) -> Vec<AttributeSpec> {
    (0..d)
        .map(|j| AttributeSpec {
            name: format!("{prefix}{j}"),
            kind: AttributeKind::Numeric,
        })
        .collect()
}

fn build(name: &str, attributes: Vec<AttributeSpec>, features: Array2<f64>, labels: Array2<u8>) -> LabeledDataset {
    LabeledDataset {
        relation_name: name.to_string(),
        label_names: (0..labels.ncols()).map(|j| format!("y{j}")).collect(),
        attributes,
        features,
        labels,
    }
}

/// Six uniform features in `[-1, 1]`; label `j` is the sign of a noisy
/// linear score over features `j` and `j + 1`.
pub fn independent(n: usize, seed: u64) -> LabeledDataset {
    let (d, m) = (6, 4);
    let mut s = rng::stream(seed, "fixture-independent", 0);
    let x = Array2::from_shape_fn((n, d), |_| s.random_range(-1.0..1.0));
    let y = Array2::from_shape_fn((n, m), |(i, j)| {
        let noise: f64 = s.random_range(-0.3..0.3);
        u8::from(x[[i, j]] + 0.5 * x[[i, j + 1]] + noise > 0.0)
    });
    build("independent", numeric("x", d), x, y)
}

/// Five uniform features; label 0 thresholds feature 0 and label `j > 0`
/// is label `j − 1` XOR a threshold on feature `j`, each flipped with
/// probability 0.1.
pub fn chain(n: usize, seed: u64) -> LabeledDataset {
    let (d, m) = (5, 5);
    let mut s = rng::stream(seed, "fixture-chain", 0);
    let x = Array2::from_shape_fn((n, d), |_| s.random_range(-1.0..1.0));
    let mut y = Array2::zeros((n, m));
    for i in 0..n {
        let mut prev = 0u8;
        for j in 0..m {
            let cut = u8::from(x[[i, j]] > if j == 0 { 0.0 } else { 0.3 });
            let flip = u8::from(s.random_range(0.0..1.0) < 0.1);
            let v = if j == 0 { cut } else { prev ^ cut } ^ flip;
            y[[i, j]] = v;
            prev = v;
        }
    }
    build("chain", numeric("x", d), x, y)
}

/// Label pairs drawn i.i.d. with `P(1,1) = 0.4`, `P(0,0) = 0.4`,
/// `P(1,0) = 0.2`; the only feature is constant, so any learner is limited to
/// predicting one vector. The modal joint vector loses 0.6 in subset 0/1,
/// the vector of marginal modes `(1,0)` loses 0.8.
pub fn dependence(n: usize, seed: u64) -> LabeledDataset {
    let mut s = rng::stream(seed, "fixture-dependence", 0);
    let x = Array2::from_elem((n, 1), 1.0);
    let mut y = Array2::zeros((n, 2));
    for i in 0..n {
        let u: f64 = s.random_range(0.0..1.0);
        let (a, b) = if u < 0.4 {
            (1, 1)
        } else if u < 0.8 {
            (0, 0)
        } else {
            (1, 0)
        };
        y[[i, 0]] = a;
        y[[i, 1]] = b;
    }
    build("dependence", numeric("c", 1), x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{parse_arff, write_arff};

    #[test]
    fn generators_are_seeded() {
        for kind in FixtureKind::ALL.into_iter().filter(|k| k.is_generated()) {
            assert_eq!(fixture(kind, 50, 3), fixture(kind, 50, 3));
            assert_ne!(fixture(kind, 50, 3).labels, fixture(kind, 50, 4).labels);
            assert_eq!(fixture(kind, 50, 3).n_instances(), 50);
        }
    }

    #[test]
    fn generated_fixtures_round_trip_through_arff() {
        for kind in FixtureKind::ALL {
            let data = fixture(kind, 40, 1);
            let back = parse_arff(&write_arff(&data)).unwrap();
            assert_eq!(back.labels, data.labels);
            assert_eq!(back.n_labels(), data.n_labels());
        }
    }

    #[test]
    fn bundled_samples_have_expected_shape() {
        let h = fixture(FixtureKind::Habitat, 0, 0);
        assert_eq!((h.n_instances(), h.n_labels(), h.attributes.len()), (160, 4, 6));
        assert!(h.features.iter().any(|v| v.is_nan()));
        let t = fixture(FixtureKind::Topics, 0, 0);
        assert_eq!((t.n_instances(), t.n_labels(), t.attributes.len()), (160, 5, 40));
        assert!(t.features.iter().filter(|v| **v == 0.0).count() > t.features.len() / 2);
        for d in [h, t] {
            assert!(d.labels.rows().into_iter().any(|r| r.sum() > 1));
        }
    }

    #[test]
    fn dependence_frequencies() {
        let d = dependence(20_000, 5);
        let count = |a: u8, b: u8| d.labels.rows().into_iter().filter(|r| r[0] == a && r[1] == b).count() as f64;
        assert!((count(1, 1) / 20_000.0 - 0.4).abs() < 0.02);
        assert!((count(0, 0) / 20_000.0 - 0.4).abs() < 0.02);
        assert!((count(1, 0) / 20_000.0 - 0.2).abs() < 0.02);
        assert_eq!(count(0, 1), 0.0);
    }

    #[test]
    fn kind_names_parse() {
        for kind in FixtureKind::ALL {
            assert_eq!(kind.name().parse::<FixtureKind>().unwrap(), kind);
        }
        assert!("nope".parse::<FixtureKind>().is_err());
    }
}
