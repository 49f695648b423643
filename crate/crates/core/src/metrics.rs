//! Multi-label performance measures over batches of instances.
//!
//! Conventions:
//! - instance-wise F-measure treats `0/0` (empty truth, empty prediction) as 1;
//! - rank loss is reported raw and normalized by the number of
//!   (relevant, irrelevant) pairs; instances without such a pair contribute 0
//!   and are listed in [`RankLoss::undefined_instances`].

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("shape mismatch: truth is {truth:?}, other is {other:?}")]
pub struct ShapeMismatch {
    pub truth: (usize, usize),
    pub other: (usize, usize),
}

/// Mean over instances together with the per-instance values it summarizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub mean: f64,
    pub per_instance: Vec<f64>,
}

impl MetricReport {
    fn from_values(per_instance: Vec<f64>) -> Self {
        let mean = if per_instance.is_empty() {
            0.0
        } else {
            per_instance.iter().sum::<f64>() / per_instance.len() as f64
        };
        MetricReport { mean, per_instance }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankLoss {
    pub normalized: MetricReport,
    pub raw: MetricReport,
    pub undefined_instances: Vec<usize>,
}

fn check<A, B>(truth: &ArrayView2<A>, other: &ArrayView2<B>) -> Result<(), ShapeMismatch> {
    if truth.dim() == other.dim() {
        Ok(())
    } else {
        Err(ShapeMismatch {
            truth: truth.dim(),
            other: other.dim(),
        })
    }
}

pub fn subset_zero_one_report(
    truth: ArrayView2<u8>,
    pred: ArrayView2<u8>,
) -> Result<MetricReport, ShapeMismatch> {
    check(&truth, &pred)?;
    Ok(MetricReport::from_values(
        truth
            .outer_iter()
            .zip(pred.outer_iter())
            .map(|(y, h)| if y == h { 0.0 } else { 1.0 })
            .collect(),
    ))
}

/// Fraction of instances whose predicted label vector is not an exact match.
pub fn subset_zero_one(truth: ArrayView2<u8>, pred: ArrayView2<u8>) -> Result<f64, ShapeMismatch> {
    subset_zero_one_report(truth, pred).map(|r| r.mean)
}

pub fn hamming_report(
    truth: ArrayView2<u8>,
    pred: ArrayView2<u8>,
) -> Result<MetricReport, ShapeMismatch> {
    check(&truth, &pred)?;
    let m = truth.ncols().max(1) as f64;
    Ok(MetricReport::from_values(
        truth
            .outer_iter()
            .zip(pred.outer_iter())
            .map(|(y, h)| y.iter().zip(h.iter()).filter(|(a, b)| a != b).count() as f64 / m)
            .collect(),
    ))
}

pub fn hamming(truth: ArrayView2<u8>, pred: ArrayView2<u8>) -> Result<f64, ShapeMismatch> {
    hamming_report(truth, pred).map(|r| r.mean)
}

pub fn instance_f_report(
    truth: ArrayView2<u8>,
    pred: ArrayView2<u8>,
) -> Result<MetricReport, ShapeMismatch> {
    check(&truth, &pred)?;
    Ok(MetricReport::from_values(
        truth
            .outer_iter()
            .zip(pred.outer_iter())
            .map(|(y, h)| {
                let (mut both, mut total) = (0u32, 0u32);
                for (&a, &b) in y.iter().zip(h.iter()) {
                    both += u32::from(a & b);
                    total += u32::from(a) + u32::from(b);
                }
                if total == 0 {
                    1.0
                } else {
                    2.0 * f64::from(both) / f64::from(total)
                }
            })
            .collect(),
    ))
}

/// Mean instance-wise F-measure, `2·|y ∧ h| / (|y| + |h|)`.
pub fn instance_f_measure(truth: ArrayView2<u8>, pred: ArrayView2<u8>) -> Result<f64, ShapeMismatch> {
    instance_f_report(truth, pred).map(|r| r.mean)
}

/// Incorrectly ordered (relevant, irrelevant) label pairs; ties count ½.
pub fn rank_loss(truth: ArrayView2<u8>, scores: ArrayView2<f64>) -> Result<RankLoss, ShapeMismatch> {
    check(&truth, &scores)?;
    let mut raw = Vec::with_capacity(truth.nrows());
    let mut normalized = Vec::with_capacity(truth.nrows());
    let mut undefined = Vec::new();
    for (i, (y, h)) in truth.outer_iter().zip(scores.outer_iter()).enumerate() {
        let relevant: Vec<f64> = y.iter().zip(h.iter()).filter(|(a, _)| **a == 1).map(|(_, s)| *s).collect();
        let irrelevant: Vec<f64> = y.iter().zip(h.iter()).filter(|(a, _)| **a == 0).map(|(_, s)| *s).collect();
        let mut count = 0.0;
        for r in &relevant {
            for q in &irrelevant {
                if r < q {
                    count += 1.0;
                } else if r == q {
                    count += 0.5;
                }
            }
        }
        let pairs = relevant.len() * irrelevant.len();
        raw.push(count);
        if pairs == 0 {
            undefined.push(i);
            normalized.push(0.0);
        } else {
            normalized.push(count / pairs as f64);
        }
    }
    Ok(RankLoss {
        normalized: MetricReport::from_values(normalized),
        raw: MetricReport::from_values(raw),
        undefined_instances: undefined,
    })
}

/// All four measures on one batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub subset_zero_one: f64,
    pub exact_match_accuracy: f64,
    pub hamming_loss: f64,
    pub instance_f_measure: f64,
    pub rank_loss: f64,
    pub rank_loss_raw: f64,
    pub rank_loss_undefined_instances: usize,
}

pub fn summarize(
    truth: ArrayView2<u8>,
    pred: ArrayView2<u8>,
    scores: ArrayView2<f64>,
) -> Result<MetricSummary, ShapeMismatch> {
    let zero_one = subset_zero_one(truth, pred)?;
    let rank = rank_loss(truth, scores)?;
    Ok(MetricSummary {
        subset_zero_one: zero_one,
        exact_match_accuracy: 1.0 - zero_one,
        hamming_loss: hamming(truth, pred)?,
        instance_f_measure: instance_f_measure(truth, pred)?,
        rank_loss: rank.normalized.mean,
        rank_loss_raw: rank.raw.mean,
        rank_loss_undefined_instances: rank.undefined_instances.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn zero_one_examples() {
        let t = array![[1u8, 0], [0, 1], [1, 1], [0, 0]];
        assert_eq!(subset_zero_one(t.view(), t.view()).unwrap(), 0.0);
        let p = array![[1u8, 0], [0, 1], [1, 0], [0, 0]];
        assert_eq!(subset_zero_one(t.view(), p.view()).unwrap(), 0.25);
        assert_eq!(
            subset_zero_one(array![[1u8, 0]].view(), array![[1u8, 1]].view()).unwrap(),
            1.0
        );
    }

    #[test]
    fn hamming_examples() {
        let y = array![[1u8, 0, 1, 0]];
        assert_eq!(hamming(y.view(), array![[1u8, 1, 1, 0]].view()).unwrap(), 0.25);
        assert_eq!(hamming(y.view(), array![[0u8, 1, 0, 1]].view()).unwrap(), 1.0);
        assert_eq!(hamming(y.view(), y.view()).unwrap(), 0.0);
    }

    #[test]
    fn f_measure_examples() {
        let y = array![[1u8, 1, 0]];
        assert!((instance_f_measure(y.view(), array![[1u8, 0, 0]].view()).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(instance_f_measure(y.view(), y.view()).unwrap(), 1.0);
        let empty = array![[0u8, 0]];
        assert_eq!(instance_f_measure(empty.view(), empty.view()).unwrap(), 1.0);
    }

    #[test]
    fn rank_loss_examples() {
        let y = array![[1u8, 0]];
        assert_eq!(rank_loss(y.view(), array![[0.9, 0.1]].view()).unwrap().normalized.mean, 0.0);
        let wrong = rank_loss(y.view(), array![[0.2, 0.8]].view()).unwrap();
        assert_eq!((wrong.normalized.mean, wrong.raw.mean), (1.0, 1.0));
        assert_eq!(rank_loss(y.view(), array![[0.5, 0.5]].view()).unwrap().normalized.mean, 0.5);
        let flagged = rank_loss(array![[1u8, 1]].view(), array![[0.1, 0.9]].view()).unwrap();
        assert_eq!(flagged.undefined_instances, vec![0]);
        assert_eq!(flagged.normalized.mean, 0.0);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let a = array![[1u8, 0]];
        let b = array![[1u8, 0, 1]];
        assert!(hamming(a.view(), b.view()).is_err());
        assert!(rank_loss(a.view(), array![[0.1]].view()).is_err());
    }
}
