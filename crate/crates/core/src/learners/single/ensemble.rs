use ndarray::{Array2, ArrayView2, Axis};

use super::{bootstrap_indices, fit_weighted, select_rows, SlModel, SlSpec};
use crate::learners::{argmax, Deadline, LearnError};
use crate::rng;

/// Ensemble member, optionally trained on a column subset.
#[derive(Debug, Clone)]
pub(super) struct Member {
    columns: Option<Vec<usize>>,
    model: SlModel,
}

pub(super) fn average_scores(members: &[Member], x: ArrayView2<f64>, c: usize) -> Array2<f64> {
    let mut out = Array2::zeros((x.nrows(), c));
    for m in members {
        let s = match &m.columns {
            Some(cols) => m.model.scores_unchecked(x.select(Axis(1), cols).view()),
            None => m.model.scores_unchecked(x),
        };
        out += &s;
    }
    out /= members.len() as f64;
    out
}

pub(super) fn boosted_scores(rounds: &[(f64, SlModel)], x: ArrayView2<f64>, c: usize) -> Array2<f64> {
    let mut out = Array2::zeros((x.nrows(), c));
    let total: f64 = rounds.iter().map(|(a, _)| a).sum();
    for (alpha, model) in rounds {
        let s = model.scores_unchecked(x);
        for (i, row) in s.outer_iter().enumerate() {
            out[[i, argmax(row.as_slice().expect("standard layout"))]] += alpha;
        }
    }
    out /= total;
    out
}

#[allow(clippy::too_many_arguments)]
pub(super) fn bagging(
    base: &SlSpec,
    x: ArrayView2<f64>,
    y: &[usize],
    c: usize,
    members: usize,
    bootstrap: bool,
    seed: u64,
    deadline: Deadline,
) -> Result<Vec<Member>, LearnError> {
    (0..members)
        .map(|i| {
            let member_seed = rng::derive_seed(seed, "bagging", i as u64);
            let model = if bootstrap {
                let rows = bootstrap_indices(y.len(), member_seed);
                let (xs, ys) = select_rows(x, y, &rows);
                fit_weighted(base, xs.view(), &ys, c, &vec![1.0; ys.len()], member_seed, deadline)?
            } else {
                fit_weighted(base, x, y, c, &vec![1.0; y.len()], member_seed, deadline)?
            };
            Ok(Member { columns: None, model })
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
pub(super) fn random_subspace(
    base: &SlSpec,
    x: ArrayView2<f64>,
    y: &[usize],
    c: usize,
    members: usize,
    fraction: f64,
    seed: u64,
    deadline: Deadline,
) -> Result<Vec<Member>, LearnError> {
    let d = x.ncols();
    let width = ((fraction * d as f64).ceil() as usize).clamp(d.min(1), d);
    (0..members)
        .map(|i| {
            let mut cols = rng::sample_indices(d, width, &mut rng::stream(seed, "subspace", i as u64));
            cols.sort_unstable();
            let xs = x.select(Axis(1), &cols);
            let model = fit_weighted(
                base,
                xs.view(),
                y,
                c,
                &vec![1.0; y.len()],
                rng::derive_seed(seed, "subspace-member", i as u64),
                deadline,
            )?;
            Ok(Member {
                columns: Some(cols),
                model,
            })
        })
        .collect()
}

/// Multi-class AdaBoost (SAMME): member weight `ln((1−ε)/ε) + ln(c−1)`.
pub(super) fn ada_boost(
    base: &SlSpec,
    x: ArrayView2<f64>,
    y: &[usize],
    c: usize,
    rounds: usize,
    seed: u64,
    deadline: Deadline,
) -> Result<Vec<(f64, SlModel)>, LearnError> {
    let n = y.len();
    let mut w = vec![1.0 / n as f64; n];
    let mut out: Vec<(f64, SlModel)> = Vec::new();
    let class_term = ((c as f64) - 1.0).max(1.0).ln();
    for round in 0..rounds {
        let model = fit_weighted(base, x, y, c, &w, rng::derive_seed(seed, "boost", round as u64), deadline)?;
        let pred = model.predict(x)?;
        let wrong: Vec<bool> = pred.iter().zip(y).map(|(p, t)| p != t).collect();
        let err: f64 = w.iter().zip(&wrong).filter(|(_, &bad)| bad).map(|(wi, _)| wi).sum::<f64>()
            / w.iter().sum::<f64>();
        if err >= 1.0 - 1.0 / c as f64 {
            if out.is_empty() {
                out.push((1.0, model));
            }
            break;
        }
        if err <= 1e-10 {
            // A perfect member dominates the vote; later rounds add nothing.
            let alpha = ((1.0 - 1e-10) / 1e-10f64).ln() + class_term;
            out.push((alpha, model));
            break;
        }
        let alpha = ((1.0 - err) / err).ln() + class_term;
        for (wi, &bad) in w.iter_mut().zip(&wrong) {
            if bad {
                *wi *= alpha.exp();
            }
        }
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|wi| *wi /= total);
        out.push((alpha, model));
    }
    Ok(out)
}
