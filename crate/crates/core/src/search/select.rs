use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{Budget, CandidateEvaluator, CandidateRecord, EventKind, SearchConfig, SearchError, Session};
use crate::rng;
use crate::space::ComponentInstance;
use crate::stats::welch_t_test;

/// A pool member with its phase-one loss and, if it was re-evaluated, the
/// selection-phase losses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolEntry {
    pub pipeline: ComponentInstance,
    pub phase1_loss: f64,
    pub phase2_scores: Option<Vec<f64>>,
    pub phase2_failed: bool,
}

impl PoolEntry {
    pub fn phase2_loss(&self) -> Option<f64> {
        self.phase2_scores
            .as_ref()
            .map(|s| s.iter().sum::<f64>() / s.len() as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub pipeline: ComponentInstance,
    /// Selection-phase mean of the winner, or its phase-one loss when no
    /// pool member could be re-evaluated.
    pub score: f64,
    pub pool: Vec<PoolEntry>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum SelectionBudget {
    Evaluations(usize),
    /// Spend at most `share_seconds`, and never past `end`.
    Until { share_seconds: f64, end: Instant },
}

/// `k` lowest-loss successful records plus up to `k` uniform draws from the
/// remaining ones whose scores are not significantly worse than the best's
/// (two-sided Welch test, p ≥ 0.05). Best records come first.
fn pool(records: &[CandidateRecord], k: usize, seed: u64) -> Vec<&CandidateRecord> {
    let mut ok: Vec<&CandidateRecord> = records.iter().filter(|r| !r.failed).collect();
    ok.sort_by(|a, b| a.loss.total_cmp(&b.loss).then(a.eval_index.cmp(&b.eval_index)));
    let Some(best) = ok.first().copied() else {
        return Vec::new();
    };
    let (top, rest) = ok.split_at(k.min(ok.len()));
    let eligible: Vec<&CandidateRecord> = rest
        .iter()
        .copied()
        .filter(|r| match welch_t_test(&best.scores, &r.scores) {
            Ok(w) => w.p >= 0.05,
            // Too few repetitions to call the difference significant.
            Err(_) => true,
        })
        .collect();
    let mut picks = rng::sample_indices(eligible.len(), k, &mut rng::stream(seed, "pool", 0));
    picks.sort_unstable();
    top.iter().copied().chain(picks.into_iter().map(|i| eligible[i])).collect()
}

pub(crate) fn select_in(session: &mut Session, allowance: SelectionBudget) -> Result<Selection, SearchError> {
    let seed = session.seed;
    let members: Vec<CandidateRecord> = pool(&session.records, session.config.k, seed)
        .into_iter()
        .cloned()
        .collect();
    let best = members.first().ok_or(SearchError::NoCandidateFound)?.clone();
    let mut entries: Vec<PoolEntry> = members
        .iter()
        .map(|r| PoolEntry {
            pipeline: r.pipeline.clone(),
            phase1_loss: r.loss,
            phase2_scores: None,
            phase2_failed: false,
        })
        .collect();
    if entries.len() > 1 {
        let (mut left, end) = match allowance {
            SelectionBudget::Evaluations(n) => (n.min(entries.len()), None),
            SelectionBudget::Until { share_seconds, end } => {
                let cost: f64 = members.iter().map(|r| r.cost_seconds).sum();
                let held = Instant::now() + Duration::from_secs_f64(cost.min(share_seconds));
                (entries.len(), Some(held.min(end)))
            }
        };
        session.log(EventKind::Phase2Start, format!("pool of {}", entries.len()), None);
        let phase2_seed = rng::derive_seed(seed, "selection", 0);
        let reps = session.config.selection_repetitions;
        for entry in entries.iter_mut() {
            if left == 0 || session.out_of_time(end) {
                break;
            }
            let (result, _) = session.timed(&entry.pipeline, phase2_seed, reps, end);
            session.used += 1;
            left -= 1;
            let text = entry.pipeline.to_string();
            match result {
                Ok(scores) => {
                    entry.phase2_scores = Some(scores);
                    let loss = entry.phase2_loss();
                    session.log(EventKind::Evaluate, text, loss);
                }
                Err(_) => {
                    entry.phase2_failed = true;
                    session.log(EventKind::Fail, text, Some(1.0));
                }
            }
        }
    }
    let winner = entries
        .iter()
        .filter_map(|e| e.phase2_loss().map(|l| (l, e)))
        .min_by(|a, b| a.0.total_cmp(&b.0));
    let (pipeline, score) = match winner {
        Some((loss, e)) => (e.pipeline.clone(), loss),
        None => (best.pipeline.clone(), best.loss),
    };
    Ok(Selection {
        pipeline,
        score,
        pool: entries,
    })
}

/// Selection phase on its own: builds the pool from `records` and
/// re-evaluates its members with fresh splits within `budget`.
pub fn select_final(
    records: &[CandidateRecord],
    evaluator: &dyn CandidateEvaluator,
    budget: &Budget,
    config: &SearchConfig,
    seed: u64,
) -> Result<Selection, SearchError> {
    let mut session = Session::new(evaluator, config, budget, seed)?;
    session.records = records.to_vec();
    let allowance = match budget.kind {
        super::BudgetKind::Evaluations(n) => SelectionBudget::Evaluations(n),
        super::BudgetKind::WallClock(t) => SelectionBudget::Until {
            share_seconds: t,
            end: session.search_end().expect("wall-clock budget"),
        },
    };
    select_in(&mut session, allowance)
}
