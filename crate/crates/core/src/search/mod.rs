//! Pipeline search: best-first forward decomposition with random-completion
//! node evaluation and two-phase selection, plus the random-search baseline.
//!
//! Both optimizers share one [`Session`], which owns the evaluation cache,
//! the budget accounting, the candidate records and the event log.

mod best_first;
mod evaluate;
mod random;
mod select;

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::learners::Deadline;
use crate::space::{ComponentInstance, SpaceError};

pub use best_first::{best_first_search, evaluate_node, ml_plan, BestFirstOutcome};
pub use evaluate::{evaluate_candidate, CandidateEvaluator, EvaluationFailed, SearchData, ValidationEvaluator};
pub use random::random_search;
pub use select::{select_final, PoolEntry, Selection};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("no candidate was evaluated successfully within the budget")]
    NoCandidateFound,
    #[error("invalid budget: {0}")]
    InvalidBudget(String),
    #[error("search data needs at least 10 instances, got {0}")]
    TooFewInstances(usize),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BudgetKind {
    /// Total seconds for the whole search, both phases.
    WallClock(f64),
    /// Number of candidate evaluations, cache hits excluded.
    Evaluations(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub kind: BudgetKind,
    /// Seconds allowed for one candidate evaluation (all repetitions).
    pub candidate_limit: Option<f64>,
}

impl Budget {
    pub fn evaluations(n: usize) -> Self {
        Budget {
            kind: BudgetKind::Evaluations(n),
            candidate_limit: None,
        }
    }

    pub fn seconds(total: f64, candidate_limit: Option<f64>) -> Self {
        Budget {
            kind: BudgetKind::WallClock(total),
            candidate_limit,
        }
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |m: &str| Err(SearchError::InvalidBudget(m.into()));
        match self.kind {
            BudgetKind::Evaluations(0) => return bad("evaluation budget must be positive"),
            BudgetKind::WallClock(t) if !(t > 0.0 && t.is_finite()) => return bad("time budget must be positive"),
            _ => {}
        }
        if let Some(limit) = self.candidate_limit {
            if !(limit > 0.0) {
                return bad("per-candidate limit must be positive");
            }
            if let BudgetKind::WallClock(t) = self.kind {
                if limit > t {
                    return bad("per-candidate limit exceeds the total budget");
                }
            }
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        match self.kind {
            BudgetKind::WallClock(t) => format!("{t}s"),
            BudgetKind::Evaluations(n) => format!("{n}evals"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeEvaluation {
    /// Minimum over this many random completions.
    RandomCompletions(usize),
    /// Minimum over every completion of the node.
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub node_evaluation: NodeEvaluation,
    pub repetitions: usize,
    /// Pool size parameter of the selection phase: `k` best plus `k` random.
    pub k: usize,
    pub selection_repetitions: usize,
    /// Largest share of the budget the selection phase may use.
    pub selection_share: f64,
    pub workers: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            node_evaluation: NodeEvaluation::RandomCompletions(3),
            repetitions: 3,
            k: 10,
            selection_repetitions: 5,
            selection_share: 0.3,
            workers: 1,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), SearchError> {
        let ok = self.repetitions > 0
            && self.k > 0
            && self.selection_repetitions > 0
            && self.workers > 0
            && (0.0..1.0).contains(&self.selection_share)
            && self.node_evaluation != NodeEvaluation::RandomCompletions(0);
        if ok {
            Ok(())
        } else {
            Err(SearchError::InvalidBudget("search knobs must be positive".into()))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub pipeline: ComponentInstance,
    /// Validation losses (1 − instance F), one per finished repetition.
    pub scores: Vec<f64>,
    /// Mean of `scores`, or 1.0 for a failed evaluation.
    pub loss: f64,
    pub failed: bool,
    pub cost_seconds: f64,
    /// Position in the sequence of budgeted evaluations, from 1.
    pub eval_index: usize,
    pub discovered_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    Expand,
    Evaluate,
    Fail,
    NewBest,
    Phase2Start,
    Final,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::Expand => "expand",
            EventKind::Evaluate => "evaluate",
            EventKind::Fail => "fail",
            EventKind::NewBest => "new-best",
            EventKind::Phase2Start => "phase2-start",
            EventKind::Final => "final",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub elapsed_ms: u64,
    pub eval_index: usize,
    pub kind: EventKind,
    /// Pipeline text, or the node's partial choice list for expansions.
    pub subject: String,
    pub score: Option<f64>,
}

/// Tab-separated event lines: `elapsed_ms eval kind subject score`. With
/// `timestamps` off the first column is `-`, making logs of count-budget
/// runs byte-comparable.
pub fn render_events(events: &[Event], timestamps: bool) -> String {
    let mut out = String::new();
    for e in events {
        let time = if timestamps { e.elapsed_ms.to_string() } else { "-".into() };
        let score = e.score.map_or("-".to_string(), |s| format!("{s:.6}"));
        writeln!(out, "{time}\t{}\t{}\t{}\t{score}", e.eval_index, e.kind, e.subject).expect("string write");
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub pipeline: ComponentInstance,
    /// Validation loss backing the choice (selection-phase mean when available).
    pub internal_score: f64,
    pub records: Vec<CandidateRecord>,
    pub pool: Vec<PoolEntry>,
    pub events: Vec<Event>,
    pub evaluations: usize,
    pub elapsed_seconds: f64,
    /// First goal node taken from the open list (best-first only).
    pub first_goal: Option<ComponentInstance>,
}

impl SearchResult {
    /// Lowest phase-one loss among successful records.
    pub fn best_record(&self) -> Option<&CandidateRecord> {
        best_of(&self.records)
    }
}

fn best_of(records: &[CandidateRecord]) -> Option<&CandidateRecord> {
    records
        .iter()
        .filter(|r| !r.failed)
        .min_by(|a, b| a.loss.total_cmp(&b.loss).then(a.eval_index.cmp(&b.eval_index)))
}

/// Earlier of `now + limit` and the phase end.
fn candidate_deadline(now: Instant, limit: Option<f64>, phase_end: Option<Instant>) -> Deadline {
    let limit = limit.map(|l| now + Duration::from_secs_f64(l));
    Deadline::from_option(match (limit, phase_end) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Outcome {
    Scored(f64),
    Failed,
}

/// Mutable state shared by a search run: cache, budget, records and events.
pub(crate) struct Session<'a> {
    evaluator: &'a dyn CandidateEvaluator,
    config: SearchConfig,
    budget: Budget,
    seed: u64,
    start: Instant,
    used: usize,
    cache: HashMap<String, Outcome>,
    records: Vec<CandidateRecord>,
    events: Vec<Event>,
    best: f64,
    pool: Option<rayon::ThreadPool>,
}

impl<'a> Session<'a> {
    fn new(evaluator: &'a dyn CandidateEvaluator, config: &SearchConfig, budget: &Budget, seed: u64) -> Result<Self, SearchError> {
        budget.validate()?;
        config.validate()?;
        let pool = (config.workers > 1).then(|| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(config.workers)
                .build()
                .expect("thread pool")
        });
        Ok(Session {
            evaluator,
            config: config.clone(),
            budget: *budget,
            seed,
            start: Instant::now(),
            used: 0,
            cache: HashMap::new(),
            records: Vec::new(),
            events: Vec::new(),
            best: f64::INFINITY,
            pool,
        })
    }

    fn elapsed(&self) -> Duration {
        self.start.elapsed()
    }

    fn log(&mut self, kind: EventKind, subject: String, score: Option<f64>) {
        self.events.push(Event {
            elapsed_ms: self.elapsed().as_millis() as u64,
            eval_index: self.used,
            kind,
            subject,
            score,
        });
    }

    fn search_end(&self) -> Option<Instant> {
        match self.budget.kind {
            BudgetKind::WallClock(t) => Some(self.start + Duration::from_secs_f64(t)),
            BudgetKind::Evaluations(_) => None,
        }
    }

    /// Evaluations still allowed before `phase_end` (count budgets only).
    fn remaining_evaluations(&self, reserve: usize) -> Option<usize> {
        match self.budget.kind {
            BudgetKind::Evaluations(n) => Some(n.saturating_sub(self.used + reserve)),
            BudgetKind::WallClock(_) => None,
        }
    }

    fn out_of_time(&self, phase_end: Option<Instant>) -> bool {
        phase_end.is_some_and(|end| Instant::now() >= end)
    }

    /// Loss of `pipeline` from the cache, if it was evaluated before.
    fn cached(&self, pipeline: &ComponentInstance) -> Option<&Outcome> {
        self.cache.get(&pipeline.to_string())
    }

    /// Evaluates uncached pipelines in order, as far as the budget allows,
    /// and returns each input's outcome (`None` if it was not reached).
    /// Work may run on several threads; results are applied in input order.
    fn evaluate_batch(
        &mut self,
        pipelines: &[ComponentInstance],
        reserve: usize,
        phase_end: Option<Instant>,
    ) -> Vec<Option<Outcome>> {
        let mut fresh: Vec<ComponentInstance> = Vec::new();
        for p in pipelines {
            if self.cached(p).is_none() && !fresh.contains(p) {
                fresh.push(p.clone());
            }
        }
        if let Some(left) = self.remaining_evaluations(reserve) {
            fresh.truncate(left);
        }
        if self.out_of_time(phase_end) {
            fresh.clear();
        }
        let (seed, reps) = (self.seed, self.config.repetitions);
        let run = |p: &ComponentInstance| self.timed(p, seed, reps, phase_end);
        let results: Vec<_> = match &self.pool {
            Some(pool) if fresh.len() > 1 => {
                use rayon::prelude::*;
                pool.install(|| fresh.par_iter().map(run).collect())
            }
            _ => fresh.iter().map(run).collect(),
        };
        for (p, (result, cost)) in fresh.iter().zip(results) {
            self.apply(p, result, cost);
        }
        pipelines.iter().map(|p| self.cached(p).cloned()).collect()
    }

    /// One evaluation bounded by the per-candidate limit and `phase_end`;
    /// returns the outcome and its cost in seconds.
    fn timed(
        &self,
        pipeline: &ComponentInstance,
        seed: u64,
        repetitions: usize,
        phase_end: Option<Instant>,
    ) -> (Result<Vec<f64>, EvaluationFailed>, f64) {
        let t0 = Instant::now();
        let deadline = candidate_deadline(t0, self.budget.candidate_limit, phase_end);
        let result = self.evaluator.evaluate(pipeline, seed, repetitions, deadline);
        (result, t0.elapsed().as_secs_f64())
    }

    fn apply(&mut self, pipeline: &ComponentInstance, result: Result<Vec<f64>, EvaluationFailed>, cost: f64) {
        self.used += 1;
        let text = pipeline.to_string();
        let (scores, loss, failed) = match result {
            Ok(scores) => {
                let loss = scores.iter().sum::<f64>() / scores.len() as f64;
                (scores, loss, false)
            }
            Err(_) => (Vec::new(), 1.0, true),
        };
        if failed {
            self.log(EventKind::Fail, text.clone(), Some(1.0));
            self.cache.insert(text.clone(), Outcome::Failed);
        } else {
            self.log(EventKind::Evaluate, text.clone(), Some(loss));
            self.cache.insert(text.clone(), Outcome::Scored(loss));
            if loss < self.best {
                self.best = loss;
                self.log(EventKind::NewBest, text, Some(loss));
            }
        }
        self.records.push(CandidateRecord {
            pipeline: pipeline.clone(),
            scores,
            loss,
            failed,
            cost_seconds: cost,
            eval_index: self.used,
            discovered_ms: self.elapsed().as_millis() as u64,
        });
    }
}

#[cfg(test)]
mod tests;
