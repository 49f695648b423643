use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use super::select::{select_in, SelectionBudget};
use super::{
    best_of, Budget, BudgetKind, CandidateEvaluator, CandidateRecord, Event, EventKind, NodeEvaluation, Outcome,
    SearchConfig, SearchError, SearchResult, Session,
};
use crate::rng;
use crate::space::{ComponentInstance, ComponentSpace, SearchNode};

/// Phase-one result of best-first search.
#[derive(Debug, Clone, PartialEq)]
pub struct BestFirstOutcome {
    pub records: Vec<CandidateRecord>,
    pub events: Vec<Event>,
    pub first_goal: Option<ComponentInstance>,
    pub evaluations: usize,
    /// The open list ran empty: every node was expanded or pruned.
    pub exhausted: bool,
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    score: f64,
    creation: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    /// Reversed so that `BinaryHeap` pops the lowest score, oldest first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .score
            .total_cmp(&self.score)
            .then(other.creation.cmp(&self.creation))
    }
}

/// Pipelines whose scores determine a node's evaluation.
fn completions(
    node: &SearchNode,
    creation: usize,
    space: &ComponentSpace,
    mode: NodeEvaluation,
    seed: u64,
) -> Vec<ComponentInstance> {
    if node.is_goal() {
        return vec![node.pipeline().expect("goal node")];
    }
    match mode {
        NodeEvaluation::RandomCompletions(count) => {
            let mut stream = rng::stream(seed, "completion", creation as u64);
            (0..count)
                .map(|_| node.random_completion(space, &mut stream).expect("bounded space"))
                .collect()
        }
        NodeEvaluation::Exact => {
            let mut out = Vec::new();
            let mut stack = vec![node.clone()];
            while let Some(n) = stack.pop() {
                if n.is_goal() {
                    out.push(n.pipeline().expect("goal node"));
                } else {
                    stack.extend(n.successors(space).into_iter().rev());
                }
            }
            out
        }
    }
}

/// Minimum over scored outcomes; `+∞` when every completion failed and
/// `None` when the budget ran out before all completions were evaluated.
fn node_score(outcomes: &[Option<Outcome>]) -> Option<f64> {
    if outcomes.iter().any(Option::is_none) && !outcomes.iter().any(|o| matches!(o, Some(Outcome::Scored(_)))) {
        return None;
    }
    Some(
        outcomes
            .iter()
            .filter_map(|o| match o {
                Some(Outcome::Scored(s)) => Some(*s),
                _ => None,
            })
            .fold(f64::INFINITY, f64::min),
    )
}

fn describe(node: &SearchNode) -> String {
    let mut parts: Vec<String> = node.decisions.iter().map(|a| a.name().to_string()).collect();
    parts.extend(node.remaining.iter().map(|t| format!("[{t}]")));
    parts.join(" ")
}

/// Evaluation of one node in isolation: the minimum mean loss over its
/// completions (`+∞` if all of them fail). Goal nodes are scored directly.
pub fn evaluate_node(
    node: &SearchNode,
    space: &ComponentSpace,
    evaluator: &dyn CandidateEvaluator,
    config: &SearchConfig,
    seed: u64,
) -> Result<(f64, Vec<CandidateRecord>), SearchError> {
    let budget = Budget::evaluations(usize::MAX);
    let mut session = Session::new(evaluator, config, &budget, seed)?;
    let pipelines = completions(node, 0, space, config.node_evaluation, seed);
    let outcomes = session.evaluate_batch(&pipelines, 0, None);
    let score = node_score(&outcomes).unwrap_or(f64::INFINITY);
    Ok((score, session.records))
}

/// Runs phase one on `session` until the open list empties or the budget,
/// minus what the selection phase will need when `reserve` is set, is spent.
fn phase_one(session: &mut Session, space: &ComponentSpace, reserve: bool) -> (Option<ComponentInstance>, bool) {
    let mode = session.config.node_evaluation;
    let seed = session.seed;
    let mut nodes = vec![SearchNode::root()];
    let mut open = BinaryHeap::from([Entry {
        score: 0.0,
        creation: 0,
    }]);
    let mut first_goal = None;
    loop {
        let (reserve_count, phase_end) = if reserve { reserve_for(session) } else { (0, session.search_end()) };
        if session.remaining_evaluations(reserve_count) == Some(0) || session.out_of_time(phase_end) {
            return (first_goal, false);
        }
        let Some(entry) = open.pop() else {
            return (first_goal, true);
        };
        let node = nodes[entry.creation].clone();
        if node.is_goal() {
            first_goal.get_or_insert_with(|| node.pipeline().expect("goal node"));
            continue;
        }
        session.log(EventKind::Expand, describe(&node), Some(entry.score));
        let children = node.successors(space);
        let mut batch = Vec::new();
        let mut spans = Vec::new();
        for child in &children {
            let creation = nodes.len() + spans.len();
            let pipelines = completions(child, creation, space, mode, seed);
            spans.push(batch.len()..batch.len() + pipelines.len());
            batch.extend(pipelines);
        }
        let outcomes = session.evaluate_batch(&batch, reserve_count, phase_end);
        for (child, span) in children.into_iter().zip(spans) {
            let creation = nodes.len();
            nodes.push(child);
            match node_score(&outcomes[span]) {
                Some(score) if score.is_finite() => open.push(Entry { score, creation }),
                _ => {}
            }
        }
    }
}

/// Evaluations and phase-one deadline to hold back for selection: the
/// prospective pool's phase-one cost, capped at the selection share.
fn reserve_for(session: &Session) -> (usize, Option<Instant>) {
    let mut ok: Vec<&CandidateRecord> = session.records.iter().filter(|r| !r.failed).collect();
    ok.sort_by(|a, b| a.loss.total_cmp(&b.loss).then(a.eval_index.cmp(&b.eval_index)));
    let pool = ok.len().min(2 * session.config.k);
    match session.budget.kind {
        BudgetKind::Evaluations(n) => {
            let cap = (session.config.selection_share * n as f64).floor() as usize;
            (pool.min(cap), None)
        }
        BudgetKind::WallClock(t) => {
            let cost: f64 = ok[..pool].iter().map(|r| r.cost_seconds).sum();
            let held = cost.min(session.config.selection_share * t);
            let end = session.search_end().expect("wall-clock budget");
            (0, Some(end - Duration::from_secs_f64(held)))
        }
    }
}

/// Phase one only: best-first search over the whole budget.
pub fn best_first_search(
    space: &ComponentSpace,
    evaluator: &dyn CandidateEvaluator,
    budget: &Budget,
    config: &SearchConfig,
    seed: u64,
) -> Result<BestFirstOutcome, SearchError> {
    space.count_pipelines()?;
    let mut session = Session::new(evaluator, config, budget, seed)?;
    let (first_goal, exhausted) = phase_one(&mut session, space, false);
    if best_of(&session.records).is_none() {
        return Err(SearchError::NoCandidateFound);
    }
    Ok(BestFirstOutcome {
        evaluations: session.used,
        records: session.records,
        events: session.events,
        first_goal,
        exhausted,
    })
}

/// The full optimizer: best-first phase one, then selection among a pool
/// of the best and random near-best candidates.
pub fn ml_plan(
    space: &ComponentSpace,
    evaluator: &dyn CandidateEvaluator,
    budget: &Budget,
    config: &SearchConfig,
    seed: u64,
) -> Result<SearchResult, SearchError> {
    space.count_pipelines()?;
    let mut session = Session::new(evaluator, config, budget, seed)?;
    let (first_goal, _) = phase_one(&mut session, space, true);
    let allowance = match budget.kind {
        BudgetKind::Evaluations(n) => SelectionBudget::Evaluations(
            ((config.selection_share * n as f64).floor() as usize).min(n.saturating_sub(session.used)),
        ),
        BudgetKind::WallClock(t) => SelectionBudget::Until {
            share_seconds: config.selection_share * t,
            end: session.search_end().expect("wall-clock budget"),
        },
    };
    let selection = select_in(&mut session, allowance)?;
    session.log(EventKind::Final, selection.pipeline.to_string(), Some(selection.score));
    Ok(SearchResult {
        pipeline: selection.pipeline,
        internal_score: selection.score,
        pool: selection.pool,
        evaluations: session.used,
        elapsed_seconds: session.elapsed().as_secs_f64(),
        records: session.records,
        events: session.events,
        first_goal,
    })
}
