use super::{best_of, Budget, CandidateEvaluator, EventKind, SearchConfig, SearchError, SearchResult, Session};
use crate::rng;
use crate::space::{ComponentSpace, SearchNode};

/// Baseline: evaluates random completions of the root until the budget is
/// spent (or every pipeline has been seen) and returns the best by mean loss.
pub fn random_search(
    space: &ComponentSpace,
    evaluator: &dyn CandidateEvaluator,
    budget: &Budget,
    config: &SearchConfig,
    seed: u64,
) -> Result<SearchResult, SearchError> {
    let total = space.count_pipelines()? as usize;
    let mut session = Session::new(evaluator, config, budget, seed)?;
    let end = session.search_end();
    let mut stream = rng::stream(seed, "random-search", 0);
    let root = SearchNode::root();
    while session.cache.len() < total && session.remaining_evaluations(0) != Some(0) && !session.out_of_time(end) {
        let pipeline = root.random_completion(space, &mut stream)?;
        if session.cached(&pipeline).is_none() {
            session.evaluate_batch(&[pipeline], 0, end);
        }
    }
    let best = best_of(&session.records).ok_or(SearchError::NoCandidateFound)?.clone();
    session.log(EventKind::Final, best.pipeline.to_string(), Some(best.loss));
    Ok(SearchResult {
        pipeline: best.pipeline,
        internal_score: best.loss,
        pool: Vec::new(),
        evaluations: session.used,
        elapsed_seconds: session.elapsed().as_secs_f64(),
        records: session.records,
        events: session.events,
        first_goal: None,
    })
}
