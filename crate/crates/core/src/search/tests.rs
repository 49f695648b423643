use std::collections::{HashMap, HashSet};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use ndarray::Array2;

use super::*;
use crate::dataset::random_split;
use crate::learners::Deadline;
use crate::rng;
use crate::space::{default_space, parse_space, ComponentSpace, SearchNode};

/// Fixed losses per pipeline; listed pipelines fail.
struct Table {
    losses: HashMap<String, f64>,
    failing: HashSet<String>,
    calls: AtomicUsize,
    delay: Duration,
}

impl Table {
    fn new(losses: HashMap<String, f64>) -> Self {
        Table {
            losses,
            failing: HashSet::new(),
            calls: AtomicUsize::new(0),
            delay: Duration::ZERO,
        }
    }

    /// Pseudo-random loss for every pipeline of `space`.
    fn seeded(space: &ComponentSpace, seed: u64) -> Self {
        let losses = space
            .enumerate_pipelines()
            .unwrap()
            .into_iter()
            .enumerate()
            .map(|(i, p)| {
                let loss = rng::below(&mut rng::stream(seed, "leaf", i as u64), 1_000_000) as f64 / 1e6;
                (p.to_string(), loss)
            })
            .collect();
        Table::new(losses)
    }
}

impl CandidateEvaluator for Table {
    fn evaluate(
        &self,
        pipeline: &ComponentInstance,
        _seed: u64,
        repetitions: usize,
        deadline: Deadline,
    ) -> Result<Vec<f64>, EvaluationFailed> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let key = pipeline.to_string();
        let fail = EvaluationFailed {
            pipeline: key.clone(),
            reason: "scripted failure".into(),
        };
        if self.failing.contains(&key) {
            return Err(fail);
        }
        let mut out = Vec::new();
        for _ in 0..repetitions {
            std::thread::sleep(self.delay);
            if deadline.expired() {
                break;
            }
            out.push(self.losses[&key]);
        }
        if out.is_empty() {
            return Err(fail);
        }
        Ok(out)
    }
}

fn twenty_leaf_space() -> ComponentSpace {
    parse_space("ml-meta:BaggingML\nml-base:BR\nml-base:CC\nml-base:LC\nml-base:MajorityLabelSet\nsl-base:ZeroR\nsl-base:KNN\nsl-base:NaiveBayes")
        .unwrap()
}

fn exact() -> SearchConfig {
    SearchConfig {
        node_evaluation: NodeEvaluation::Exact,
        ..SearchConfig::default()
    }
}

/// 40 rows, 3 features, 3 labels with a learnable signal.
fn small_data() -> SearchData {
    let mut s = rng::stream(3, "search-data", 0);
    let n = 40;
    let x = Array2::from_shape_fn((n, 3), |_| rng::below(&mut s, 100) as f64 / 10.0);
    let y = Array2::from_shape_fn((n, 3), |(i, j)| u8::from(x[[i, j]] > 4.0));
    SearchData::new(x, y, (0..n).collect()).unwrap()
}

fn instance(s: &str) -> ComponentInstance {
    s.parse().unwrap()
}

#[test]
fn majority_label_set_validation_matches_hand_evaluation() {
    // 12 of 20 rows carry (1,0,1); the other 8 are four vectors seen twice,
    // so the training-set mode is (1,0,1) on every 14-row split.
    let mut rows = vec![[1u8, 0, 1]; 12];
    for v in [[0u8, 1, 0], [1, 1, 0], [0, 0, 0], [1, 1, 1]] {
        rows.push(v);
        rows.push(v);
    }
    let y = Array2::from_shape_fn((20, 3), |(i, j)| rows[i][j]);
    let x = Array2::from_shape_fn((20, 1), |(i, _)| i as f64);
    let data = SearchData::new(x, y, (0..20).collect()).unwrap();

    let f_against_mode = |t: &[u8; 3]| -> f64 {
        let pred = [1u8, 0, 1];
        let inter = t.iter().zip(&pred).filter(|(a, b)| **a == 1 && **b == 1).count() as f64;
        let size = (t.iter().filter(|&&b| b == 1).count() + 2) as f64;
        2.0 * inter / size
    };
    let seed = 17;
    let losses = evaluate_candidate(&instance("MajorityLabelSet"), &data, seed, 3, None).unwrap();
    assert_eq!(losses.len(), 3);
    for (r, loss) in losses.iter().enumerate() {
        let split = random_split(20, 0.7, seed + r as u64 + 1).unwrap();
        assert_eq!(split.test_indices.len(), 6);
        let mean_f = split.test_indices.iter().map(|&i| f_against_mode(&rows[i])).sum::<f64>() / 6.0;
        assert!((loss - (1.0 - mean_f)).abs() < 1e-12, "rep {r}: {loss} vs {}", 1.0 - mean_f);
    }
    assert_eq!(losses, evaluate_candidate(&instance("MajorityLabelSet"), &data, seed, 3, None).unwrap());
}

#[test]
fn evaluation_needs_ten_rows_and_reports_failures() {
    let few = SearchData::new(Array2::zeros((9, 1)), Array2::zeros((9, 1)), (0..9).collect());
    assert_eq!(few, Err(SearchError::TooFewInstances(9)));
    let data = small_data();
    let expired = evaluate_candidate(&instance("BR(ZeroR)"), &data, 1, 3, Some(Duration::ZERO));
    assert!(expired.is_err());
}

#[test]
fn node_evaluation_is_min_over_completions() {
    let space = twenty_leaf_space();
    let table = Table::seeded(&space, 4);
    let config = SearchConfig::default();
    let root = SearchNode::root();
    let (score, records) = evaluate_node(&root, &space, &table, &config, 9).unwrap();
    let losses: Vec<f64> = records.iter().map(|r| r.loss).collect();
    assert!(!losses.is_empty() && losses.len() <= 3);
    assert_eq!(score, losses.iter().cloned().fold(f64::INFINITY, f64::min));

    let goal = &root.successors(&space)[3];
    assert!(goal.is_goal());
    let (score, records) = evaluate_node(goal, &space, &table, &config, 9).unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(score, table.losses["MajorityLabelSet"]);

    let mut failing = Table::seeded(&space, 4);
    failing.failing = failing.losses.keys().cloned().collect();
    let (score, _) = evaluate_node(&root, &space, &failing, &config, 9).unwrap();
    assert_eq!(score, f64::INFINITY);
}

#[test]
fn exact_best_first_finds_the_global_minimum() {
    let space = twenty_leaf_space();
    assert_eq!(space.count_pipelines().unwrap(), 20);
    for seed in 0..10 {
        let table = Table::seeded(&space, seed);
        let (best, best_loss) = table
            .losses
            .iter()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, v)| (k.clone(), *v))
            .unwrap();
        let out = best_first_search(&space, &table, &Budget::evaluations(1000), &exact(), seed).unwrap();
        assert_eq!(out.first_goal.as_ref().unwrap().to_string(), best);
        let result = ml_plan(&space, &table, &Budget::evaluations(1000), &exact(), seed).unwrap();
        assert_eq!(result.first_goal.unwrap().to_string(), best);
        assert!((result.internal_score - best_loss).abs() < 1e-12);
    }
}

#[test]
fn one_evaluation_budget_gives_one_record() {
    let space = default_space();
    let data = small_data();
    let evaluator = ValidationEvaluator::new(data);
    let out = best_first_search(&space, &evaluator, &Budget::evaluations(1), &SearchConfig::default(), 0).unwrap();
    assert_eq!(out.records.len(), 1);
    let result = ml_plan(&space, &evaluator, &Budget::evaluations(1), &SearchConfig::default(), 0).unwrap();
    assert_eq!(result.records.len(), 1);
    assert_eq!(result.evaluations, 1);
    assert_eq!(result.pipeline, result.records[0].pipeline);
}

#[test]
fn count_budgets_are_deterministic_across_workers() {
    let space = default_space();
    let evaluator = ValidationEvaluator::new(small_data());
    let budget = Budget::evaluations(25);
    let one = ml_plan(&space, &evaluator, &budget, &SearchConfig::default(), 5).unwrap();
    let again = ml_plan(&space, &evaluator, &budget, &SearchConfig::default(), 5).unwrap();
    let parallel = SearchConfig {
        workers: 3,
        ..SearchConfig::default()
    };
    let many = ml_plan(&space, &evaluator, &budget, &parallel, 5).unwrap();
    for other in [&again, &many] {
        assert_eq!(one.pipeline, other.pipeline);
        assert_eq!(one.internal_score.to_bits(), other.internal_score.to_bits());
        assert_eq!(render_events(&one.events, false), render_events(&other.events, false));
        let scores = |r: &SearchResult| r.records.iter().map(|c| (c.pipeline.to_string(), c.scores.clone())).collect::<Vec<_>>();
        assert_eq!(scores(&one), scores(other));
    }
    assert!(one.evaluations <= 25);
}

#[test]
fn selection_examples() {
    let records = |losses: &[(&str, &[f64])]| -> Vec<CandidateRecord> {
        losses
            .iter()
            .enumerate()
            .map(|(i, (p, s))| CandidateRecord {
                pipeline: instance(p),
                scores: s.to_vec(),
                loss: s.iter().sum::<f64>() / s.len() as f64,
                failed: false,
                cost_seconds: 0.0,
                eval_index: i + 1,
                discovered_ms: 0,
            })
            .collect()
    };
    let table = Table::new(HashMap::from([("BR(KNN)".to_string(), 0.5), ("LC(ZeroR)".to_string(), 0.2)]));
    let config = SearchConfig::default();

    let single = records(&[("BR(KNN)", &[0.3, 0.3])]);
    let chosen = select_final(&single, &table, &Budget::evaluations(10), &config, 0).unwrap();
    assert_eq!(chosen.pipeline, instance("BR(KNN)"));
    assert_eq!(chosen.score, 0.3);
    assert_eq!(table.calls.load(Ordering::SeqCst), 0);

    let two = records(&[("BR(KNN)", &[0.1, 0.1, 0.1]), ("LC(ZeroR)", &[0.9, 0.9, 0.9])]);
    let table = Table::new(HashMap::from([("BR(KNN)".to_string(), 0.1), ("LC(ZeroR)".to_string(), 0.9)]));
    let chosen = select_final(&two, &table, &Budget::evaluations(10), &config, 0).unwrap();
    assert_eq!(chosen.pipeline, instance("BR(KNN)"));

    let space = default_space();
    let all = space.enumerate_pipelines().unwrap();
    let ten: Vec<CandidateRecord> = all[..10]
        .iter()
        .enumerate()
        .map(|(i, p)| CandidateRecord {
            pipeline: p.clone(),
            scores: vec![0.5 + 0.01 * i as f64, 0.52 + 0.01 * i as f64, 0.48],
            loss: 0.5,
            failed: false,
            cost_seconds: 0.0,
            eval_index: i + 1,
            discovered_ms: 0,
        })
        .collect();
    let table = Table::seeded(&space, 1);
    let small_k = SearchConfig { k: 2, ..config.clone() };
    let chosen = select_final(&ten, &table, &Budget::evaluations(100), &small_k, 3).unwrap();
    assert!(chosen.pool.len() <= 4);
    assert!(chosen.pool.iter().all(|e| e.phase2_scores.is_some()));

    // No selection budget: the best phase-one candidate stands.
    let chosen = select_final(&two, &table, &Budget::evaluations(1), &config, 0);
    assert!(chosen.is_ok());
}

#[test]
fn random_search_respects_budget_and_seed() {
    let space = default_space();
    let table = Table::seeded(&space, 2);
    let config = SearchConfig::default();
    let a = random_search(&space, &table, &Budget::evaluations(30), &config, 8).unwrap();
    let b = random_search(&space, &table, &Budget::evaluations(30), &config, 8).unwrap();
    assert!(a.evaluations <= 30);
    let seq = |r: &SearchResult| r.records.iter().map(|c| c.pipeline.to_string()).collect::<Vec<_>>();
    assert_eq!(seq(&a), seq(&b));
    assert_ne!(seq(&a), seq(&random_search(&space, &table, &Budget::evaluations(30), &config, 9).unwrap()));
    let best = a.records.iter().map(|r| r.loss).fold(f64::INFINITY, f64::min);
    assert_eq!(a.internal_score, best);

    // A budget larger than the space stops once every pipeline is seen.
    let small = twenty_leaf_space();
    let table = Table::seeded(&small, 2);
    let all = random_search(&small, &table, &Budget::evaluations(1000), &config, 1).unwrap();
    assert_eq!(all.evaluations, 20);
}

#[test]
fn failures_are_contained_and_logged() {
    let space = default_space();
    let mut table = Table::seeded(&space, 6);
    table.failing = table.losses.keys().filter(|k| k.contains("KNN") || k.starts_with("BR")).cloned().collect();
    let result = ml_plan(&space, &table, &Budget::evaluations(60), &SearchConfig::default(), 1).unwrap();
    let fails: Vec<&Event> = result.events.iter().filter(|e| e.kind == EventKind::Fail).collect();
    assert!(!fails.is_empty());
    assert!(fails.iter().all(|e| e.score == Some(1.0)));
    assert!(result.records.iter().filter(|r| r.failed).all(|r| r.loss == 1.0 && r.scores.is_empty()));
    assert!(!table.failing.contains(&result.pipeline.to_string()));
}

#[test]
fn running_best_never_increases() {
    let space = default_space();
    let table = Table::seeded(&space, 11);
    for result in [
        ml_plan(&space, &table, &Budget::evaluations(80), &SearchConfig::default(), 2).unwrap(),
        random_search(&space, &table, &Budget::evaluations(80), &SearchConfig::default(), 2).unwrap(),
    ] {
        let bests: Vec<f64> = result
            .events
            .iter()
            .filter(|e| e.kind == EventKind::NewBest)
            .map(|e| e.score.unwrap())
            .collect();
        assert!(!bests.is_empty());
        assert!(bests.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(result.events.last().unwrap().kind, EventKind::Final);
    }
}

#[test]
fn selection_phase_uses_at_most_its_share() {
    let space = default_space();
    let table = Table::seeded(&space, 12);
    let result = ml_plan(&space, &table, &Budget::evaluations(100), &SearchConfig::default(), 4).unwrap();
    assert!(result.evaluations <= 100);
    let phase2 = result.pool.iter().filter(|e| e.phase2_scores.is_some() || e.phase2_failed).count();
    assert!(phase2 <= 30 && result.pool.len() <= 20);
    assert!(phase2 > 0);
    assert_eq!(result.records.len() + phase2, result.evaluations);
    let start = result.events.iter().position(|e| e.kind == EventKind::Phase2Start).unwrap();
    assert!(result.events[..start].iter().all(|e| e.eval_index <= result.records.len()));
}

#[test]
fn wall_clock_budget_is_respected() {
    let space = default_space();
    let mut table = Table::seeded(&space, 13);
    table.delay = Duration::from_millis(5);
    for optimizer in [ml_plan, random_search] {
        let t0 = Instant::now();
        let result = optimizer(&space, &table, &Budget::seconds(0.6, Some(0.1)), &SearchConfig::default(), 1).unwrap();
        let elapsed = t0.elapsed().as_secs_f64();
        assert!(elapsed <= 0.66, "{elapsed}");
        assert!(result.evaluations > 0);
    }
}

#[test]
fn budget_validation() {
    assert!(Budget::evaluations(0).validate().is_err());
    assert!(Budget::seconds(0.0, None).validate().is_err());
    assert!(Budget::seconds(10.0, Some(20.0)).validate().is_err());
    assert!(Budget::seconds(10.0, Some(2.0)).validate().is_ok());
}
