//! Experiment runs: outer split, search on the training portion, refit and
//! scoring on the held-out portion, plus report files and summaries.

pub mod fixtures;
mod summary;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{parse_arff, random_split, DatasetError, FeatureEncoding};
use crate::learners::multi::fit_multi_label_until;
use crate::learners::Deadline;
use crate::metrics::{self, MetricSummary};
use crate::search::{
    ml_plan, random_search, render_events, Budget, BudgetKind, SearchConfig, SearchData, SearchError,
    ValidationEvaluator,
};
use crate::space::{default_space, parse_space, Algorithm, ComponentInstance, ComponentSpace, SpaceError};

pub use summary::{summarize, Cell, Mark, Summary, SummaryRow};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Optimizer {
    Mlplan,
    Random,
}

impl Optimizer {
    pub fn name(self) -> &'static str {
        match self {
            Optimizer::Mlplan => "mlplan",
            Optimizer::Random => "random",
        }
    }
}

impl std::str::FromStr for Optimizer {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mlplan" => Ok(Optimizer::Mlplan),
            "random" => Ok(Optimizer::Random),
            _ => Err(format!("unknown optimizer `{s}` (expected mlplan or random)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub data: PathBuf,
    pub split_fraction: f64,
    pub seed: u64,
    pub optimizer: Optimizer,
    pub budget: Budget,
    pub search: SearchConfig,
    pub out_dir: PathBuf,
    /// Component space file; the built-in default space when absent.
    pub space: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(data: impl Into<PathBuf>, optimizer: Optimizer, budget: Budget, out_dir: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            data: data.into(),
            split_fraction: 0.7,
            seed: 0,
            optimizer,
            budget,
            search: SearchConfig::default(),
            out_dir: out_dir.into(),
            space: None,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return Err(HarnessError::Config("split fraction must lie in (0, 1)".into()));
        }
        self.budget.validate()?;
        self.search.validate()?;
        Ok(())
    }

    /// File stem shared by the report and the event log.
    pub fn run_name(&self) -> String {
        let stem = self.data.file_stem().map_or("data".into(), |s| s.to_string_lossy().into_owned());
        format!("{stem}.{}.{}.seed{}", self.optimizer.name(), self.budget.label(), self.seed)
    }
}

/// Default per-candidate limit for a wall-clock budget: a sixth of the total,
/// at most five minutes.
pub fn default_candidate_limit(total_seconds: f64) -> f64 {
    (total_seconds / 6.0).min(300.0)
}

/// Timing fields, kept apart so reports of count-budget runs compare equal
/// once this block is dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_time_seconds: f64,
    pub search_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub dataset: String,
    pub space_fingerprint: String,
    pub space_size: u64,
    pub budget: String,
    pub pipeline: ComponentInstance,
    /// Internal validation loss (1 − instance F) behind the choice.
    pub internal_score: f64,
    /// Measured on the outer test rows only.
    pub test: MetricSummary,
    /// Distinct pipelines scored during search.
    pub candidates_evaluated: usize,
    /// Budgeted evaluations, selection phase included.
    pub evaluations: usize,
    /// The chosen pipeline could not be refit in time and the constant
    /// majority-label-set predictor was scored instead.
    pub refit_fallback: bool,
    pub event_log: PathBuf,
    pub search_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
    pub timing: Timing,
}

impl RunReport {
    pub fn read(path: &Path) -> Result<RunReport, HarnessError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&text).map_err(|source| HarnessError::Json {
            path: path.to_path_buf(),
            source,
        })
    }
}

pub fn load_space(path: Option<&Path>) -> Result<ComponentSpace, HarnessError> {
    match path {
        None => Ok(default_space()),
        Some(p) => Ok(parse_space(&fs::read_to_string(p).map_err(io_err(p))?)?),
    }
}

/// Outer split, search on the training rows, refit on all of them and
/// score on the test rows. Writes `<run>.json` and `<run>.events.tsv` into
/// the output directory.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunReport, HarnessError> {
    let start = Instant::now();
    config.validate()?;
    let space = load_space(config.space.as_deref())?;
    let space_size = space.count_pipelines()?;
    let text = fs::read_to_string(&config.data).map_err(io_err(&config.data))?;
    let data = parse_arff(&text)?;
    let split = random_split(data.n_instances(), config.split_fraction, config.seed)?;
    let train = data.select_rows(&split.train_indices);
    let test = data.select_rows(&split.test_indices);
    let encoding = FeatureEncoding::fit(&train);
    let x_train = encoding.transform(train.features.view());
    let x_test = encoding.transform(test.features.view());
    let search_data = SearchData::new(x_train.clone(), train.labels.clone(), split.train_indices.clone())?;
    let evaluator = ValidationEvaluator::new(search_data);

    // Under a time budget part of it is held back for the final refit.
    let (budget, refit_deadline) = match config.budget.kind {
        BudgetKind::WallClock(total) => {
            let limit = config.budget.candidate_limit.unwrap_or_else(|| default_candidate_limit(total));
            let reserve = (0.1 * total).min(limit);
            let left = total - reserve - start.elapsed().as_secs_f64();
            if left <= 0.0 {
                return Err(SearchError::InvalidBudget("time budget spent before the search began".into()).into());
            }
            let deadline = start + Duration::from_secs_f64(1.05 * total);
            (Budget::seconds(left, Some(limit.min(left))), Deadline::at(deadline))
        }
        BudgetKind::Evaluations(_) => (config.budget, Deadline::NONE),
    };
    let result = match config.optimizer {
        Optimizer::Mlplan => ml_plan(&space, &evaluator, &budget, &config.search, config.seed)?,
        Optimizer::Random => random_search(&space, &evaluator, &budget, &config.search, config.seed)?,
    };

    let refit_seed = crate::rng::derive_seed(config.seed, "refit", 0);
    let fit = |pipeline: &ComponentInstance, deadline: Deadline| {
        let spec = pipeline.to_ml_spec().expect("search yields valid pipelines");
        fit_multi_label_until(&spec, x_train.view(), train.labels.view(), refit_seed, deadline)
    };
    let (model, refit_fallback) = match fit(&result.pipeline, refit_deadline) {
        Ok(m) => (m, false),
        Err(_) => (
            fit(&ComponentInstance::leaf(Algorithm::MajorityLabelSet), Deadline::NONE)
                .expect("constant predictor fits"),
            true,
        ),
    };
    let out = model.predict(x_test.view()).expect("encoded widths agree");
    let scores = metrics::summarize(test.labels.view(), out.labels.view(), out.scores.view()).expect("shapes agree");

    fs::create_dir_all(&config.out_dir).map_err(io_err(&config.out_dir))?;
    let name = config.run_name();
    let event_log = config.out_dir.join(format!("{name}.events.tsv"));
    let rows: Vec<String> = split.train_indices.iter().map(usize::to_string).collect();
    let log = format!("# search-rows: {}\n{}", rows.join(","), render_events(&result.events, true));
    fs::write(&event_log, log).map_err(io_err(&event_log))?;

    let report = RunReport {
        config: config.clone(),
        dataset: config.data.file_stem().map_or(data.relation_name.clone(), |s| s.to_string_lossy().into_owned()),
        space_fingerprint: space.fingerprint(),
        space_size,
        budget: config.budget.label(),
        pipeline: result.pipeline.clone(),
        internal_score: result.internal_score,
        test: scores,
        candidates_evaluated: result.records.len(),
        evaluations: result.evaluations,
        refit_fallback,
        event_log,
        search_rows: split.train_indices.clone(),
        test_rows: split.test_indices.clone(),
        timing: Timing {
            wall_time_seconds: start.elapsed().as_secs_f64(),
            search_seconds: result.elapsed_seconds,
        },
    };
    let path = config.out_dir.join(format!("{name}.json"));
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    fs::write(&path, json + "\n").map_err(io_err(&path))?;
    Ok(report)
}

/// Every report (`*.json`) in `dir`, sorted by file name.
pub fn read_reports(dir: &Path) -> Result<Vec<RunReport>, HarnessError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    paths.iter().map(|p| RunReport::read(p)).collect()
}
