use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};

use htnml::dataset::write_arff;
use htnml::harness::fixtures::{fixture, FixtureKind};
use htnml::harness::{load_space, read_reports, run_experiment, summarize, ExperimentConfig, Optimizer};
use htnml::search::{Budget, NodeEvaluation, SearchConfig};

#[derive(Parser)]
#[command(name = "htnml", version, about = "Multi-label pipeline search by hierarchical planning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search a pipeline on the training split and score it on the test split.
    #[command(group(ArgGroup::new("budget").required(true).args(["budget_seconds", "budget_evals"])))]
    Run {
        /// Multi-label ARFF file.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "mlplan")]
        optimizer: Optimizer,
        /// Total wall-clock seconds for search and refit.
        #[arg(long)]
        budget_seconds: Option<f64>,
        /// Number of candidate evaluations.
        #[arg(long)]
        budget_evals: Option<usize>,
        /// Seconds allowed per candidate evaluation.
        #[arg(long)]
        eval_limit: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.7)]
        split_fraction: f64,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Component space file (defaults to the built-in space).
        #[arg(long)]
        space: Option<PathBuf>,
        /// Random completions per node.
        #[arg(long, default_value_t = 3)]
        completions: usize,
        /// Validation splits per candidate.
        #[arg(long, default_value_t = 3)]
        repetitions: usize,
        /// Selection pool parameter.
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Aggregate run reports into a comparison table.
    Summarize {
        /// Directory holding run reports.
        #[arg(long = "in")]
        input: PathBuf,
        /// CSV output path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the number of pipelines and the method listing of a space.
    Space {
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Write a fixture dataset as ARFF.
    GenFixture {
        #[arg(long)]
        kind: FixtureKind,
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn execute(command: Command) -> Result<(), Box<dyn std::error::Error>> {
    match command {
        Command::Run {
            data,
            optimizer,
            budget_seconds,
            budget_evals,
            eval_limit,
            seed,
            split_fraction,
            out,
            space,
            completions,
            repetitions,
            k,
            workers,
        } => {
            let budget = match (budget_seconds, budget_evals) {
                (Some(t), _) => Budget::seconds(t, eval_limit),
                (None, Some(n)) => Budget {
                    candidate_limit: eval_limit,
                    ..Budget::evaluations(n)
                },
                (None, None) => unreachable!("clap requires a budget"),
            };
            let mut config = ExperimentConfig::new(data, optimizer, budget, out);
            config.seed = seed;
            config.split_fraction = split_fraction;
            config.space = space;
            config.search = SearchConfig {
                node_evaluation: NodeEvaluation::RandomCompletions(completions),
                repetitions,
                k,
                workers,
                ..SearchConfig::default()
            };
            let report = run_experiment(&config)?;
            println!("pipeline\t{}", report.pipeline);
            println!("internal_loss\t{:.6}", report.internal_score);
            println!("test_instance_f\t{:.6}", report.test.instance_f_measure);
            println!("test_exact_match\t{:.6}", report.test.exact_match_accuracy);
            println!("test_hamming_loss\t{:.6}", report.test.hamming_loss);
            println!("test_rank_loss\t{:.6}", report.test.rank_loss);
            println!("evaluations\t{}", report.evaluations);
            println!("wall_time_seconds\t{:.3}", report.timing.wall_time_seconds);
            println!("report\t{}", config.out_dir.join(format!("{}.json", config.run_name())).display());
        }
        Command::Summarize { input, out } => {
            let summary = summarize(&read_reports(&input)?);
            print!("{}", summary.to_text());
            if let Some(path) = out {
                fs::write(&path, summary.to_csv()).map_err(|e| format!("{}: {e}", path.display()))?;
            }
        }
        Command::Space { file } => {
            let space = load_space(file.as_deref())?;
            println!("pipelines: {}", space.count_pipelines()?);
            print!("{}", space.listing());
        }
        Command::GenFixture { kind, n, seed, out } => {
            let text = write_arff(&fixture(kind, n, seed));
            match out {
                Some(path) => fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))?,
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
