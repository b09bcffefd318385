//! Command-line front end: generate sensor fields, train single models, and
//! run the full method comparison.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use coverage_rf::bench::{emit_report, run_benchmark, BenchConfig, Method};
use coverage_rf::config::{load_bench_config, load_scenario_config};
use coverage_rf::scenario::{generate_scenario, sigma_heuristic, ScenarioConfig};
use coverage_rf::Result;

#[derive(Parser)]
#[command(
    name = "coverage-rf",
    about = "Cell-coverage boundary detection with randomized shallow networks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the repeated-trial benchmark and emit report tables.
    Bench(BenchArgs),
    /// Generate a synthetic sensor field and write it to CSV.
    Generate(GenerateArgs),
    /// Train one method once and print its test accuracy.
    Train(TrainArgs),
}

#[derive(Args)]
struct BenchArgs {
    /// TOML config file (all keys optional; see the repository README).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated subset of ddrf,rks,orf,kernel.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    /// Comma-separated feature counts, e.g. 4,8,12,16.
    #[arg(long = "m", value_delimiter = ',')]
    m_values: Option<Vec<usize>>,
    #[arg(long)]
    trials: Option<usize>,
    /// Directory for summary.csv and trials.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Base seed; trial t regenerates the scenario with seed + t.
    #[arg(long)]
    seed: Option<u64>,
    /// Pin trials to sequential execution for clean wall-clock timings.
    #[arg(long)]
    timing: bool,
    /// Pool size multiplier for data-driven selection (pool = multiplier * M).
    #[arg(long)]
    pool_multiplier: Option<usize>,
}

#[derive(Args)]
struct GenerateArgs {
    /// TOML config file; only the [scenario] table is used.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Train-split CSV path; the test split lands next to it as
    /// `<stem>.test.csv` when n_test > 0.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct TrainArgs {
    /// One of ddrf, rks, orf, kernel.
    #[arg(long)]
    method: Method,
    /// Feature count (ignored by the kernel baseline).
    #[arg(long = "m", default_value_t = 16)]
    m: usize,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 10)]
    pool_multiplier: usize,
    /// Neighbour rank for the bandwidth heuristic.
    #[arg(long, default_value_t = 50)]
    knn_k: usize,
    /// Optional path to save the trained model (random-feature methods).
    #[arg(long)]
    save_model: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Bench(args) => bench(args),
        Command::Generate(args) => generate(args),
        Command::Train(args) => train(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn bench(args: BenchArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => load_bench_config(path)?,
        None => BenchConfig::default(),
    };
    if let Some(methods) = args.methods {
        config.methods = methods;
    }
    if let Some(m_values) = args.m_values {
        config.m_values = m_values;
    }
    if let Some(trials) = args.trials {
        config.n_trials = trials;
    }
    if let Some(seed) = args.seed {
        config.scenario.rng_seed = seed;
    }
    if let Some(multiplier) = args.pool_multiplier {
        config.pool_multiplier = multiplier;
    }
    config.timing = config.timing || args.timing;
    config.output_dir = args.out;

    log::info!(
        "benchmark: methods {:?}, M {:?}, {} trials{}",
        config
            .methods
            .iter()
            .map(|m| m.to_string())
            .collect::<Vec<_>>(),
        config.m_values,
        config.n_trials,
        if config.timing {
            " (sequential timing)"
        } else {
            ""
        }
    );
    let report = run_benchmark(&config)?;
    for (t, sigma) in report.sigmas.iter().enumerate() {
        log::debug!("trial {t}: sigma {sigma:.4}");
    }
    log::info!(
        "bandwidth heuristic across trials: sigma in [{:.4}, {:.4}]",
        report.sigmas.iter().cloned().fold(f64::INFINITY, f64::min),
        report
            .sigmas
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    );
    let written = emit_report(&report, config.output_dir.as_deref())?;
    for path in written {
        log::info!("wrote {}", path.display());
    }
    Ok(())
}

fn generate(args: GenerateArgs) -> Result<()> {
    let mut scenario = match &args.config {
        Some(path) => load_scenario_config(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = args.seed {
        scenario.rng_seed = seed;
    }
    let (train, test) = generate_scenario(&scenario)?;
    train.write_csv_path(&args.out)?;
    log::info!(
        "wrote {} training sensors to {}",
        train.len(),
        args.out.display()
    );
    if !test.is_empty() {
        let test_path = args.out.with_extension("test.csv");
        test.write_csv_path(&test_path)?;
        log::info!(
            "wrote {} test sensors to {}",
            test.len(),
            test_path.display()
        );
    }
    Ok(())
}

fn train(args: TrainArgs) -> Result<()> {
    let mut scenario = match &args.config {
        Some(path) => load_scenario_config(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = args.seed {
        scenario.rng_seed = seed;
    }
    let (train_split, test_split) = generate_scenario(&scenario)?;
    let sigma = sigma_heuristic(&train_split, args.knn_k)?;
    log::info!("bandwidth heuristic: sigma = {sigma:.4}");

    let feature_seed = scenario.rng_seed.wrapping_add(1);
    let start = std::time::Instant::now();
    let model = coverage_rf::bench::train_method(
        args.method,
        &train_split,
        args.m,
        args.pool_multiplier,
        sigma,
        feature_seed,
    )?;
    let train_seconds = start.elapsed().as_secs_f64();

    let train_acc = model.accuracy(&train_split)?;
    println!("method {} M {}", args.method, args.m);
    println!("sigma {sigma:.6}");
    println!("train_seconds {train_seconds:.4}");
    println!("train_accuracy {train_acc:.4}");
    if !test_split.is_empty() {
        println!("test_accuracy {:.4}", model.accuracy(&test_split)?);
    }

    if let Some(path) = args.save_model {
        match &model {
            coverage_rf::bench::TrainedModel::RandomFeatures(m) => {
                m.save_path(&path)?;
                log::info!("saved model to {}", path.display());
            }
            coverage_rf::bench::TrainedModel::ExactKernel(_) => {
                log::warn!("kernel models are not saved; skipping {}", path.display());
            }
        }
    }
    Ok(())
}
