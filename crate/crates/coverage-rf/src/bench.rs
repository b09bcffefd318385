//! Repeated-trial benchmark: DDRF vs. RKS vs. ORF vs. the exact kernel.
//!
//! Every trial regenerates the sensor field from a trial-derived seed,
//! recomputes the bandwidth heuristic, trains each configured method at each
//! feature count, and scores it on the held-out split. Accuracies are
//! deterministic functions of the config; wall-clock training times are
//! measured per trial and averaged. Trials run in parallel unless the
//! `timing` flag pins them to sequential execution for clean measurements.

use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{
    train_binary, FeatureClassifier, OneVsAll, DEFAULT_OPT_BUDGET, DEFAULT_REG_LAMBDA,
};
use crate::ddrf::select_or_fallback;
use crate::features::{sample_features, sample_orf_features, transform, KernelKind};
use crate::kernel::{train_kernel_multiclass, GramModel};
use crate::scenario::{generate_scenario, sigma_heuristic, Dataset, Label, ScenarioConfig};
use crate::{Error, Point, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ddrf,
    Rks,
    Orf,
    Kernel,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Ddrf, Method::Rks, Method::Orf, Method::Kernel];

    fn tag(self) -> u64 {
        match self {
            Method::Ddrf => 1,
            Method::Rks => 2,
            Method::Orf => 3,
            Method::Kernel => 4,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::Ddrf => "ddrf",
            Method::Rks => "rks",
            Method::Orf => "orf",
            Method::Kernel => "kernel",
        };
        f.write_str(s)
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ddrf" => Ok(Method::Ddrf),
            "rks" => Ok(Method::Rks),
            "orf" => Ok(Method::Orf),
            "kernel" => Ok(Method::Kernel),
            other => Err(Error::UnknownMethod(other.to_string())),
        }
    }
}

/// Everything a benchmark run needs. Deserializable from TOML; the scenario
/// lives in its own `[scenario]` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub scenario: ScenarioConfig,
    pub m_values: Vec<usize>,
    pub n_trials: usize,
    /// Pool size for data-driven sampling is `pool_multiplier * M`.
    pub pool_multiplier: usize,
    pub methods: Vec<Method>,
    /// Neighbour rank for the bandwidth heuristic.
    pub knn_k: usize,
    /// Pin trials to sequential execution so wall-clock timings are clean.
    pub timing: bool,
    #[serde(skip)]
    pub output_dir: Option<PathBuf>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            scenario: ScenarioConfig::default(),
            m_values: vec![4, 8, 12, 16, 20],
            n_trials: 30,
            pool_multiplier: 10,
            methods: Method::ALL.to_vec(),
            knn_k: 50,
            timing: false,
            output_dir: None,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.n_trials < 1 {
            return Err(Error::InvalidConfig("n_trials must be at least 1".into()));
        }
        if self.m_values.is_empty() || self.m_values.contains(&0) {
            return Err(Error::InvalidConfig(
                "m_values must be nonempty and positive".into(),
            ));
        }
        if self.pool_multiplier < 2 {
            return Err(Error::InvalidConfig(
                "pool_multiplier must be at least 2".into(),
            ));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("methods must be nonempty".into()));
        }
        if self.scenario.n_test == 0 {
            return Err(Error::InvalidConfig(
                "benchmarking needs a test split".into(),
            ));
        }
        Ok(())
    }
}

/// One (method, M) summary across trials.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub method: Method,
    /// Feature count; 0 for the kernel baseline, which ignores it.
    pub m: usize,
    pub mean_accuracy: f64,
    pub standard_error: f64,
    pub mean_train_seconds: f64,
}

/// One trained configuration within one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub method: Method,
    pub m: usize,
    pub accuracy: f64,
    pub train_seconds: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub trials: Vec<TrialRecord>,
    /// Bandwidth used by trial index.
    pub sigmas: Vec<f64>,
}

/// A trained 3-class model of either family.
pub enum TrainedModel {
    RandomFeatures(OneVsAll<FeatureClassifier>),
    ExactKernel(OneVsAll<GramModel>),
}

impl TrainedModel {
    pub fn predict(&self, x: &Point) -> Label {
        match self {
            TrainedModel::RandomFeatures(m) => m.predict(x),
            TrainedModel::ExactKernel(m) => m.predict(x),
        }
    }

    pub fn accuracy(&self, data: &Dataset) -> Result<f64> {
        match self {
            TrainedModel::RandomFeatures(m) => m.accuracy(data),
            TrainedModel::ExactKernel(m) => m.accuracy(data),
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Feature seed for one (trial, method, M) cell, independent of every other
/// cell so truncating the trial list never reshuffles earlier results.
fn derive_seed(trial_seed: u64, method: Method, m: usize) -> u64 {
    splitmix64(trial_seed ^ splitmix64((method.tag() << 32) | m as u64))
}

/// Trains one 3-class model: samples features (and selects, for DDRF) and
/// fits the three binary detectors. This is the unit the benchmark times;
/// scenario generation and evaluation stay outside.
pub fn train_method(
    method: Method,
    train: &Dataset,
    m: usize,
    pool_multiplier: usize,
    sigma: f64,
    seed: u64,
) -> Result<TrainedModel> {
    let (reg, budget) = (DEFAULT_REG_LAMBDA, DEFAULT_OPT_BUDGET);
    match method {
        Method::Kernel => {
            let model = train_kernel_multiclass(train, KernelKind::Gaussian, sigma, reg, budget)?;
            Ok(TrainedModel::ExactKernel(model))
        }
        Method::Rks | Method::Orf => {
            let fs = match method {
                Method::Rks => sample_features(KernelKind::Gaussian, sigma, 2, m, seed)?,
                _ => sample_orf_features(sigma, 2, m, seed)?,
            };
            let zm = transform(train, &fs)?;
            let mut scorers = Vec::with_capacity(3);
            for label in Label::ALL {
                let y = train.binary_labels(label);
                let model = train_binary(&zm, &y, reg, budget, label)?;
                scorers.push((
                    label,
                    FeatureClassifier {
                        model,
                        features: fs.clone(),
                    },
                ));
            }
            Ok(TrainedModel::RandomFeatures(OneVsAll::new(scorers)?))
        }
        Method::Ddrf => {
            // One shared pool per trial cell; scoring and selection run
            // independently for each binary task.
            let m0 = pool_multiplier * m;
            let pool = sample_features(KernelKind::Gaussian, sigma, 2, m0, seed)?;
            let z_pool = transform(train, &pool)?;
            let mut scorers = Vec::with_capacity(3);
            for label in Label::ALL {
                let y = train.binary_labels(label);
                let (selected, _) = select_or_fallback(&pool, &z_pool, &y, m)?;
                let z_hat = transform(train, &selected.selected)?;
                let model = train_binary(&z_hat, &y, reg, budget, label)?;
                scorers.push((
                    label,
                    FeatureClassifier {
                        model,
                        features: selected.selected,
                    },
                ));
            }
            Ok(TrainedModel::RandomFeatures(OneVsAll::new(scorers)?))
        }
    }
}

struct TrialOutput {
    records: Vec<TrialRecord>,
    sigma: f64,
}

fn run_trial(config: &BenchConfig, trial: usize) -> Result<TrialOutput> {
    let trial_seed = config.scenario.rng_seed.wrapping_add(trial as u64);
    let scenario = ScenarioConfig {
        rng_seed: trial_seed,
        ..config.scenario.clone()
    };
    let (train, test) = generate_scenario(&scenario)?;
    let sigma = sigma_heuristic(&train, config.knn_k)?;
    log::debug!("trial {trial}: sigma = {sigma:.4}");

    let mut records = Vec::new();
    for &method in &config.methods {
        let ms: &[usize] = if method == Method::Kernel {
            &[0]
        } else {
            &config.m_values
        };
        for &m in ms {
            let seed = derive_seed(trial_seed, method, m);
            let start = Instant::now();
            let model = train_method(method, &train, m, config.pool_multiplier, sigma, seed)?;
            let train_seconds = start.elapsed().as_secs_f64();
            let accuracy = model.accuracy(&test)?;
            records.push(TrialRecord {
                trial,
                method,
                m,
                accuracy,
                train_seconds,
                sigma,
            });
        }
    }
    Ok(TrialOutput { records, sigma })
}

/// Runs the full benchmark described by `config`.
///
/// Trial `t` regenerates the scenario with seed `rng_seed + t`, so per-trial
/// results do not depend on how many trials run. A failed trial aborts the
/// whole run, reporting its index and scenario seed.
pub fn run_benchmark(config: &BenchConfig) -> Result<BenchReport> {
    config.validate()?;

    let outcomes: Vec<Result<TrialOutput>> = if config.timing {
        (0..config.n_trials).map(|t| run_trial(config, t)).collect()
    } else {
        (0..config.n_trials)
            .into_par_iter()
            .map(|t| run_trial(config, t))
            .collect()
    };

    let mut trials = Vec::new();
    let mut sigmas = Vec::with_capacity(config.n_trials);
    for (t, outcome) in outcomes.into_iter().enumerate() {
        let output = outcome.map_err(|e| Error::Trial {
            trial: t,
            seed: config.scenario.rng_seed.wrapping_add(t as u64),
            source: Box::new(e),
        })?;
        trials.extend(output.records);
        sigmas.push(output.sigma);
    }

    let mut rows = Vec::new();
    for &method in &config.methods {
        let ms: &[usize] = if method == Method::Kernel {
            &[0]
        } else {
            &config.m_values
        };
        for &m in ms {
            let cell: Vec<&TrialRecord> = trials
                .iter()
                .filter(|r| r.method == method && r.m == m)
                .collect();
            let n = cell.len() as f64;
            let mean_accuracy = cell.iter().map(|r| r.accuracy).sum::<f64>() / n;
            let standard_error = if cell.len() < 2 {
                log::warn!("{method} M={m}: single trial, standard error degenerate (0)");
                0.0
            } else {
                let var = cell
                    .iter()
                    .map(|r| (r.accuracy - mean_accuracy).powi(2))
                    .sum::<f64>()
                    / (n - 1.0);
                (var / n).sqrt()
            };
            let mean_train_seconds = cell.iter().map(|r| r.train_seconds).sum::<f64>() / n;
            rows.push(BenchRow {
                method,
                m,
                mean_accuracy,
                standard_error,
                mean_train_seconds,
            });
        }
    }

    Ok(BenchReport {
        rows,
        trials,
        sigmas,
    })
}

impl BenchReport {
    /// Machine-readable summary. Floats use the shortest exact
    /// representation so parsing reproduces them bit for bit.
    pub fn write_summary_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "method,M,mean_acc,stderr,mean_train_s")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{}",
                r.method, r.m, r.mean_accuracy, r.standard_error, r.mean_train_seconds
            )?;
        }
        Ok(())
    }

    pub fn read_summary_csv<R: Read>(r: R) -> Result<Vec<BenchRow>> {
        let mut lines = BufReader::new(r).lines();
        match lines.next() {
            Some(Ok(h)) if h.trim() == "method,M,mean_acc,stderr,mean_train_s" => {}
            other => return Err(Error::Parse(format!("bad summary header: {other:?}"))),
        }
        let mut rows = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 5 {
                return Err(Error::Parse(format!("expected 5 columns in '{line}'")));
            }
            let parse_f = |s: &str| -> Result<f64> {
                s.parse()
                    .map_err(|e| Error::Parse(format!("bad float '{s}': {e}")))
            };
            rows.push(BenchRow {
                method: parts[0].parse()?,
                m: parts[1]
                    .parse()
                    .map_err(|e| Error::Parse(format!("bad M '{}': {e}", parts[1])))?,
                mean_accuracy: parse_f(parts[2])?,
                standard_error: parse_f(parts[3])?,
                mean_train_seconds: parse_f(parts[4])?,
            });
        }
        Ok(rows)
    }

    /// Long-form per-trial rows for plotting accuracy curves.
    pub fn write_trials_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "trial,method,M,accuracy,train_seconds,sigma")?;
        for r in &self.trials {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                r.trial, r.method, r.m, r.accuracy, r.train_seconds, r.sigma
            )?;
        }
        Ok(())
    }

    /// Human-readable aligned table.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<8} {:>4} {:>10} {:>10} {:>12}\n",
            "method", "M", "mean_acc", "stderr", "train_s"
        ));
        for r in &self.rows {
            let m = if r.method == Method::Kernel {
                "-".to_string()
            } else {
                r.m.to_string()
            };
            out.push_str(&format!(
                "{:<8} {:>4} {:>10.4} {:>10.4} {:>12.4}\n",
                r.method.to_string().to_uppercase(),
                m,
                r.mean_accuracy,
                r.standard_error,
                r.mean_train_seconds
            ));
        }
        out
    }
}

/// Prints the aligned table to standard output and, when `out_dir` is given,
/// writes `summary.csv` and `trials.csv` there. Returns the written paths.
pub fn emit_report(report: &BenchReport, out_dir: Option<&Path>) -> Result<Vec<PathBuf>> {
    print!("{}", report.render_table());
    let mut written = Vec::new();
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        let summary = dir.join("summary.csv");
        report.write_summary_csv(std::io::BufWriter::new(std::fs::File::create(&summary)?))?;
        written.push(summary);
        let trials = dir.join("trials.csv");
        report.write_trials_csv(std::io::BufWriter::new(std::fs::File::create(&trials)?))?;
        written.push(trials);
    }
    Ok(written)
}
