//! TOML config files.
//!
//! One file shape serves both the data generator and the benchmark: the
//! `[scenario]` table mirrors [`ScenarioConfig`] and the top-level keys
//! mirror the rest of [`BenchConfig`]. Every key is optional and falls back
//! to the built-in default; unknown keys are rejected so typos fail loudly.
//!
//! ```toml
//! m_values = [4, 8, 12, 16]
//! n_trials = 30
//! pool_multiplier = 10
//! methods = ["ddrf", "rks", "orf"]
//! knn_k = 50
//!
//! [scenario]
//! field_side = 10.0
//! n_train = 2000
//! n_test = 1000
//! label_noise_rate = 0.3
//! noise_decay_length = 0.35
//! rng_seed = 7
//!
//! [[scenario.base_stations]]
//! center = [3.4, 5.2]
//! base_radius = 3.0
//! harmonics = [
//!   { amplitude = 0.45, frequency = 3.0, phase = 0.7 },
//!   { amplitude = 0.30, frequency = 5.0, phase = 2.1 },
//! ]
//!
//! [[scenario.base_stations]]
//! center = [7.1, 4.6]
//! base_radius = 2.4
//! ```

use std::path::Path;

use crate::bench::BenchConfig;
use crate::scenario::ScenarioConfig;
use crate::{Error, Result};

/// Parses a full benchmark config; missing keys take defaults.
pub fn parse_bench_config(text: &str) -> Result<BenchConfig> {
    let config: BenchConfig =
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    Ok(config)
}

pub fn load_bench_config<P: AsRef<Path>>(path: P) -> Result<BenchConfig> {
    parse_bench_config(&std::fs::read_to_string(path)?)
}

/// Parses just the scenario from the same file shape.
pub fn parse_scenario_config(text: &str) -> Result<ScenarioConfig> {
    Ok(parse_bench_config(text)?.scenario)
}

pub fn load_scenario_config<P: AsRef<Path>>(path: P) -> Result<ScenarioConfig> {
    parse_scenario_config(&std::fs::read_to_string(path)?)
}
