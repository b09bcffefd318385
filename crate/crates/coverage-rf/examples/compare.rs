//! Runs the method comparison on the default field and prints the table.
//!
//! ```text
//! cargo run --release -p coverage-rf --example compare -- 30
//! ```

use coverage_rf::bench::{run_benchmark, BenchConfig, Method};
use coverage_rf::scenario::{generate_scenario, sigma_heuristic, Label, ScenarioConfig};

fn main() {
    let trials: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(10);

    let scenario = ScenarioConfig::default();
    let (train, test) = generate_scenario(&scenario).unwrap();
    let sigma = sigma_heuristic(&train, 50).unwrap();
    println!("bandwidth heuristic: sigma = {sigma:.4}");
    for label in Label::ALL {
        println!(
            "label {label:>2}: {:.1}% of train, {:.1}% of test",
            100.0 * train.count(label) as f64 / train.len() as f64,
            100.0 * test.count(label) as f64 / test.len() as f64
        );
    }
    println!();

    let config = BenchConfig {
        scenario,
        m_values: vec![4, 8, 12, 16],
        n_trials: trials,
        methods: vec![Method::Ddrf, Method::Rks, Method::Orf],
        ..BenchConfig::default()
    };
    let start = std::time::Instant::now();
    let report = run_benchmark(&config).unwrap();
    print!("{}", report.render_table());
    println!(
        "\n{} trials in {:.1}s",
        trials,
        start.elapsed().as_secs_f64()
    );
}
