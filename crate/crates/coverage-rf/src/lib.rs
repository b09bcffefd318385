//! Randomized shallow networks for cell-coverage boundary detection.
//!
//! Spectrum sensors scattered over a 2-D field each declare which of two base
//! stations (if any) covers their location. Recovering the coverage
//! boundaries from those noisy declarations is a 3-class classification
//! problem with labels `{-1, 0, +1}`. This crate solves it with shallow
//! models built on random Fourier features and compares three sampling
//! strategies against an exact kernel baseline:
//!
//! * **RKS** — plain i.i.d. Gaussian frequencies with a cosine feature map,
//! * **ORF** — orthogonal random features (QR-orthogonalized frequency
//!   blocks with a `[cos, sin]` map),
//! * **DDRF** — data-driven random features: draw a large pool, score every
//!   feature against the labels, keep only the top scorers,
//! * **Kernel** — exact kernel logistic regression over the full Gram
//!   matrix, the accuracy/cost reference.
//!
//! Modules follow the pipeline: [`scenario`] generates synthetic sensor
//! fields, [`features`] samples and applies feature maps, [`ddrf`] scores
//! and selects features, [`classifier`] trains the one-vs-all logistic
//! models, [`kernel`] is the exact baseline, and [`bench`] orchestrates the
//! repeated-trial comparison.
//!
//! ```
//! use coverage_rf::scenario::{generate_scenario, sigma_heuristic, ScenarioConfig};
//! use coverage_rf::bench::train_method;
//! use coverage_rf::bench::Method;
//!
//! let config = ScenarioConfig { n_train: 300, n_test: 150, ..ScenarioConfig::default() };
//! let (train, test) = generate_scenario(&config).unwrap();
//! let sigma = sigma_heuristic(&train, 20).unwrap();
//!
//! let model = train_method(Method::Ddrf, &train, 8, 10, sigma, 42).unwrap();
//! let acc = model.accuracy(&test).unwrap();
//! assert!(acc > 0.5);
//! ```

pub mod bench;
pub mod classifier;
pub mod config;
pub mod ddrf;
pub mod features;
pub mod kernel;
pub mod optim;
pub mod scenario;

mod error;

pub use error::{Error, Result};

/// Sensor locations live in the plane.
pub type Point = [f64; 2];

// The book chapters double as doctests so their snippets stay compilable.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            pub struct $name;
        };
    }

    chapter!(Introduction, "../../../book/src/introduction.md");
    chapter!(Scenario, "../../../book/src/scenario.md");
    chapter!(RandomFeatures, "../../../book/src/random-features.md");
    chapter!(FeatureSelection, "../../../book/src/feature-selection.md");
    chapter!(Classification, "../../../book/src/classification.md");
    chapter!(KernelBaseline, "../../../book/src/kernel-baseline.md");
    chapter!(Benchmark, "../../../book/src/benchmark.md");
}
