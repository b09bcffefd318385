//! Data-driven random feature selection.
//!
//! Draw a pool of `M0` candidate features, score each one by how much label
//! energy its column captures, and keep the `M` best. The score of pool
//! feature `i` is the normalized diagonal of `Q = Z^T y y^T Z`:
//!
//! ```text
//! q_i = [Q]_ii / tr(Q)
//! ```
//!
//! Because `Q` has rank one, `q_i = v_i^2 / ||v||^2` with `v = Z^T y`, so the
//! scores cost O(n*M0) time and O(M0) space; the `M0 x M0` matrix is never
//! formed.

use std::io::Write;
use std::path::Path;

use ndarray::Array1;

use crate::features::{sample_features, transform, FeatureMatrix, FeatureSet, KernelKind};
use crate::scenario::Dataset;
use crate::{Error, Result};

/// A feature pool with its label-energy weights.
#[derive(Debug, Clone)]
pub struct ScoredPool {
    pub pool: FeatureSet,
    /// Nonnegative, sums to one.
    pub weights: Array1<f64>,
    /// The +-1 task labels the pool was scored against.
    pub label_vector: Array1<f64>,
}

/// The top-`M` features of a scored pool.
#[derive(Debug, Clone)]
pub struct SelectedFeatures {
    pub selected: FeatureSet,
    /// Chosen pool positions in descending weight order (ties to the
    /// smaller index).
    pub indices: Vec<usize>,
}

/// Scores every pool feature against a binary label vector.
///
/// `zm` must be the transform of the training data under `pool` (one column
/// per feature). Fails with [`Error::DegenerateScores`] when `Z^T y = 0`,
/// in which case selection carries no information.
pub fn score_pool(pool: &FeatureSet, zm: &FeatureMatrix, y: &Array1<f64>) -> Result<ScoredPool> {
    if zm.z.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: zm.z.nrows(),
            got: y.len(),
        });
    }
    if zm.z.ncols() != pool.len() {
        return Err(Error::DimensionMismatch {
            expected: pool.len(),
            got: zm.z.ncols(),
        });
    }
    if y.iter().any(|v| v.abs() != 1.0) {
        return Err(Error::InvalidConfig(
            "labels must be +-1 for scoring".into(),
        ));
    }

    let v = zm.z.t().dot(y);
    let total: f64 = v.iter().map(|vi| vi * vi).sum();
    if total == 0.0 {
        return Err(Error::DegenerateScores);
    }
    let weights = v.mapv(|vi| vi * vi / total);
    Ok(ScoredPool {
        pool: pool.clone(),
        weights,
        label_vector: y.clone(),
    })
}

/// Keeps the `m` highest-weight features; ties break toward the smaller
/// pool index so selection is deterministic.
pub fn select_top(sp: &ScoredPool, m: usize) -> Result<SelectedFeatures> {
    let pool_size = sp.pool.len();
    if m < 1 || m >= pool_size {
        return Err(Error::SelectionOutOfRange { m, pool: pool_size });
    }
    let mut order: Vec<usize> = (0..pool_size).collect();
    order.sort_by(|&a, &b| sp.weights[b].total_cmp(&sp.weights[a]).then(a.cmp(&b)));
    order.truncate(m);

    let features = order.iter().map(|&i| sp.pool.features[i].clone()).collect();
    Ok(SelectedFeatures {
        selected: FeatureSet {
            features,
            kernel_kind: sp.pool.kernel_kind,
            map_kind: sp.pool.map_kind,
            sigma: sp.pool.sigma,
        },
        indices: order,
    })
}

/// Scores and selects, falling back to the first `m` pool features when all
/// scores vanish. Returns the selection and whether the fallback fired.
pub fn select_or_fallback(
    pool: &FeatureSet,
    zm: &FeatureMatrix,
    y: &Array1<f64>,
    m: usize,
) -> Result<(SelectedFeatures, bool)> {
    match score_pool(pool, zm, y) {
        Ok(sp) => Ok((select_top(&sp, m)?, false)),
        Err(Error::DegenerateScores) => {
            log::warn!("all feature scores vanish; falling back to the first {m} pool features");
            if m < 1 || m >= pool.len() {
                return Err(Error::SelectionOutOfRange {
                    m,
                    pool: pool.len(),
                });
            }
            let indices: Vec<usize> = (0..m).collect();
            let features = indices.iter().map(|&i| pool.features[i].clone()).collect();
            Ok((
                SelectedFeatures {
                    selected: FeatureSet {
                        features,
                        kernel_kind: pool.kernel_kind,
                        map_kind: pool.map_kind,
                        sigma: pool.sigma,
                    },
                    indices,
                },
                true,
            ))
        }
        Err(e) => Err(e),
    }
}

/// End-to-end selection for one binary task: sample a Gaussian pool of `m0`
/// features, score it against `y`, keep the top `m`, and rebuild the
/// transformed matrix over the kept features (normalized by `1/sqrt(m)`).
pub fn ddrf_pipeline(
    data: &Dataset,
    y: &Array1<f64>,
    m: usize,
    m0: usize,
    sigma: f64,
    seed: u64,
) -> Result<(SelectedFeatures, FeatureMatrix)> {
    if m >= m0 {
        return Err(Error::SelectionOutOfRange { m, pool: m0 });
    }
    let pool = sample_features(KernelKind::Gaussian, sigma, 2, m0, seed)?;
    let z_pool = transform(data, &pool)?;
    let (selected, _) = select_or_fallback(&pool, &z_pool, y, m)?;
    let z_hat = transform(data, &selected.selected)?;
    Ok((selected, z_hat))
}

/// Dumps `pool_index,weight,selected` rows for inspection.
pub fn write_selection_csv<W: Write>(
    sp: &ScoredPool,
    sel: &SelectedFeatures,
    mut w: W,
) -> Result<()> {
    writeln!(w, "pool_index,weight,selected")?;
    for i in 0..sp.pool.len() {
        let chosen = sel.indices.contains(&i) as u8;
        writeln!(w, "{},{},{}", i, sp.weights[i], chosen)?;
    }
    Ok(())
}

pub fn write_selection_csv_path<P: AsRef<Path>>(
    sp: &ScoredPool,
    sel: &SelectedFeatures,
    path: P,
) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_selection_csv(sp, sel, std::io::BufWriter::new(f))
}
