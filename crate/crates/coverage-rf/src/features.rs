//! Random Fourier features: sampling distributions and feature maps.
//!
//! A shift-invariant kernel can be written as an expectation of products of
//! basis functions, `k(x, x') = E_w[phi(x, w) phi(x', w)]`, and therefore
//! estimated by Monte-Carlo averaging over sampled features
//! (Rahimi & Recht, 2007). Each supported kernel pairs with its spectral
//! sampling law:
//!
//! | kernel    | `k(x, x')`                    | frequency distribution     |
//! |-----------|-------------------------------|----------------------------|
//! | Gaussian  | `exp(-s^2 ||x-x'||^2 / 2)`    | `N(0, s^2 I)`              |
//! | Linear    | `<x, x'>`                     | `N(0, s^2 I)` (use `s = 1`)|
//! | Laplacian | `exp(-||x-x'||_1)`            | per-coordinate Cauchy      |
//! | Cauchy    | `prod_l 1/(1 + (x_l-x'_l)^2)` | per-coordinate Laplace     |
//!
//! The cosine map `phi(x, w) = sqrt(2) cos(nu^T x + b)` serves every kernel
//! except the linear one, whose map is the plain inner product. Orthogonal
//! random features (Yu et al., 2016) replace i.i.d. Gaussian frequencies
//! with QR-orthogonalized blocks and a `[cos, sin]` pair map.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, ChiSquared, Distribution, Exp1, StandardNormal};

use crate::scenario::Dataset;
use crate::{Error, Result};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Gaussian,
    Linear,
    Laplacian,
    Cauchy,
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            KernelKind::Gaussian => "gaussian",
            KernelKind::Linear => "linear",
            KernelKind::Laplacian => "laplacian",
            KernelKind::Cauchy => "cauchy",
        };
        f.write_str(s)
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(KernelKind::Gaussian),
            "linear" => Ok(KernelKind::Linear),
            "laplacian" => Ok(KernelKind::Laplacian),
            "cauchy" => Ok(KernelKind::Cauchy),
            other => Err(Error::Parse(format!("unknown kernel kind '{other}'"))),
        }
    }
}

/// How sampled frequencies turn into model inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    /// `sqrt(2) cos(nu^T x + b)`, one column per feature.
    Cosine,
    /// `[cos(nu^T x), sin(nu^T x)]`, two columns per feature, phases unused.
    CosSinPair,
    /// `nu^T x`, one column per feature.
    Linear,
}

/// One sampled random feature `w = (nu, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFeature {
    pub nu: Vec<f64>,
    pub b: f64,
}

/// A batch of random features together with the map that consumes them.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub features: Vec<SpectralFeature>,
    pub kernel_kind: KernelKind,
    pub map_kind: MapKind,
    /// Bandwidth; meaningful for Gaussian sampling (plain and orthogonal).
    pub sigma: f64,
}

impl FeatureSet {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.first().map_or(0, |f| f.nu.len())
    }

    /// Columns a transformed matrix will have: `2M` for the pair map, `M`
    /// otherwise.
    pub fn column_count(&self) -> usize {
        match self.map_kind {
            MapKind::CosSinPair => 2 * self.len(),
            _ => self.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let linear_map = self.map_kind == MapKind::Linear;
        let linear_kernel = self.kernel_kind == KernelKind::Linear;
        if linear_map != linear_kernel {
            return Err(Error::InvalidConfig(
                "the linear map pairs exactly with the linear kernel".into(),
            ));
        }
        if self.features.iter().any(|f| !(0.0..TWO_PI).contains(&f.b)) {
            return Err(Error::InvalidConfig("phases must lie in [0, 2*pi)".into()));
        }
        Ok(())
    }

    /// Raw basis values `phi(x, w_m)` for one input, without the `1/sqrt(M)`
    /// column normalizer.
    fn fill_raw_row(&self, x: &[f64], out: &mut [f64]) {
        match self.map_kind {
            MapKind::Cosine => {
                for (f, o) in self.features.iter().zip(out.iter_mut()) {
                    *o = std::f64::consts::SQRT_2 * (dot(&f.nu, x) + f.b).cos();
                }
            }
            MapKind::Linear => {
                for (f, o) in self.features.iter().zip(out.iter_mut()) {
                    *o = dot(&f.nu, x);
                }
            }
            MapKind::CosSinPair => {
                for (m, f) in self.features.iter().enumerate() {
                    let t = dot(&f.nu, x);
                    out[2 * m] = t.cos();
                    out[2 * m + 1] = t.sin();
                }
            }
        }
    }

    /// The transformed representation of a single point, scaled by
    /// `1/sqrt(M)` exactly as [`transform`] scales matrix columns.
    pub fn feature_row(&self, x: &[f64]) -> Vec<f64> {
        let scale = 1.0 / (self.len() as f64).sqrt();
        let mut row = vec![0.0; self.column_count()];
        self.fill_raw_row(x, &mut row);
        for v in &mut row {
            *v *= scale;
        }
        row
    }

    /// Writes `nu1,nu2,b` rows for reproducibility audits (2-D features).
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        if self.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: self.dim(),
            });
        }
        writeln!(w, "nu1,nu2,b")?;
        for f in &self.features {
            writeln!(w, "{},{},{}", f.nu[0], f.nu[1], f.b)?;
        }
        Ok(())
    }

    pub fn write_csv_path<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }
}

/// The transformed data matrix `Z`, one row per input point.
///
/// Column `j` holds `phi(x_i, w_j) / sqrt(M)`; for the pair map, feature `m`
/// owns columns `2m` and `2m+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub z: Array2<f64>,
    /// The `1/sqrt(M)` normalizer folded into every column.
    pub scale: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Draws `m` i.i.d. features for `kernel_kind`: frequencies from the
/// kernel's spectral law and phases uniform on `[0, 2*pi)`.
pub fn sample_features(
    kernel_kind: KernelKind,
    sigma: f64,
    dim: usize,
    m: usize,
    seed: u64,
) -> Result<FeatureSet> {
    if m < 1 || dim < 1 {
        return Err(Error::InvalidConfig(format!(
            "need at least one feature and one dimension, got m={m}, dim={dim}"
        )));
    }
    let gaussian_like = matches!(kernel_kind, KernelKind::Gaussian | KernelKind::Linear);
    if gaussian_like && !crate::scenario::positive(sigma) {
        return Err(Error::InvalidConfig(format!(
            "sigma must be positive, got {sigma}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cauchy = Cauchy::new(0.0, 1.0).expect("valid Cauchy parameters");

    let mut frequencies = Vec::with_capacity(m);
    for _ in 0..m {
        let mut nu = Vec::with_capacity(dim);
        for _ in 0..dim {
            let v = match kernel_kind {
                KernelKind::Gaussian | KernelKind::Linear => {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    sigma * z
                }
                KernelKind::Laplacian => cauchy.sample(&mut rng),
                KernelKind::Cauchy => {
                    // Laplace(0, 1) as an exponential magnitude with a random sign.
                    let mag: f64 = Exp1.sample(&mut rng);
                    if rng.gen::<bool>() {
                        mag
                    } else {
                        -mag
                    }
                }
            };
            nu.push(v);
        }
        frequencies.push(nu);
    }

    let features = frequencies
        .into_iter()
        .map(|nu| SpectralFeature {
            nu,
            b: rng.gen_range(0.0..TWO_PI),
        })
        .collect();

    let map_kind = match kernel_kind {
        KernelKind::Linear => MapKind::Linear,
        _ => MapKind::Cosine,
    };
    Ok(FeatureSet {
        features,
        kernel_kind,
        map_kind,
        sigma,
    })
}

/// Draws `m` orthogonal random features for the Gaussian kernel.
///
/// Frequencies come in blocks of `dim`: a standard Gaussian `dim x dim`
/// matrix is QR-factored (signs fixed so `R` has a nonnegative diagonal,
/// making `Q` unique), every row of `Q` is rescaled by an independent
/// chi(dim) draw to restore the Gaussian norm distribution, and the result
/// is multiplied by `sigma`. Rows are stacked across blocks and the first
/// `m` kept. The pair map uses no phases.
pub fn sample_orf_features(sigma: f64, dim: usize, m: usize, seed: u64) -> Result<FeatureSet> {
    if m < 1 || dim < 1 {
        return Err(Error::InvalidConfig(format!(
            "need at least one feature and one dimension, got m={m}, dim={dim}"
        )));
    }
    if !crate::scenario::positive(sigma) {
        return Err(Error::InvalidConfig(format!(
            "sigma must be positive, got {sigma}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chi_sq = ChiSquared::new(dim as f64).expect("valid chi-squared dof");
    let blocks = m.div_ceil(dim);

    let mut features = Vec::with_capacity(m);
    'outer: for _ in 0..blocks {
        let gauss: Vec<f64> = (0..dim * dim)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let q = householder_q(&gauss, dim);
        for row in 0..dim {
            let norm = chi_sq.sample(&mut rng).sqrt();
            let nu: Vec<f64> = (0..dim).map(|c| sigma * norm * q[row * dim + c]).collect();
            features.push(SpectralFeature { nu, b: 0.0 });
            if features.len() == m {
                break 'outer;
            }
        }
    }

    Ok(FeatureSet {
        features,
        kernel_kind: KernelKind::Gaussian,
        map_kind: MapKind::CosSinPair,
        sigma,
    })
}

/// Householder QR of a row-major `d x d` matrix, returning `Q` with the sign
/// convention that makes the diagonal of `R` nonnegative.
fn householder_q(a: &[f64], d: usize) -> Vec<f64> {
    let mut r = a.to_vec();
    let mut q = vec![0.0; d * d];
    for i in 0..d {
        q[i * d + i] = 1.0;
    }

    let mut v = vec![0.0; d];
    for k in 0..d {
        let mut norm = 0.0;
        for i in k..d {
            norm += r[i * d + k] * r[i * d + k];
        }
        let norm = norm.sqrt();
        if norm == 0.0 {
            continue;
        }
        for i in k..d {
            v[i] = r[i * d + k];
        }
        v[k] += v[k].signum() * norm;
        let vtv: f64 = (k..d).map(|i| v[i] * v[i]).sum();
        if vtv == 0.0 {
            continue;
        }

        // R <- H R on columns k.., H = I - 2 v v^T / v^T v.
        for j in k..d {
            let proj: f64 = (k..d).map(|i| v[i] * r[i * d + j]).sum();
            let c = 2.0 * proj / vtv;
            for i in k..d {
                r[i * d + j] -= c * v[i];
            }
        }
        // Q <- Q H, accumulating the product of reflections.
        for i in 0..d {
            let proj: f64 = (k..d).map(|j| q[i * d + j] * v[j]).sum();
            let c = 2.0 * proj / vtv;
            for j in k..d {
                q[i * d + j] -= c * v[j];
            }
        }
    }

    for i in 0..d {
        if r[i * d + i] < 0.0 {
            for row in 0..d {
                q[row * d + i] = -q[row * d + i];
            }
        }
    }
    q
}

/// Applies the feature map to every point of `data`, folding the
/// `1/sqrt(M)` normalizer into the columns.
pub fn transform(data: &Dataset, fs: &FeatureSet) -> Result<FeatureMatrix> {
    fs.validate()?;
    if fs.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: fs.dim(),
        });
    }
    let n = data.len();
    let scale = 1.0 / (fs.len() as f64).sqrt();
    let mut z = Array2::zeros((n, fs.column_count()));
    for (i, p) in data.points.iter().enumerate() {
        let mut row = z.row_mut(i);
        fs.fill_raw_row(&p.x, row.as_slice_mut().expect("row-major layout"));
        row.mapv_inplace(|v| v * scale);
    }
    Ok(FeatureMatrix { z, scale })
}

/// Monte-Carlo kernel estimate `(1/M) sum_m phi(x, w_m) phi(x', w_m)`,
/// unbiased for the feature set's kernel under its sampling law.
///
/// Panics if the point dimensions do not match the features.
pub fn approximate_kernel(x: &[f64], x_other: &[f64], fs: &FeatureSet) -> f64 {
    assert_eq!(x.len(), fs.dim(), "point dimension mismatch");
    assert_eq!(x_other.len(), fs.dim(), "point dimension mismatch");
    let m = fs.len() as f64;
    let mut acc = 0.0;
    match fs.map_kind {
        MapKind::Cosine => {
            for f in &fs.features {
                let a = std::f64::consts::SQRT_2 * (dot(&f.nu, x) + f.b).cos();
                let b = std::f64::consts::SQRT_2 * (dot(&f.nu, x_other) + f.b).cos();
                acc += a * b;
            }
        }
        MapKind::Linear => {
            for f in &fs.features {
                acc += dot(&f.nu, x) * dot(&f.nu, x_other);
            }
        }
        MapKind::CosSinPair => {
            for f in &fs.features {
                let (ta, tb) = (dot(&f.nu, x), dot(&f.nu, x_other));
                acc += ta.cos() * tb.cos() + ta.sin() * tb.sin();
            }
        }
    }
    acc / m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{Dataset, Label, LabeledPoint, Split};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn dataset_from(points: &[[f64; 2]]) -> Dataset {
        Dataset::new(
            points
                .iter()
                .map(|&x| LabeledPoint {
                    x,
                    y: Label::NoCoverage,
                })
                .collect(),
            Split::Train,
        )
    }

    #[test]
    fn gaussian_sampler_moments() {
        let fs = sample_features(KernelKind::Gaussian, 1.0, 2, 100_000, 11).unwrap();
        for l in 0..2 {
            let vals: Vec<f64> = fs.features.iter().map(|f| f.nu[l]).collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / vals.len() as f64;
            assert!(mean.abs() < 0.02, "coordinate {l} mean {mean}");
            assert!((var - 1.0).abs() < 0.02, "coordinate {l} variance {var}");
        }
        for f in &fs.features {
            assert!((0.0..TWO_PI).contains(&f.b));
        }
    }

    #[test]
    fn laplacian_sampler_median_absolute_value() {
        // |Cauchy(0,1)| has median tan(pi/4) = 1.
        let fs = sample_features(KernelKind::Laplacian, 1.0, 2, 100_000, 5).unwrap();
        let mut abs0: Vec<f64> = fs.features.iter().map(|f| f.nu[0].abs()).collect();
        abs0.sort_by(|a, b| a.total_cmp(b));
        let median = abs0[abs0.len() / 2];
        assert!((median - 1.0).abs() < 0.05, "median {median}");
    }

    #[test]
    fn cauchy_kernel_sampler_is_laplace() {
        // Laplace(0,1): E|nu| = 1, Var = 2.
        let fs = sample_features(KernelKind::Cauchy, 1.0, 2, 100_000, 6).unwrap();
        let vals: Vec<f64> = fs.features.iter().map(|f| f.nu[0]).collect();
        let mean_abs = vals.iter().map(|v| v.abs()).sum::<f64>() / vals.len() as f64;
        let var = vals.iter().map(|v| v * v).sum::<f64>() / vals.len() as f64;
        assert!((mean_abs - 1.0).abs() < 0.02, "mean |nu| = {mean_abs}");
        assert!((var - 2.0).abs() < 0.05, "second moment {var}");
    }

    #[test]
    fn sampler_is_deterministic() {
        let a = sample_features(KernelKind::Gaussian, 1.3, 2, 50, 77).unwrap();
        let b = sample_features(KernelKind::Gaussian, 1.3, 2, 50, 77).unwrap();
        assert_eq!(a, b);
        let c = sample_orf_features(1.3, 2, 50, 77).unwrap();
        let d = sample_orf_features(1.3, 2, 50, 77).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn orf_block_rows_are_orthogonal() {
        let dim = 2;
        let fs = sample_orf_features(1.7, dim, 20, 3).unwrap();
        for block in fs.features.chunks(dim) {
            for i in 0..block.len() {
                for j in (i + 1)..block.len() {
                    let ni = dot(&block[i].nu, &block[i].nu).sqrt();
                    let nj = dot(&block[j].nu, &block[j].nu).sqrt();
                    let cos = dot(&block[i].nu, &block[j].nu) / (ni * nj);
                    assert!(cos.abs() <= 1e-12, "block rows not orthogonal: {cos}");
                }
            }
        }
    }

    #[test]
    fn orf_norm_second_moment() {
        // E||nu||^2 = sigma^2 * d for chi(d)-scaled orthonormal rows.
        let sigma = 1.3;
        let fs = sample_orf_features(sigma, 2, 10_000, 9).unwrap();
        let mean_sq = fs.features.iter().map(|f| dot(&f.nu, &f.nu)).sum::<f64>() / fs.len() as f64;
        let expected = sigma * sigma * 2.0;
        assert!(
            (mean_sq - expected).abs() < 0.03 * expected,
            "E||nu||^2 = {mean_sq}, expected {expected}"
        );
    }

    #[test]
    fn householder_q_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for d in [2usize, 3, 5] {
            let a: Vec<f64> = (0..d * d)
                .map(|_| StandardNormal.sample(&mut rng))
                .collect();
            let q = householder_q(&a, d);
            for i in 0..d {
                for j in 0..d {
                    let prod: f64 = (0..d).map(|k| q[i * d + k] * q[j * d + k]).sum();
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(prod, expected, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn transform_at_origin() {
        let data = dataset_from(&[[0.0, 0.0]]);
        let fs = FeatureSet {
            features: vec![
                SpectralFeature {
                    nu: vec![1.4, -0.3],
                    b: 0.0
                };
                4
            ],
            kernel_kind: KernelKind::Gaussian,
            map_kind: MapKind::Cosine,
            sigma: 1.0,
        };
        let zm = transform(&data, &fs).unwrap();
        for v in zm.z.iter() {
            assert_abs_diff_eq!(*v, std::f64::consts::SQRT_2 / 2.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn transform_hand_case() {
        let data = dataset_from(&[[1.0, 0.0]]);
        let fs = FeatureSet {
            features: vec![SpectralFeature {
                nu: vec![std::f64::consts::PI, 0.0],
                b: 0.0,
            }],
            kernel_kind: KernelKind::Gaussian,
            map_kind: MapKind::Cosine,
            sigma: 1.0,
        };
        let zm = transform(&data, &fs).unwrap();
        assert_abs_diff_eq!(zm.z[[0, 0]], -std::f64::consts::SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn cos_sin_pair_pythagorean_identity() {
        let data = dataset_from(&[[0.3, 0.8], [5.5, 2.0], [9.1, 9.9]]);
        let fs = sample_orf_features(1.1, 2, 6, 21).unwrap();
        let zm = transform(&data, &fs).unwrap();
        let m = fs.len() as f64;
        for i in 0..data.len() {
            for f in 0..fs.len() {
                let c = zm.z[[i, 2 * f]];
                let s = zm.z[[i, 2 * f + 1]];
                assert_abs_diff_eq!(m * (c * c + s * s), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn cosine_entries_bounded() {
        let data = dataset_from(&[[1.0, 2.0], [3.5, 0.1], [8.0, 6.5]]);
        let fs = sample_features(KernelKind::Gaussian, 1.5, 2, 32, 13).unwrap();
        let zm = transform(&data, &fs).unwrap();
        let bound = std::f64::consts::SQRT_2 / (fs.len() as f64).sqrt();
        for v in zm.z.iter() {
            assert!(v.abs() <= bound + 1e-15);
        }
    }

    #[test]
    fn estimator_at_identical_points_near_one() {
        let fs = sample_features(KernelKind::Gaussian, 1.0, 2, 10_000, 17).unwrap();
        let x = [2.0, 3.0];
        let est = approximate_kernel(&x, &x, &fs);
        assert!((est - 1.0).abs() < 0.03, "estimate {est}");
    }

    #[test]
    fn estimator_matches_gaussian_closed_form() {
        // sigma = 1, ||x - x'|| = 1 -> exp(-1/2).
        let fs = sample_features(KernelKind::Gaussian, 1.0, 2, 10_000, 23).unwrap();
        let est = approximate_kernel(&[0.0, 0.0], &[1.0, 0.0], &fs);
        let truth = (-0.5f64).exp();
        assert!((est - truth).abs() < 0.03, "estimate {est}, truth {truth}");
    }

    #[test]
    fn estimator_matches_laplacian_closed_form() {
        // ||x - x'||_1 = 1 -> exp(-1).
        let fs = sample_features(KernelKind::Laplacian, 1.0, 2, 10_000, 29).unwrap();
        let est = approximate_kernel(&[0.5, 0.5], &[1.5, 0.5], &fs);
        let truth = (-1.0f64).exp();
        assert!((est - truth).abs() < 0.03, "estimate {est}, truth {truth}");
    }

    #[test]
    fn estimator_matches_orf_gaussian() {
        let sigma = 1.3;
        let fs = sample_orf_features(sigma, 2, 10_000, 31).unwrap();
        let (x, y) = ([1.0f64, 2.0], [1.6f64, 1.2]);
        let d2 = (x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2);
        let truth = (-sigma * sigma * d2 / 2.0).exp();
        let est = approximate_kernel(&x, &y, &fs);
        assert!((est - truth).abs() < 0.03, "estimate {est}, truth {truth}");
    }

    #[test]
    fn monte_carlo_error_shrinks_with_m() {
        let (x, y) = ([1.0f64, 4.0], [2.0f64, 2.5]);
        let d2 = (x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2);
        let truth = (-d2 / 2.0f64).exp();
        let mut mean_errs = Vec::new();
        for (mi, m) in [100usize, 1000, 10_000].into_iter().enumerate() {
            let mut err = 0.0;
            for rep in 0..50u64 {
                let fs = sample_features(KernelKind::Gaussian, 1.0, 2, m, 1000 * mi as u64 + rep)
                    .unwrap();
                err += (approximate_kernel(&x, &y, &fs) - truth).abs();
            }
            mean_errs.push(err / 50.0);
        }
        assert!(
            mean_errs[0] > mean_errs[1] && mean_errs[1] > mean_errs[2],
            "errors not decreasing: {mean_errs:?}"
        );
    }

    #[test]
    fn gram_of_transform_matches_estimator() {
        let data = dataset_from(&[[0.0, 0.0], [1.0, 0.5], [3.0, 2.0], [7.7, 9.1]]);
        for fs in [
            sample_features(KernelKind::Gaussian, 1.2, 2, 64, 41).unwrap(),
            sample_orf_features(1.2, 2, 64, 41).unwrap(),
        ] {
            let zm = transform(&data, &fs).unwrap();
            let gram = zm.z.dot(&zm.z.t());
            for i in 0..data.len() {
                for j in 0..data.len() {
                    let est = approximate_kernel(&data.points[i].x, &data.points[j].x, &fs);
                    assert_abs_diff_eq!(gram[[i, j]], est, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn linear_map_requires_linear_kernel() {
        let fs = FeatureSet {
            features: vec![SpectralFeature {
                nu: vec![1.0, 0.0],
                b: 0.0,
            }],
            kernel_kind: KernelKind::Gaussian,
            map_kind: MapKind::Linear,
            sigma: 1.0,
        };
        assert!(fs.validate().is_err());
    }

    #[test]
    fn unknown_kernel_name_rejected() {
        assert!(matches!(
            "sigmoid".parse::<KernelKind>(),
            Err(Error::Parse(_))
        ));
        assert_eq!(
            "Gaussian".parse::<KernelKind>().unwrap(),
            KernelKind::Gaussian
        );
    }

    #[test]
    fn feature_csv_has_expected_shape() {
        let fs = sample_features(KernelKind::Gaussian, 1.0, 2, 3, 1).unwrap();
        let mut buf = Vec::new();
        fs.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "nu1,nu2,b");
        assert_eq!(lines.len(), 4);
    }

    proptest! {
        #[test]
        fn estimator_is_symmetric(
            x0 in -10.0..10.0f64, x1 in -10.0..10.0f64,
            y0 in -10.0..10.0f64, y1 in -10.0..10.0f64,
            seed in 0..1000u64,
        ) {
            let fs = sample_features(KernelKind::Gaussian, 1.0, 2, 16, seed).unwrap();
            let a = approximate_kernel(&[x0, x1], &[y0, y1], &fs);
            let b = approximate_kernel(&[y0, y1], &[x0, x1], &fs);
            prop_assert_eq!(a, b);
        }
    }
}
