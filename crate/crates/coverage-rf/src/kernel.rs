//! Exact kernel logistic regression over the full Gram matrix.
//!
//! The reference the random-feature methods are measured against. The model
//! is `f(x) = sum_i alpha_i k(x_i, x) + b` with RKHS-norm regularization
//! `(lambda/2) alpha^T K alpha`, trained by the same deterministic optimizer
//! as the feature-space models. Building and optimizing over the `n x n`
//! Gram matrix is what makes this baseline O(n^2) in space and O(n^3) in
//! time as `n` grows.

use ndarray::{Array1, Array2};

use crate::classifier::{DecisionFunction, OneVsAll, GRAD_TOL};
use crate::features::KernelKind;
use crate::optim::{minimize, Minimized, Objective};
use crate::scenario::{Dataset, Label};
use crate::{Error, Point, Result};

/// Closed-form kernel value.
///
/// `sigma` scales only the Gaussian kernel, `k = exp(-sigma^2 ||x-x'||^2/2)`;
/// the Laplacian is `exp(-||x-x'||_1)`, the Cauchy kernel is the product
/// `prod_l 1/(1+(x_l-x'_l)^2)` (normalized so `k(x,x) = 1`), and the linear
/// kernel is the plain inner product.
pub fn kernel_value(kind: KernelKind, sigma: f64, a: &[f64], b: &[f64]) -> f64 {
    match kind {
        KernelKind::Gaussian => {
            let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
            (-sigma * sigma * d2 / 2.0).exp()
        }
        KernelKind::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
        KernelKind::Laplacian => {
            let d1: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum();
            (-d1).exp()
        }
        KernelKind::Cauchy => a
            .iter()
            .zip(b)
            .map(|(x, y)| 1.0 / (1.0 + (x - y) * (x - y)))
            .product(),
    }
}

/// The `n x n` matrix of pairwise kernel values.
pub fn gram_matrix(data: &Dataset, kind: KernelKind, sigma: f64) -> Result<Array2<f64>> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if data
        .points
        .iter()
        .any(|p| !(p.x[0].is_finite() && p.x[1].is_finite()))
    {
        return Err(Error::NonFinite("sensor coordinates"));
    }
    let n = data.len();
    let mut k = Array2::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let v = kernel_value(kind, sigma, &data.points[i].x, &data.points[j].x);
            k[[i, j]] = v;
            k[[j, i]] = v;
        }
    }
    Ok(k)
}

/// The Gram-space logistic objective over the flat parameters
/// `[alpha_1..alpha_n, bias]`.
pub struct KernelLogisticProblem<'a> {
    pub k: &'a Array2<f64>,
    pub y: &'a Array1<f64>,
    pub reg_lambda: f64,
}

impl Objective for KernelLogisticProblem<'_> {
    fn dim(&self) -> usize {
        self.k.nrows() + 1
    }

    fn value(&self, x: &Array1<f64>) -> f64 {
        let n = self.k.nrows();
        let alpha = x.slice(ndarray::s![..n]);
        let bias = x[n];
        let ka = self.k.dot(&alpha);
        let loss: f64 = self
            .y
            .iter()
            .zip(ka.iter())
            .map(|(&yi, &kai)| softplus(-yi * (kai + bias)))
            .sum::<f64>()
            / n as f64;
        loss + 0.5 * self.reg_lambda * alpha.dot(&ka)
    }

    fn gradient(&self, x: &Array1<f64>) -> Array1<f64> {
        self.value_and_gradient(x).1
    }

    fn value_and_gradient(&self, x: &Array1<f64>) -> (f64, Array1<f64>) {
        let n = self.k.nrows();
        let alpha = x.slice(ndarray::s![..n]).to_owned();
        let bias = x[n];
        let ka = self.k.dot(&alpha);

        let mut loss = 0.0;
        let weighted: Array1<f64> = self
            .y
            .iter()
            .zip(ka.iter())
            .map(|(&yi, &kai)| {
                let margin = yi * (kai + bias);
                loss += softplus(-margin);
                -yi * sigmoid(-margin) / n as f64
            })
            .collect();
        let value = loss / n as f64 + 0.5 * self.reg_lambda * alpha.dot(&ka);

        // grad_alpha = K (weighted + lambda * alpha), using K's symmetry.
        let inner = &weighted + &(self.reg_lambda * &alpha);
        let g_alpha = self.k.dot(&inner);
        let mut g = Array1::zeros(n + 1);
        g.slice_mut(ndarray::s![..n]).assign(&g_alpha);
        g[n] = weighted.sum();
        (value, g)
    }
}

fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// A trained kernel expansion for one binary task.
#[derive(Debug, Clone)]
pub struct GramModel {
    pub alpha: Array1<f64>,
    pub bias: f64,
    pub kernel_kind: KernelKind,
    pub sigma: f64,
    pub support_points: Vec<Point>,
    pub task_class: Label,
}

impl DecisionFunction for GramModel {
    fn decision_value(&self, x: &Point) -> f64 {
        let mut acc = self.bias;
        for (p, &a) in self.support_points.iter().zip(self.alpha.iter()) {
            acc += a * kernel_value(self.kernel_kind, self.sigma, p, x);
        }
        acc
    }
}

/// Trains kernel logistic regression on a precomputed Gram matrix.
#[allow(clippy::too_many_arguments)]
pub fn train_on_gram(
    k: &Array2<f64>,
    data: &Dataset,
    y: &Array1<f64>,
    kind: KernelKind,
    sigma: f64,
    reg_lambda: f64,
    opt_budget: usize,
    task_class: Label,
) -> Result<(GramModel, Minimized)> {
    let n = k.nrows();
    if n != y.len() || n != data.len() {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: y.len(),
        });
    }
    if !(y.iter().any(|&v| v > 0.0) && y.iter().any(|&v| v < 0.0)) {
        return Err(Error::SingleClass);
    }

    let problem = KernelLogisticProblem { k, y, reg_lambda };
    let out = minimize(&problem, Array1::zeros(problem.dim()), opt_budget, GRAD_TOL);
    let alpha = out.x.slice(ndarray::s![..n]).to_owned();
    let bias = out.x[n];
    Ok((
        GramModel {
            alpha,
            bias,
            kernel_kind: kind,
            sigma,
            support_points: data.points.iter().map(|p| p.x).collect(),
            task_class,
        },
        out,
    ))
}

/// Trains one binary kernel model from raw data (builds the Gram matrix).
pub fn train_kernel_logistic(
    data: &Dataset,
    y: &Array1<f64>,
    kind: KernelKind,
    sigma: f64,
    reg_lambda: f64,
    opt_budget: usize,
    task_class: Label,
) -> Result<GramModel> {
    let k = gram_matrix(data, kind, sigma)?;
    let (model, _) = train_on_gram(&k, data, y, kind, sigma, reg_lambda, opt_budget, task_class)?;
    Ok(model)
}

/// Trains the 3-class kernel model, building the Gram matrix once and
/// sharing it across the three binary tasks.
pub fn train_kernel_multiclass(
    data: &Dataset,
    kind: KernelKind,
    sigma: f64,
    reg_lambda: f64,
    opt_budget: usize,
) -> Result<OneVsAll<GramModel>> {
    let k = gram_matrix(data, kind, sigma)?;
    let mut scorers = Vec::with_capacity(3);
    for label in Label::ALL {
        let y = data.binary_labels(label);
        let (model, _) = train_on_gram(&k, data, &y, kind, sigma, reg_lambda, opt_budget, label)?;
        scorers.push((label, model));
    }
    OneVsAll::new(scorers)
}
