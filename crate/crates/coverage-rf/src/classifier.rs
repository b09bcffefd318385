//! Regularized logistic regression and the one-vs-all 3-class predictor.
//!
//! Each binary task minimizes the standard logistic loss in its numerically
//! stable softplus form,
//!
//! ```text
//! (1/n) sum_i log(1 + exp(-y_i (z_i^T theta + b))) + (lambda/2) ||theta||^2
//! ```
//!
//! with an explicit unregularized bias: the cosine expansion has no constant
//! offset of its own and the no-coverage class occupies most of the field,
//! so the intercept has to carry the imbalance. Three binary detectors (one
//! per label) combine by score argmax.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::features::{FeatureMatrix, FeatureSet, KernelKind, MapKind, SpectralFeature};
use crate::optim::{minimize, Minimized, Objective};
use crate::scenario::{Dataset, Label};
use crate::{Error, Point, Result};

/// Gradient-norm stopping tolerance shared by all trainings.
pub const GRAD_TOL: f64 = 1e-6;

/// Default ridge strength on the feature weights.
pub const DEFAULT_REG_LAMBDA: f64 = 1e-4;

/// Default iteration budget for the optimizer.
pub const DEFAULT_OPT_BUDGET: usize = 500;

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

/// The feature-space logistic objective over the flat parameters
/// `[theta_1..theta_p, bias]`.
pub struct LogisticProblem<'a> {
    pub z: &'a Array2<f64>,
    pub y: &'a Array1<f64>,
    pub reg_lambda: f64,
}

impl LogisticProblem<'_> {
    fn margins(&self, x: &Array1<f64>) -> Array1<f64> {
        let (theta, bias) = split(x);
        let mut f = self.z.dot(&theta);
        f += bias;
        f
    }
}

fn split(x: &Array1<f64>) -> (Array1<f64>, f64) {
    let p = x.len() - 1;
    (x.slice(ndarray::s![..p]).to_owned(), x[p])
}

impl Objective for LogisticProblem<'_> {
    fn dim(&self) -> usize {
        self.z.ncols() + 1
    }

    fn value(&self, x: &Array1<f64>) -> f64 {
        let (theta, _) = split(x);
        let f = self.margins(x);
        let n = self.y.len() as f64;
        let loss: f64 = self
            .y
            .iter()
            .zip(f.iter())
            .map(|(&yi, &fi)| softplus(-yi * fi))
            .sum::<f64>()
            / n;
        loss + 0.5 * self.reg_lambda * theta.dot(&theta)
    }

    fn gradient(&self, x: &Array1<f64>) -> Array1<f64> {
        self.value_and_gradient(x).1
    }

    fn value_and_gradient(&self, x: &Array1<f64>) -> (f64, Array1<f64>) {
        let (theta, _) = split(x);
        let f = self.margins(x);
        let n = self.y.len() as f64;

        let mut loss = 0.0;
        // d/df softplus(-y f) = -y * sigmoid(-y f)
        let weighted: Array1<f64> = self
            .y
            .iter()
            .zip(f.iter())
            .map(|(&yi, &fi)| {
                loss += softplus(-yi * fi);
                -yi * sigmoid(-yi * fi) / n
            })
            .collect();
        let value = loss / n + 0.5 * self.reg_lambda * theta.dot(&theta);

        let g_theta = self.z.t().dot(&weighted) + &(self.reg_lambda * &theta);
        let g_bias = weighted.sum();
        let mut g = Array1::zeros(x.len());
        g.slice_mut(ndarray::s![..theta.len()]).assign(&g_theta);
        g[theta.len()] = g_bias;
        (value, g)
    }
}

/// One trained binary detector.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryModel {
    pub theta: Array1<f64>,
    pub bias: f64,
    pub reg_lambda: f64,
    /// The label this model detects against the other two.
    pub task_class: Label,
}

/// Trains one binary logistic model on a transformed matrix.
///
/// Deterministic: the optimizer starts from zero and stops at gradient norm
/// [`GRAD_TOL`] or after `opt_budget` accepted iterations, whichever comes
/// first, and the objective never increases along the way.
pub fn train_binary(
    zm: &FeatureMatrix,
    y: &Array1<f64>,
    reg_lambda: f64,
    opt_budget: usize,
    task_class: Label,
) -> Result<BinaryModel> {
    let (fit, _) = train_binary_traced(zm, y, reg_lambda, opt_budget, task_class)?;
    Ok(fit)
}

/// [`train_binary`] that also returns the optimizer run (objective trace,
/// final gradient norm).
pub fn train_binary_traced(
    zm: &FeatureMatrix,
    y: &Array1<f64>,
    reg_lambda: f64,
    opt_budget: usize,
    task_class: Label,
) -> Result<(BinaryModel, Minimized)> {
    let n = zm.z.nrows();
    if n != y.len() {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: y.len(),
        });
    }
    if n < 2 {
        return Err(Error::EmptyDataset);
    }
    if !(y.iter().any(|&v| v > 0.0) && y.iter().any(|&v| v < 0.0)) {
        return Err(Error::SingleClass);
    }
    if zm.z.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("feature matrix"));
    }

    let problem = LogisticProblem {
        z: &zm.z,
        y,
        reg_lambda,
    };
    let out = minimize(&problem, Array1::zeros(problem.dim()), opt_budget, GRAD_TOL);
    let (theta, bias) = split(&out.x);
    Ok((
        BinaryModel {
            theta,
            bias,
            reg_lambda,
            task_class,
        },
        out,
    ))
}

/// Anything that can score a point for one class.
pub trait DecisionFunction {
    fn decision_value(&self, x: &Point) -> f64;
}

/// A binary model bound to the feature set it was trained on.
#[derive(Debug, Clone)]
pub struct FeatureClassifier {
    pub model: BinaryModel,
    pub features: FeatureSet,
}

impl DecisionFunction for FeatureClassifier {
    fn decision_value(&self, x: &Point) -> f64 {
        let row = self.features.feature_row(x);
        let dot: f64 = row
            .iter()
            .zip(self.model.theta.iter())
            .map(|(a, b)| a * b)
            .sum();
        dot + self.model.bias
    }
}

/// One-vs-all composition: three per-class scorers, prediction by argmax
/// with ties broken in the class order +1, 0, -1.
#[derive(Debug, Clone)]
pub struct OneVsAll<S> {
    scorers: Vec<(Label, S)>,
}

/// The random-feature 3-class coverage model.
pub type MultiClassModel = OneVsAll<FeatureClassifier>;

impl<S: DecisionFunction> OneVsAll<S> {
    /// Builds the composite from per-class scorers; each of the three labels
    /// must appear exactly once. Scorers are reordered to +1, 0, -1.
    pub fn new(mut scorers: Vec<(Label, S)>) -> Result<Self> {
        let mut seen = [false; 3];
        for (label, _) in &scorers {
            let slot = Label::ALL
                .iter()
                .position(|l| l == label)
                .expect("label in ALL");
            if seen[slot] {
                return Err(Error::InvalidConfig(format!(
                    "duplicate scorer for label {label}"
                )));
            }
            seen[slot] = true;
        }
        if seen != [true; 3] {
            return Err(Error::InvalidConfig("need one scorer per label".into()));
        }
        scorers.sort_by_key(|(label, _)| {
            Label::ALL
                .iter()
                .position(|l| l == label)
                .expect("label in ALL")
        });
        Ok(OneVsAll { scorers })
    }

    pub fn scorers(&self) -> &[(Label, S)] {
        &self.scorers
    }

    /// Per-class decision values in +1, 0, -1 order.
    pub fn decision_values(&self, x: &Point) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (slot, (_, s)) in self.scorers.iter().enumerate() {
            out[slot] = s.decision_value(x);
        }
        out
    }

    pub fn predict(&self, x: &Point) -> Label {
        let mut best = self.scorers[0].0;
        let mut best_value = f64::NEG_INFINITY;
        for (label, scorer) in &self.scorers {
            let v = scorer.decision_value(x);
            if v > best_value {
                best_value = v;
                best = *label;
            }
        }
        best
    }

    /// Fraction of points whose prediction matches the declared label.
    pub fn accuracy(&self, data: &Dataset) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let correct = data
            .points
            .iter()
            .filter(|p| self.predict(&p.x) == p.y)
            .count();
        Ok(correct as f64 / data.len() as f64)
    }
}

impl MultiClassModel {
    /// Writes the model as a flat text block per class: the detected label,
    /// ridge strength, bias, weight vector, feature-map header, and one
    /// `feature nu1 nu2 b` line per random feature. Floats use the shortest
    /// exact representation, so a read-back replays predictions bit for bit.
    pub fn save<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "coverage-rf-model 1")?;
        for (label, fc) in &self.scorers {
            writeln!(w, "class {}", label.as_i8())?;
            writeln!(w, "reg_lambda {}", fc.model.reg_lambda)?;
            writeln!(w, "bias {}", fc.model.bias)?;
            let theta: Vec<String> = fc.model.theta.iter().map(|v| v.to_string()).collect();
            writeln!(w, "theta {}", theta.join(" "))?;
            writeln!(
                w,
                "features {} {} {}",
                fc.features.kernel_kind,
                match fc.features.map_kind {
                    MapKind::Cosine => "cosine",
                    MapKind::CosSinPair => "cos_sin_pair",
                    MapKind::Linear => "linear",
                },
                fc.features.sigma
            )?;
            for f in &fc.features.features {
                writeln!(w, "feature {} {} {}", f.nu[0], f.nu[1], f.b)?;
            }
            writeln!(w, "end")?;
        }
        Ok(())
    }

    pub fn save_path<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.save(std::io::BufWriter::new(f))
    }

    pub fn load<R: Read>(r: R) -> Result<MultiClassModel> {
        let mut lines = BufReader::new(r).lines();
        match lines.next() {
            Some(Ok(h)) if h.trim() == "coverage-rf-model 1" => {}
            other => return Err(Error::Parse(format!("bad model header: {other:?}"))),
        }

        let bad = |msg: String| Error::Parse(msg);
        let mut scorers = Vec::new();
        let mut pending: Option<(Label, f64, f64, Vec<f64>, FeatureSet)> = None;
        for line in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
            match key {
                "class" => {
                    if pending.is_some() {
                        return Err(bad("class block not closed with 'end'".into()));
                    }
                    let value: i8 = rest
                        .parse()
                        .map_err(|e| bad(format!("bad class '{rest}': {e}")))?;
                    let label = Label::from_i8(value)
                        .ok_or_else(|| bad(format!("class {value} not in {{-1,0,1}}")))?;
                    pending = Some((
                        label,
                        0.0,
                        0.0,
                        Vec::new(),
                        FeatureSet {
                            features: Vec::new(),
                            kernel_kind: KernelKind::Gaussian,
                            map_kind: MapKind::Cosine,
                            sigma: 1.0,
                        },
                    ));
                }
                "reg_lambda" | "bias" => {
                    let slot = pending
                        .as_mut()
                        .ok_or_else(|| bad("value outside class".into()))?;
                    let value: f64 = rest
                        .parse()
                        .map_err(|e| bad(format!("bad {key} '{rest}': {e}")))?;
                    if key == "reg_lambda" {
                        slot.1 = value;
                    } else {
                        slot.2 = value;
                    }
                }
                "theta" => {
                    let slot = pending
                        .as_mut()
                        .ok_or_else(|| bad("theta outside class".into()))?;
                    slot.3 = rest
                        .split_whitespace()
                        .map(|t| t.parse().map_err(|e| bad(format!("bad theta '{t}': {e}"))))
                        .collect::<Result<Vec<f64>>>()?;
                }
                "features" => {
                    let slot = pending
                        .as_mut()
                        .ok_or_else(|| bad("features outside class".into()))?;
                    let parts: Vec<&str> = rest.split_whitespace().collect();
                    if parts.len() != 3 {
                        return Err(bad(format!("bad features line '{rest}'")));
                    }
                    slot.4.kernel_kind = parts[0].parse()?;
                    slot.4.map_kind = match parts[1] {
                        "cosine" => MapKind::Cosine,
                        "cos_sin_pair" => MapKind::CosSinPair,
                        "linear" => MapKind::Linear,
                        other => return Err(bad(format!("unknown map kind '{other}'"))),
                    };
                    slot.4.sigma = parts[2]
                        .parse()
                        .map_err(|e| bad(format!("bad sigma '{}': {e}", parts[2])))?;
                }
                "feature" => {
                    let slot = pending
                        .as_mut()
                        .ok_or_else(|| bad("feature outside class".into()))?;
                    let vals: Vec<f64> = rest
                        .split_whitespace()
                        .map(|t| {
                            t.parse()
                                .map_err(|e| bad(format!("bad feature '{t}': {e}")))
                        })
                        .collect::<Result<Vec<f64>>>()?;
                    if vals.len() != 3 {
                        return Err(bad(format!("feature line needs nu1 nu2 b, got '{rest}'")));
                    }
                    slot.4.features.push(SpectralFeature {
                        nu: vec![vals[0], vals[1]],
                        b: vals[2],
                    });
                }
                "end" => {
                    let (label, reg_lambda, bias, theta, features) = pending
                        .take()
                        .ok_or_else(|| bad("'end' without class".into()))?;
                    if theta.len() != features.column_count() {
                        return Err(bad(format!(
                            "theta length {} does not match {} feature columns",
                            theta.len(),
                            features.column_count()
                        )));
                    }
                    scorers.push((
                        label,
                        FeatureClassifier {
                            model: BinaryModel {
                                theta: Array1::from_vec(theta),
                                bias,
                                reg_lambda,
                                task_class: label,
                            },
                            features,
                        },
                    ));
                }
                other => return Err(bad(format!("unknown model line '{other}'"))),
            }
        }
        if pending.is_some() {
            return Err(bad("trailing unclosed class block".into()));
        }
        OneVsAll::new(scorers)
    }

    pub fn load_path<P: AsRef<Path>>(path: P) -> Result<MultiClassModel> {
        Self::load(std::fs::File::open(path)?)
    }
}
