//! Synthetic two-base-station sensor fields.
//!
//! Each base station owns a star-shaped ground-truth coverage region: a base
//! radius perturbed by a handful of cosine harmonics, which produces the
//! irregular closed boundaries seen in real deployments where obstructions
//! bend the coverage edge. Sensors are dropped uniformly at random on the
//! square field and declare which station covers them, with declaration
//! errors concentrated near the boundaries.

use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Point, Result};

/// Three-way sensor declaration.
///
/// `Bs1` (+1) and `Bs2` (-1) mean strong coverage from that station; `NoCoverage`
/// (0) means neither station reaches the sensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(i8)]
pub enum Label {
    Bs1 = 1,
    NoCoverage = 0,
    Bs2 = -1,
}

impl Label {
    /// All labels in prediction tie-break order: +1, 0, -1.
    pub const ALL: [Label; 3] = [Label::Bs1, Label::NoCoverage, Label::Bs2];

    pub fn as_i8(self) -> i8 {
        self as i8
    }

    pub fn from_i8(v: i8) -> Option<Label> {
        match v {
            1 => Some(Label::Bs1),
            0 => Some(Label::NoCoverage),
            -1 => Some(Label::Bs2),
            _ => None,
        }
    }

    /// The two labels different from `self`, in `ALL` order.
    pub fn others(self) -> [Label; 2] {
        let mut out = [self; 2];
        let mut i = 0;
        for l in Label::ALL {
            if l != self {
                out[i] = l;
                i += 1;
            }
        }
        out
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_i8())
    }
}

/// One cosine perturbation of a station's boundary radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Harmonic {
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
}

/// A base station with a star-shaped coverage boundary.
///
/// The boundary radius at polar angle `phi` about the station center is
/// `base_radius + sum_j amplitude_j * cos(frequency_j * phi + phase_j)`.
/// Integer frequencies keep the boundary closed and smooth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseStation {
    pub center: Point,
    pub base_radius: f64,
    #[serde(default)]
    pub harmonics: Vec<Harmonic>,
}

impl BaseStation {
    pub fn boundary_radius(&self, phi: f64) -> f64 {
        self.base_radius
            + self
                .harmonics
                .iter()
                .map(|h| h.amplitude * (h.frequency * phi + h.phase).cos())
                .sum::<f64>()
    }

    /// Signed coverage margin of point `p`: positive inside the region,
    /// negative outside, zero on the boundary (radially measured).
    pub fn coverage_margin(&self, p: &Point) -> f64 {
        let dx = p[0] - self.center[0];
        let dy = p[1] - self.center[1];
        let dist = (dx * dx + dy * dy).sqrt();
        let phi = dy.atan2(dx);
        self.boundary_radius(phi) - dist
    }

    fn min_boundary_radius(&self) -> f64 {
        // Dense grid scan; the radius is a short cosine sum, so 4096 samples
        // resolve its minimum far beyond validation needs.
        const GRID: usize = 4096;
        (0..GRID)
            .map(|i| self.boundary_radius(2.0 * std::f64::consts::PI * i as f64 / GRID as f64))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Parameters of the synthetic sensor field.
///
/// The defaults describe a 10x10 field with two overlapping irregular cells
/// sized so that all three declaration classes are well represented, plus a
/// declaration-error process that concentrates flips near the boundaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Side length of the square field `[0, field_side]^2`.
    pub field_side: f64,
    pub n_train: usize,
    pub n_test: usize,
    /// Exactly two stations.
    pub base_stations: Vec<BaseStation>,
    /// Flip probability at zero distance from a boundary.
    pub label_noise_rate: f64,
    /// Length scale of the exponential decay of the flip probability.
    pub noise_decay_length: f64,
    pub rng_seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            field_side: 10.0,
            n_train: 2000,
            n_test: 1000,
            base_stations: vec![
                BaseStation {
                    center: [3.4, 5.2],
                    base_radius: 3.0,
                    harmonics: vec![
                        Harmonic {
                            amplitude: 0.45,
                            frequency: 3.0,
                            phase: 0.7,
                        },
                        Harmonic {
                            amplitude: 0.30,
                            frequency: 5.0,
                            phase: 2.1,
                        },
                    ],
                },
                BaseStation {
                    center: [7.1, 4.6],
                    base_radius: 2.4,
                    harmonics: vec![
                        Harmonic {
                            amplitude: 0.35,
                            frequency: 4.0,
                            phase: 0.3,
                        },
                        Harmonic {
                            amplitude: 0.25,
                            frequency: 7.0,
                            phase: 1.9,
                        },
                    ],
                },
            ],
            label_noise_rate: 0.27,
            noise_decay_length: 0.30,
            rng_seed: 7,
        }
    }
}

/// Finite and strictly positive; rejects NaN and infinities.
pub(crate) fn positive(v: f64) -> bool {
    v.is_finite() && v > 0.0
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if !positive(self.field_side) {
            return fail(format!(
                "field_side must be positive, got {}",
                self.field_side
            ));
        }
        if self.n_train < 1 {
            return fail("n_train must be at least 1".into());
        }
        if self.base_stations.len() != 2 {
            return fail(format!(
                "exactly 2 base stations are supported, got {}",
                self.base_stations.len()
            ));
        }
        for (k, bs) in self.base_stations.iter().enumerate() {
            if !positive(bs.base_radius) {
                return fail(format!("base_radius of station {k} must be positive"));
            }
            if bs
                .center
                .iter()
                .any(|c| !(0.0..=self.field_side).contains(c))
            {
                return fail(format!(
                    "center of station {k} lies outside [0, {}]^2",
                    self.field_side
                ));
            }
            if bs.min_boundary_radius() <= 0.0 {
                return fail(format!(
                    "boundary radius of station {k} goes nonpositive; harmonics too large"
                ));
            }
        }
        if !(0.0..=1.0).contains(&self.label_noise_rate) {
            return fail(format!(
                "label_noise_rate must lie in [0, 1], got {}",
                self.label_noise_rate
            ));
        }
        if !positive(self.noise_decay_length) {
            return fail("noise_decay_length must be positive".into());
        }
        Ok(())
    }

    /// Noise-free declaration at `p`: covered by one station wins outright,
    /// covered by both goes to the larger coverage margin (exact ties to
    /// BS1), covered by neither is `NoCoverage`.
    pub fn ground_truth(&self, p: &Point) -> Label {
        let m1 = self.base_stations[0].coverage_margin(p);
        let m2 = self.base_stations[1].coverage_margin(p);
        match (m1 >= 0.0, m2 >= 0.0) {
            (true, true) => {
                if m2 > m1 {
                    Label::Bs2
                } else {
                    Label::Bs1
                }
            }
            (true, false) => Label::Bs1,
            (false, true) => Label::Bs2,
            (false, false) => Label::NoCoverage,
        }
    }

    /// Radial distance from `p` to the nearest station boundary.
    pub fn boundary_margin(&self, p: &Point) -> f64 {
        self.base_stations
            .iter()
            .map(|bs| bs.coverage_margin(p).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

/// A sensor location and its (possibly erroneous) declaration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledPoint {
    pub x: Point,
    pub y: Label,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

/// An ordered collection of labeled sensors.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub points: Vec<LabeledPoint>,
    pub split: Split,
}

impl Dataset {
    pub fn new(points: Vec<LabeledPoint>, split: Split) -> Self {
        Dataset { points, split }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Sensor coordinates as an `n x 2` matrix.
    pub fn coords(&self) -> Array2<f64> {
        let mut m = Array2::zeros((self.len(), 2));
        for (i, p) in self.points.iter().enumerate() {
            m[[i, 0]] = p.x[0];
            m[[i, 1]] = p.x[1];
        }
        m
    }

    /// Labels recoded for the one-vs-all task detecting `target`:
    /// +1 where the label equals `target`, -1 elsewhere.
    pub fn binary_labels(&self, target: Label) -> Array1<f64> {
        self.points
            .iter()
            .map(|p| if p.y == target { 1.0 } else { -1.0 })
            .collect()
    }

    pub fn count(&self, label: Label) -> usize {
        self.points.iter().filter(|p| p.y == label).count()
    }

    /// Writes `x1,x2,y` rows. Floats use the shortest exact representation,
    /// so a read-back reproduces the dataset bit for bit.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x1,x2,y")?;
        for p in &self.points {
            writeln!(w, "{},{},{}", p.x[0], p.x[1], p.y.as_i8())?;
        }
        Ok(())
    }

    pub fn write_csv_path<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn read_csv<R: Read>(r: R, split: Split) -> Result<Dataset> {
        let mut lines = BufReader::new(r).lines();
        match lines.next() {
            Some(Ok(h)) if h.trim() == "x1,x2,y" => {}
            other => {
                return Err(Error::Parse(format!(
                    "expected header 'x1,x2,y', got {other:?}"
                )))
            }
        }
        let mut points = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split(',');
            let mut field = |name: &str| -> Result<f64> {
                it.next()
                    .ok_or_else(|| Error::Parse(format!("missing {name} in '{line}'")))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad {name} in '{line}': {e}")))
            };
            let x1 = field("x1")?;
            let x2 = field("x2")?;
            let y = field("y")? as i8;
            let y = Label::from_i8(y)
                .ok_or_else(|| Error::Parse(format!("label {y} not in {{-1,0,1}}")))?;
            points.push(LabeledPoint { x: [x1, x2], y });
        }
        Ok(Dataset::new(points, split))
    }
}

/// Draws the sensor field described by `config` and splits it into train and
/// test sets.
///
/// Locations are i.i.d. uniform on the square. Each sensor starts from its
/// noise-free geometric declaration; the label is then replaced by a
/// uniformly random different one with probability
/// `label_noise_rate * exp(-margin / noise_decay_length)`, where the margin
/// is the radial distance to the nearest boundary. Both splits see the same
/// error process. Output is a pure function of the config (seed included).
pub fn generate_scenario(config: &ScenarioConfig) -> Result<(Dataset, Dataset)> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let total = config.n_train + config.n_test;

    let mut points = Vec::with_capacity(total);
    for _ in 0..total {
        let x = [
            rng.gen_range(0.0..config.field_side),
            rng.gen_range(0.0..config.field_side),
        ];
        points.push(LabeledPoint {
            x,
            y: config.ground_truth(&x),
        });
    }

    for p in points.iter_mut() {
        let margin = config.boundary_margin(&p.x);
        let flip_prob = config.label_noise_rate * (-margin / config.noise_decay_length).exp();
        // Always consume one uniform per point so the location stream does
        // not depend on earlier flips' extra draws alone.
        let u: f64 = rng.gen();
        if u < flip_prob {
            let alternatives = p.y.others();
            p.y = alternatives[rng.gen_range(0..2usize)];
        }
    }

    let test = points.split_off(config.n_train);
    Ok((
        Dataset::new(points, Split::Train),
        Dataset::new(test, Split::Test),
    ))
}

/// Bandwidth heuristic: the reciprocal of the mean distance to the k-th
/// nearest neighbour (self excluded), computed exactly in O(n^2).
pub fn sigma_heuristic(data: &Dataset, k: usize) -> Result<f64> {
    let n = data.len();
    if k < 1 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    if n <= k {
        return Err(Error::TooFewPoints { n, k });
    }
    let mut sum = 0.0;
    let mut dists = vec![0.0f64; n - 1];
    for (i, pi) in data.points.iter().enumerate() {
        let mut m = 0;
        for (j, pj) in data.points.iter().enumerate() {
            if i == j {
                continue;
            }
            let dx = pi.x[0] - pj.x[0];
            let dy = pi.x[1] - pj.x[1];
            dists[m] = (dx * dx + dy * dy).sqrt();
            m += 1;
        }
        let (_, kth, _) = dists.select_nth_unstable_by(k - 1, |a, b| a.total_cmp(b));
        sum += *kth;
    }
    Ok(1.0 / (sum / n as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_disk_config(noise: f64) -> ScenarioConfig {
        ScenarioConfig {
            base_stations: vec![
                BaseStation {
                    center: [2.5, 5.0],
                    base_radius: 1.8,
                    harmonics: vec![],
                },
                BaseStation {
                    center: [7.5, 5.0],
                    base_radius: 1.4,
                    harmonics: vec![],
                },
            ],
            label_noise_rate: noise,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn default_config_sizes_and_all_labels() {
        let cfg = ScenarioConfig::default();
        let (train, test) = generate_scenario(&cfg).unwrap();
        assert_eq!(train.len(), 2000);
        assert_eq!(test.len(), 1000);
        for l in Label::ALL {
            assert!(train.count(l) > 0, "label {l} missing from train split");
        }
    }

    #[test]
    fn noiseless_disks_match_direct_distance_test() {
        let cfg = two_disk_config(0.0);
        let (train, test) = generate_scenario(&cfg).unwrap();
        for p in train.points.iter().chain(test.points.iter()) {
            let d1 = ((p.x[0] - 2.5).powi(2) + (p.x[1] - 5.0).powi(2)).sqrt();
            let d2 = ((p.x[0] - 7.5).powi(2) + (p.x[1] - 5.0).powi(2)).sqrt();
            let expected = if d1 <= 1.8 {
                Label::Bs1
            } else if d2 <= 1.4 {
                Label::Bs2
            } else {
                Label::NoCoverage
            };
            assert_eq!(p.y, expected, "at {:?}", p.x);
        }
    }

    // Independent recount: recompute clean labels and flip probabilities with
    // local geometry code, then check the observed flip count against its
    // binomial mean within three standard deviations.
    #[test]
    fn flip_fraction_matches_expectation() {
        let cfg = ScenarioConfig::default();
        let (train, test) = generate_scenario(&cfg).unwrap();

        let radius = |bs: &BaseStation, phi: f64| -> f64 {
            let mut r = bs.base_radius;
            for h in &bs.harmonics {
                r += h.amplitude * (h.frequency * phi + h.phase).cos();
            }
            r
        };
        let margin_of = |bs: &BaseStation, x: &Point| -> f64 {
            let (dx, dy) = (x[0] - bs.center[0], x[1] - bs.center[1]);
            radius(bs, dy.atan2(dx)) - (dx * dx + dy * dy).sqrt()
        };

        let mut expected = 0.0;
        let mut variance = 0.0;
        let mut observed = 0usize;
        for p in train.points.iter().chain(test.points.iter()) {
            let m1 = margin_of(&cfg.base_stations[0], &p.x);
            let m2 = margin_of(&cfg.base_stations[1], &p.x);
            let clean = match (m1 >= 0.0, m2 >= 0.0) {
                (true, true) => {
                    if m2 > m1 {
                        Label::Bs2
                    } else {
                        Label::Bs1
                    }
                }
                (true, false) => Label::Bs1,
                (false, true) => Label::Bs2,
                (false, false) => Label::NoCoverage,
            };
            let margin = m1.abs().min(m2.abs());
            let prob = cfg.label_noise_rate * (-margin / cfg.noise_decay_length).exp();
            expected += prob;
            variance += prob * (1.0 - prob);
            if p.y != clean {
                observed += 1;
            }
        }
        let dev = (observed as f64 - expected).abs();
        assert!(
            dev <= 3.0 * variance.sqrt(),
            "observed {observed} flips, expected {expected:.1} +- {:.1}",
            3.0 * variance.sqrt()
        );
        // The default field should be noisy but usable.
        assert!(expected > 0.0);
    }

    #[test]
    fn determinism_bit_identical() {
        let cfg = ScenarioConfig::default();
        let a = generate_scenario(&cfg).unwrap();
        let b = generate_scenario(&cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn monotone_noise_rate() {
        let mut flips = Vec::new();
        for rate in [0.1, 0.4] {
            let mut total = 0usize;
            for seed in 0..12u64 {
                let noisy = ScenarioConfig {
                    label_noise_rate: rate,
                    rng_seed: seed,
                    n_train: 500,
                    n_test: 0,
                    ..ScenarioConfig::default()
                };
                let clean = ScenarioConfig {
                    label_noise_rate: 0.0,
                    ..noisy.clone()
                };
                let (train_n, _) = generate_scenario(&noisy).unwrap();
                let (train_c, _) = generate_scenario(&clean).unwrap();
                total += train_n
                    .points
                    .iter()
                    .zip(&train_c.points)
                    .filter(|(a, b)| a.y != b.y)
                    .count();
            }
            flips.push(total);
        }
        assert!(
            flips[1] >= flips[0],
            "flip counts {flips:?} not monotone in rate"
        );
    }

    #[test]
    fn sigma_collinear_points() {
        let points = (0..3)
            .map(|i| LabeledPoint {
                x: [i as f64, 0.0],
                y: Label::NoCoverage,
            })
            .collect();
        let data = Dataset::new(points, Split::Train);
        assert_eq!(sigma_heuristic(&data, 1).unwrap(), 1.0);
    }

    #[test]
    fn sigma_matches_brute_force_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let points: Vec<LabeledPoint> = (0..100)
            .map(|_| LabeledPoint {
                x: [rng.gen::<f64>(), rng.gen::<f64>()],
                y: Label::NoCoverage,
            })
            .collect();
        let data = Dataset::new(points.clone(), Split::Train);
        let k = 5;

        // Oracle: full sort of every pairwise distance row.
        let mut sum = 0.0;
        for (i, pi) in points.iter().enumerate() {
            let mut row: Vec<f64> = points
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, pj)| ((pi.x[0] - pj.x[0]).powi(2) + (pi.x[1] - pj.x[1]).powi(2)).sqrt())
                .collect();
            row.sort_by(|a, b| a.total_cmp(b));
            sum += row[k - 1];
        }
        let oracle = 1.0 / (sum / points.len() as f64);

        assert_eq!(sigma_heuristic(&data, k).unwrap(), oracle);
    }

    #[test]
    fn sigma_rejects_small_datasets() {
        let points = vec![
            LabeledPoint {
                x: [0.0, 0.0],
                y: Label::Bs1
            };
            10
        ];
        let data = Dataset::new(points, Split::Train);
        assert!(matches!(
            sigma_heuristic(&data, 10),
            Err(Error::TooFewPoints { n: 10, k: 10 })
        ));
    }

    #[test]
    fn rejects_degenerate_boundary() {
        let mut cfg = ScenarioConfig::default();
        cfg.base_stations[0].harmonics = vec![Harmonic {
            amplitude: 5.0,
            frequency: 2.0,
            phase: 0.0,
        }];
        assert!(matches!(
            generate_scenario(&cfg),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn rejects_center_outside_field() {
        let mut cfg = ScenarioConfig::default();
        cfg.base_stations[1].center = [12.0, 5.0];
        assert!(matches!(
            generate_scenario(&cfg),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn csv_round_trip() {
        let cfg = ScenarioConfig {
            n_train: 50,
            n_test: 0,
            ..ScenarioConfig::default()
        };
        let (train, _) = generate_scenario(&cfg).unwrap();
        let mut buf = Vec::new();
        train.write_csv(&mut buf).unwrap();
        let back = Dataset::read_csv(buf.as_slice(), Split::Train).unwrap();
        assert_eq!(train, back);
    }
}
