//! Reward-generating environments.
//!
//! Covers the stochastic K-arm setting with the four bounded reward families
//! (Bernoulli, truncated normal, Beta, triangular), the adversarial two-arm
//! instance used by the NPB lower-bound experiments, Gaussian-linear arms,
//! and a one-vs-all contextual classification environment backed by a file
//! or a synthetic generator.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::RngCore;
use statrs::function::erf::erf;

use crate::dist::{sample_beta, sample_gaussian, RngStream};
use crate::error::{Error, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / SQRT_2))
}

/// An arm's reward-generating distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum RewardModel {
    /// Reward 1 with probability `mean`, else 0.
    Bernoulli { mean: f64 },
    /// N(mean, stddev^2) restricted to [0, 1] by rejection.
    TruncatedNormal { mean: f64, stddev: f64 },
    /// Beta(alpha, beta) on [0, 1].
    Beta { alpha: f64, beta: f64 },
    /// Triangular on [0, 1] with the given mode; its mean is `(1 + mode) / 3`.
    Triangular { mode: f64 },
    /// Always `value`.
    Deterministic { value: f64 },
    /// `<theta, x> + N(0, noise^2)`; featureless draws use `x = 1` and
    /// require a one-dimensional parameter.
    GaussianLinear { theta: Vec<f64>, noise: f64 },
}

impl RewardModel {
    /// A triangular arm whose mean is as close to `mean` as the [0, 1]
    /// support allows: the mode is `clamp(3*mean - 1, 0, 1)`, so the achieved
    /// mean is `clamp(mean, 1/3, 2/3)`. Regret is always measured against
    /// the achieved mean.
    pub fn triangular_from_mean(mean: f64) -> Self {
        RewardModel::Triangular {
            mode: (3.0 * mean - 1.0).clamp(0.0, 1.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match self {
            RewardModel::Bernoulli { mean } => {
                if !(0.0..=1.0).contains(mean) {
                    return bad(format!("bernoulli mean {mean} outside [0,1]"));
                }
            }
            RewardModel::TruncatedNormal { mean, stddev } => {
                if !(0.0..=1.0).contains(mean) {
                    return bad(format!("truncated-normal location {mean} outside [0,1]"));
                }
                if !stddev.is_finite() || *stddev < 0.0 {
                    return bad(format!("truncated-normal stddev {stddev} negative"));
                }
            }
            RewardModel::Beta { alpha, beta } => {
                if !(*alpha > 0.0) || !(*beta > 0.0) {
                    return bad(format!("beta shapes ({alpha}, {beta}) must be positive"));
                }
            }
            RewardModel::Triangular { mode } => {
                if !(0.0..=1.0).contains(mode) {
                    return bad(format!("triangular mode {mode} outside [0,1]"));
                }
            }
            RewardModel::Deterministic { .. } => {}
            RewardModel::GaussianLinear { theta, noise } => {
                if theta.is_empty() {
                    return bad("gaussian-linear parameter must be non-empty".into());
                }
                if !noise.is_finite() || *noise < 0.0 {
                    return bad(format!("gaussian-linear noise {noise} negative"));
                }
            }
        }
        Ok(())
    }

    /// The arm's true expected reward, used for pseudo-regret accounting.
    ///
    /// For the truncated normal this is the truncation-adjusted mean, which
    /// differs from the location parameter when the location sits near the
    /// interval boundary.
    pub fn expected_value(&self) -> f64 {
        match self {
            RewardModel::Bernoulli { mean } => *mean,
            RewardModel::TruncatedNormal { mean, stddev } => {
                if *stddev == 0.0 {
                    return *mean;
                }
                let a = (0.0 - mean) / stddev;
                let b = (1.0 - mean) / stddev;
                let z = std_normal_cdf(b) - std_normal_cdf(a);
                mean + stddev * (std_normal_pdf(a) - std_normal_pdf(b)) / z
            }
            RewardModel::Beta { alpha, beta } => alpha / (alpha + beta),
            RewardModel::Triangular { mode } => (1.0 + mode) / 3.0,
            RewardModel::Deterministic { value } => *value,
            RewardModel::GaussianLinear { theta, .. } => theta[0],
        }
    }

    /// One reward draw. Bounded kinds return values in [0, 1].
    pub fn sample(&self, rng: &mut RngStream) -> Result<f64> {
        self.validate()?;
        match self {
            RewardModel::Bernoulli { mean } => Ok(if rng.uniform() < *mean { 1.0 } else { 0.0 }),
            RewardModel::TruncatedNormal { mean, stddev } => loop {
                let x = sample_gaussian(*mean, *stddev, rng)?;
                if (0.0..=1.0).contains(&x) {
                    return Ok(x);
                }
            },
            RewardModel::Beta { alpha, beta } => sample_beta(*alpha, *beta, rng),
            RewardModel::Triangular { mode } => {
                let u = rng.uniform();
                Ok(if u < *mode {
                    (u * mode).sqrt()
                } else {
                    1.0 - ((1.0 - u) * (1.0 - mode)).sqrt()
                })
            }
            RewardModel::Deterministic { value } => Ok(*value),
            RewardModel::GaussianLinear { theta, noise } => {
                if theta.len() != 1 {
                    return Err(Error::InvalidArgument(
                        "featureless draw from gaussian-linear arm requires dimension 1".into(),
                    ));
                }
                sample_gaussian(theta[0], *noise, rng)
            }
        }
    }
}

/// The reward families used by the bounded-reward experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistributionFamily {
    Bernoulli,
    TruncatedNormal,
    Beta,
    Triangular,
}

impl DistributionFamily {
    pub const ALL: [DistributionFamily; 4] = [
        DistributionFamily::Bernoulli,
        DistributionFamily::TruncatedNormal,
        DistributionFamily::Beta,
        DistributionFamily::Triangular,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            DistributionFamily::Bernoulli => "bernoulli",
            DistributionFamily::TruncatedNormal => "truncated-normal",
            DistributionFamily::Beta => "beta",
            DistributionFamily::Triangular => "triangular",
        }
    }

    /// Whether rewards from this family are always 0/1.
    pub fn is_binary(&self) -> bool {
        matches!(self, DistributionFamily::Bernoulli)
    }
}

impl std::str::FromStr for DistributionFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bernoulli" => Ok(DistributionFamily::Bernoulli),
            "truncated-normal" => Ok(DistributionFamily::TruncatedNormal),
            "beta" => Ok(DistributionFamily::Beta),
            "triangular" => Ok(DistributionFamily::Triangular),
            other => Err(Error::Config(format!(
                "unknown reward family `{other}` (expected bernoulli, truncated-normal, beta, triangular)"
            ))),
        }
    }
}

/// A fixed K-arm bandit problem.
#[derive(Debug, Clone)]
pub struct BanditInstance {
    arms: Vec<RewardModel>,
    optimal_mean: f64,
}

impl BanditInstance {
    pub fn new(arms: Vec<RewardModel>) -> Result<Self> {
        if arms.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "a bandit instance needs at least 2 arms, got {}",
                arms.len()
            )));
        }
        for arm in &arms {
            arm.validate()?;
        }
        let optimal_mean = arms
            .iter()
            .map(RewardModel::expected_value)
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(Self { arms, optimal_mean })
    }

    pub fn arms(&self) -> &[RewardModel] {
        &self.arms
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn optimal_mean(&self) -> f64 {
        self.optimal_mean
    }

    pub fn expected_value(&self, arm: usize) -> f64 {
        self.arms[arm].expected_value()
    }

    pub fn sample_reward(&self, arm: usize, rng: &mut RngStream) -> Result<f64> {
        if arm >= self.arms.len() {
            return Err(Error::InvalidArgument(format!(
                "arm {arm} out of range for {} arms",
                self.arms.len()
            )));
        }
        self.arms[arm].sample(rng)
    }
}

/// K arms with means drawn i.i.d. Uniform(0,1) from the given family.
///
/// Beta arms get shapes `(mu, 1 - mu)`; truncated-normal arms use standard
/// deviation `1e-4`; triangular arms clamp the mean into the feasible
/// `[1/3, 2/3]` range.
pub fn random_instance(
    k: usize,
    family: DistributionFamily,
    rng: &mut RngStream,
) -> Result<BanditInstance> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "random_instance needs k >= 2, got {k}"
        )));
    }
    let arms = (0..k)
        .map(|_| {
            // Open-interval mean so Beta shapes stay positive.
            let mu = loop {
                let u = rng.uniform();
                if u > 0.0 && u < 1.0 {
                    break u;
                }
            };
            match family {
                DistributionFamily::Bernoulli => RewardModel::Bernoulli { mean: mu },
                DistributionFamily::TruncatedNormal => RewardModel::TruncatedNormal {
                    mean: mu,
                    stddev: 1e-4,
                },
                DistributionFamily::Beta => RewardModel::Beta {
                    alpha: mu,
                    beta: 1.0 - mu,
                },
                DistributionFamily::Triangular => RewardModel::triangular_from_mean(mu),
            }
        })
        .collect();
    BanditInstance::new(arms)
}

/// The two-arm lower-bound instance: arm 0 is Bernoulli(1/2), arm 1 is
/// deterministic 1/4. Policies may treat arm 1's value as known.
pub fn theorem1_instance() -> BanditInstance {
    BanditInstance::new(vec![
        RewardModel::Bernoulli { mean: 0.5 },
        RewardModel::Deterministic { value: 0.25 },
    ])
    .expect("two valid arms")
}

/// A multi-class dataset driving the one-vs-all contextual environment.
#[derive(Debug, Clone)]
pub struct ContextualDataset {
    contexts: Vec<Vec<f64>>,
    labels: Vec<usize>,
    dim: usize,
    num_classes: usize,
}

impl ContextualDataset {
    pub fn new(contexts: Vec<Vec<f64>>, labels: Vec<usize>) -> Result<Self> {
        if contexts.is_empty() {
            return Err(Error::Schema("dataset has no rows".into()));
        }
        if contexts.len() != labels.len() {
            return Err(Error::Schema(format!(
                "{} contexts but {} labels",
                contexts.len(),
                labels.len()
            )));
        }
        let dim = contexts[0].len();
        if dim == 0 {
            return Err(Error::Schema("context vectors are empty".into()));
        }
        for (i, x) in contexts.iter().enumerate() {
            if x.len() != dim {
                return Err(Error::Schema(format!(
                    "row {i} has dimension {} but the dataset is {dim}-dimensional",
                    x.len()
                )));
            }
        }
        let num_classes = labels.iter().max().copied().unwrap_or(0) + 1;
        if num_classes < 2 {
            return Err(Error::Schema(
                "dataset must contain at least two classes".into(),
            ));
        }
        Ok(Self {
            contexts,
            labels,
            dim,
            num_classes,
        })
    }

    pub fn len(&self) -> usize {
        self.contexts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contexts.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn context(&self, t: usize) -> &[f64] {
        &self.contexts[t]
    }

    pub fn label(&self, t: usize) -> usize {
        self.labels[t]
    }

    pub fn contexts(&self) -> &[Vec<f64>] {
        &self.contexts
    }

    /// Applies a seeded permutation to the rows.
    pub fn shuffle(&mut self, seed: u64) {
        let mut rng = RngStream::new(seed);
        let perm = rng.permutation(self.contexts.len());
        self.contexts = perm.iter().map(|&i| self.contexts[i].clone()).collect();
        self.labels = perm.iter().map(|&i| self.labels[i]).collect();
    }
}

/// Reward for choosing `arm` on row `t`: 1 if the row's class matches, else 0.
pub fn contextual_step(dataset: &ContextualDataset, t: usize, arm: usize) -> Result<f64> {
    if t >= dataset.len() {
        return Err(Error::InvalidArgument(format!(
            "round index {t} out of range for {} rows",
            dataset.len()
        )));
    }
    if arm >= dataset.num_classes() {
        return Err(Error::InvalidArgument(format!(
            "arm {arm} out of range for {} classes",
            dataset.num_classes()
        )));
    }
    Ok(if dataset.label(t) == arm { 1.0 } else { 0.0 })
}

/// On-disk dataset encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetFormat {
    /// Comma-separated rows, optional header, features then an integer class
    /// label in the last column.
    DenseCsv,
    /// One row per line: `label index:value index:value ...`, 0-based indices.
    SparseIndexValue,
}

impl std::str::FromStr for DatasetFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense-csv" => Ok(DatasetFormat::DenseCsv),
            "sparse-index-value" | "sparse" => Ok(DatasetFormat::SparseIndexValue),
            other => Err(Error::Config(format!(
                "unknown dataset format `{other}` (expected dense-csv or sparse-index-value)"
            ))),
        }
    }
}

/// Loads a dataset and shuffles its rows with the given seed.
pub fn load_dataset(
    path: impl AsRef<Path>,
    format: DatasetFormat,
    shuffle_seed: u64,
) -> Result<ContextualDataset> {
    let file = File::open(path.as_ref())?;
    let reader = BufReader::new(file);
    let mut dataset = match format {
        DatasetFormat::DenseCsv => parse_dense_csv(reader)?,
        DatasetFormat::SparseIndexValue => parse_sparse(reader)?,
    };
    dataset.shuffle(shuffle_seed);
    Ok(dataset)
}

fn parse_label(tok: &str, line_no: usize) -> Result<usize> {
    tok.trim().parse::<usize>().map_err(|_| Error::Format {
        line: line_no,
        message: format!("class label `{}` is not a nonnegative integer", tok.trim()),
    })
}

fn parse_dense_csv<R: BufRead>(reader: R) -> Result<ContextualDataset> {
    let mut contexts = Vec::new();
    let mut labels = Vec::new();
    let mut dim: Option<usize> = None;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() < 2 {
            return Err(Error::Format {
                line: line_no,
                message: "expected at least one feature column and a label column".into(),
            });
        }
        let parsed: std::result::Result<Vec<f64>, _> = fields[..fields.len() - 1]
            .iter()
            .map(|f| f.trim().parse::<f64>())
            .collect();
        let features = match parsed {
            Ok(v) => v,
            Err(_) if line_no == 1 && contexts.is_empty() => continue, // optional header
            Err(e) => {
                return Err(Error::Format {
                    line: line_no,
                    message: format!("bad feature value: {e}"),
                })
            }
        };
        let label = parse_label(fields[fields.len() - 1], line_no)?;
        if let Some(d) = dim {
            if features.len() != d {
                return Err(Error::Schema(format!(
                    "row at line {line_no} has {} features, expected {d}",
                    features.len()
                )));
            }
        } else {
            dim = Some(features.len());
        }
        contexts.push(features);
        labels.push(label);
    }
    ContextualDataset::new(contexts, labels)
}

fn parse_sparse<R: BufRead>(reader: R) -> Result<ContextualDataset> {
    let mut rows: Vec<(usize, Vec<(usize, f64)>)> = Vec::new();
    let mut max_index = 0usize;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let label = parse_label(tokens.next().unwrap(), line_no)?;
        let mut entries = Vec::new();
        for tok in tokens {
            let (i, v) = tok.split_once(':').ok_or_else(|| Error::Format {
                line: line_no,
                message: format!("expected `index:value`, got `{tok}`"),
            })?;
            let i: usize = i.parse().map_err(|_| Error::Format {
                line: line_no,
                message: format!("bad feature index `{i}`"),
            })?;
            let v: f64 = v.parse().map_err(|_| Error::Format {
                line: line_no,
                message: format!("bad feature value `{v}`"),
            })?;
            max_index = max_index.max(i);
            entries.push((i, v));
        }
        rows.push((label, entries));
    }
    if rows.is_empty() {
        return Err(Error::Schema("dataset has no rows".into()));
    }
    let dim = max_index + 1;
    let mut contexts = Vec::with_capacity(rows.len());
    let mut labels = Vec::with_capacity(rows.len());
    for (label, entries) in rows {
        let mut x = vec![0.0; dim];
        for (i, v) in entries {
            x[i] = v;
        }
        contexts.push(x);
        labels.push(label);
    }
    ContextualDataset::new(contexts, labels)
}

/// A linearly separable multi-class dataset: class `j` is a Gaussian blob of
/// width `noise` around a center at distance `separation` from the origin.
/// Rows are label-balanced and shuffled by `rng`.
pub fn synthetic_classification(
    classes: usize,
    dim: usize,
    rows: usize,
    separation: f64,
    noise: f64,
    rng: &mut RngStream,
) -> Result<ContextualDataset> {
    if classes < 2 {
        return Err(Error::InvalidArgument(
            "synthetic dataset needs at least two classes".into(),
        ));
    }
    if dim == 0 || rows < classes {
        return Err(Error::InvalidArgument(
            "synthetic dataset needs dim >= 1 and rows >= classes".into(),
        ));
    }
    let mut centers = Vec::with_capacity(classes);
    for j in 0..classes {
        let mut c = vec![0.0; dim];
        if j < dim {
            c[j] = separation;
        } else {
            // More classes than dimensions: random unit direction.
            let mut norm = 0.0;
            for v in c.iter_mut() {
                *v = sample_gaussian(0.0, 1.0, rng)?;
                norm += *v * *v;
            }
            let norm = norm.sqrt().max(1e-12);
            for v in c.iter_mut() {
                *v *= separation / norm;
            }
        }
        centers.push(c);
    }
    let mut contexts = Vec::with_capacity(rows);
    let mut labels = Vec::with_capacity(rows);
    for i in 0..rows {
        let label = i % classes;
        let mut x = centers[label].clone();
        for v in x.iter_mut() {
            *v += sample_gaussian(0.0, noise, rng)?;
        }
        contexts.push(x);
        labels.push(label);
    }
    let mut dataset = ContextualDataset::new(contexts, labels)?;
    let perm_seed = rng.next_u64();
    dataset.shuffle(perm_seed);
    Ok(dataset)
}
