//! Contextual bandit policies.
//!
//! Per-arm parametric models (linear or logistic) are fit by warm-started
//! stochastic gradient descent on a weighted log-likelihood. The bootstrap
//! policies perturb the weights — Exp(1) multiplicative weights for WB,
//! multinomial resample multiplicities for NPB — and act greedily on the
//! perturbed fit. Every arm starts from `4d` pseudo-examples built from the
//! covariance eigenstructure of the context vectors so the first fits are
//! well-posed and carry spread in the directions the contexts occupy.
//!
//! The linear baselines (LinUCB and linear Thompson sampling) keep exact
//! ridge sufficient statistics in [`LinearBayesState`] instead of running
//! SGD.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::dist::{sample_exponential, sample_gaussian, RngStream};
use crate::error::{Error, Result};
use crate::policy::argmax_tiebreak;

/// Feature-to-reward model class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Identity link: predicted reward is `<x, theta>`.
    Linear,
    /// Sigmoid link: predicted reward is `1 / (1 + exp(-<x, theta>))`.
    Logistic,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// A fitted parametric model.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextModel {
    pub kind: ModelKind,
    pub theta: DVector<f64>,
}

impl ContextModel {
    pub fn predict(&self, x: &DVector<f64>) -> f64 {
        predict(self.kind, &self.theta, x)
    }
}

fn predict(kind: ModelKind, theta: &DVector<f64>, x: &DVector<f64>) -> f64 {
    let z = theta.dot(x);
    match kind {
        ModelKind::Linear => z,
        ModelKind::Logistic => sigmoid(z),
    }
}

/// One arm's observations plus its pseudo-examples.
///
/// Fit weights are indexed over `rows` first, then `pseudo_rows`.
#[derive(Debug, Clone)]
pub struct ArmDataset {
    pub rows: Vec<(DVector<f64>, f64)>,
    pub pseudo_rows: Vec<(DVector<f64>, f64)>,
    dim: usize,
}

impl ArmDataset {
    pub fn new(dim: usize, pseudo_rows: Vec<(DVector<f64>, f64)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        for (x, _) in &pseudo_rows {
            if x.len() != dim {
                return Err(Error::InvalidArgument(format!(
                    "pseudo-example has dimension {}, expected {dim}",
                    x.len()
                )));
            }
        }
        Ok(Self {
            rows: Vec::new(),
            pseudo_rows,
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn push(&mut self, x: DVector<f64>, y: f64) {
        debug_assert_eq!(x.len(), self.dim);
        self.rows.push((x, y));
    }

    /// Observed rows followed by pseudo-rows — the weight indexing order.
    pub fn iter_all(&self) -> impl Iterator<Item = &(DVector<f64>, f64)> {
        self.rows.iter().chain(self.pseudo_rows.iter())
    }

    pub fn total_len(&self) -> usize {
        self.rows.len() + self.pseudo_rows.len()
    }
}

/// Stochastic optimization knobs for the weighted MLE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgdConfig {
    /// Constant per-example step for the linear model.
    pub step_linear: f64,
    /// Base step for the logistic model, decayed by `1/sqrt(epoch)`.
    pub step_logistic: f64,
    /// Hard cap on full passes per fit.
    pub max_passes: usize,
    /// Stop when the mean per-example gradient norm or the per-pass loss
    /// improvement falls below this.
    pub tolerance: f64,
}

impl Default for SgdConfig {
    fn default() -> Self {
        Self {
            step_linear: 0.01,
            step_logistic: 0.1,
            max_passes: 50,
            tolerance: 1e-3,
        }
    }
}

/// Maximizes the weighted log-likelihood by SGD from `warm_start`.
///
/// `weights` are nonnegative with positive sum, indexed as
/// [`ArmDataset::iter_all`]; they are normalized to mean one internally, so
/// rescaling all weights by a constant leaves the fit unchanged. Returns the
/// fitted parameter vector, or an optimization failure carrying the pass
/// count if the loss diverges.
pub fn fit_weighted_mle(
    kind: ModelKind,
    data: &ArmDataset,
    weights: &[f64],
    warm_start: &DVector<f64>,
    sgd: &SgdConfig,
    rng: &mut RngStream,
) -> Result<DVector<f64>> {
    let total = data.total_len();
    if total == 0 {
        return Err(Error::InvalidArgument(
            "fit_weighted_mle needs a non-empty dataset (pseudo-rows included)".into(),
        ));
    }
    if weights.len() != total {
        return Err(Error::InvalidArgument(format!(
            "{} weights for {total} rows",
            weights.len()
        )));
    }
    if sgd.tolerance <= 0.0 {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let wsum: f64 = weights.iter().sum();
    if !(wsum > 0.0) || weights.iter().any(|&w| !w.is_finite() || w < 0.0) {
        return Err(Error::InvalidArgument(
            "weights must be nonnegative with positive sum".into(),
        ));
    }
    let scale = total as f64 / wsum;
    let rows: Vec<&(DVector<f64>, f64)> = data.iter_all().collect();

    let mut theta = warm_start.clone();
    let mut order: Vec<usize> = (0..total).collect();
    let mut grad_buf = DVector::zeros(theta.len());
    let mut prev_loss = f64::INFINITY;

    for epoch in 1..=sgd.max_passes {
        let step = match kind {
            ModelKind::Linear => sgd.step_linear,
            ModelKind::Logistic => sgd.step_logistic / (epoch as f64).sqrt(),
        };
        rng.shuffle(&mut order);
        for &i in &order {
            let (x, y) = rows[i];
            let w = weights[i] * scale;
            if w == 0.0 {
                continue;
            }
            // d loss / d z is (prediction - y) for both links.
            let residual = predict(kind, &theta, x) - y;
            theta.axpy(-step * w * residual, x, 1.0);
        }

        // Mean weighted loss and mean gradient at the end of the pass.
        let mut loss = 0.0;
        grad_buf.fill(0.0);
        for (i, (x, y)) in rows.iter().enumerate() {
            let w = weights[i] * scale;
            if w == 0.0 {
                continue;
            }
            let z = theta.dot(x);
            match kind {
                ModelKind::Linear => {
                    let e = z - y;
                    loss += w * 0.5 * e * e;
                    grad_buf.axpy(w * e, x, 1.0);
                }
                ModelKind::Logistic => {
                    let p = sigmoid(z);
                    let pc = p.clamp(1e-12, 1.0 - 1e-12);
                    loss -= w * (y * pc.ln() + (1.0 - y) * (1.0 - pc).ln());
                    grad_buf.axpy(w * (p - y), x, 1.0);
                }
            }
        }
        loss /= total as f64;
        let grad_norm = grad_buf.norm() / total as f64;

        if !loss.is_finite() || theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::OptimizationFailure {
                steps: epoch,
                message: "loss diverged to NaN/inf".into(),
            });
        }
        if grad_norm <= sgd.tolerance || (prev_loss - loss).abs() <= sgd.tolerance {
            break;
        }
        prev_loss = loss;
    }
    Ok(theta)
}

/// WB bootstrap sample of an arm's parameters: Exp(1) weight per row
/// (pseudo-rows included), then a weighted MLE fit from `warm`.
pub fn wb_contextual_sample(
    kind: ModelKind,
    data: &ArmDataset,
    warm: &DVector<f64>,
    sgd: &SgdConfig,
    rng: &mut RngStream,
) -> Result<DVector<f64>> {
    let weights: Vec<f64> = (0..data.total_len())
        .map(|_| sample_exponential(rng))
        .collect();
    fit_weighted_mle(kind, data, &weights, warm, sgd, rng)
}

/// NPB bootstrap sample of an arm's parameters: multinomial resample
/// multiplicities over the rows (pseudo-rows included in the multiset), then
/// a fit on the resampled multiset.
pub fn npb_contextual_sample(
    kind: ModelKind,
    data: &ArmDataset,
    warm: &DVector<f64>,
    sgd: &SgdConfig,
    rng: &mut RngStream,
) -> Result<DVector<f64>> {
    let total = data.total_len();
    if total == 0 {
        return Err(Error::InvalidArgument(
            "npb_contextual_sample needs a non-empty dataset".into(),
        ));
    }
    let mut multiplicities = vec![0.0f64; total];
    for _ in 0..total {
        multiplicities[rng.index(total)] += 1.0;
    }
    fit_weighted_mle(kind, data, &multiplicities, warm, sgd, rng)
}

/// How the initialization pseudo-examples were produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PseudoMode {
    /// Eigendecomposition of the empirical context covariance.
    Eigen,
    /// Isotropic Gaussian directions; used when fewer than `d` contexts are
    /// available or the covariance is numerically singular.
    IsotropicFallback,
}

/// Builds the `4d` initialization pseudo-examples.
///
/// With enough contexts and a nonsingular covariance this emits
/// `±lambda_i v_i` for every eigenpair `(lambda_i^2, v_i)`, each direction
/// with both a 0 and a 1 label. Otherwise it falls back to `2d` isotropic
/// Gaussian directions, again with both labels, and flags the fallback.
pub fn make_pseudo_examples(
    contexts: &[Vec<f64>],
    dim: usize,
    rng: &mut RngStream,
) -> Result<(Vec<(DVector<f64>, f64)>, PseudoMode)> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    if contexts.len() >= dim {
        if let Some(directions) = eigen_directions(contexts, dim)? {
            let mut rows = Vec::with_capacity(4 * dim);
            for v in directions {
                for sign in [1.0, -1.0] {
                    for label in [0.0, 1.0] {
                        rows.push((&v * sign, label));
                    }
                }
            }
            return Ok((rows, PseudoMode::Eigen));
        }
    }
    // Isotropic fallback: 2d random directions, both labels each.
    let mut rows = Vec::with_capacity(4 * dim);
    for _ in 0..2 * dim {
        let mut x = DVector::zeros(dim);
        for v in x.iter_mut() {
            *v = sample_gaussian(0.0, 1.0, rng)?;
        }
        rows.push((x.clone(), 0.0));
        rows.push((x, 1.0));
    }
    Ok((rows, PseudoMode::IsotropicFallback))
}

/// Scaled eigenvectors `lambda_i v_i` of the empirical covariance, or `None`
/// when the covariance is numerically singular.
fn eigen_directions(contexts: &[Vec<f64>], dim: usize) -> Result<Option<Vec<DVector<f64>>>> {
    for (i, x) in contexts.iter().enumerate() {
        if x.len() != dim {
            return Err(Error::InvalidArgument(format!(
                "context {i} has dimension {}, expected {dim}",
                x.len()
            )));
        }
    }
    let n = contexts.len() as f64;
    let mut mean = DVector::zeros(dim);
    for x in contexts {
        mean += DVector::from_column_slice(x);
    }
    mean /= n;
    let mut cov = DMatrix::zeros(dim, dim);
    for x in contexts {
        let centered = DVector::from_column_slice(x) - &mean;
        cov.syger(1.0 / n, &centered, &centered, 1.0);
    }
    mirror_lower_triangle(&mut cov);
    let eigen = SymmetricEigen::new(cov);
    let max_ev = eigen.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b));
    let min_ev = eigen
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |a, &b| a.min(b));
    if !(min_ev > 1e-12 * max_ev.max(1e-12)) {
        return Ok(None);
    }
    let mut dirs = Vec::with_capacity(dim);
    for (i, &ev) in eigen.eigenvalues.iter().enumerate() {
        let lambda = ev.max(0.0).sqrt();
        dirs.push(eigen.eigenvectors.column(i) * lambda);
    }
    Ok(Some(dirs))
}

// syger only fills the lower triangle.
fn mirror_lower_triangle(m: &mut DMatrix<f64>) {
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            m[(i, j)] = m[(j, i)];
        }
    }
}

/// Ridge sufficient statistics for one arm: `A = lambda I + sum x x^T` and
/// `b = sum r x`. `A^{-1} b` is the ridge estimate.
#[derive(Debug, Clone)]
pub struct LinearBayesState {
    a: DMatrix<f64>,
    b: DVector<f64>,
    ridge: f64,
}

impl LinearBayesState {
    pub fn new(dim: usize, ridge: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if !(ridge > 0.0) || !ridge.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "ridge must be positive, got {ridge}"
            )));
        }
        Ok(Self {
            a: DMatrix::identity(dim, dim) * ridge,
            b: DVector::zeros(dim),
            ridge,
        })
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    pub fn precision(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// Rank-1 update with one observation.
    pub fn update(&mut self, x: &DVector<f64>, reward: f64) {
        self.a.syger(1.0, x, x, 1.0);
        mirror_lower_triangle(&mut self.a);
        self.b.axpy(reward, x, 1.0);
    }

    fn cholesky(&self) -> Result<Cholesky<f64, nalgebra::Dyn>> {
        Cholesky::new(self.a.clone()).ok_or_else(|| {
            Error::Numerical("ridge precision matrix is not positive definite".into())
        })
    }

    /// Ridge point estimate `A^{-1} b`.
    pub fn theta_hat(&self) -> Result<DVector<f64>> {
        Ok(self.cholesky()?.solve(&self.b))
    }

    /// `x^T A^{-1} b + width * sqrt(x^T A^{-1} x)`.
    pub fn ucb_score(&self, x: &DVector<f64>, width: f64) -> Result<f64> {
        let chol = self.cholesky()?;
        let theta = chol.solve(&self.b);
        let ax = chol.solve(x);
        let var = x.dot(&ax).max(0.0);
        Ok(theta.dot(x) + width * var.sqrt())
    }

    /// One posterior draw `theta ~ N(A^{-1} b, scale^2 A^{-1})`.
    pub fn sample_theta(&self, scale: f64, rng: &mut RngStream) -> Result<DVector<f64>> {
        let chol = self.cholesky()?;
        let mut theta = chol.solve(&self.b);
        if scale == 0.0 {
            return Ok(theta);
        }
        let mut z = DVector::zeros(self.b.len());
        for v in z.iter_mut() {
            *v = sample_gaussian(0.0, 1.0, rng)?;
        }
        // Covariance A^{-1} = L^{-T} L^{-1}: perturb with L^{-T} z.
        let u = chol
            .l()
            .transpose()
            .solve_upper_triangular(&z)
            .ok_or_else(|| Error::Numerical("cholesky factor is singular".into()))?;
        theta.axpy(scale, &u, 1.0);
        Ok(theta)
    }
}

/// LinUCB arm selection; ties break uniformly at random.
pub fn linucb_select(
    states: &[LinearBayesState],
    x: &DVector<f64>,
    width: f64,
    rng: &mut RngStream,
) -> Result<usize> {
    if states.is_empty() {
        return Err(Error::InvalidArgument("no arms".into()));
    }
    let mut scores = Vec::with_capacity(states.len());
    for s in states {
        scores.push(s.ucb_score(x, width)?);
    }
    Ok(argmax_tiebreak(&scores, rng))
}

/// Linear Thompson sampling arm selection.
pub fn lints_select(
    states: &[LinearBayesState],
    x: &DVector<f64>,
    scale: f64,
    rng: &mut RngStream,
) -> Result<usize> {
    if states.is_empty() {
        return Err(Error::InvalidArgument("no arms".into()));
    }
    let mut scores = Vec::with_capacity(states.len());
    for s in states {
        let theta = s.sample_theta(scale, rng)?;
        scores.push(theta.dot(x));
    }
    Ok(argmax_tiebreak(&scores, rng))
}

/// Arithmetic mean reward of a trace.
pub fn per_step_reward(rewards: &[f64]) -> f64 {
    assert!(!rewards.is_empty(), "per_step_reward needs T >= 1");
    rewards.iter().sum::<f64>() / rewards.len() as f64
}

/// Which contextual strategy a [`ContextualPolicy`] runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CtxKind {
    Wb(ModelKind),
    Npb(ModelKind),
    /// epsilon-greedy over per-arm MLE fits with schedule `c / (c + t)`.
    EpsilonGreedy(ModelKind, f64),
    LinUcb { width: f64 },
    LinTs { scale: f64 },
}

/// Where the pseudo-example covariance comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PseudoSource {
    /// Computed once from an offline sample of contexts (the dataset).
    Offline,
    /// Isotropic until `B` contexts have been observed, then recomputed from
    /// the buffered covariance.
    FirstRounds(usize),
    /// Always isotropic.
    Isotropic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CtxPolicyConfig {
    pub kind: CtxKind,
    pub sgd: SgdConfig,
    pub ridge: f64,
    pub pseudo: PseudoSource,
}

impl CtxPolicyConfig {
    pub fn new(kind: CtxKind) -> Self {
        Self {
            kind,
            sgd: SgdConfig::default(),
            ridge: 1.0,
            pseudo: PseudoSource::Offline,
        }
    }
}

#[derive(Debug, Clone)]
struct BootstrapArm {
    data: ArmDataset,
    warm: DVector<f64>,
}

#[derive(Debug, Clone)]
enum CtxState {
    Bootstrap(Vec<BootstrapArm>),
    Ridge(Vec<LinearBayesState>),
}

/// Decision state for one contextual replication.
#[derive(Debug, Clone)]
pub struct ContextualPolicy {
    cfg: CtxPolicyConfig,
    state: CtxState,
    dim: usize,
    buffer: Option<Vec<Vec<f64>>>,
    pseudo_mode: Option<PseudoMode>,
}

impl ContextualPolicy {
    /// Builds the per-arm state.
    ///
    /// `offline_contexts` feeds the covariance for [`PseudoSource::Offline`];
    /// model-based kinds fail without it in that mode. Ridge baselines
    /// ignore pseudo-examples entirely.
    pub fn new(
        num_arms: usize,
        dim: usize,
        cfg: CtxPolicyConfig,
        offline_contexts: Option<&[Vec<f64>]>,
        rng: &mut RngStream,
    ) -> Result<Self> {
        if num_arms < 2 {
            return Err(Error::InvalidArgument(format!(
                "contextual policy needs at least 2 arms, got {num_arms}"
            )));
        }
        let mut pseudo_mode = None;
        let state = match cfg.kind {
            CtxKind::LinUcb { .. } | CtxKind::LinTs { .. } => {
                let states = (0..num_arms)
                    .map(|_| LinearBayesState::new(dim, cfg.ridge))
                    .collect::<Result<Vec<_>>>()?;
                CtxState::Ridge(states)
            }
            _ => {
                let (pseudo, mode) = match cfg.pseudo {
                    PseudoSource::Offline => {
                        let contexts = offline_contexts.ok_or_else(|| {
                            Error::Config(
                                "offline pseudo-example mode needs an offline context sample"
                                    .into(),
                            )
                        })?;
                        make_pseudo_examples(contexts, dim, rng)?
                    }
                    PseudoSource::FirstRounds(_) | PseudoSource::Isotropic => {
                        make_pseudo_examples(&[], dim, rng)?
                    }
                };
                pseudo_mode = Some(mode);
                let arms = (0..num_arms)
                    .map(|_| {
                        Ok(BootstrapArm {
                            data: ArmDataset::new(dim, pseudo.clone())?,
                            warm: DVector::zeros(dim),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                CtxState::Bootstrap(arms)
            }
        };
        let buffer = match (&state, cfg.pseudo) {
            (CtxState::Bootstrap(_), PseudoSource::FirstRounds(b)) => Some(Vec::with_capacity(b)),
            _ => None,
        };
        Ok(Self {
            cfg,
            state,
            dim,
            buffer,
            pseudo_mode,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pseudo_mode(&self) -> Option<PseudoMode> {
        self.pseudo_mode
    }

    /// Chooses an arm for context `x` at round `t`.
    pub fn select(&mut self, x: &DVector<f64>, t: u64, rng: &mut RngStream) -> Result<usize> {
        self.maybe_buffer_context(x, rng)?;
        match self.cfg.kind {
            CtxKind::Wb(kind) | CtxKind::Npb(kind) => {
                let is_wb = matches!(self.cfg.kind, CtxKind::Wb(_));
                let CtxState::Bootstrap(arms) = &mut self.state else {
                    unreachable!()
                };
                let mut scores = Vec::with_capacity(arms.len());
                for arm in arms.iter_mut() {
                    let theta = if is_wb {
                        wb_contextual_sample(kind, &arm.data, &arm.warm, &self.cfg.sgd, rng)?
                    } else {
                        npb_contextual_sample(kind, &arm.data, &arm.warm, &self.cfg.sgd, rng)?
                    };
                    scores.push(predict(kind, &theta, x));
                    arm.warm = theta;
                }
                Ok(argmax_tiebreak(&scores, rng))
            }
            CtxKind::EpsilonGreedy(kind, c) => {
                let CtxState::Bootstrap(arms) = &mut self.state else {
                    unreachable!()
                };
                let eps = if c == 0.0 { 0.0 } else { c / (c + t as f64) };
                if rng.uniform() < eps {
                    return Ok(rng.index(arms.len()));
                }
                let mut scores = Vec::with_capacity(arms.len());
                for arm in arms.iter_mut() {
                    let weights = vec![1.0; arm.data.total_len()];
                    let theta =
                        fit_weighted_mle(kind, &arm.data, &weights, &arm.warm, &self.cfg.sgd, rng)?;
                    scores.push(predict(kind, &theta, x));
                    arm.warm = theta;
                }
                Ok(argmax_tiebreak(&scores, rng))
            }
            CtxKind::LinUcb { width } => {
                let CtxState::Ridge(states) = &self.state else {
                    unreachable!()
                };
                linucb_select(states, x, width, rng)
            }
            CtxKind::LinTs { scale } => {
                let CtxState::Ridge(states) = &self.state else {
                    unreachable!()
                };
                lints_select(states, x, scale, rng)
            }
        }
    }

    /// Records the observed reward for the chosen arm.
    pub fn update(&mut self, arm: usize, x: &DVector<f64>, reward: f64) -> Result<()> {
        match &mut self.state {
            CtxState::Bootstrap(arms) => {
                let slot = arms
                    .get_mut(arm)
                    .ok_or_else(|| Error::InvalidArgument(format!("arm {arm} out of range")))?;
                slot.data.push(x.clone(), reward);
            }
            CtxState::Ridge(states) => {
                let slot = states
                    .get_mut(arm)
                    .ok_or_else(|| Error::InvalidArgument(format!("arm {arm} out of range")))?;
                slot.update(x, reward);
            }
        }
        Ok(())
    }

    /// First-rounds pseudo mode: buffer contexts and, once full, replace the
    /// isotropic pseudo-examples with eigen ones from the buffer.
    fn maybe_buffer_context(&mut self, x: &DVector<f64>, rng: &mut RngStream) -> Result<()> {
        let PseudoSource::FirstRounds(b) = self.cfg.pseudo else {
            return Ok(());
        };
        let Some(buffer) = &mut self.buffer else {
            return Ok(());
        };
        if buffer.len() >= b {
            return Ok(());
        }
        buffer.push(x.iter().copied().collect());
        if buffer.len() == b {
            let (pseudo, mode) = make_pseudo_examples(buffer, self.dim, rng)?;
            if let CtxState::Bootstrap(arms) = &mut self.state {
                for arm in arms.iter_mut() {
                    arm.data.pseudo_rows = pseudo.clone();
                }
            }
            self.pseudo_mode = Some(mode);
        }
        Ok(())
    }
}
