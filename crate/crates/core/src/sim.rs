//! Replicated experiment engine.
//!
//! A single run plays one policy against one environment for `T` rounds and
//! records a per-round trace: cumulative pseudo-regret for K-arm problems
//! (true-mean gaps, so traces are smooth and non-decreasing), or the raw 0/1
//! reward per round in the contextual setting. Replications are
//! embarrassingly parallel; each owns its derived [`RngStream`], environment
//! copy and policy state, and aggregation reduces the per-run traces in
//! replication order so results are independent of scheduling.

use nalgebra::DVector;
use rayon::prelude::*;

use crate::ctx::{ContextualPolicy, CtxPolicyConfig};
use crate::dist::RngStream;
use crate::env::{
    random_instance, theorem1_instance, BanditInstance, ContextualDataset, DistributionFamily,
};
use crate::error::{Error, Result};
use crate::policy::{MabPolicyConfig, PolicyState};

/// How per-round regret increments are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegretKind {
    /// `optimal_mean - E[chosen arm]`: the expectation identity, free of
    /// reward noise.
    Pseudo,
    /// `optimal_mean - realized reward`.
    Realized,
}

/// Anything that can play a K-arm bandit round by round.
pub trait MabAgent {
    fn select(&mut self, rng: &mut RngStream) -> Result<usize>;
    fn observe(&mut self, arm: usize, reward: f64, rng: &mut RngStream) -> Result<()>;
}

impl MabAgent for PolicyState {
    fn select(&mut self, rng: &mut RngStream) -> Result<usize> {
        self.select_arm(rng)
    }

    fn observe(&mut self, arm: usize, reward: f64, rng: &mut RngStream) -> Result<()> {
        PolicyState::observe(self, arm, reward, rng)
    }
}

/// Anything that can play the contextual game.
pub trait ContextualAgent {
    fn select(&mut self, x: &DVector<f64>, t: u64, rng: &mut RngStream) -> Result<usize>;
    fn update(&mut self, arm: usize, x: &DVector<f64>, reward: f64, rng: &mut RngStream)
        -> Result<()>;
}

impl ContextualAgent for ContextualPolicy {
    fn select(&mut self, x: &DVector<f64>, t: u64, rng: &mut RngStream) -> Result<usize> {
        ContextualPolicy::select(self, x, t, rng)
    }

    fn update(
        &mut self,
        arm: usize,
        x: &DVector<f64>,
        reward: f64,
        _rng: &mut RngStream,
    ) -> Result<()> {
        ContextualPolicy::update(self, arm, x, reward)
    }
}

/// One K-arm run: `forced_per_arm` round-robin pulls per arm, then policy
/// rounds up to `horizon`. Returns the cumulative regret trace (length
/// `horizon`). Forced pulls are charged to the trace.
pub fn run_mab(
    instance: &BanditInstance,
    agent: &mut impl MabAgent,
    horizon: u64,
    forced_per_arm: u64,
    regret: RegretKind,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    let k = instance.num_arms() as u64;
    let forced_total = k
        .checked_mul(forced_per_arm)
        .filter(|&f| f <= horizon)
        .ok_or_else(|| {
            Error::Config(format!(
                "forced exploration needs K*m = {k}*{forced_per_arm} <= horizon {horizon}"
            ))
        })?;
    let optimal = instance.optimal_mean();
    let mut trace = Vec::with_capacity(horizon as usize);
    let mut cum = 0.0;
    for t in 0..horizon {
        let arm = if t < forced_total {
            (t % k) as usize
        } else {
            agent.select(rng).map_err(|e| e.at_round(t))?
        };
        let reward = instance.sample_reward(arm, rng).map_err(|e| e.at_round(t))?;
        agent.observe(arm, reward, rng).map_err(|e| e.at_round(t))?;
        cum += match regret {
            RegretKind::Pseudo => optimal - instance.expected_value(arm),
            RegretKind::Realized => optimal - reward,
        };
        trace.push(cum);
    }
    Ok(trace)
}

/// One contextual run over `horizon` rounds; dataset rows are consumed
/// cyclically in the order given by `row_order` (or natural order when
/// `None`). Returns the per-round reward trace.
pub fn run_contextual(
    dataset: &ContextualDataset,
    agent: &mut impl ContextualAgent,
    horizon: u64,
    row_order: Option<&[usize]>,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    if let Some(order) = row_order {
        if order.len() != dataset.len() {
            return Err(Error::InvalidArgument(format!(
                "row order has {} entries for {} rows",
                order.len(),
                dataset.len()
            )));
        }
    }
    let n = dataset.len();
    let mut trace = Vec::with_capacity(horizon as usize);
    for t in 0..horizon {
        let slot = (t as usize) % n;
        let row = row_order.map_or(slot, |order| order[slot]);
        let x = DVector::from_column_slice(dataset.context(row));
        let arm = agent.select(&x, t, rng).map_err(|e| e.at_round(t))?;
        let reward = crate::env::contextual_step(dataset, row, arm).map_err(|e| e.at_round(t))?;
        agent.update(arm, &x, reward, rng).map_err(|e| e.at_round(t))?;
        trace.push(reward);
    }
    Ok(trace)
}

///aggregated mean trace with per-round standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateTrace {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub runs: usize,
}

impl AggregateTrace {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }
}

/// Pointwise mean and standard error (`stddev / sqrt(runs)`) across
/// equal-length traces.
pub fn aggregate(traces: &[Vec<f64>]) -> Result<AggregateTrace> {
    let first = traces
        .first()
        .ok_or_else(|| Error::InvalidArgument("aggregate needs at least one trace".into()))?;
    let len = first.len();
    for (i, t) in traces.iter().enumerate() {
        if t.len() != len {
            return Err(Error::InvalidArgument(format!(
                "trace {i} has length {} but trace 0 has {len}",
                t.len()
            )));
        }
    }
    let runs = traces.len();
    let mut mean = vec![0.0; len];
    for t in traces {
        for (m, &v) in mean.iter_mut().zip(t) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= runs as f64;
    }
    let mut stderr = vec![0.0; len];
    if runs > 1 {
        for t in traces {
            for (s, (&v, &m)) in stderr.iter_mut().zip(t.iter().zip(&mean)) {
                *s += (v - m) * (v - m);
            }
        }
        for s in stderr.iter_mut() {
            *s = (*s / (runs as f64 - 1.0)).sqrt() / (runs as f64).sqrt();
        }
    }
    Ok(AggregateTrace { mean, stderr, runs })
}

/// Least-squares slope of `log R(t)` against `log t` over rounds
/// `window.0 ..= window.1` (1-based) of a cumulative trace.
pub fn loglog_slope(trace: &[f64], window: (u64, u64)) -> Result<f64> {
    let (t_lo, t_hi) = window;
    if t_lo < 1 || t_hi <= t_lo || t_hi as usize > trace.len() {
        return Err(Error::InvalidArgument(format!(
            "bad log-log window [{t_lo}, {t_hi}] for trace of length {}",
            trace.len()
        )));
    }
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut n = 0.0;
    for t in t_lo..=t_hi {
        let r = trace[(t - 1) as usize];
        if r <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "non-positive regret {r} at round {t} inside the log-log window"
            )));
        }
        let x = (t as f64).ln();
        let y = r.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        n += 1.0;
    }
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return Err(Error::Numerical("degenerate log-log window".into()));
    }
    Ok((n * sxy - sx * sy) / denom)
}

/// Environment factory for replicated K-arm experiments.
#[derive(Debug, Clone)]
pub enum MabEnvSpec {
    /// A fresh instance with Uniform(0,1) means per replication.
    Random { family: DistributionFamily, k: usize },
    /// The two-arm lower-bound instance.
    Theorem1,
    /// The same fixed instance for every replication.
    Fixed(BanditInstance),
}

impl MabEnvSpec {
    pub fn family(&self) -> Option<DistributionFamily> {
        match self {
            MabEnvSpec::Random { family, .. } => Some(*family),
            _ => None,
        }
    }

    fn build(&self, rng: &mut RngStream) -> Result<BanditInstance> {
        match self {
            MabEnvSpec::Random { family, k } => random_instance(*k, *family, rng),
            MabEnvSpec::Theorem1 => Ok(theorem1_instance()),
            MabEnvSpec::Fixed(instance) => Ok(instance.clone()),
        }
    }
}

/// A replicated K-arm experiment.
#[derive(Debug, Clone)]
pub struct MabExperiment {
    pub env: MabEnvSpec,
    pub policy: MabPolicyConfig,
    pub horizon: u64,
    pub runs: usize,
    pub master_seed: u64,
    pub forced_per_arm: u64,
    pub regret: RegretKind,
}

/// Runs `runs` seeded replications in parallel and aggregates the regret
/// traces. Replication `i` uses the stream derived from
/// `(master_seed, i)`, so results are independent of the thread schedule.
pub fn run_mab_replicated(exp: &MabExperiment) -> Result<AggregateTrace> {
    if exp.runs == 0 || exp.horizon == 0 {
        return Err(Error::Config("runs and horizon must be positive".into()));
    }
    let traces: Vec<Result<Vec<f64>>> = (0..exp.runs)
        .into_par_iter()
        .map(|rep| {
            let mut rng = RngStream::derived(exp.master_seed, rep as u64);
            let instance = exp.env.build(&mut rng)?;
            let mut policy = PolicyState::new(instance.num_arms(), exp.policy.clone())?;
            run_mab(
                &instance,
                &mut policy,
                exp.horizon,
                exp.forced_per_arm,
                exp.regret,
                &mut rng,
            )
        })
        .collect();
    let traces: Vec<Vec<f64>> = traces.into_iter().collect::<Result<_>>()?;
    aggregate(&traces)
}

/// A replicated contextual experiment on a shared dataset.
#[derive(Debug, Clone)]
pub struct ContextualExperiment {
    pub policy: CtxPolicyConfig,
    pub horizon: u64,
    pub runs: usize,
    pub master_seed: u64,
}

/// Runs seeded contextual replications in parallel and returns the raw
/// per-round reward trace of every replication, in replication order. Each
/// replication draws its own row permutation and fresh policy state; the
/// dataset itself is shared read-only.
pub fn run_contextual_replicated_raw(
    dataset: &ContextualDataset,
    exp: &ContextualExperiment,
) -> Result<Vec<Vec<f64>>> {
    if exp.runs == 0 || exp.horizon == 0 {
        return Err(Error::Config("runs and horizon must be positive".into()));
    }
    let traces: Vec<Result<Vec<f64>>> = (0..exp.runs)
        .into_par_iter()
        .map(|rep| {
            let mut rng = RngStream::derived(exp.master_seed, rep as u64);
            let order = rng.permutation(dataset.len());
            let mut policy = ContextualPolicy::new(
                dataset.num_classes(),
                dataset.dim(),
                exp.policy.clone(),
                Some(dataset.contexts()),
                &mut rng,
            )?;
            run_contextual(dataset, &mut policy, exp.horizon, Some(&order), &mut rng)
        })
        .collect();
    traces.into_iter().collect()
}

/// [`run_contextual_replicated_raw`] followed by pointwise aggregation.
pub fn run_contextual_replicated(
    dataset: &ContextualDataset,
    exp: &ContextualExperiment,
) -> Result<AggregateTrace> {
    aggregate(&run_contextual_replicated_raw(dataset, exp)?)
}

/// Converts a per-round reward trace into the running per-step reward
/// `(sum of rewards up to t) / t`.
pub fn running_per_step(rewards: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(rewards.len());
    let mut acc = 0.0;
    for (i, &r) in rewards.iter().enumerate() {
        acc += r;
        out.push(acc / (i as f64 + 1.0));
    }
    out
}
