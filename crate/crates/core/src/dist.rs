//! Sampling primitives and exact probability oracles.
//!
//! Everything stochastic in this crate draws from an [`RngStream`]: reward
//! realizations, bootstrap weights, resampling indices, posterior samples.
//! Streams are seeded explicitly and replay bit-exactly, and per-replication
//! streams are derived from a master seed with SplitMix-style mixing so that
//! replications are independent yet reproducible.
//!
//! The exact side ([`binomial_tail_exact`], [`kl_bernoulli`],
//! [`ks_statistic`]) is kept separate from the samplers on purpose: the
//! lemma checks in [`crate::theory`] compare sampled behaviour against these
//! oracles, so the two routes must not share code.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// SplitMix64 finalizer; used to decorrelate seeds derived from
/// (master, index) pairs.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A deterministic, seedable random stream.
///
/// Identical seeds produce identical sample sequences. A stream is
/// single-owner mutable state: create one per replication and move it to the
/// worker that runs it.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Derives the stream for one replication of an experiment.
    ///
    /// Streams for distinct `(master_seed, index)` pairs are pairwise
    /// distinct with overwhelming probability.
    pub fn derived(master_seed: u64, index: u64) -> Self {
        let mixed = splitmix64(master_seed ^ splitmix64(index.wrapping_add(0x9e37_79b9_7f4a_7c15)));
        Self::new(mixed)
    }

    /// The seed this stream was created with.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random()
    }

    /// Uniform integer in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.rng.random_range(0..=i);
            items.swap(i, j);
        }
    }

    /// A seeded permutation of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..n).collect();
        self.shuffle(&mut idx);
        idx
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
}

/// One draw from Exp(1). Strictly positive.
pub fn sample_exponential(rng: &mut RngStream) -> f64 {
    loop {
        let x: f64 = Exp1.sample(rng);
        if x > 0.0 {
            return x;
        }
    }
}

/// One draw from Gamma(shape, 1).
pub fn sample_gamma(shape: f64, rng: &mut RngStream) -> Result<f64> {
    if !shape.is_finite() || shape <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "gamma shape must be positive, got {shape}"
        )));
    }
    let gamma = rand_distr::Gamma::new(shape, 1.0)
        .map_err(|e| Error::InvalidParameter(format!("gamma({shape}): {e}")))?;
    Ok(gamma.sample(rng))
}

/// One draw from Beta(a, b), computed as Gamma(a) / (Gamma(a) + Gamma(b)).
pub fn sample_beta(a: f64, b: f64, rng: &mut RngStream) -> Result<f64> {
    if !a.is_finite() || a <= 0.0 || !b.is_finite() || b <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "beta shapes must be positive, got ({a}, {b})"
        )));
    }
    // Both gammas can underflow to 0 for tiny shapes; retry rather than
    // return 0/0.
    loop {
        let g1 = sample_gamma(a, rng)?;
        let g2 = sample_gamma(b, rng)?;
        if g1 + g2 > 0.0 {
            return Ok(g1 / (g1 + g2));
        }
    }
}

/// One draw from Bino(n, p).
pub fn sample_binomial(n: u64, p: f64, rng: &mut RngStream) -> Result<u64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "binomial success probability must be in [0,1], got {p}"
        )));
    }
    let bino = rand_distr::Binomial::new(n, p)
        .map_err(|e| Error::InvalidParameter(format!("binomial({n}, {p}): {e}")))?;
    Ok(bino.sample(rng))
}

/// One draw from N(mean, stddev^2). `stddev = 0` returns `mean` exactly.
pub fn sample_gaussian(mean: f64, stddev: f64, rng: &mut RngStream) -> Result<f64> {
    if !stddev.is_finite() || stddev < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "gaussian stddev must be nonnegative, got {stddev}"
        )));
    }
    let z: f64 = StandardNormal.sample(rng);
    Ok(mean + stddev * z)
}

/// A probability carried in both linear and log space.
///
/// The log representation is the authoritative one for tail quantities that
/// underflow double precision; `value` is `exp(log_value)` and agrees with it
/// to 1e-12 relative error whenever it is representable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactProb {
    value: f64,
    log_value: f64,
}

impl ExactProb {
    pub fn from_log(log_value: f64) -> Self {
        Self {
            value: log_value.exp(),
            log_value,
        }
    }

    pub fn one() -> Self {
        Self {
            value: 1.0,
            log_value: 0.0,
        }
    }

    pub fn zero() -> Self {
        Self {
            value: 0.0,
            log_value: f64::NEG_INFINITY,
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn log_value(&self) -> f64 {
        self.log_value
    }
}

/// Exact upper tail P(X >= k) for X ~ Bino(n, p).
///
/// Computed by log-space summation of the PMF over `ceil(k)..=n` with
/// log-gamma coefficients, so tails far below 1e-15 keep full relative
/// accuracy. `k <= 0` gives probability one, `k > n` probability zero.
///
/// Panics if `p` is outside `[0, 1]`.
pub fn binomial_tail_exact(n: u64, p: f64, k: f64) -> ExactProb {
    assert!(
        (0.0..=1.0).contains(&p),
        "binomial_tail_exact: p={p} outside [0,1]"
    );
    if k <= 0.0 {
        return ExactProb::one();
    }
    if k > n as f64 {
        return ExactProb::zero();
    }
    if p == 0.0 {
        // X == 0 a.s. and k > 0.
        return ExactProb::zero();
    }
    if p == 1.0 {
        // X == n a.s. and k <= n.
        return ExactProb::one();
    }

    let k_lo = k.ceil() as u64;
    let nf = n as f64;
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    let ln_n_fact = ln_gamma(nf + 1.0);

    let log_pmf = |i: u64| -> f64 {
        let fi = i as f64;
        ln_n_fact - ln_gamma(fi + 1.0) - ln_gamma(nf - fi + 1.0) + fi * ln_p + (nf - fi) * ln_q
    };

    // log-sum-exp over the tail terms.
    let mut max_term = f64::NEG_INFINITY;
    for i in k_lo..=n {
        max_term = max_term.max(log_pmf(i));
    }
    let mut acc = 0.0;
    for i in k_lo..=n {
        acc += (log_pmf(i) - max_term).exp();
    }
    // Summation roundoff can push the result a few ulps above 1.
    ExactProb::from_log((max_term + acc.ln()).min(0.0))
}

/// KL divergence D(q || p) between Bernoulli(q) and Bernoulli(p).
///
/// Both arguments must lie strictly inside (0, 1).
pub fn kl_bernoulli(q: f64, p: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) || !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "kl_bernoulli requires arguments in (0,1), got q={q}, p={p}"
        )));
    }
    Ok(q * (q / p).ln() + (1.0 - q) * ((1.0 - q) / (1.0 - p)).ln())
}

/// One-sample Kolmogorov-Smirnov statistic.
///
/// `samples` must be sorted ascending; returns the sup-norm distance between
/// the empirical CDF and `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument(
            "ks_statistic requires a non-empty sample".into(),
        ));
    }
    debug_assert!(
        samples.windows(2).all(|w| w[0] <= w[1]),
        "ks_statistic requires sorted samples"
    );
    let n = samples.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        let lo = f - i as f64 / n;
        let hi = (i + 1) as f64 / n - f;
        d = d.max(lo).max(hi);
    }
    Ok(d)
}

/// Asymptotic Kolmogorov critical value `sqrt(ln(2/alpha) / (2n))`:
/// `P(D_n > value) <= alpha` for samples truly drawn from the tested CDF.
pub fn kolmogorov_critical(n: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}
