//! Numeric validators for the supporting mathematics.
//!
//! Every check that has a computable exact form is verified exactly —
//! log-space tail summation against the KL bound, the pull-probability
//! bound, and the truncated-geometric closed form against brute-force
//! summation. Only the bad-history probe is Monte-Carlo: it drives the
//! actual NPB policy on the two-arm lower-bound instance and compares what
//! happens against the quantities the exact route predicts.

use crate::dist::{binomial_tail_exact, kl_bernoulli, RngStream};
use crate::env::theorem1_instance;
use crate::error::{Error, Result};
use crate::policy::{MabKind, MabPolicyConfig, PolicyState};

/// One grid point of a lemma check.
#[derive(Debug, Clone)]
pub struct LemmaPoint {
    pub params: String,
    pub computed: f64,
    pub bound: f64,
    pub satisfied: bool,
    /// Present when the point fails the lemma's hypothesis and was not
    /// evaluated.
    pub skipped: Option<String>,
}

/// Result of checking one lemma over a parameter grid.
#[derive(Debug, Clone)]
pub struct LemmaReport {
    pub lemma: String,
    pub points: Vec<LemmaPoint>,
    pub pass: bool,
}

impl LemmaReport {
    fn from_points(lemma: impl Into<String>, points: Vec<LemmaPoint>) -> Self {
        let pass = points
            .iter()
            .all(|p| p.satisfied || p.skipped.is_some());
        Self {
            lemma: lemma.into(),
            points,
            pass,
        }
    }

    pub fn checked_points(&self) -> usize {
        self.points.iter().filter(|p| p.skipped.is_none()).count()
    }

    pub fn skipped_points(&self) -> usize {
        self.points.len() - self.checked_points()
    }

    /// One line per grid point plus a trailing summary line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for p in &self.points {
            if let Some(reason) = &p.skipped {
                out.push_str(&format!("{} {} SKIP ({reason})\n", self.lemma, p.params));
            } else {
                out.push_str(&format!(
                    "{} {} computed={:.10e} bound={:.10e} {}\n",
                    self.lemma,
                    p.params,
                    p.computed,
                    p.bound,
                    if p.satisfied { "PASS" } else { "FAIL" }
                ));
            }
        }
        out.push_str(&format!(
            "{}: {} ({} checked, {} skipped)\n",
            self.lemma,
            if self.pass { "PASS" } else { "FAIL" },
            self.checked_points(),
            self.skipped_points()
        ));
        out
    }
}

/// Checks `P(X >= k) <= exp(-n D(k/n || p))` on each `(n, p, k)` point.
/// Points violating the hypothesis `np < k < n` are skipped with an
/// annotation. Comparison happens in log space.
pub fn check_tail_bound(grid: &[(u64, f64, f64)]) -> LemmaReport {
    let points = grid
        .iter()
        .map(|&(n, p, k)| {
            let params = format!("n={n} p={p} k={k}");
            if !(n as f64 * p < k && k < n as f64) {
                return LemmaPoint {
                    params,
                    computed: f64::NAN,
                    bound: f64::NAN,
                    satisfied: false,
                    skipped: Some("requires np < k < n".into()),
                };
            }
            let tail = binomial_tail_exact(n, p, k);
            let kl = kl_bernoulli(k / n as f64, p).expect("k/n and p interior by hypothesis");
            let log_bound = -(n as f64) * kl;
            LemmaPoint {
                params,
                computed: tail.value(),
                bound: log_bound.exp(),
                satisfied: tail.log_value() <= log_bound,
                skipped: None,
            }
        })
        .collect();
    LemmaReport::from_points("binomial-tail-bound", points)
}

/// The default tail grid: n in 5..=200, p in {0.05, ..., 0.5}, k = ceil(0.7 n).
pub fn default_tail_grid() -> Vec<(u64, f64, f64)> {
    let mut grid = Vec::new();
    for n in 5..=200u64 {
        for i in 1..=10 {
            let p = i as f64 / 20.0;
            grid.push((n, p, (0.7 * n as f64).ceil()));
        }
    }
    grid
}

/// Checks the bad-history pull probability strictly:
/// `P(Bino(m+2, 1/(m+2)) >= (m+2)/4) < exp(-m ln m / 20)` for each m.
/// Points with `m < 15` are skipped (the lemma's hypothesis).
pub fn check_pull_probability(ms: &[u64]) -> LemmaReport {
    let points = ms
        .iter()
        .map(|&m| {
            let params = format!("m={m}");
            if m < 15 {
                return LemmaPoint {
                    params,
                    computed: f64::NAN,
                    bound: f64::NAN,
                    satisfied: false,
                    skipped: Some("lemma hypothesis requires m >= 15".into()),
                };
            }
            let n = m + 2;
            let tail = binomial_tail_exact(n, 1.0 / n as f64, n as f64 / 4.0);
            let mf = m as f64;
            let log_bound = -mf * mf.ln() / 20.0;
            LemmaPoint {
                params,
                computed: tail.value(),
                bound: log_bound.exp(),
                satisfied: tail.log_value() < log_bound,
                skipped: None,
            }
        })
        .collect();
    LemmaReport::from_points("pull-probability", points)
}

/// Closed-form expectation of the truncated geometric distribution with
/// success parameter `p` and truncation level `l`:
/// `(1/p - 1) * (1 - (1-p)^l)`.
pub fn truncated_geometric_expectation(p: f64, l: u64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "truncated geometric parameter must lie in (0,1), got {p}"
        )));
    }
    if l < 1 {
        return Err(Error::InvalidParameter("truncation level must be >= 1".into()));
    }
    Ok((1.0 / p - 1.0) * (1.0 - (1.0 - p).powi(l as i32)))
}

/// Brute-force expectation `sum_{i<l} i (1-p)^i p + l (1-p)^l`, with Kahan
/// compensation so the 1e-12 agreement check is meaningful.
pub fn truncated_geometric_brute_force(p: f64, l: u64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "truncated geometric parameter must lie in (0,1), got {p}"
        )));
    }
    if l < 1 {
        return Err(Error::InvalidParameter("truncation level must be >= 1".into()));
    }
    let q = 1.0 - p;
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut qi = 1.0f64; // q^i
    for i in 0..l {
        let term = i as f64 * qi * p;
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        qi *= q;
    }
    // Remaining mass at l: qi is now q^l.
    let term = l as f64 * qi;
    let y = term - comp;
    Ok(sum + y)
}

/// Verifies on a grid that the closed form matches brute force to 1e-12 and
/// satisfies the lower bound `E[Z] >= min{1/p - 1, l(1-p)} / 2`.
pub fn check_truncated_geometric(grid: &[(f64, u64)]) -> LemmaReport {
    let points = grid
        .iter()
        .map(|&(p, l)| {
            let params = format!("p={p} l={l}");
            let closed = truncated_geometric_expectation(p, l);
            let brute = truncated_geometric_brute_force(p, l);
            match (closed, brute) {
                (Ok(closed), Ok(brute)) => {
                    let lower = 0.5 * (1.0 / p - 1.0).min(l as f64 * (1.0 - p));
                    let agree = (closed - brute).abs() <= 1e-12;
                    LemmaPoint {
                        params,
                        computed: closed,
                        bound: lower,
                        satisfied: agree && closed >= lower,
                        skipped: None,
                    }
                }
                _ => LemmaPoint {
                    params,
                    computed: f64::NAN,
                    bound: f64::NAN,
                    satisfied: false,
                    skipped: Some("parameters outside (0,1) x [1,..)".into()),
                },
            }
        })
        .collect();
    LemmaReport::from_points("truncated-geometric", points)
}

/// The default truncated-geometric grid: p in {0.01, ..., 0.99}, l in 1..=100.
pub fn default_truncated_geometric_grid() -> Vec<(f64, u64)> {
    let mut grid = Vec::new();
    for i in 1..=99 {
        for l in 1..=100u64 {
            grid.push((0.01 * i as f64, l));
        }
    }
    grid
}

/// Monte-Carlo statistics from [`bad_history_probe`].
#[derive(Debug, Clone)]
pub struct ProbeStats {
    pub m: u64,
    pub runs: usize,
    /// Fraction of runs in which the first `m` pulls of the Bernoulli arm
    /// all returned 0.
    pub event_freq: f64,
    /// The exact prediction `2^{-m}`.
    pub predicted_event_prob: f64,
    pub event_count: usize,
    /// Mean number of consecutive deterministic-arm pulls between reaching
    /// the bad history and the next pull of the Bernoulli arm.
    pub runlen_mean: f64,
    pub runlen_se: f64,
    /// Truncated-geometric prediction with the exact pull probability.
    pub predicted_runlen: f64,
    /// The exact pull probability `P(1, m+1)` used in the prediction.
    pub pull_probability: f64,
}

impl ProbeStats {
    pub fn render(&self) -> String {
        format!(
            "bad-history m={} runs={}: event_freq={:.6} (predict {:.6}, {} events), \
             runlen_mean={:.3} +- {:.3} (predict {:.3}, p={:.6e})\n",
            self.m,
            self.runs,
            self.event_freq,
            self.predicted_event_prob,
            self.event_count,
            self.runlen_mean,
            self.runlen_se,
            self.predicted_runlen,
            self.pull_probability
        )
    }
}

/// Simulates the two-arm lower-bound instance under known-arm NPB(1,1) and
/// measures the two quantities the lower-bound argument rests on.
///
/// Event frequency: each run simulates rounds until the Bernoulli arm has
/// been pulled `m` times or produced a reward 1; the bad history occurs iff
/// all `m` pulls returned 0 (probability exactly `2^{-m}`).
///
/// Run length: starting from the bad-history state `(alpha, beta) = (1, m+1)`
/// — which is exactly the conditional law, since deterministic-arm pulls do
/// not change the Bernoulli arm's history — count consecutive
/// deterministic-arm pulls until the Bernoulli arm is selected again,
/// truncated at `horizon`. Its mean is compared against the
/// truncated-geometric expectation with the exact pull probability.
pub fn bad_history_probe(
    m: u64,
    horizon: u64,
    runs: usize,
    rng: &mut RngStream,
) -> Result<ProbeStats> {
    if horizon <= 2 * m {
        return Err(Error::InvalidArgument(format!(
            "probe horizon {horizon} must exceed 2m = {}",
            2 * m
        )));
    }
    if runs == 0 {
        return Err(Error::InvalidArgument("probe needs runs >= 1".into()));
    }
    let instance = theorem1_instance();
    let make_policy = || {
        PolicyState::new(
            2,
            MabPolicyConfig::new(MabKind::Npb)
                .with_pseudo_counts(1, 1)
                .with_known_arm(1, 0.25),
        )
    };

    // Part (a): frequency of the bad history.
    let mut event_count = 0usize;
    if m == 0 {
        event_count = runs; // empty conjunction
    } else {
        for _ in 0..runs {
            let mut policy = make_policy()?;
            let mut pulls = 0u64;
            let mut saw_one = false;
            for _ in 0..horizon {
                let arm = policy.select_arm(rng)?;
                let r = instance.sample_reward(arm, rng)?;
                policy.observe(arm, r, rng)?;
                if arm == 0 {
                    pulls += 1;
                    if r == 1.0 {
                        saw_one = true;
                        break;
                    }
                    if pulls == m {
                        break;
                    }
                }
            }
            if pulls == m && !saw_one {
                event_count += 1;
            }
        }
    }

    // Part (b): conditional run length from the bad-history state.
    let p_exact = binomial_tail_exact(m + 2, 1.0 / (m + 2) as f64, (m + 2) as f64 / 4.0);
    let mut lengths = Vec::with_capacity(runs);
    for _ in 0..runs {
        let mut policy = make_policy()?;
        for _ in 0..m {
            policy.update(0, 0.0); // the m zero-reward pulls of the bad history
        }
        let mut len = 0u64;
        for _ in 0..horizon {
            let arm = policy.select_arm(rng)?;
            if arm == 0 {
                break;
            }
            len += 1;
        }
        lengths.push(len.min(horizon) as f64);
    }
    let runlen_mean = lengths.iter().sum::<f64>() / runs as f64;
    let runlen_var = lengths
        .iter()
        .map(|&x| (x - runlen_mean) * (x - runlen_mean))
        .sum::<f64>()
        / (runs.max(2) as f64 - 1.0);
    let runlen_se = (runlen_var / runs as f64).sqrt();
    let predicted_runlen = truncated_geometric_expectation(p_exact.value(), horizon)?;

    Ok(ProbeStats {
        m,
        runs,
        event_freq: event_count as f64 / runs as f64,
        predicted_event_prob: 0.5f64.powi(m as i32),
        event_count,
        runlen_mean,
        runlen_se,
        predicted_runlen,
        pull_probability: p_exact.value(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn tail_bound_trivial_and_lemma_points() {
        let report = check_tail_bound(&[(2, 0.5, 1.0), (17, 1.0 / 17.0, 17.0 / 4.0)]);
        // (2, 0.5, 1): hypothesis np < k fails (1 < 1 is false): skipped.
        assert!(report.points[0].skipped.is_some());
        assert!(report.points[1].satisfied);
        assert!(report.pass);
        assert_relative_eq!(
            report.points[1].computed,
            2.39670608383663574852e-3,
            max_relative = 1e-10
        );
    }

    #[test]
    fn tail_bound_full_grid_passes() {
        let report = check_tail_bound(&default_tail_grid());
        assert!(report.pass, "{}", report.render());
        assert_eq!(report.skipped_points(), 0, "default grid needs no skips");
        assert_eq!(report.checked_points(), 196 * 10);
    }

    #[test]
    fn pull_probability_margins() {
        let report = check_pull_probability(&[14, 15, 100]);
        assert!(report.points[0].skipped.is_some(), "m=14 fails hypothesis");
        let p15 = &report.points[1];
        assert!(p15.satisfied);
        // bound at m=15 is exp(-15 ln 15 / 20) ~= 0.1312.
        assert_relative_eq!(p15.bound, 0.131199311417695, max_relative = 1e-12);
        let p100 = &report.points[2];
        assert!(p100.satisfied);
        assert!(
            p100.bound / p100.computed > 10.0,
            "m=100 margin only {}",
            p100.bound / p100.computed
        );
        assert!(report.pass);
    }

    #[test]
    fn truncated_geometric_closed_form() {
        // Brute force over support {0, 1, 2} at p = 1/2 gives 3/4.
        assert_relative_eq!(
            truncated_geometric_expectation(0.5, 2).unwrap(),
            0.75,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            truncated_geometric_brute_force(0.5, 2).unwrap(),
            0.75,
            max_relative = 1e-15
        );
        // l = 1 is the two-point distribution with mean 1 - p.
        for p in [0.1, 0.37, 0.9] {
            assert_relative_eq!(
                truncated_geometric_expectation(p, 1).unwrap(),
                1.0 - p,
                max_relative = 1e-12
            );
        }
        assert!(truncated_geometric_expectation(0.0, 5).is_err());
        assert!(truncated_geometric_expectation(1.0, 5).is_err());
        assert!(truncated_geometric_expectation(0.5, 0).is_err());
    }

    #[test]
    fn truncated_geometric_grid_check() {
        let report = check_truncated_geometric(&default_truncated_geometric_grid());
        assert!(report.pass, "some point failed:\n{}", report.render());
        assert_eq!(report.checked_points(), 99 * 100);
    }

    #[test]
    fn probe_event_frequency_m3() {
        let mut rng = RngStream::new(1234);
        let runs = 100_000;
        let stats = bad_history_probe(3, 500, runs, &mut rng).unwrap();
        // 3 s.e. window around 1/8.
        let se = (0.125 * 0.875 / runs as f64).sqrt();
        assert!(
            (stats.event_freq - 0.125).abs() < 3.0 * se,
            "freq {} vs 0.125 (se {se})",
            stats.event_freq
        );
    }

    #[test]
    fn probe_degenerate_m0() {
        let mut rng = RngStream::new(5);
        let stats = bad_history_probe(0, 100, 500, &mut rng).unwrap();
        assert_eq!(stats.event_freq, 1.0);
    }

    #[test]
    fn probe_runlength_matches_truncated_geometric() {
        let mut rng = RngStream::new(8);
        let runs = 20_000;
        let stats = bad_history_probe(15, 10_000, runs, &mut rng).unwrap();
        assert!(
            (stats.runlen_mean - stats.predicted_runlen).abs() < 3.0 * stats.runlen_se,
            "mean {} vs prediction {} (se {})",
            stats.runlen_mean,
            stats.predicted_runlen,
            stats.runlen_se
        );
    }

    #[test]
    fn probe_validates_arguments() {
        let mut rng = RngStream::new(7);
        assert!(bad_history_probe(10, 20, 10, &mut rng).is_err());
        assert!(bad_history_probe(3, 100, 0, &mut rng).is_err());
    }
}
