//! Experiment configuration files.
//!
//! Experiments are described by a TOML file with one `[experiment]` section,
//! one `[environment]` section and one `[[policy]]` section per strategy, so
//! a run's full parameter set travels in a single reproducible document that
//! the manifest can echo.

use std::path::PathBuf;
use std::str::FromStr;

use serde::Deserialize;

use bootstrap_bandits::ctx::{CtxKind, CtxPolicyConfig, ModelKind, PseudoSource, SgdConfig};
use bootstrap_bandits::env::{DatasetFormat, DistributionFamily};
use bootstrap_bandits::policy::{
    forced_exploration_schedule, ForcedExplorationMode, MabKind, MabPolicyConfig,
};
use bootstrap_bandits::sim::{MabEnvSpec, RegretKind};
use bootstrap_bandits::{Error, Result};

pub const MAB_POLICY_NAMES: &[&str] = &["ts", "npb", "wb", "eg"];
pub const CTX_POLICY_NAMES: &[&str] = &[
    "eg-lin", "eg-log", "npb-lin", "npb-log", "wb-lin", "wb-log", "ucb-lin", "ts-lin",
];

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment: ExperimentSection,
    pub environment: EnvironmentSection,
    #[serde(default)]
    pub policy: Vec<PolicySection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    /// "mab" or "contextual".
    pub kind: String,
    pub horizon: u64,
    pub runs: usize,
    pub seed: u64,
    pub out: PathBuf,
    /// "pseudo" (default) or "realized"; K-arm experiments only.
    pub regret: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSection {
    /// K-arm experiments: bernoulli | truncated-normal | beta | triangular
    /// | theorem1.
    pub family: Option<String>,
    pub arms: Option<usize>,
    /// Contextual experiments: a dataset file...
    pub dataset: Option<PathBuf>,
    pub format: Option<String>,
    pub shuffle_seed: Option<u64>,
    /// ...or a synthetic generator.
    pub synthetic: Option<SyntheticSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSection {
    pub classes: usize,
    pub dim: usize,
    pub rows: usize,
    #[serde(default = "default_separation")]
    pub separation: f64,
    #[serde(default = "default_noise")]
    pub noise: f64,
}

fn default_separation() -> f64 {
    3.0
}

fn default_noise() -> f64 {
    0.5
}

/// Forced exploration: a mode name or an explicit pull count.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum ForcedSpec {
    Pulls(u64),
    Mode(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySection {
    pub kind: String,
    /// Series name in the CSV; defaults to `kind`.
    pub name: Option<String>,
    #[serde(default = "default_pseudo_count")]
    pub alpha0: u64,
    #[serde(default = "default_pseudo_count")]
    pub beta0: u64,
    /// Epsilon-greedy schedule constant `eps_t = c / (c + t)`.
    #[serde(default = "default_epsilon_c")]
    pub epsilon_c: f64,
    /// Forced exploration pulls per arm before the adaptive policy.
    pub forced: Option<ForcedSpec>,
    /// Treat the deterministic arm of the theorem1 instance as known.
    #[serde(default)]
    pub known_arm: bool,
    /// LinUCB exploration width.
    #[serde(default = "default_one")]
    pub width: f64,
    /// Linear Thompson sampling posterior scale.
    #[serde(default = "default_one")]
    pub scale: f64,
    /// Ridge regularizer for linear baselines.
    #[serde(default = "default_one")]
    pub ridge: f64,
    /// SGD stopping tolerance for model-based contextual policies.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_passes")]
    pub max_passes: usize,
    /// Pseudo-example source: "offline" | "isotropic" | "first-rounds:<B>".
    #[serde(default = "default_pseudo_source")]
    pub pseudo: String,
}

fn default_pseudo_count() -> u64 {
    1
}

fn default_epsilon_c() -> f64 {
    50.0
}

fn default_one() -> f64 {
    1.0
}

fn default_tolerance() -> f64 {
    1e-3
}

fn default_max_passes() -> usize {
    50
}

fn default_pseudo_source() -> String {
    "offline".into()
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ConfigFile =
            toml::from_str(text).map_err(|e| Error::Config(format!("config parse: {e}")))?;
        if cfg.policy.is_empty() {
            return Err(Error::Config(
                "config needs at least one [[policy]] section".into(),
            ));
        }
        if cfg.experiment.horizon == 0 || cfg.experiment.runs == 0 {
            return Err(Error::Config(
                "experiment.horizon and experiment.runs must be positive".into(),
            ));
        }
        Ok(cfg)
    }

    pub fn regret_kind(&self) -> Result<RegretKind> {
        match self.experiment.regret.as_deref() {
            None | Some("pseudo") => Ok(RegretKind::Pseudo),
            Some("realized") => Ok(RegretKind::Realized),
            Some(other) => Err(Error::Config(format!(
                "experiment.regret must be `pseudo` or `realized`, got `{other}`"
            ))),
        }
    }
}

/// A resolved K-arm policy: config plus forced pulls and the series name.
#[derive(Debug, Clone)]
pub struct MabPolicyPlan {
    pub name: String,
    pub config: MabPolicyConfig,
    pub forced_per_arm: u64,
}

/// Environment plus per-policy plans for a K-arm run.
pub struct MabPlan {
    pub env: MabEnvSpec,
    pub policies: Vec<MabPolicyPlan>,
}

pub fn plan_mab(cfg: &ConfigFile) -> Result<MabPlan> {
    if cfg.experiment.kind != "mab" {
        return Err(Error::Config(format!(
            "experiment.kind must be `mab` for this command, got `{}`",
            cfg.experiment.kind
        )));
    }
    let family_name = cfg
        .environment
        .family
        .as_deref()
        .ok_or_else(|| Error::Config("environment.family is required for mab runs".into()))?;
    let (env, binary_rewards, theorem1) = if family_name == "theorem1" {
        if let Some(arms) = cfg.environment.arms {
            if arms != 2 {
                return Err(Error::Config(
                    "environment.arms must be 2 (or omitted) for the theorem1 family".into(),
                ));
            }
        }
        (MabEnvSpec::Theorem1, false, true)
    } else {
        let family = DistributionFamily::from_str(family_name)?;
        let k = cfg
            .environment
            .arms
            .ok_or_else(|| Error::Config("environment.arms is required".into()))?;
        if k < 2 {
            return Err(Error::Config("environment.arms must be at least 2".into()));
        }
        (
            MabEnvSpec::Random { family, k },
            family.is_binary(),
            false,
        )
    };

    let mut policies = Vec::new();
    for p in &cfg.policy {
        if p.known_arm && !theorem1 {
            return Err(Error::Config(
                "policy.known_arm is only valid with the theorem1 family".into(),
            ));
        }
        // The closed-form estimators are exact only for 0/1 rewards; general
        // reward families get the sample-retaining forms, and TS gets the
        // randomized-rounding pseudo-reward.
        let counts_form = binary_rewards || (theorem1 && p.known_arm);
        let kind = match p.kind.as_str() {
            "ts" => MabKind::Ts {
                binarize: !binary_rewards,
            },
            "npb" => {
                if counts_form {
                    MabKind::Npb
                } else {
                    MabKind::NpbGeneral
                }
            }
            "wb" => {
                if counts_form {
                    MabKind::Wb
                } else {
                    MabKind::WbGeneral
                }
            }
            "eg" => MabKind::EpsilonGreedy { c: p.epsilon_c },
            other => {
                return Err(Error::Config(format!(
                    "unknown policy.kind `{other}`; valid names: {}",
                    MAB_POLICY_NAMES.join(", ")
                )))
            }
        };
        let mut config =
            MabPolicyConfig::new(kind).with_pseudo_counts(p.alpha0, p.beta0);
        if p.known_arm {
            // Arm 1 of the theorem1 instance is deterministic 1/4.
            config = config.with_known_arm(1, 0.25);
        }
        let forced_per_arm = match &p.forced {
            None => 0,
            Some(ForcedSpec::Pulls(m)) => *m,
            Some(ForcedSpec::Mode(mode)) => {
                let mode = match mode.as_str() {
                    "theorem-text" => ForcedExplorationMode::TheoremText,
                    "proof-derived" => ForcedExplorationMode::ProofDerived,
                    other => {
                        return Err(Error::Config(format!(
                            "policy.forced must be `theorem-text`, `proof-derived` or a pull \
                             count, got `{other}`"
                        )))
                    }
                };
                forced_exploration_schedule(cfg.experiment.horizon, mode)
            }
        };
        policies.push(MabPolicyPlan {
            name: p.name.clone().unwrap_or_else(|| p.kind.clone()),
            config,
            forced_per_arm,
        });
    }
    Ok(MabPlan { env, policies })
}

/// A resolved contextual policy.
#[derive(Debug, Clone)]
pub struct CtxPolicyPlan {
    pub name: String,
    pub config: CtxPolicyConfig,
}

pub fn plan_contextual(cfg: &ConfigFile) -> Result<Vec<CtxPolicyPlan>> {
    if cfg.experiment.kind != "contextual" {
        return Err(Error::Config(format!(
            "experiment.kind must be `contextual` for this command, got `{}`",
            cfg.experiment.kind
        )));
    }
    let mut plans = Vec::new();
    for p in &cfg.policy {
        let kind = match p.kind.as_str() {
            "eg-lin" => CtxKind::EpsilonGreedy(ModelKind::Linear, p.epsilon_c),
            "eg-log" => CtxKind::EpsilonGreedy(ModelKind::Logistic, p.epsilon_c),
            "npb-lin" => CtxKind::Npb(ModelKind::Linear),
            "npb-log" => CtxKind::Npb(ModelKind::Logistic),
            "wb-lin" => CtxKind::Wb(ModelKind::Linear),
            "wb-log" => CtxKind::Wb(ModelKind::Logistic),
            "ucb-lin" => CtxKind::LinUcb { width: p.width },
            "ts-lin" => CtxKind::LinTs { scale: p.scale },
            other => {
                return Err(Error::Config(format!(
                    "unknown policy.kind `{other}`; valid names: {}",
                    CTX_POLICY_NAMES.join(", ")
                )))
            }
        };
        let pseudo = parse_pseudo_source(&p.pseudo)?;
        let config = CtxPolicyConfig {
            kind,
            sgd: SgdConfig {
                tolerance: p.tolerance,
                max_passes: p.max_passes,
                ..SgdConfig::default()
            },
            ridge: p.ridge,
            pseudo,
        };
        plans.push(CtxPolicyPlan {
            name: p.name.clone().unwrap_or_else(|| p.kind.clone()),
            config,
        });
    }
    Ok(plans)
}

fn parse_pseudo_source(s: &str) -> Result<PseudoSource> {
    match s {
        "offline" => Ok(PseudoSource::Offline),
        "isotropic" => Ok(PseudoSource::Isotropic),
        other => {
            if let Some(b) = other.strip_prefix("first-rounds:") {
                let b: usize = b.parse().map_err(|_| {
                    Error::Config(format!("bad first-rounds buffer size in `{other}`"))
                })?;
                if b == 0 {
                    return Err(Error::Config(
                        "first-rounds buffer size must be positive".into(),
                    ));
                }
                Ok(PseudoSource::FirstRounds(b))
            } else {
                Err(Error::Config(format!(
                    "policy.pseudo must be `offline`, `isotropic` or `first-rounds:<B>`, got \
                     `{other}`"
                )))
            }
        }
    }
}

/// Resolves the contextual dataset source.
pub enum DatasetSource {
    File { path: PathBuf, format: DatasetFormat },
    Synthetic(SyntheticPlan),
}

pub struct SyntheticPlan {
    pub classes: usize,
    pub dim: usize,
    pub rows: usize,
    pub separation: f64,
    pub noise: f64,
}

pub fn plan_dataset(cfg: &ConfigFile) -> Result<DatasetSource> {
    match (&cfg.environment.dataset, &cfg.environment.synthetic) {
        (Some(_), Some(_)) => Err(Error::Config(
            "environment.dataset and environment.synthetic are mutually exclusive".into(),
        )),
        (Some(path), None) => {
            let format = match cfg.environment.format.as_deref() {
                None => DatasetFormat::DenseCsv,
                Some(f) => DatasetFormat::from_str(f)?,
            };
            Ok(DatasetSource::File {
                path: path.clone(),
                format,
            })
        }
        (None, Some(s)) => Ok(DatasetSource::Synthetic(SyntheticPlan {
            classes: s.classes,
            dim: s.dim,
            rows: s.rows,
            separation: s.separation,
            noise: s.noise,
        })),
        (None, None) => Err(Error::Config(
            "contextual runs need environment.dataset or environment.synthetic".into(),
        )),
    }
}
