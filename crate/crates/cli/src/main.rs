//! Experiment runner for the bootstrap-bandits library.
//!
//! Three subcommands:
//! - `mab <config.toml>`: replicated K-arm regret experiments; writes
//!   `<out>/regret.csv` and a manifest.
//! - `contextual <config.toml>`: one-vs-all contextual runs; writes
//!   `<out>/reward.csv` (running per-step reward) and a manifest.
//! - `theory`: exact lemma checks; prints one line per grid point and exits
//!   non-zero if any bound fails.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 configuration error,
//! 3 lemma-check failure. Replications run in parallel; set
//! `RAYON_NUM_THREADS` to control the worker count.

mod config;
mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use bootstrap_bandits::dist::RngStream;
use bootstrap_bandits::env::{load_dataset, synthetic_classification, ContextualDataset};
use bootstrap_bandits::sim::{
    aggregate, run_contextual_replicated_raw, run_mab_replicated, running_per_step,
    AggregateTrace, ContextualExperiment, MabExperiment,
};
use bootstrap_bandits::theory::{
    bad_history_probe, check_pull_probability, check_tail_bound, check_truncated_geometric,
    default_truncated_geometric_grid, LemmaReport,
};
use bootstrap_bandits::{Error, Result};

use config::{plan_contextual, plan_dataset, plan_mab, ConfigFile, DatasetSource};
use output::{write_manifest, write_trace_csv, Manifest};

#[derive(Parser)]
#[command(name = "bandit-sim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a replicated K-arm bandit experiment from a config file.
    Mab {
        /// TOML experiment config.
        config: PathBuf,
    },
    /// Run a replicated contextual bandit experiment from a config file.
    Contextual {
        /// TOML experiment config.
        config: PathBuf,
    },
    /// Check the supporting lemmas numerically.
    Theory(TheoryArgs),
}

#[derive(Args)]
struct TheoryArgs {
    /// Smallest n in the tail-bound grid.
    #[arg(long, default_value_t = 5)]
    tail_n_min: u64,
    /// Largest n in the tail-bound grid.
    #[arg(long, default_value_t = 200)]
    tail_n_max: u64,
    /// Smallest m in the pull-probability grid.
    #[arg(long, default_value_t = 15)]
    m_min: u64,
    /// Largest m in the pull-probability grid.
    #[arg(long, default_value_t = 200)]
    m_max: u64,
    /// Also run the Monte-Carlo bad-history probe with this m (informational).
    #[arg(long)]
    probe_m: Option<u64>,
    #[arg(long, default_value_t = 100_000)]
    probe_runs: usize,
    #[arg(long, default_value_t = 10_000)]
    probe_horizon: u64,
    #[arg(long, default_value_t = 0)]
    probe_seed: u64,
    /// Write the full report to a file as well as stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Test hook: invert every bound comparison to exercise the failure path.
    #[arg(long, hide = true)]
    self_test_invert: bool,
}

const EXIT_RUNTIME: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_THEORY: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Mab { config } => cmd_mab(&config),
        Command::Contextual { config } => cmd_contextual(&config),
        Command::Theory(args) => cmd_theory(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Config(_) | Error::InvalidParameter(_) => ExitCode::from(EXIT_CONFIG),
                _ => ExitCode::from(EXIT_RUNTIME),
            }
        }
    }
}

fn cmd_mab(config_path: &PathBuf) -> Result<ExitCode> {
    let start = Instant::now();
    let text = fs::read_to_string(config_path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", config_path.display())))?;
    let cfg = ConfigFile::parse(&text)?;
    let plan = plan_mab(&cfg)?;
    let regret = cfg.regret_kind()?;

    let mut series: Vec<(String, AggregateTrace)> = Vec::new();
    for policy in &plan.policies {
        let exp = MabExperiment {
            env: plan.env.clone(),
            policy: policy.config.clone(),
            horizon: cfg.experiment.horizon,
            runs: cfg.experiment.runs,
            master_seed: cfg.experiment.seed,
            forced_per_arm: policy.forced_per_arm,
            regret,
        };
        let trace = run_mab_replicated(&exp)?;
        eprintln!(
            "mab: policy {} done ({} runs, final mean regret {:.4})",
            policy.name,
            trace.runs,
            trace.mean.last().copied().unwrap_or(0.0)
        );
        series.push((policy.name.clone(), trace));
    }

    let out_dir = &cfg.experiment.out;
    fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join("regret.csv");
    write_trace_csv(&csv_path, &series)?;
    write_manifest(
        out_dir,
        &Manifest {
            seed: cfg.experiment.seed,
            duration: start.elapsed(),
            outputs: vec![csv_path],
            config_text: &text,
        },
    )?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_contextual(config_path: &PathBuf) -> Result<ExitCode> {
    let start = Instant::now();
    let text = fs::read_to_string(config_path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", config_path.display())))?;
    let cfg = ConfigFile::parse(&text)?;
    let plans = plan_contextual(&cfg)?;
    let dataset = build_dataset(&cfg)?;

    let mut series: Vec<(String, AggregateTrace)> = Vec::new();
    for plan in &plans {
        let exp = ContextualExperiment {
            policy: plan.config.clone(),
            horizon: cfg.experiment.horizon,
            runs: cfg.experiment.runs,
            master_seed: cfg.experiment.seed,
        };
        let traces = run_contextual_replicated_raw(&dataset, &exp)?;
        let running: Vec<Vec<f64>> = traces.iter().map(|t| running_per_step(t)).collect();
        let trace = aggregate(&running)?;
        eprintln!(
            "contextual: policy {} done ({} runs, final per-step reward {:.4})",
            plan.name,
            trace.runs,
            trace.mean.last().copied().unwrap_or(0.0)
        );
        series.push((plan.name.clone(), trace));
    }

    let out_dir = &cfg.experiment.out;
    fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join("reward.csv");
    write_trace_csv(&csv_path, &series)?;
    write_manifest(
        out_dir,
        &Manifest {
            seed: cfg.experiment.seed,
            duration: start.elapsed(),
            outputs: vec![csv_path],
            config_text: &text,
        },
    )?;
    Ok(ExitCode::SUCCESS)
}

fn build_dataset(cfg: &ConfigFile) -> Result<ContextualDataset> {
    match plan_dataset(cfg)? {
        DatasetSource::File { path, format } => {
            if !path.exists() {
                return Err(Error::Config(format!(
                    "environment.dataset `{}` does not exist",
                    path.display()
                )));
            }
            let shuffle = cfg
                .environment
                .shuffle_seed
                .unwrap_or(cfg.experiment.seed);
            load_dataset(&path, format, shuffle)
        }
        DatasetSource::Synthetic(plan) => {
            // A dedicated stream, disjoint from every replication stream.
            let mut rng = RngStream::derived(cfg.experiment.seed, u64::MAX);
            synthetic_classification(
                plan.classes,
                plan.dim,
                plan.rows,
                plan.separation,
                plan.noise,
                &mut rng,
            )
        }
    }
}

fn cmd_theory(args: &TheoryArgs) -> Result<ExitCode> {
    if args.tail_n_min > args.tail_n_max || args.m_min > args.m_max {
        return Err(Error::Config(
            "theory grids are empty (check --tail-n-min/--tail-n-max and --m-min/--m-max)".into(),
        ));
    }

    let mut tail_grid = Vec::new();
    for n in args.tail_n_min..=args.tail_n_max {
        for i in 1..=10 {
            let p = i as f64 / 20.0;
            tail_grid.push((n, p, (0.7 * n as f64).ceil()));
        }
    }
    let ms: Vec<u64> = (args.m_min..=args.m_max).collect();

    let mut reports = vec![
        check_tail_bound(&tail_grid),
        check_pull_probability(&ms),
        check_truncated_geometric(&default_truncated_geometric_grid()),
    ];
    if args.self_test_invert {
        for report in reports.iter_mut() {
            invert_report(report);
        }
    }

    let mut text = String::new();
    for report in &reports {
        text.push_str(&report.render());
    }
    if let Some(m) = args.probe_m {
        let mut rng = RngStream::new(args.probe_seed);
        let stats = bad_history_probe(m, args.probe_horizon, args.probe_runs, &mut rng)?;
        text.push_str(&stats.render());
    }

    print!("{text}");
    if let Some(path) = &args.out {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent)?;
            }
        }
        fs::write(path, &text)?;
    }

    if reports.iter().all(|r| r.pass) {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("error: at least one lemma check failed");
        Ok(ExitCode::from(EXIT_THEORY))
    }
}

fn invert_report(report: &mut LemmaReport) {
    for point in report.points.iter_mut() {
        if point.skipped.is_none() {
            point.satisfied = !point.satisfied;
        }
    }
    report.pass = report
        .points
        .iter()
        .all(|p| p.satisfied || p.skipped.is_some());
}
