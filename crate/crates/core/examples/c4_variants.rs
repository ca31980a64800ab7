// Scratch: every defensible reading of the theorem-1 desk-scale comparison.
use bootstrap_bandits::policy::{MabKind, MabPolicyConfig};
use bootstrap_bandits::sim::{
    loglog_slope, run_mab_replicated, MabEnvSpec, MabExperiment, RegretKind,
};

fn run(name: &str, policy: MabPolicyConfig, horizon: u64, runs: usize) {
    let exp = MabExperiment {
        env: MabEnvSpec::Theorem1,
        policy,
        horizon,
        runs,
        master_seed: 1004,
        forced_per_arm: 0,
        regret: RegretKind::Pseudo,
    };
    let trace = run_mab_replicated(&exp).unwrap();
    let f = *trace.mean.last().unwrap();
    let s = *trace.stderr.last().unwrap();
    let slope = loglog_slope(&trace.mean, (horizon / 10, horizon));
    println!(
        "{name}: final={f:.3}±{s:.3} slope={:?}",
        slope.map(|v| (v * 1000.0).round() / 1000.0)
    );
}

fn main() {
    let t = 100_000;
    let runs = 200;
    run(
        "npb known-arm",
        MabPolicyConfig::new(MabKind::Npb).with_known_arm(1, 0.25),
        t,
        runs,
    );
    run(
        "ts known-arm",
        MabPolicyConfig::new(MabKind::Ts { binarize: false }).with_known_arm(1, 0.25),
        t,
        runs,
    );
    run(
        "npb standard (resample, both arms)",
        MabPolicyConfig::new(MabKind::NpbGeneral),
        t,
        runs,
    );
    run(
        "ts standard (binarized)",
        MabPolicyConfig::new(MabKind::Ts { binarize: true }),
        t,
        runs,
    );
    run(
        "wb known-arm",
        MabPolicyConfig::new(MabKind::Wb).with_known_arm(1, 0.25),
        t,
        runs,
    );
}
