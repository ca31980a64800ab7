// Scratch driver: full-scale dry runs of the heavy acceptance experiments.
use std::time::Instant;

use bootstrap_bandits::ctx::{CtxKind, CtxPolicyConfig, ModelKind};
use bootstrap_bandits::dist::RngStream;
use bootstrap_bandits::env::{synthetic_classification, DistributionFamily};
use bootstrap_bandits::policy::{
    forced_exploration_schedule, ForcedExplorationMode, MabKind, MabPolicyConfig,
};
use bootstrap_bandits::sim::{
    loglog_slope, run_contextual_replicated_raw, run_mab_replicated, ContextualExperiment,
    MabEnvSpec, MabExperiment, RegretKind,
};

fn main() {
    let which: Vec<String> = std::env::args().skip(1).collect();
    let all = which.is_empty();
    let has = |s: &str| all || which.iter().any(|w| w == s);

    if has("c4") {
        // Criterion 4: theorem1, known-arm NPB vs TS, T = 1e5, 200 reps.
        let t0 = Instant::now();
        let base = MabExperiment {
            env: MabEnvSpec::Theorem1,
            policy: MabPolicyConfig::new(MabKind::Npb).with_known_arm(1, 0.25),
            horizon: 100_000,
            runs: 200,
            master_seed: 1004,
            forced_per_arm: 0,
            regret: RegretKind::Pseudo,
        };
        let npb = run_mab_replicated(&base).unwrap();
        let mut ts_exp = base.clone();
        ts_exp.policy = MabPolicyConfig::new(MabKind::Ts { binarize: false }).with_known_arm(1, 0.25);
        let ts = run_mab_replicated(&ts_exp).unwrap();
        let npb_final = *npb.mean.last().unwrap();
        let ts_final = *ts.mean.last().unwrap();
        let npb_slope = loglog_slope(&npb.mean, (10_000, 100_000)).unwrap();
        let ts_slope = loglog_slope(&ts.mean, (10_000, 100_000)).unwrap();
        println!(
            "c4: npb_final={npb_final:.3} ts_final={ts_final:.3} ratio={:.2} npb_slope={npb_slope:.3} ts_slope={ts_slope:.3} gap={:.3} [{:?}]",
            npb_final / ts_final,
            npb_slope - ts_slope,
            t0.elapsed()
        );
    }

    if has("c5") {
        // Criterion 5: 2-arm Bernoulli (0.5, 0.3), proof-derived m, T = 1e4.
        let t0 = Instant::now();
        let m = forced_exploration_schedule(10_000, ForcedExplorationMode::ProofDerived);
        let instance = bootstrap_bandits::env::BanditInstance::new(vec![
            bootstrap_bandits::env::RewardModel::Bernoulli { mean: 0.5 },
            bootstrap_bandits::env::RewardModel::Bernoulli { mean: 0.3 },
        ])
        .unwrap();
        let exp = MabExperiment {
            env: MabEnvSpec::Fixed(instance),
            policy: MabPolicyConfig::new(MabKind::Npb),
            horizon: 10_000,
            runs: 200,
            master_seed: 1005,
            forced_per_arm: m,
            regret: RegretKind::Pseudo,
        };
        let trace = run_mab_replicated(&exp).unwrap();
        let final_regret = *trace.mean.last().unwrap();
        let window = (2 * 2 * m, 10_000);
        let slope = loglog_slope(&trace.mean, window).unwrap();
        println!(
            "c5: m={m} final={final_regret:.2} slope[{}..{}]={slope:.4} [{:?}]",
            window.0,
            window.1,
            t0.elapsed()
        );
    }

    if has("c6") {
        // Criterion 6: K=10, T=1e4, 200 runs, all four families.
        for family in DistributionFamily::ALL {
            let t0 = Instant::now();
            let binary = family.is_binary();
            let mk = |kind: MabKind| MabExperiment {
                env: MabEnvSpec::Random { family, k: 10 },
                policy: MabPolicyConfig::new(kind),
                horizon: 10_000,
                runs: 200,
                master_seed: 1006,
                forced_per_arm: 0,
                regret: RegretKind::Pseudo,
            };
            let ts = run_mab_replicated(&mk(MabKind::Ts { binarize: !binary })).unwrap();
            let npb = run_mab_replicated(&mk(if binary { MabKind::Npb } else { MabKind::NpbGeneral }))
                .unwrap();
            let wb =
                run_mab_replicated(&mk(if binary { MabKind::Wb } else { MabKind::WbGeneral }))
                    .unwrap();
            let f = |t: &bootstrap_bandits::sim::AggregateTrace| {
                (*t.mean.last().unwrap(), *t.stderr.last().unwrap())
            };
            let (ts_m, ts_s) = f(&ts);
            let (npb_m, npb_s) = f(&npb);
            let (wb_m, wb_s) = f(&wb);
            let pooled_ts_wb = (ts_s * ts_s + wb_s * wb_s).sqrt();
            println!(
                "c6 {}: ts={ts_m:.2}±{ts_s:.2} npb={npb_m:.2}±{npb_s:.2} wb={wb_m:.2}±{wb_s:.2} | npb>wb: {} npb>ts: {} |wb-ts|/pooled={:.2} (ts-wb)/pooled={:.2} [{:?}]",
                family.name(),
                npb_m > wb_m,
                npb_m > ts_m,
                (wb_m - ts_m).abs() / pooled_ts_wb,
                (ts_m - wb_m) / pooled_ts_wb,
                t0.elapsed()
            );
        }
    }

    if has("c9") {
        // Criterion 9: synthetic 3-class d=10, 6000 rows, T=5000, 5 reps.
        let t0 = Instant::now();
        let mut rng = RngStream::derived(1009, u64::MAX);
        let ds = synthetic_classification(3, 10, 6000, 3.0, 0.5, &mut rng).unwrap();
        for (name, kind) in [
            ("wb-log", CtxKind::Wb(ModelKind::Logistic)),
            ("npb-log", CtxKind::Npb(ModelKind::Logistic)),
            ("ucb-lin", CtxKind::LinUcb { width: 1.0 }),
        ] {
            let t1 = Instant::now();
            let exp = ContextualExperiment {
                policy: CtxPolicyConfig::new(kind),
                horizon: 5_000,
                runs: 5,
                master_seed: 1009,
            };
            let traces = run_contextual_replicated_raw(&ds, &exp).unwrap();
            let final_1000: Vec<f64> = traces
                .iter()
                .map(|t| t[4_000..].iter().sum::<f64>() / 1_000.0)
                .collect();
            let mean = final_1000.iter().sum::<f64>() / final_1000.len() as f64;
            println!(
                "c9 {name}: final-1000 per-rep {:?} mean {mean:.4} [{:?}]",
                final_1000
                    .iter()
                    .map(|v| (v * 1000.0).round() / 1000.0)
                    .collect::<Vec<_>>(),
                t1.elapsed()
            );
        }
        println!("c9 total [{:?}]", t0.elapsed());
    }
}
