//! Calibration runs for the tabular defaults.
//!
//! `cargo run --release --example pilot_tabular -- [h] [t0] [gamma] [epsilon]`

use smr::envs::{cliff_walking_env, random_mdp, value_iteration, TabularEnv};
use smr::tabular::{steps_to_threshold, sup_error, train_q_smr, Budget, LearningRateSchedule, SmrConfig};

fn main() {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let h = args.first().copied().unwrap_or(20.0);
    let t0 = args.get(1).copied().unwrap_or(100.0);
    let gamma = args.get(2).copied().unwrap_or(0.9);
    let epsilon = args.get(3).copied().unwrap_or(0.5);

    println!("convergence: h={h} t0={t0} gamma={gamma} epsilon={epsilon}");
    for m in [1usize, 5, 10] {
        let mut errs = Vec::new();
        for seed in 0..20u64 {
            let mdp = random_mdp(seed, 5, 3, 1.0, gamma, false).unwrap();
            let q_star = value_iteration(&mdp, 1e-12).unwrap();
            let env = TabularEnv::new(mdp, 0, None).unwrap();
            let cfg = SmrConfig {
                m,
                epsilon,
                gamma,
                budget: Budget::Steps(200_000),
                eval_every: 200_000,
                eval_episodes: 1,
                eval_horizon: 10,
            };
            let sched = LearningRateSchedule::polynomial(h, t0, m).unwrap();
            let run = train_q_smr(&env, &cfg, &sched, seed).unwrap();
            errs.push(sup_error(&run.q, &q_star).unwrap() / q_star.max_abs());
        }
        errs.sort_by(f64::total_cmp);
        let below = errs.iter().filter(|&&e| e < 0.05).count();
        println!(
            "  M={m:2}: {below}/20 below 0.05, median {:.4}, worst {:.4}",
            errs[10], errs[19]
        );
    }

    let (mdp, spec) = cliff_walking_env();
    let env = TabularEnv::new(mdp, spec.start_state(), Some(spec.horizon)).unwrap();
    for m in [1usize, 10] {
        let cfg = SmrConfig::episodic(m, 500);
        let sched = LearningRateSchedule::constant(0.05).unwrap();
        let eps: Vec<u64> = (0..20)
            .map(|seed| {
                let run = train_q_smr(&env, &cfg, &sched, seed).unwrap();
                steps_to_threshold(&run.curve, -13.65).unwrap_or(501)
            })
            .collect();
        let mean = eps.iter().sum::<u64>() as f64 / 20.0;
        println!("cliff M={m:2}: mean episodes to -13.65 = {mean:.1} {eps:?}");
    }
}
