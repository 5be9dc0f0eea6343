//! Calibration runs for the point-mass TD3-SMR criterion.
//!
//! `cargo run --release --example pilot_pointmass -- <M> <seed> <steps> [width] [batch] [lr] [stop_at]`
//!
//! Prints the evaluation curve of one run; the acceptance threshold is
//! derived from the best return of converged M=1 runs.

use std::time::Instant;

use smr::envs::PointMassEnv;
use smr::neural::{train_td3_smr, SmrTrainConfig, Td3RunConfig};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let get = |i: usize, d: f64| args.get(i).and_then(|a| a.parse().ok()).unwrap_or(d);
    let m = get(0, 1.0) as usize;
    let seed = get(1, 0.0) as u64;
    let steps = get(2, 30_000.0) as u64;
    let width = get(3, 32.0) as usize;
    let batch = get(4, 64.0) as usize;
    let lr = get(5, 1e-3);
    let stop_at_return = args.get(6).and_then(|a| a.parse().ok());

    let cfg = SmrTrainConfig {
        m,
        batch_size: batch,
        hidden: vec![width, width],
        learning_rate: lr,
        ..Default::default()
    };
    let run_cfg = Td3RunConfig {
        total_steps: steps,
        eval_interval: 500,
        eval_episodes: 1,
        stop_at_return,
    };
    let start = Instant::now();
    let run = train_td3_smr(&PointMassEnv::default(), &cfg, &run_cfg, seed).unwrap();
    let best = run
        .curve
        .iter()
        .map(|p| p.mean_return)
        .fold(f64::NEG_INFINITY, f64::max);
    for p in &run.curve {
        print!("{}:{:.1} ", p.step, p.mean_return);
    }
    println!();
    println!(
        "M={m} seed={seed} steps={} best={best:.2} elapsed={:.1}s",
        run.env_steps,
        start.elapsed().as_secs_f64()
    );
}
