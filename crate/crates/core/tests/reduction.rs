//! With M = 1 every SMR update is plain Q-learning, bit for bit.

use std::cell::RefCell;

use smr::envs::{cliff_walking_env, random_mdp, TabularEnv};
use smr::tabular::{
    q_smr_expansion, q_smr_loop_update, q_smr_nonreturnable_update, q_update, train_q_smr_with_hooks,
    LearningRateSchedule, QTable, SmrConfig, TabularTransition, TrainHooks,
};

/// Textbook Q-learning on a nested-vector table.
fn vanilla(q: &mut [Vec<f64>], tr: &TabularTransition, alpha: f64, gamma: f64) {
    let best = q[tr.s_next].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    q[tr.s][tr.a] = (1.0 - alpha) * q[tr.s][tr.a] + alpha * (tr.r + gamma * best);
}

fn rows(q: &QTable) -> Vec<Vec<f64>> {
    (0..q.n_states()).map(|s| q.row(s).to_vec()).collect()
}

#[test]
fn single_reuse_matches_vanilla_on_random_inputs() {
    let mut state = 0x9e37_79b9_7f4a_7c15u64;
    let mut next = || {
        // xorshift keeps the oracle free of the crate's generators
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    for _ in 0..500 {
        let table: Vec<Vec<f64>> = (0..4).map(|_| (0..3).map(|_| next() * 20.0 - 10.0).collect()).collect();
        let tr = TabularTransition {
            s: (next() * 4.0) as usize,
            a: (next() * 3.0) as usize,
            r: next() * 2.0 - 1.0,
            s_next: (next() * 4.0) as usize,
        };
        let alpha = next();
        let gamma = next() * 0.99;

        let mut oracle = table.clone();
        vanilla(&mut oracle, &tr, alpha, gamma);

        let base = QTable::from_rows(table).unwrap();
        let mut a = base.clone();
        q_update(&mut a, &tr, alpha, gamma).unwrap();
        let mut b = base.clone();
        q_smr_loop_update(&mut b, &tr, alpha, gamma, 1, None).unwrap();
        let mut c = base.clone();
        q_smr_expansion(&mut c, &tr, alpha, gamma, 1).unwrap();
        for q in [&a, &b, &c] {
            assert_eq!(rows(q), oracle);
        }
        if tr.s != tr.s_next {
            let mut d = base.clone();
            q_smr_nonreturnable_update(&mut d, &tr, alpha, gamma, 1).unwrap();
            assert_eq!(rows(&d), oracle);
        }
    }
}

/// Replays the transitions a training run saw through the oracle and
/// compares the final tables exactly.
fn replay_run(env: &TabularEnv, cfg: &SmrConfig, schedule: &LearningRateSchedule, seed: u64) {
    let seen = RefCell::new(Vec::new());
    let hooks = TrainHooks {
        on_step: Some(Box::new(|_, tr: &TabularTransition, _: &QTable| {
            seen.borrow_mut().push(*tr)
        })),
        on_eval: None,
    };
    let run = train_q_smr_with_hooks(env, cfg, schedule, seed, hooks).unwrap();
    let mut oracle = vec![vec![0.0; env.mdp.n_actions()]; env.mdp.n_states()];
    for (t, tr) in seen.borrow().iter().enumerate() {
        vanilla(&mut oracle, tr, schedule.rate(t as u64), cfg.gamma);
    }
    assert_eq!(rows(&run.q), oracle);
}

#[test]
fn cliff_run_with_single_reuse_is_vanilla_q_learning() {
    let (mdp, spec) = cliff_walking_env();
    let env = TabularEnv::new(mdp, spec.start_state(), Some(spec.horizon)).unwrap();
    let cfg = SmrConfig::episodic(1, 100);
    replay_run(&env, &cfg, &LearningRateSchedule::constant(0.05).unwrap(), 3);
}

#[test]
fn random_mdp_run_with_single_reuse_is_vanilla_q_learning() {
    let mdp = random_mdp(9, 5, 3, 1.0, 0.9, false).unwrap();
    let env = TabularEnv::new(mdp, 0, None).unwrap();
    let cfg = SmrConfig {
        m: 1,
        epsilon: 0.3,
        gamma: 0.9,
        budget: smr::tabular::Budget::Steps(20_000),
        eval_every: 5_000,
        eval_episodes: 2,
        eval_horizon: 20,
    };
    replay_run(&env, &cfg, &LearningRateSchedule::parse("poly:150:1000", 1).unwrap(), 9);
}
