//! Property suites over the update rules, networks and buffer, run with
//! fixed seeds.

use std::fmt;
use std::time::{Duration, Instant};

use rand::Rng;

use crate::envs::{cliff_walking_env, random_mdp, step_discrete, value_iteration, TabularEnv};
use crate::error::{Error, Result};
use crate::neural::{
    bootstrap_targets, critic_regression, mean_output_grad, sample_target_noise, smr_train_step, smr_vs_scaled_lr,
    Activation, ActorCriticParams, DenseNet, OptimizerKind, ReplayBuffer, SmrTrainConfig, Td3Agent, Transition,
};
use crate::seeding::{stream_rng, SmrRng, Stream};
use crate::tabular::{
    effective_rate, q_smr_expansion, q_smr_loop_update, q_smr_nonreturnable_update, sup_error, train_q_smr,
    train_q_smr_with_hooks, Budget, LearningRateSchedule, QTable, SmrConfig, SmrTrace, TabularTransition, TrainHooks,
};

/// Relative sup-error tolerance of the convergence suite (calibrated by the
/// tabular pilot).
pub const CONVERGENCE_TOLERANCE: f64 = 0.05;
pub const CONVERGENCE_STEPS: u64 = 200_000;
pub const CONVERGENCE_SCHEDULE: &str = "poly:150:1000";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Lemma1,
    Theorem1,
    Corollary1,
    Stability,
    Convergence,
    Gradients,
    Theorem5,
    Buffer,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Lemma1,
        Suite::Theorem1,
        Suite::Corollary1,
        Suite::Stability,
        Suite::Convergence,
        Suite::Gradients,
        Suite::Theorem5,
        Suite::Buffer,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Lemma1 => "lemma1",
            Suite::Theorem1 => "theorem1",
            Suite::Corollary1 => "corollary1",
            Suite::Stability => "stability",
            Suite::Convergence => "convergence",
            Suite::Gradients => "gradients",
            Suite::Theorem5 => "theorem5",
            Suite::Buffer => "buffer",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| Error::UnknownId {
                kind: "suite",
                id: name.to_string(),
            })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, cases: usize, detail: String) -> Self {
        Check {
            name: name.to_string(),
            passed,
            cases,
            detail,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{status}] {} ({} cases): {}", self.name, self.cases, self.detail)
    }
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
    pub elapsed: Duration,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Deliberate defects for checking that the suites notice them.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Faults {
    pub corrupt_expansion: bool,
}

impl Faults {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "expansion" => Ok(Faults {
                corrupt_expansion: true,
            }),
            _ => Err(Error::UnknownId {
                kind: "fault",
                id: name.to_string(),
            }),
        }
    }
}

pub fn run_suite(suite: Suite, faults: Faults) -> Result<SuiteReport> {
    let started = Instant::now();
    let checks = match suite {
        Suite::Lemma1 => vec![lemma1(10_000)?],
        Suite::Theorem1 => {
            if faults.corrupt_expansion {
                vec![theorem1_with(100, corrupted_expansion)?]
            } else {
                vec![theorem1_with(100, q_smr_expansion)?]
            }
        }
        Suite::Corollary1 => vec![corollary1(100)?],
        Suite::Stability => stability()?,
        Suite::Convergence => convergence(&[1, 5, 10], 20)?,
        Suite::Gradients => vec![gradients(100)?],
        Suite::Theorem5 => theorem5()?,
        Suite::Buffer => vec![buffer()?],
    };
    Ok(SuiteReport {
        suite,
        checks,
        elapsed: started.elapsed(),
    })
}

/// `alpha <= 1 - (1 - alpha)^M <= min(1, M alpha)` on random pairs.
pub fn lemma1(cases: usize) -> Result<Check> {
    const SLACK: f64 = 1e-15;
    let mut rng = stream_rng(1, Stream::Verify);
    let mut violations = 0;
    let mut first = None;
    for i in 0..cases {
        // Pin the boundaries in the first few cases.
        let alpha = match i {
            0 => 0.0,
            1 => 1.0,
            _ => rng.gen_range(0.0..=1.0),
        };
        let m = rng.gen_range(1..=64usize);
        let eff = effective_rate(alpha, m)?;
        let ok = alpha <= eff + SLACK && eff <= (m as f64 * alpha).min(1.0) + SLACK;
        if !ok {
            violations += 1;
            first.get_or_insert((alpha, m, eff));
        }
    }
    Ok(Check::new(
        "effective rate bounds",
        violations == 0,
        cases,
        match first {
            None => "0 violations".into(),
            Some((a, m, e)) => format!("{violations} violations, first alpha={a} M={m} eff={e}"),
        },
    ))
}

/// A random table with entries in `[-10, 10]`.
fn random_table(n_s: usize, n_a: usize, rng: &mut SmrRng) -> QTable {
    let rows = (0..n_s)
        .map(|_| (0..n_a).map(|_| rng.gen_range(-10.0..=10.0)).collect())
        .collect();
    QTable::from_rows(rows).expect("rectangular")
}

/// Transitions from random MDPs; every fourth case is forced to a self-loop
/// so the moving-max branch is exercised.
fn random_cases(n: usize, nonreturnable: bool, rng: &mut SmrRng) -> Result<Vec<(QTable, TabularTransition, f64)>> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let n_s = rng.gen_range(2..=6);
        let n_a = rng.gen_range(1..=4);
        let gamma = rng.gen_range(0.0..0.999);
        let mdp = random_mdp(rng.gen(), n_s, n_a, 1.0, gamma, nonreturnable)?;
        let s = rng.gen_range(0..n_s);
        let a = rng.gen_range(0..n_a);
        let s_next = if !nonreturnable && i % 4 == 0 {
            s
        } else {
            step_discrete(&mdp, s, a, rng)?.next_state
        };
        let tr = TabularTransition {
            s,
            a,
            r: mdp.reward(s, a),
            s_next,
        };
        out.push((random_table(n_s, n_a, rng), tr, gamma));
    }
    Ok(out)
}

pub type ExpansionFn = fn(&mut QTable, &TabularTransition, f64, f64, usize) -> Result<(f64, SmrTrace)>;

/// Literal loop versus the expanded form, `M` in `1..=8`.
pub fn theorem1_with(n: usize, expansion: ExpansionFn) -> Result<Check> {
    let mut rng = stream_rng(2, Stream::Verify);
    let cases = random_cases(n, false, &mut rng)?;
    let mut worst = 0.0f64;
    let mut count = 0;
    for (q, tr, gamma) in &cases {
        for m in 1..=8 {
            let alpha = rng.gen_range(0.0..=1.0);
            let mut a = q.clone();
            let mut b = q.clone();
            q_smr_loop_update(&mut a, tr, alpha, *gamma, m, None)?;
            expansion(&mut b, tr, alpha, *gamma, m)?;
            worst = worst.max(sup_error(&a, &b)?);
            count += 1;
        }
    }
    Ok(Check::new(
        "loop equals expansion",
        worst <= 1e-12,
        count,
        format!("max |difference| = {worst:e}"),
    ))
}

/// The expansion with its leading weight raised one power too far.
fn corrupted_expansion(
    q: &mut QTable,
    tr: &TabularTransition,
    alpha: f64,
    gamma: f64,
    m: usize,
) -> Result<(f64, SmrTrace)> {
    let q0 = q.get(tr.s, tr.a);
    let (v, trace) = q_smr_expansion(q, tr, alpha, gamma, m)?;
    let bad = v - alpha * (1.0 - alpha).powi(m as i32) * q0;
    q.set(tr.s, tr.a, bad);
    Ok((bad, trace))
}

/// Closed form versus loop on nonreturnable transitions.
pub fn corollary1(n: usize) -> Result<Check> {
    let mut rng = stream_rng(3, Stream::Verify);
    let cases = random_cases(n, true, &mut rng)?;
    let mut worst = 0.0f64;
    let mut count = 0;
    for (q, tr, gamma) in &cases {
        for m in 1..=8 {
            let alpha = rng.gen_range(0.0..=1.0);
            let mut a = q.clone();
            let mut b = q.clone();
            q_smr_loop_update(&mut a, tr, alpha, *gamma, m, None)?;
            q_smr_nonreturnable_update(&mut b, tr, alpha, *gamma, m)?;
            worst = worst.max(sup_error(&a, &b)?);
            count += 1;
        }
    }
    Ok(Check::new(
        "closed form equals loop",
        worst <= 1e-12,
        count,
        format!("max |difference| = {worst:e}"),
    ))
}

/// Full training runs from a zero table never leave `r_max / (1 - gamma)`.
pub fn stability() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let (mdp, spec) = cliff_walking_env();
    let bound = mdp.r_max() / (1.0 - mdp.gamma());
    let cliff = TabularEnv::new(mdp, spec.start_state(), Some(spec.horizon))?;
    let mut worst = 0.0f64;
    let mut runs = 0;
    for m in [1usize, 10, 20] {
        for alpha in [0.05, 0.5, 1.0] {
            let run = train_q_smr(
                &cliff,
                &SmrConfig::episodic(m, 500),
                &LearningRateSchedule::constant(alpha)?,
                runs as u64,
            )?;
            worst = worst.max(run.max_abs_q);
            runs += 1;
        }
    }
    checks.push(Check::new(
        "cliff walk stays bounded",
        worst <= bound + 1e-9,
        runs,
        format!("max |Q| = {worst}, bound {bound}"),
    ));

    let mut worst_ratio = 0.0f64;
    let mut runs = 0;
    for seed in 0..4u64 {
        for (m, sched) in [(1, "constant:1"), (10, "constant:0.3"), (10, CONVERGENCE_SCHEDULE)] {
            let gamma = 0.9;
            let mdp = random_mdp(seed, 5, 3, 1.0, gamma, false)?;
            let bound = mdp.r_max() / (1.0 - gamma);
            let env = TabularEnv::new(mdp, 0, None)?;
            let cfg = SmrConfig {
                m,
                epsilon: 0.3,
                gamma,
                budget: Budget::Steps(50_000),
                eval_every: 50_000,
                eval_episodes: 1,
                eval_horizon: 10,
            };
            let run = train_q_smr(&env, &cfg, &LearningRateSchedule::parse(sched, m)?, seed)?;
            worst_ratio = worst_ratio.max(run.max_abs_q - bound);
            runs += 1;
        }
    }
    checks.push(Check::new(
        "random MDPs stay bounded",
        worst_ratio <= 1e-9,
        runs,
        format!("max (|Q| - bound) = {worst_ratio}"),
    ));
    Ok(checks)
}

/// Relative sup-error of Q-SMR against value iteration on 5x3 random MDPs,
/// plus the doubling-horizon check (median error at `2T` below `T`).
pub fn convergence(ratios: &[usize], seeds: u64) -> Result<Vec<Check>> {
    let gamma = 0.9;
    let mut checks = Vec::new();
    for &m in ratios {
        let mut final_errs = Vec::new();
        let mut half_errs = Vec::new();
        for seed in 0..seeds {
            let mdp = random_mdp(seed, 5, 3, 1.0, gamma, false)?;
            let q_star = value_iteration(&mdp, 1e-12)?;
            let scale = q_star.max_abs();
            let env = TabularEnv::new(mdp, 0, None)?;
            let cfg = SmrConfig {
                m,
                epsilon: 0.3,
                gamma,
                budget: Budget::Steps(CONVERGENCE_STEPS),
                eval_every: CONVERGENCE_STEPS,
                eval_episodes: 1,
                eval_horizon: 10,
            };
            let mut half = None;
            let hooks = TrainHooks {
                on_step: Some(Box::new(|t, _: &TabularTransition, q: &QTable| {
                    if t == CONVERGENCE_STEPS / 2 {
                        half = Some(q.clone());
                    }
                })),
                on_eval: None,
            };
            let sched = LearningRateSchedule::parse(CONVERGENCE_SCHEDULE, m)?;
            let run = train_q_smr_with_hooks(&env, &cfg, &sched, seed, hooks)?;
            let half = half.ok_or_else(|| Error::invalid("midpoint snapshot missing"))?;
            final_errs.push(sup_error(&run.q, &q_star)? / scale);
            half_errs.push(sup_error(&half, &q_star)? / scale);
        }
        let below = final_errs.iter().filter(|&&e| e < CONVERGENCE_TOLERANCE).count();
        let need = (seeds as usize * 19).div_ceil(20);
        let worst = final_errs.iter().copied().fold(0.0, f64::max);
        checks.push(Check::new(
            &format!("M={m} reaches {CONVERGENCE_TOLERANCE} relative sup-error"),
            below >= need,
            seeds as usize,
            format!("{below}/{seeds} seeds below tolerance (need {need}), worst {worst:.4}"),
        ));
        let med_final = median(&final_errs);
        let med_half = median(&half_errs);
        checks.push(Check::new(
            &format!("M={m} error shrinks over doubled horizon"),
            med_final < med_half,
            seeds as usize,
            format!(
                "median error {med_half:.4} at T={}, {med_final:.4} at 2T",
                CONVERGENCE_STEPS / 2
            ),
        ));
    }
    Ok(checks)
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn random_activation(rng: &mut SmrRng) -> Activation {
    match rng.gen_range(0..3) {
        0 => Activation::Identity,
        1 => Activation::Relu,
        _ => Activation::Tanh,
    }
}

/// Backprop against central finite differences of `L = u . f(x)` on random
/// networks, for both parameter and input gradients.
pub fn gradients(nets: usize) -> Result<Check> {
    const STEP: f64 = 1e-6;
    // Keeps the relative error meaningful for near-zero derivatives.
    const FLOOR: f64 = 1e-2;
    let mut rng = stream_rng(5, Stream::Verify);
    let mut worst = 0.0f64;
    let mut compared = 0;
    for _ in 0..nets {
        let depth = rng.gen_range(1..=3);
        let dims: Vec<usize> = (0..=depth).map(|_| rng.gen_range(1..=6)).collect();
        let mut net = DenseNet::new(
            &dims,
            random_activation(&mut rng),
            random_activation(&mut rng),
            &mut rng,
        )?;
        let x: Vec<f64> = (0..dims[0]).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let u: Vec<f64> = (0..dims[depth]).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let loss =
            |net: &DenseNet, x: &[f64]| -> Result<f64> { Ok(net.forward(x)?.iter().zip(&u).map(|(y, w)| y * w).sum()) };
        let (grads, dx) = net.backward(&x, &u)?;
        let analytic = grads.flat();
        let theta = net.params();
        let mut rel = |a: f64, n: f64| {
            worst = worst.max((a - n).abs() / a.abs().max(n.abs()).max(FLOOR));
            compared += 1;
        };
        for (i, &a) in analytic.iter().enumerate() {
            let mut p = theta.clone();
            p[i] = theta[i] + STEP;
            net.set_params(&p)?;
            let up = loss(&net, &x)?;
            p[i] = theta[i] - STEP;
            net.set_params(&p)?;
            let down = loss(&net, &x)?;
            rel(a, (up - down) / (2.0 * STEP));
        }
        net.set_params(&theta)?;
        for (i, &a) in dx.iter().enumerate() {
            let mut xp = x.clone();
            xp[i] = x[i] + STEP;
            let up = loss(&net, &xp)?;
            xp[i] = x[i] - STEP;
            let down = loss(&net, &xp)?;
            rel(a, (up - down) / (2.0 * STEP));
        }
    }
    Ok(Check::new(
        "backprop matches finite differences",
        worst < 1e-5,
        nets,
        format!("{compared} derivatives, max relative error {worst:e}"),
    ))
}

fn random_batch(n: usize, obs_dim: usize, act_dim: usize, rng: &mut SmrRng) -> Vec<Transition> {
    (0..n)
        .map(|i| Transition {
            state: (0..obs_dim).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            action: (0..act_dim).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            reward: rng.gen_range(-1.0..1.0),
            next_state: (0..obs_dim).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            done: i % 7 == 6,
        })
        .collect()
}

pub fn theorem5() -> Result<Vec<Check>> {
    let mut rng = stream_rng(6, Stream::Verify);
    let mut checks = Vec::new();

    // Squared-error critic loss on a fixed batch.
    let net = DenseNet::new(&[3, 8, 1], Activation::Tanh, Activation::Identity, &mut rng)?;
    let inputs: Vec<Vec<f64>> = (0..16)
        .map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let targets: Vec<f64> = (0..16).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let mut min_dist = f64::INFINITY;
    for m in 2..=8 {
        let sep = smr_vs_scaled_lr(
            &net,
            |n| critic_regression(n, &inputs, &targets).map(|(_, g)| g),
            0.05,
            m,
        )?;
        min_dist = min_dist.min(sep.distance);
    }
    checks.push(Check::new(
        "SMR differs from scaled rate on squared loss",
        min_dist > 1e-8,
        7,
        format!("min distance over M=2..8 = {min_dist:e}"),
    ));

    // Linear model with a loss linear in the parameters: constant gradient.
    let lin = DenseNet::new(&[3, 2], Activation::Identity, Activation::Identity, &mut rng)?;
    let mut max_dist = 0.0f64;
    for m in 2..=8 {
        let sep = smr_vs_scaled_lr(&lin, |n| mean_output_grad(n, &inputs), 0.05, m)?;
        max_dist = max_dist.max(sep.distance);
    }
    checks.push(Check::new(
        "SMR equals scaled rate on constant gradient",
        max_dist < 1e-12,
        7,
        format!("max distance over M=2..8 = {max_dist:e}"),
    ));

    // Replaying the recorded inner gradients reproduces the SGD update.
    let cfg = SmrTrainConfig {
        m: 5,
        batch_size: 16,
        hidden: vec![8, 8],
        optimizer: OptimizerKind::Sgd,
        learning_rate: 1e-2,
        ..Default::default()
    };
    let mut agent = Td3Agent::new(3, 2, 1.0, cfg.clone(), &mut rng)?;
    let mut buffer = ReplayBuffer::new(64)?;
    for tr in random_batch(64, 3, 2, &mut rng) {
        buffer.push(tr);
    }
    let mut replay_err = 0.0f64;
    let mut grad_err = 0.0f64;
    let mut steps = 0;
    for env_step in 1..=4u64 {
        let before = agent.params.critic_1.params();
        let diag = smr_train_step(&mut agent, &buffer, env_step, &mut rng, true)?;
        let mut replay = before.clone();
        for rec in &diag.trace {
            for (p, g) in replay.iter_mut().zip(&rec.critic_1_grad) {
                *p -= cfg.learning_rate * g;
            }
        }
        for (a, b) in replay.iter().zip(agent.params.critic_1.params()) {
            replay_err = replay_err.max((a - b).abs());
        }
        // Each recorded gradient is the loss gradient at its recorded point.
        let inputs: Vec<Vec<f64>> = diag
            .batch_indices
            .iter()
            .filter_map(|&i| buffer.get(i))
            .map(|t| [t.state.as_slice(), t.action.as_slice()].concat())
            .collect();
        let mut probe = agent.params.critic_1.clone();
        for rec in &diag.trace {
            probe.set_params(&rec.critic_1_before)?;
            let (_, g) = critic_regression(&probe, &inputs, &rec.targets)?;
            for (a, b) in g.flat().iter().zip(&rec.critic_1_grad) {
                grad_err = grad_err.max((a - b).abs());
            }
        }
        steps += diag.trace.len();
    }
    checks.push(Check::new(
        "inner updates sum recorded gradients",
        replay_err <= 1e-12 && grad_err <= 1e-12,
        steps,
        format!("replay error {replay_err:e}, gradient recomputation error {grad_err:e}"),
    ));

    // Soft target updates towards frozen online parameters.
    let online = DenseNet::new(&[4, 6, 2], Activation::Relu, Activation::Tanh, &mut rng)?;
    let mut target = DenseNet::new(&[4, 6, 2], Activation::Relu, Activation::Tanh, &mut rng)?;
    let tau = 0.005;
    let gap = |t: &DenseNet| {
        t.params()
            .iter()
            .zip(online.params())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    };
    let gap0 = gap(&target);
    let mut worst_rel = 0.0f64;
    for k in 1..=200 {
        target.soft_update_from(&online, tau);
        let expected = gap0 * (1.0 - tau).powi(k);
        worst_rel = worst_rel.max((gap(&target) - expected).abs() / expected);
    }
    checks.push(Check::new(
        "soft update contracts by (1 - tau)^k",
        worst_rel < 1e-9,
        200,
        format!("max relative deviation {worst_rel:e}"),
    ));

    // Clipped double-Q never exceeds the single-critic target.
    let params = ActorCriticParams::new(3, 2, &[8], 1.0, 0.005, &mut rng)?;
    let batch = random_batch(256, 3, 2, &mut rng);
    let refs: Vec<&Transition> = batch.iter().collect();
    let double_cfg = SmrTrainConfig::default();
    let single_cfg = SmrTrainConfig {
        single_critic: true,
        ..Default::default()
    };
    let noise = sample_target_noise(refs.len(), 2, 1.0, &double_cfg, &mut rng);
    let double = bootstrap_targets(&params, &refs, &double_cfg, &noise)?;
    let single = bootstrap_targets(&params, &refs, &single_cfg, &noise)?;
    let violations = double.iter().zip(&single).filter(|(d, s)| d > s).count();
    checks.push(Check::new(
        "clipped double-Q below single critic",
        violations == 0,
        refs.len(),
        format!("{violations} violations"),
    ));
    Ok(checks)
}

/// Ring-buffer eviction: after `capacity + k` inserts only the newest
/// `capacity` remain.
pub fn buffer() -> Result<Check> {
    let mut cases = 0;
    let mut failures = 0;
    for capacity in [1usize, 2, 7, 64] {
        for k in [0usize, 1, 5, 100] {
            let mut buf = ReplayBuffer::new(capacity)?;
            for i in 0..capacity + k {
                buf.push(Transition {
                    state: vec![i as f64],
                    action: vec![],
                    reward: 0.0,
                    next_state: vec![],
                    done: false,
                });
            }
            let mut held: Vec<usize> = buf.iter().map(|t| t.state[0] as usize).collect();
            held.sort_unstable();
            let expected: Vec<usize> = (k..capacity + k).collect();
            if held != expected || buf.len() != capacity {
                failures += 1;
            }
            cases += 1;
        }
    }
    Ok(Check::new(
        "oldest entries evicted first",
        failures == 0,
        cases,
        format!("{failures} failures"),
    ))
}
