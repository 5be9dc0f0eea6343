//! TD3-lite with the SMR inner loop.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::buffer::{ReplayBuffer, Transition};
use super::net::{Activation, DenseNet, ForwardCache, Gradients};
use super::optim::{Optimizer, OptimizerKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SmrTrainConfig {
    /// SMR ratio: inner iterations on each sampled batch.
    pub m: usize,
    pub batch_size: usize,
    pub policy_delay: usize,
    /// Std of the Gaussian exploration noise, as a fraction of the action bound.
    pub exploration_noise: f64,
    /// Std of the target policy smoothing noise, as a fraction of the action bound.
    pub target_noise: f64,
    /// Clip for target noise, as a fraction of the action bound.
    pub noise_clip: f64,
    pub gamma: f64,
    pub learning_rate: f64,
    pub warmup_steps: usize,
    /// One critic and no clipped double-Q (DDPG-lite).
    pub single_critic: bool,
    pub tau: f64,
    pub hidden: Vec<usize>,
    pub optimizer: OptimizerKind,
    pub buffer_capacity: usize,
    /// Apply the policy delay to a running count of inner updates instead
    /// of the environment step.
    pub delay_on_inner: bool,
}

impl Default for SmrTrainConfig {
    fn default() -> Self {
        SmrTrainConfig {
            m: 1,
            batch_size: 256,
            policy_delay: 2,
            exploration_noise: 0.1,
            target_noise: 0.2,
            noise_clip: 0.5,
            gamma: 0.99,
            learning_rate: 3e-4,
            warmup_steps: 1000,
            single_critic: false,
            tau: 0.005,
            hidden: vec![64, 64],
            optimizer: OptimizerKind::Adam,
            buffer_capacity: 1_000_000,
            delay_on_inner: false,
        }
    }
}

impl SmrTrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::invalid(m));
        if self.m < 1 {
            return fail("SMR ratio M must be at least 1".into());
        }
        if self.batch_size == 0 || self.policy_delay == 0 || self.buffer_capacity == 0 {
            return fail("batch size, policy delay and buffer capacity must be positive".into());
        }
        if !(self.exploration_noise >= 0.0 && self.target_noise >= 0.0) {
            return fail("noise scales must be nonnegative".into());
        }
        if self.noise_clip.is_nan() || self.noise_clip <= 0.0 {
            return fail(format!("noise clip must be positive, got {}", self.noise_clip));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return fail(format!("gamma must lie in [0, 1), got {}", self.gamma));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail(format!("learning rate must be positive, got {}", self.learning_rate));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return fail(format!("tau must lie in (0, 1], got {}", self.tau));
        }
        if self.hidden.contains(&0) {
            return fail("hidden widths must be positive".into());
        }
        Ok(())
    }
}

/// Online and target networks. Targets start as deep copies.
#[derive(Debug, Clone, PartialEq)]
pub struct ActorCriticParams {
    pub actor: DenseNet,
    pub critic_1: DenseNet,
    pub critic_2: DenseNet,
    pub target_actor: DenseNet,
    pub target_critic_1: DenseNet,
    pub target_critic_2: DenseNet,
    pub tau: f64,
    pub action_bound: f64,
}

impl ActorCriticParams {
    pub fn new<R: Rng + ?Sized>(
        obs_dim: usize,
        act_dim: usize,
        hidden: &[usize],
        action_bound: f64,
        tau: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let dims = |input: usize, output: usize| {
            std::iter::once(input)
                .chain(hidden.iter().copied())
                .chain(std::iter::once(output))
                .collect::<Vec<_>>()
        };
        let actor = DenseNet::new(&dims(obs_dim, act_dim), Activation::Relu, Activation::Tanh, rng)?;
        let critic_1 = DenseNet::new(&dims(obs_dim + act_dim, 1), Activation::Relu, Activation::Identity, rng)?;
        let critic_2 = DenseNet::new(&dims(obs_dim + act_dim, 1), Activation::Relu, Activation::Identity, rng)?;
        Ok(ActorCriticParams {
            target_actor: actor.clone(),
            target_critic_1: critic_1.clone(),
            target_critic_2: critic_2.clone(),
            actor,
            critic_1,
            critic_2,
            tau,
            action_bound,
        })
    }

    pub fn obs_dim(&self) -> usize {
        self.actor.input_dim()
    }

    pub fn act_dim(&self) -> usize {
        self.actor.output_dim()
    }

    /// Deterministic policy output, squashed by tanh and scaled to the bound.
    pub fn act(&self, obs: &[f64]) -> Result<Vec<f64>> {
        let mut a = self.actor.forward(obs)?;
        a.iter_mut().for_each(|x| *x *= self.action_bound);
        Ok(a)
    }

    pub fn target_act(&self, obs: &[f64]) -> Result<Vec<f64>> {
        let mut a = self.target_actor.forward(obs)?;
        a.iter_mut().for_each(|x| *x *= self.action_bound);
        Ok(a)
    }

    pub fn q1(&self, obs: &[f64], action: &[f64]) -> Result<f64> {
        Ok(self.critic_1.forward(&concat(obs, action))?[0])
    }

    pub fn soft_update_targets(&mut self) {
        self.target_actor.soft_update_from(&self.actor, self.tau);
        self.target_critic_1.soft_update_from(&self.critic_1, self.tau);
        self.target_critic_2.soft_update_from(&self.critic_2, self.tau);
    }

    pub fn is_finite(&self) -> bool {
        [
            &self.actor,
            &self.critic_1,
            &self.critic_2,
            &self.target_actor,
            &self.target_critic_1,
            &self.target_critic_2,
        ]
        .iter()
        .all(|n| n.is_finite())
    }
}

pub(crate) fn concat(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(a.len() + b.len());
    v.extend_from_slice(a);
    v.extend_from_slice(b);
    v
}

/// Clipped target-policy smoothing noise, one row per batch entry.
pub fn sample_target_noise<R: Rng + ?Sized>(
    rows: usize,
    act_dim: usize,
    action_bound: f64,
    config: &SmrTrainConfig,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    let clip = config.noise_clip * action_bound;
    let std = config.target_noise * action_bound;
    (0..rows)
        .map(|_| {
            (0..act_dim)
                .map(|_| {
                    let z: f64 = rng.sample(rand_distr::StandardNormal);
                    (z * std).clamp(-clip, clip)
                })
                .collect()
        })
        .collect()
}

/// Bootstrap targets `y = r + gamma (1 - done) min_i Q'_i(s', a~)` with
/// `a~ = clamp(pi'(s') + noise)`. In single-critic mode the min is over
/// `Q'_1` alone.
pub fn bootstrap_targets(
    params: &ActorCriticParams,
    batch: &[&Transition],
    config: &SmrTrainConfig,
    noise: &[Vec<f64>],
) -> Result<Vec<f64>> {
    if noise.len() != batch.len() {
        return Err(Error::shape(batch.len(), noise.len()));
    }
    let bound = params.action_bound;
    batch
        .iter()
        .zip(noise)
        .map(|(tr, eps)| {
            if tr.done {
                return Ok(tr.reward);
            }
            let mut a = params.target_act(&tr.next_state)?;
            for (ai, ni) in a.iter_mut().zip(eps) {
                *ai = (*ai + ni).clamp(-bound, bound);
            }
            let input = concat(&tr.next_state, &a);
            let q1 = params.target_critic_1.forward(&input)?[0];
            let next = if config.single_critic {
                q1
            } else {
                q1.min(params.target_critic_2.forward(&input)?[0])
            };
            Ok(tr.reward + config.gamma * next)
        })
        .collect()
}

/// Mean squared error `(1/N) sum_j (f(x_j) - y_j)^2` of a scalar-output
/// network, and its parameter gradient.
pub fn critic_regression(net: &DenseNet, inputs: &[Vec<f64>], targets: &[f64]) -> Result<(f64, Gradients)> {
    if inputs.is_empty() {
        return Err(Error::invalid("empty batch"));
    }
    if inputs.len() != targets.len() {
        return Err(Error::shape(inputs.len(), targets.len()));
    }
    let n = inputs.len() as f64;
    let mut grads = Gradients::zeros_like(net);
    let mut cache = ForwardCache::default();
    let mut loss = 0.0;
    for (x, &y) in inputs.iter().zip(targets) {
        net.forward_cached(x, &mut cache)?;
        let resid = cache.output()[0] - y;
        loss += resid * resid;
        net.backward_cached(&cache, &[2.0 * resid / n], &mut grads)?;
    }
    Ok((loss / n, grads))
}

#[derive(Debug, Clone)]
pub struct CriticLoss {
    pub targets: Vec<f64>,
    /// One entry per online critic (one in single-critic mode).
    pub losses: Vec<f64>,
    pub grads: Vec<Gradients>,
}

/// Critic objective on a batch: fresh target noise, shared targets for both
/// critics, gradients for the online critics only.
pub fn critic_loss<R: Rng + ?Sized>(
    params: &ActorCriticParams,
    batch: &[&Transition],
    config: &SmrTrainConfig,
    rng: &mut R,
) -> Result<CriticLoss> {
    if batch.is_empty() {
        return Err(Error::invalid("empty batch"));
    }
    let noise = sample_target_noise(batch.len(), params.act_dim(), params.action_bound, config, rng);
    let targets = bootstrap_targets(params, batch, config, &noise)?;
    let inputs: Vec<Vec<f64>> = batch.iter().map(|t| concat(&t.state, &t.action)).collect();
    let critics: &[&DenseNet] = if config.single_critic {
        &[&params.critic_1]
    } else {
        &[&params.critic_1, &params.critic_2]
    };
    let mut losses = Vec::with_capacity(critics.len());
    let mut grads = Vec::with_capacity(critics.len());
    for critic in critics {
        let (l, g) = critic_regression(critic, &inputs, &targets)?;
        losses.push(l);
        grads.push(g);
    }
    Ok(CriticLoss { targets, losses, grads })
}

/// Deterministic policy gradient of `-(1/N) sum Q_1(s, pi(s))` with
/// respect to the actor parameters.
pub fn actor_gradient(params: &ActorCriticParams, states: &[&[f64]]) -> Result<(f64, Gradients)> {
    if states.is_empty() {
        return Err(Error::invalid("empty batch"));
    }
    let n = states.len() as f64;
    let obs_dim = params.obs_dim();
    let bound = params.action_bound;
    let mut actor_grads = Gradients::zeros_like(&params.actor);
    let mut critic_scratch = Gradients::zeros_like(&params.critic_1);
    let mut actor_cache = ForwardCache::default();
    let mut critic_cache = ForwardCache::default();
    let mut loss = 0.0;
    let mut input = Vec::with_capacity(obs_dim + params.act_dim());
    for s in states {
        params.actor.forward_cached(s, &mut actor_cache)?;
        input.clear();
        input.extend_from_slice(s);
        input.extend(actor_cache.output().iter().map(|a| a * bound));
        params.critic_1.forward_cached(&input, &mut critic_cache)?;
        loss -= critic_cache.output()[0] / n;
        let d_input = params
            .critic_1
            .backward_cached(&critic_cache, &[-1.0 / n], &mut critic_scratch)?;
        let d_action: Vec<f64> = d_input[obs_dim..].iter().map(|g| g * bound).collect();
        params
            .actor
            .backward_cached(&actor_cache, &d_action, &mut actor_grads)?;
    }
    Ok((loss, actor_grads))
}

/// One inner SMR iteration, recorded when tracing is on.
#[derive(Debug, Clone)]
pub struct InnerRecord {
    pub critic_1_before: Vec<f64>,
    pub critic_1_grad: Vec<f64>,
    pub targets: Vec<f64>,
    pub actor_updated: bool,
}

#[derive(Debug, Clone, Default)]
pub struct StepDiagnostics {
    /// First critic's loss at each inner iteration.
    pub critic_losses: Vec<f64>,
    pub actor_updates: usize,
    /// Buffer slots of the sampled batch.
    pub batch_indices: Vec<usize>,
    pub trace: Vec<InnerRecord>,
}

/// Networks plus optimizer state.
#[derive(Debug, Clone)]
pub struct Td3Agent {
    pub params: ActorCriticParams,
    pub config: SmrTrainConfig,
    critic_opts: [Optimizer; 2],
    actor_opt: Optimizer,
    inner_updates: u64,
}

impl Td3Agent {
    pub fn new<R: Rng + ?Sized>(
        obs_dim: usize,
        act_dim: usize,
        action_bound: f64,
        config: SmrTrainConfig,
        rng: &mut R,
    ) -> Result<Self> {
        config.validate()?;
        let params = ActorCriticParams::new(obs_dim, act_dim, &config.hidden, action_bound, config.tau, rng)?;
        Ok(Self::from_params(params, config))
    }

    pub fn from_params(params: ActorCriticParams, config: SmrTrainConfig) -> Self {
        let lr = config.learning_rate;
        let critic_opts = [
            Optimizer::new(config.optimizer, lr, &params.critic_1),
            Optimizer::new(config.optimizer, lr, &params.critic_2),
        ];
        let actor_opt = Optimizer::new(config.optimizer, lr, &params.actor);
        Td3Agent {
            params,
            config,
            critic_opts,
            actor_opt,
            inner_updates: 0,
        }
    }

    /// Exploratory action: policy output plus `N(0, sigma * bound)`, clamped.
    pub fn explore<R: Rng + ?Sized>(&self, obs: &[f64], rng: &mut R) -> Result<Vec<f64>> {
        let bound = self.params.action_bound;
        let mut a = self.params.act(obs)?;
        let std = self.config.exploration_noise * bound;
        let noise = Normal::new(0.0, std).map_err(|e| Error::invalid(e.to_string()))?;
        for ai in a.iter_mut() {
            *ai = (*ai + noise.sample(rng)).clamp(-bound, bound);
        }
        Ok(a)
    }
}

/// Samples ONE batch, then runs `M` inner iterations on it: critic step,
/// and on delay steps an actor step and a soft target update.
///
/// `env_step` is the environment step counter `t` that the policy delay is
/// keyed on (`t mod d == 0`).
pub fn smr_train_step<R: Rng + ?Sized>(
    agent: &mut Td3Agent,
    buffer: &ReplayBuffer,
    env_step: u64,
    rng: &mut R,
    record_trace: bool,
) -> Result<StepDiagnostics> {
    let cfg = agent.config.clone();
    if buffer.len() < cfg.batch_size {
        return Err(Error::invalid(format!(
            "replay buffer holds {} transitions, batch needs {}",
            buffer.len(),
            cfg.batch_size
        )));
    }
    let indices = buffer.sample_indices(cfg.batch_size, rng)?;
    let batch: Vec<&Transition> = indices.iter().filter_map(|&i| buffer.get(i)).collect();
    let states: Vec<&[f64]> = batch.iter().map(|t| t.state.as_slice()).collect();
    let delay = cfg.policy_delay as u64;
    let mut diag = StepDiagnostics {
        batch_indices: indices,
        ..Default::default()
    };

    for _ in 0..cfg.m {
        let loss = critic_loss(&agent.params, &batch, &cfg, rng)?;
        agent.inner_updates += 1;
        let update_actor = if cfg.delay_on_inner {
            agent.inner_updates.is_multiple_of(delay)
        } else {
            env_step.is_multiple_of(delay)
        };
        if record_trace {
            diag.trace.push(InnerRecord {
                critic_1_before: agent.params.critic_1.params(),
                critic_1_grad: loss.grads[0].flat(),
                targets: loss.targets.clone(),
                actor_updated: update_actor,
            });
        }
        diag.critic_losses.push(loss.losses[0]);
        agent.critic_opts[0].step(&mut agent.params.critic_1, &loss.grads[0]);
        if let Some(g) = loss.grads.get(1) {
            agent.critic_opts[1].step(&mut agent.params.critic_2, g);
        }

        if update_actor {
            let (_, g) = actor_gradient(&agent.params, &states)?;
            agent.actor_opt.step(&mut agent.params.actor, &g);
            agent.params.soft_update_targets();
            diag.actor_updates += 1;
        }
    }
    Ok(diag)
}
