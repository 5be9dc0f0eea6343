use std::time::Instant;

use rand::Rng;

use super::agent::{smr_train_step, SmrTrainConfig, Td3Agent};
use super::buffer::{ReplayBuffer, Transition};
use crate::envs::PointMassEnv;
use crate::error::{Error, Result};
use crate::seeding::{stream_rng, Stream};
use crate::tabular::{mean_std, EvalPoint};

#[derive(Debug, Clone, PartialEq)]
pub struct Td3RunConfig {
    pub total_steps: u64,
    pub eval_interval: u64,
    pub eval_episodes: usize,
    /// Stop once an evaluation reaches this mean return.
    pub stop_at_return: Option<f64>,
}

impl Default for Td3RunConfig {
    fn default() -> Self {
        Td3RunConfig {
            total_steps: 30_000,
            eval_interval: 1000,
            eval_episodes: 10,
            stop_at_return: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Td3Run {
    pub curve: Vec<EvalPoint>,
    /// Wall time (ms since start) at each curve point.
    pub wall_ms: Vec<u64>,
    pub agent: Td3Agent,
    pub buffer: ReplayBuffer,
    pub env_steps: u64,
}

/// Online TD3-SMR on the point-mass task.
///
/// The first `warmup_steps` actions are uniform; afterwards the actor acts
/// with Gaussian exploration noise. Every step after warmup runs one
/// [`smr_train_step`]. Exploration, initialization and training draw from
/// separate streams of `seed`, so runs that differ only in `M` take the
/// same actions until their parameters first differ.
pub fn train_td3_smr(env: &PointMassEnv, config: &SmrTrainConfig, run: &Td3RunConfig, seed: u64) -> Result<Td3Run> {
    train_td3_smr_with_eval_hook(env, config, run, seed, None)
}

/// As [`train_td3_smr`], handing each evaluation point, its wall time (ms)
/// and the evaluated agent to `on_eval` as soon as it is computed.
pub type Td3EvalHook<'a> = &'a mut dyn FnMut(&EvalPoint, u64, &Td3Agent) -> Result<()>;

pub fn train_td3_smr_with_eval_hook(
    env: &PointMassEnv,
    config: &SmrTrainConfig,
    run: &Td3RunConfig,
    seed: u64,
    mut on_eval: Option<Td3EvalHook<'_>>,
) -> Result<Td3Run> {
    config.validate()?;
    if run.total_steps == 0 || run.eval_interval == 0 || run.eval_episodes == 0 {
        return Err(Error::invalid(
            "total steps, eval interval and eval episodes must be positive",
        ));
    }
    let mut env = env.clone();
    let bound = env.action_bound;
    let mut init_rng = stream_rng(seed, Stream::Init);
    let mut explore_rng = stream_rng(seed, Stream::Explore);
    let mut train_rng = stream_rng(seed, Stream::Train);
    let mut agent = Td3Agent::new(
        PointMassEnv::OBS_DIM,
        PointMassEnv::ACTION_DIM,
        bound,
        config.clone(),
        &mut init_rng,
    )?;
    let mut buffer = ReplayBuffer::new(config.buffer_capacity)?;
    let started = Instant::now();
    let mut curve = Vec::new();
    let mut wall_ms = Vec::new();

    let mut obs = env.reset();
    let mut t: u64 = 0;
    while t < run.total_steps {
        t += 1;
        let action = if t <= config.warmup_steps as u64 {
            (0..PointMassEnv::ACTION_DIM)
                .map(|_| explore_rng.gen_range(-bound..=bound))
                .collect()
        } else {
            agent.explore(&obs, &mut explore_rng)?
        };
        let res = env.step(&action)?;
        buffer.push(Transition {
            state: obs,
            action,
            reward: res.reward,
            next_state: res.next_state.clone(),
            done: res.done,
        });
        if t > config.warmup_steps as u64 && buffer.len() >= config.batch_size {
            smr_train_step(&mut agent, &buffer, t, &mut train_rng, false)?;
        }
        obs = if res.done || res.truncated {
            env.reset()
        } else {
            res.next_state
        };

        if t.is_multiple_of(run.eval_interval) {
            let (mean_return, std_return) = evaluate_actor(&env, &agent, run.eval_episodes)?;
            let point = EvalPoint {
                step: t,
                mean_return,
                std_return,
            };
            let ms = started.elapsed().as_millis() as u64;
            if let Some(h) = on_eval.as_deref_mut() {
                h(&point, ms, &agent)?;
            }
            curve.push(point);
            wall_ms.push(ms);
            if run.stop_at_return.is_some_and(|th| mean_return >= th) {
                break;
            }
        }
    }
    if !agent.params.is_finite() {
        return Err(Error::invalid("training diverged to non-finite parameters"));
    }
    Ok(Td3Run {
        curve,
        wall_ms,
        agent,
        buffer,
        env_steps: t,
    })
}

/// Undiscounted returns of the noiseless actor on fresh episodes.
pub fn evaluate_actor(env: &PointMassEnv, agent: &Td3Agent, episodes: usize) -> Result<(f64, f64)> {
    let mut env = env.clone();
    let mut returns = Vec::with_capacity(episodes);
    for _ in 0..episodes {
        let mut obs = env.reset();
        let mut total = 0.0;
        loop {
            let res = env.step(&agent.params.act(&obs)?)?;
            total += res.reward;
            if res.done || res.truncated {
                break;
            }
            obs = res.next_state;
        }
        returns.push(total);
    }
    Ok(mean_std(&returns))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn warmup_only_fills_buffer() {
        let cfg = SmrTrainConfig {
            exploration_noise: 0.0,
            warmup_steps: 300,
            batch_size: 32,
            hidden: vec![8],
            ..Default::default()
        };
        let run_cfg = Td3RunConfig {
            total_steps: 300,
            eval_interval: 300,
            eval_episodes: 1,
            stop_at_return: None,
        };
        let run = train_td3_smr(&PointMassEnv::default(), &cfg, &run_cfg, 0).unwrap();
        assert_eq!(run.buffer.len(), 300);
        assert_eq!(run.curve.len(), 1);
    }

    #[test]
    fn stops_early_on_threshold() {
        let cfg = SmrTrainConfig {
            warmup_steps: 10,
            batch_size: 8,
            hidden: vec![4],
            ..Default::default()
        };
        let run_cfg = Td3RunConfig {
            total_steps: 1000,
            eval_interval: 50,
            eval_episodes: 1,
            stop_at_return: Some(f64::NEG_INFINITY),
        };
        let run = train_td3_smr(&PointMassEnv::default(), &cfg, &run_cfg, 0).unwrap();
        assert_eq!(run.env_steps, 50);
    }
}
