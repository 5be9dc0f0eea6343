use super::policy::epsilon_greedy;
use super::schedule::LearningRateSchedule;
use super::update::{q_smr_loop_update, SmrTrace, TabularTransition};
use super::QTable;
use crate::envs::TabularEnv;
use crate::error::{Error, Result};
use crate::seeding::{stream_rng, SmrRng, Stream};

/// How long a tabular run lasts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    Episodes(usize),
    Steps(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmrConfig {
    /// SMR ratio: updates per observed transition.
    pub m: usize,
    pub epsilon: f64,
    pub gamma: f64,
    pub budget: Budget,
    /// Evaluation cadence in budget units (episodes or steps).
    pub eval_every: u64,
    pub eval_episodes: usize,
    /// Step cap for evaluation episodes of tasks without a horizon.
    pub eval_horizon: usize,
}

impl SmrConfig {
    /// Cliff-walk / maze defaults: alpha is supplied by the schedule.
    pub fn episodic(m: usize, episodes: usize) -> Self {
        SmrConfig {
            m,
            epsilon: 0.1,
            gamma: 0.99,
            budget: Budget::Episodes(episodes),
            eval_every: 1,
            eval_episodes: 1,
            eval_horizon: 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(Error::invalid("SMR ratio M must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::invalid(format!(
                "epsilon must lie in [0, 1], got {}",
                self.epsilon
            )));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::invalid(format!("gamma must lie in [0, 1), got {}", self.gamma)));
        }
        match self.budget {
            Budget::Episodes(0) | Budget::Steps(0) => return Err(Error::invalid("training budget must be positive")),
            _ => {}
        }
        if self.eval_every == 0 || self.eval_episodes == 0 || self.eval_horizon == 0 {
            return Err(Error::invalid(
                "evaluation cadence, episodes and horizon must be positive",
            ));
        }
        Ok(())
    }
}

/// One evaluation of the greedy policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalPoint {
    /// Completed episodes (episodic budget) or environment steps.
    pub step: u64,
    pub mean_return: f64,
    pub std_return: f64,
}

#[derive(Debug, Clone)]
pub struct TabularRun {
    pub q: QTable,
    pub curve: Vec<EvalPoint>,
    /// Largest `|Q|` seen at any intermediate SMR iterate.
    pub max_abs_q: f64,
    pub env_steps: u64,
    pub episodes: usize,
}

pub type StepHook<'a> = Box<dyn FnMut(u64, &TabularTransition, &QTable) + 'a>;
pub type EvalHook<'a> = Box<dyn FnMut(&EvalPoint, &QTable) -> Result<()> + 'a>;

/// Observers for a training run.
#[derive(Default)]
pub struct TrainHooks<'a> {
    /// Called after each SMR update with the step count, the transition and
    /// the table.
    pub on_step: Option<StepHook<'a>>,
    /// Called with each evaluation point and the table it evaluated, as soon
    /// as it is computed.
    pub on_eval: Option<EvalHook<'a>>,
}

/// Q-SMR: act epsilon-greedily, then apply `M` Q-learning updates to the
/// observed transition. The Q-table starts at zero.
///
/// Independent random streams drive dynamics, exploration and evaluation,
/// so runs with different `M` see the same dynamics noise sequence.
pub fn train_q_smr(
    env: &TabularEnv,
    config: &SmrConfig,
    schedule: &LearningRateSchedule,
    seed: u64,
) -> Result<TabularRun> {
    train_q_smr_with_hooks(env, config, schedule, seed, TrainHooks::default())
}

pub fn train_q_smr_with_hooks(
    env: &TabularEnv,
    config: &SmrConfig,
    schedule: &LearningRateSchedule,
    seed: u64,
    mut hooks: TrainHooks<'_>,
) -> Result<TabularRun> {
    config.validate()?;
    let mut env = env.clone();
    let mut q = QTable::zeros(env.mdp.n_states(), env.mdp.n_actions());
    let mut env_rng = stream_rng(seed, Stream::Env);
    let mut explore_rng = stream_rng(seed, Stream::Explore);
    let mut eval_rng = stream_rng(seed, Stream::Eval);
    let mut trace = SmrTrace::default();

    let mut curve = Vec::new();
    let mut max_abs_q = 0.0f64;
    let mut t: u64 = 0;
    let mut episodes = 0usize;
    let mut state = env.reset_state();

    let finished = |t: u64, episodes: usize| match config.budget {
        Budget::Episodes(n) => episodes >= n,
        Budget::Steps(n) => t >= n,
    };

    while !finished(t, episodes) {
        let action = epsilon_greedy(&q, state, config.epsilon, &mut explore_rng);
        let res = env.step_action(action, &mut env_rng)?;
        let tr = TabularTransition {
            s: state,
            a: action,
            r: res.reward,
            s_next: res.next_state,
        };
        let alpha = schedule.rate(t);
        q_smr_loop_update(&mut q, &tr, alpha, config.gamma, config.m, Some(&mut trace))?;
        for v in &trace.intermediates {
            max_abs_q = max_abs_q.max(v.abs());
        }
        t += 1;
        if let Some(h) = hooks.on_step.as_mut() {
            h(t, &tr, &q);
        }

        let episode_over = res.done || res.truncated;
        if episode_over {
            episodes += 1;
            state = env.reset_state();
        } else {
            state = res.next_state;
        }

        let eval_now = match config.budget {
            Budget::Episodes(_) => episode_over && (episodes as u64).is_multiple_of(config.eval_every),
            Budget::Steps(_) => t.is_multiple_of(config.eval_every),
        };
        if eval_now {
            let step = match config.budget {
                Budget::Episodes(_) => episodes as u64,
                Budget::Steps(_) => t,
            };
            let (mean_return, std_return) = evaluate_greedy(&env, &q, config, &mut eval_rng)?;
            let point = EvalPoint {
                step,
                mean_return,
                std_return,
            };
            if let Some(h) = hooks.on_eval.as_mut() {
                h(&point, &q)?;
            }
            curve.push(point);
        }
    }

    Ok(TabularRun {
        q,
        curve,
        max_abs_q,
        env_steps: t,
        episodes,
    })
}

/// Mean and population std of undiscounted greedy-policy returns.
pub fn evaluate_greedy(env: &TabularEnv, q: &QTable, config: &SmrConfig, rng: &mut SmrRng) -> Result<(f64, f64)> {
    let mut env = env.clone();
    let cap = env.horizon.unwrap_or(config.eval_horizon);
    let mut returns = Vec::with_capacity(config.eval_episodes);
    for _ in 0..config.eval_episodes {
        let mut s = env.reset_state();
        let mut total = 0.0;
        for _ in 0..cap {
            let res = env.step_action(q.greedy_action(s), rng)?;
            total += res.reward;
            if res.done || res.truncated {
                break;
            }
            s = res.next_state;
        }
        returns.push(total);
    }
    Ok(mean_std(&returns))
}

pub(crate) fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// First curve step whose mean return reaches `threshold`.
pub fn steps_to_threshold(curve: &[EvalPoint], threshold: f64) -> Option<u64> {
    curve.iter().find(|p| p.mean_return >= threshold).map(|p| p.step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{cliff_walking_env, random_mdp};

    #[test]
    fn cliff_training_is_deterministic() {
        let (mdp, spec) = cliff_walking_env();
        let env = TabularEnv::new(mdp, spec.start_state(), Some(spec.horizon)).unwrap();
        let cfg = SmrConfig::episodic(3, 20);
        let sched = LearningRateSchedule::constant(0.05).unwrap();
        let a = train_q_smr(&env, &cfg, &sched, 4).unwrap();
        let b = train_q_smr(&env, &cfg, &sched, 4).unwrap();
        assert_eq!(a.q, b.q);
        assert_eq!(a.curve, b.curve);
        assert_eq!(a.curve.len(), 20);
        assert_eq!(a.episodes, 20);
    }

    #[test]
    fn step_budget_evaluates_on_cadence() {
        let mdp = random_mdp(1, 4, 2, 1.0, 0.9, false).unwrap();
        let env = TabularEnv::new(mdp, 0, None).unwrap();
        let cfg = SmrConfig {
            m: 2,
            epsilon: 0.3,
            gamma: 0.9,
            budget: Budget::Steps(1000),
            eval_every: 250,
            eval_episodes: 3,
            eval_horizon: 20,
        };
        let run = train_q_smr(&env, &cfg, &LearningRateSchedule::constant(0.1).unwrap(), 0).unwrap();
        let steps: Vec<u64> = run.curve.iter().map(|p| p.step).collect();
        assert_eq!(steps, vec![250, 500, 750, 1000]);
        assert_eq!(run.env_steps, 1000);
        assert!(run.max_abs_q <= 10.0);
    }

    #[test]
    fn invalid_config_rejected() {
        let mdp = random_mdp(1, 4, 2, 1.0, 0.9, false).unwrap();
        let env = TabularEnv::new(mdp, 0, None).unwrap();
        let mut cfg = SmrConfig::episodic(0, 5);
        let sched = LearningRateSchedule::constant(0.1).unwrap();
        assert!(train_q_smr(&env, &cfg, &sched, 0).is_err());
        cfg.m = 1;
        cfg.epsilon = 2.0;
        assert!(train_q_smr(&env, &cfg, &sched, 0).is_err());
    }

    #[test]
    fn threshold_search() {
        let pts = [(1, -50.0), (2, -20.0), (3, -13.0), (4, -15.0)].map(|(step, mean_return)| EvalPoint {
            step,
            mean_return,
            std_return: 0.0,
        });
        assert_eq!(steps_to_threshold(&pts, -13.65), Some(3));
        assert_eq!(steps_to_threshold(&pts, -10.0), None);
    }
}
