//! Resolving configurations into concrete runs and executing them.

use std::path::{Path, PathBuf};

use super::bias::{estimate_normalized_bias, BiasReport, BiasSettings};
use super::config::{parse_seeds, ExperimentConfig};
use super::csv::{aggregate, write_aggregate, write_bias, AggregatePoint, CurvePoint, CurveWriter};
use crate::envs::{
    cliff_walking_env, random_maze_env_with_horizon, random_mdp, PointMassEnv, TabularEnv, MAZE_HORIZON,
};
use crate::error::{Error, Result};
use crate::neural::{train_td3_smr_with_eval_hook, OptimizerKind, SmrTrainConfig, Td3Agent, Td3RunConfig};
use crate::seeding::{stream_rng, Stream};
use crate::tabular::{train_q_smr_with_hooks, Budget, EvalPoint, LearningRateSchedule, QTable, SmrConfig, TrainHooks};

/// Environment families accepted by `env`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvKind {
    Cliff,
    Maze { width: usize, height: usize },
    RandomMdp,
    PointMass,
}

impl EnvKind {
    pub fn parse(id: &str) -> Result<Self> {
        let unknown = || Error::UnknownId {
            kind: "env",
            id: id.to_string(),
        };
        match id {
            "cliff" => Ok(EnvKind::Cliff),
            "random-mdp" => Ok(EnvKind::RandomMdp),
            "pointmass" => Ok(EnvKind::PointMass),
            _ => {
                let dims = id.strip_prefix("maze-").ok_or_else(unknown)?;
                let (w, h) = dims.split_once('x').ok_or_else(unknown)?;
                Ok(EnvKind::Maze {
                    width: w.parse().map_err(|_| unknown())?,
                    height: h.parse().map_err(|_| unknown())?,
                })
            }
        }
    }

    pub fn is_tabular(self) -> bool {
        !matches!(self, EnvKind::PointMass)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgoKind {
    Q,
    QSmr,
    Td3,
    Td3Smr,
    Ddpg,
    DdpgSmr,
}

impl AlgoKind {
    pub fn parse(id: &str) -> Result<Self> {
        Ok(match id {
            "q" => AlgoKind::Q,
            "q-smr" => AlgoKind::QSmr,
            "td3" => AlgoKind::Td3,
            "td3-smr" => AlgoKind::Td3Smr,
            "ddpg" => AlgoKind::Ddpg,
            "ddpg-smr" => AlgoKind::DdpgSmr,
            _ => {
                return Err(Error::UnknownId {
                    kind: "algo",
                    id: id.to_string(),
                })
            }
        })
    }

    pub fn is_tabular(self) -> bool {
        matches!(self, AlgoKind::Q | AlgoKind::QSmr)
    }

    /// Ids without the `-smr` suffix are the vanilla algorithms (M = 1).
    pub fn allows_smr(self) -> bool {
        matches!(self, AlgoKind::QSmr | AlgoKind::Td3Smr | AlgoKind::DdpgSmr)
    }
}

const TABULAR_KEYS: &[&str] = &[
    "epsilon",
    "gamma",
    "eval_horizon",
    "record_wall_time",
    "bias_rollouts",
    "bias_burn_in",
];
const RANDOM_MDP_KEYS: &[&str] = &["n_states", "n_actions", "r_max", "mdp_seed"];
const MAZE_KEYS: &[&str] = &["maze_horizon", "maze_seed"];
const NEURAL_KEYS: &[&str] = &[
    "batch_size",
    "policy_delay",
    "exploration_noise",
    "target_noise",
    "noise_clip",
    "gamma",
    "learning_rate",
    "warmup_steps",
    "tau",
    "hidden",
    "optimizer",
    "buffer_capacity",
    "delay_on_inner",
    "stop_at_return",
    "record_wall_time",
    "bias_rollouts",
    "bias_burn_in",
];

/// Fills every unset field and override with its default for the chosen
/// environment and algorithm, and rejects ids, combinations and override
/// keys that do not apply.
pub fn resolve(config: &ExperimentConfig) -> Result<ExperimentConfig> {
    config.validate()?;
    let env = EnvKind::parse(&config.env_id)?;
    let algo = AlgoKind::parse(&config.algo_id)?;
    if env.is_tabular() != algo.is_tabular() {
        return Err(Error::Config(format!(
            "algo `{}` cannot run on env `{}`",
            config.algo_id, config.env_id
        )));
    }
    if !algo.allows_smr() && config.smr_ratio != 1 {
        return Err(Error::Config(format!(
            "algo `{}` is the vanilla update (M = 1); use `{}-smr` for M = {}",
            config.algo_id, config.algo_id, config.smr_ratio
        )));
    }
    let mut out = config.clone();
    let mut allowed: Vec<&str> = Vec::new();
    match env {
        EnvKind::Cliff | EnvKind::Maze { .. } => {
            allowed.extend(TABULAR_KEYS);
            if out.total_steps.is_none() && out.total_episodes.is_none() {
                out.total_episodes = Some(if env == EnvKind::Cliff { 500 } else { 100 });
            }
            out.eval_interval.get_or_insert(1);
            out.eval_episodes.get_or_insert(1);
            out.schedule.get_or_insert_with(|| "constant:0.05".into());
            default(&mut out, "epsilon", "0.1");
            default(&mut out, "gamma", "0.99");
            default(&mut out, "eval_horizon", "100");
            if let EnvKind::Maze { .. } = env {
                allowed.extend(MAZE_KEYS);
                default(&mut out, "maze_horizon", &MAZE_HORIZON.to_string());
                default(&mut out, "maze_seed", "seed");
            }
        }
        EnvKind::RandomMdp => {
            allowed.extend(TABULAR_KEYS);
            allowed.extend(RANDOM_MDP_KEYS);
            if out.total_steps.is_none() && out.total_episodes.is_none() {
                out.total_steps = Some(200_000);
            }
            out.eval_interval.get_or_insert(10_000);
            out.eval_episodes.get_or_insert(10);
            out.schedule.get_or_insert_with(|| "poly:150:1000".into());
            default(&mut out, "epsilon", "0.3");
            default(&mut out, "gamma", "0.9");
            default(&mut out, "eval_horizon", "100");
            default(&mut out, "n_states", "5");
            default(&mut out, "n_actions", "3");
            default(&mut out, "r_max", "1");
            default(&mut out, "mdp_seed", "seed");
        }
        EnvKind::PointMass => {
            allowed.extend(NEURAL_KEYS);
            if out.total_episodes.is_some() {
                return Err(Error::Config("pointmass runs are budgeted in total_steps".into()));
            }
            out.total_steps.get_or_insert(30_000);
            out.eval_interval.get_or_insert(1000);
            out.eval_episodes.get_or_insert(10);
            if out.schedule.is_some() {
                return Err(Error::Config("schedule applies to tabular runs only".into()));
            }
            let d = SmrTrainConfig::default();
            default(&mut out, "batch_size", &d.batch_size.to_string());
            default(&mut out, "policy_delay", &d.policy_delay.to_string());
            default(&mut out, "exploration_noise", &d.exploration_noise.to_string());
            default(&mut out, "target_noise", &d.target_noise.to_string());
            default(&mut out, "noise_clip", &d.noise_clip.to_string());
            default(&mut out, "gamma", &d.gamma.to_string());
            default(&mut out, "learning_rate", &d.learning_rate.to_string());
            default(&mut out, "warmup_steps", &d.warmup_steps.to_string());
            default(&mut out, "tau", &d.tau.to_string());
            default(&mut out, "hidden", &join(&d.hidden));
            default(&mut out, "optimizer", &d.optimizer.to_string());
            default(&mut out, "buffer_capacity", &d.buffer_capacity.to_string());
            default(&mut out, "delay_on_inner", &d.delay_on_inner.to_string());
        }
    }
    default(&mut out, "record_wall_time", "false");
    if config.eval_interval.is_none() {
        // A default cadence never exceeds a short budget.
        if let Some(budget) = out.total_steps.or(out.total_episodes.map(|e| e as u64)) {
            out.eval_interval = out.eval_interval.map(|iv| iv.min(budget));
        }
    }
    for key in out.overrides.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::Config(format!(
                "unknown setting `{key}` for env `{}`",
                out.env_id
            )));
        }
    }
    out.validate()?;
    // Build one seed's plan so bad values fail before any file is written.
    plan(&out, out.seeds[0]).map_err(|e| match e {
        Error::InvalidArgument(msg) => Error::Config(msg),
        other => other,
    })?;
    Ok(out)
}

fn default(cfg: &mut ExperimentConfig, key: &str, value: &str) {
    cfg.overrides
        .entry(key.to_string())
        .or_insert_with(|| value.to_string());
}

fn join(xs: &[usize]) -> String {
    xs.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

fn get<T: std::str::FromStr>(cfg: &ExperimentConfig, key: &str) -> Result<T> {
    let v = cfg
        .override_value(key)
        .ok_or_else(|| Error::Config(format!("missing setting `{key}`")))?;
    v.parse()
        .map_err(|_| Error::Config(format!("bad value `{v}` for `{key}`")))
}

fn get_opt<T: std::str::FromStr>(cfg: &ExperimentConfig, key: &str) -> Result<Option<T>> {
    match cfg.override_value(key) {
        None => Ok(None),
        Some(_) => get(cfg, key).map(Some),
    }
}

/// `seed` means "the run seed".
fn seed_setting(cfg: &ExperimentConfig, key: &str, run_seed: u64) -> Result<u64> {
    match cfg.override_value(key) {
        None | Some("seed") => Ok(run_seed),
        Some(_) => get(cfg, key),
    }
}

/// A concrete, fully specified run for one seed.
#[derive(Debug, Clone)]
pub enum RunPlan {
    Tabular {
        env: TabularEnv,
        config: SmrConfig,
        schedule: LearningRateSchedule,
    },
    Continuous {
        env: PointMassEnv,
        config: SmrTrainConfig,
        run: Td3RunConfig,
    },
}

/// Builds the run for `seed` from a resolved configuration.
pub fn plan(cfg: &ExperimentConfig, seed: u64) -> Result<RunPlan> {
    let env_kind = EnvKind::parse(&cfg.env_id)?;
    let m = cfg.smr_ratio;
    if env_kind == EnvKind::PointMass {
        let algo = AlgoKind::parse(&cfg.algo_id)?;
        let hidden = cfg
            .override_value("hidden")
            .unwrap_or("")
            .split(',')
            .map(|w| w.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::Config("hidden must be a comma list of layer widths".into()))?;
        let config = SmrTrainConfig {
            m,
            batch_size: get(cfg, "batch_size")?,
            policy_delay: get(cfg, "policy_delay")?,
            exploration_noise: get(cfg, "exploration_noise")?,
            target_noise: get(cfg, "target_noise")?,
            noise_clip: get(cfg, "noise_clip")?,
            gamma: get(cfg, "gamma")?,
            learning_rate: get(cfg, "learning_rate")?,
            warmup_steps: get(cfg, "warmup_steps")?,
            single_critic: matches!(algo, AlgoKind::Ddpg | AlgoKind::DdpgSmr),
            tau: get(cfg, "tau")?,
            hidden,
            optimizer: get::<OptimizerKind>(cfg, "optimizer")?,
            buffer_capacity: get(cfg, "buffer_capacity")?,
            delay_on_inner: get(cfg, "delay_on_inner")?,
        };
        config.validate()?;
        let run = Td3RunConfig {
            total_steps: cfg.total_steps.unwrap_or(30_000),
            eval_interval: cfg.eval_interval.unwrap_or(1000),
            eval_episodes: cfg.eval_episodes.unwrap_or(10),
            stop_at_return: get_opt(cfg, "stop_at_return")?,
        };
        return Ok(RunPlan::Continuous {
            env: PointMassEnv::default(),
            config,
            run,
        });
    }

    let gamma: f64 = get(cfg, "gamma")?;
    let env = match env_kind {
        EnvKind::Cliff => {
            let (mdp, spec) = cliff_walking_env();
            TabularEnv::new(mdp.with_gamma(gamma)?, spec.start_state(), Some(spec.horizon))?
        }
        EnvKind::Maze { width, height } => {
            let maze_seed = seed_setting(cfg, "maze_seed", seed)?;
            let horizon = get(cfg, "maze_horizon")?;
            let (mdp, spec) = random_maze_env_with_horizon(maze_seed, width, height, horizon)?;
            TabularEnv::new(mdp.with_gamma(gamma)?, spec.start_state(), Some(spec.horizon))?
        }
        EnvKind::RandomMdp => {
            let mdp_seed = seed_setting(cfg, "mdp_seed", seed)?;
            let mdp = random_mdp(
                mdp_seed,
                get(cfg, "n_states")?,
                get(cfg, "n_actions")?,
                get(cfg, "r_max")?,
                gamma,
                false,
            )?;
            TabularEnv::new(mdp, 0, None)?
        }
        EnvKind::PointMass => unreachable!(),
    };
    let budget = match (cfg.total_steps, cfg.total_episodes) {
        (Some(s), _) => Budget::Steps(s),
        (None, Some(e)) => Budget::Episodes(e),
        (None, None) => return Err(Error::Config("no training budget".into())),
    };
    let config = SmrConfig {
        m,
        epsilon: get(cfg, "epsilon")?,
        gamma,
        budget,
        eval_every: cfg.eval_interval.unwrap_or(1),
        eval_episodes: cfg.eval_episodes.unwrap_or(1),
        eval_horizon: get(cfg, "eval_horizon")?,
    };
    config.validate()?;
    let schedule = LearningRateSchedule::parse(cfg.schedule.as_deref().unwrap_or("constant:0.05"), m)?;
    Ok(RunPlan::Tabular { env, config, schedule })
}

/// What one seed produced.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedSummary {
    pub seed: u64,
    pub curve: Vec<CurvePoint>,
    pub env_steps: u64,
    /// Largest `|Q|` at any intermediate update (tabular runs only).
    pub max_abs_q: Option<f64>,
    /// Final table (tabular runs only).
    pub final_q: Option<QTable>,
    pub bias: Vec<BiasReport>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub resolved: ExperimentConfig,
    pub seeds: Vec<SeedSummary>,
    pub aggregate: Vec<AggregatePoint>,
    /// Every file written, per-seed curves first.
    pub files: Vec<PathBuf>,
}

pub fn seed_file(dir: &Path, seed: u64) -> PathBuf {
    dir.join(format!("seed_{seed}.csv"))
}

pub fn bias_file(dir: &Path, seed: u64) -> PathBuf {
    dir.join(format!("bias_seed_{seed}.csv"))
}

/// Runs every seed of `config` and writes `config.resolved`, one
/// `seed_<k>.csv` per seed and `aggregate.csv` into the output directory.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    execute(config, false)
}

/// As [`run_experiment`], also estimating the critic's normalized bias at
/// every evaluation point into `bias_seed_<k>.csv`.
pub fn run_bias_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    execute(config, true)
}

fn execute(config: &ExperimentConfig, with_bias: bool) -> Result<ExperimentOutcome> {
    let resolved = resolve(config)?;
    let dir = resolved.output_dir.clone();
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let resolved_path = dir.join("config.resolved");
    std::fs::write(&resolved_path, resolved.to_text()).map_err(|e| Error::io(&resolved_path, e))?;

    let mut files = Vec::new();
    let mut seeds = Vec::new();
    for &seed in &resolved.seeds {
        let path = seed_file(&dir, seed);
        let summary = run_seed(
            &resolved,
            seed,
            &path,
            with_bias.then(|| bias_file(&dir, seed)).as_deref(),
        )?;
        files.push(path);
        if with_bias {
            files.push(bias_file(&dir, seed));
        }
        seeds.push(summary);
    }
    let curves: Vec<Vec<CurvePoint>> = seeds.iter().map(|s| s.curve.clone()).collect();
    let agg = aggregate(&curves);
    let agg_path = dir.join("aggregate.csv");
    write_aggregate(&agg_path, &agg)?;
    files.push(agg_path);
    files.push(resolved_path);
    Ok(ExperimentOutcome {
        resolved,
        seeds,
        aggregate: agg,
        files,
    })
}

/// Runs one seed of a resolved configuration, streaming its curve to `path`.
pub fn run_seed(cfg: &ExperimentConfig, seed: u64, path: &Path, bias_path: Option<&Path>) -> Result<SeedSummary> {
    let record_wall = get::<bool>(cfg, "record_wall_time")?;
    let bias_settings = match bias_path {
        Some(_) => Some(BiasSettings::new(
            get_opt(cfg, "bias_rollouts")?.unwrap_or(100),
            get(cfg, "gamma")?,
            get_opt(cfg, "bias_burn_in")?.unwrap_or(100),
        )?),
        None => None,
    };
    let mut bias_rng = stream_rng(seed, Stream::Verify);
    let mut bias = Vec::new();
    let mut writer = CurveWriter::create(path)?;
    let mut curve = Vec::new();
    let mut push = |p: &EvalPoint, ms: u64| -> Result<()> {
        let point = CurvePoint {
            seed,
            step: p.step,
            eval_return_mean: p.mean_return,
            eval_return_std: p.std_return,
            wall_ms: if record_wall { ms } else { 0 },
        };
        writer.append(&point)?;
        curve.push(point);
        Ok(())
    };

    match plan(cfg, seed)? {
        RunPlan::Tabular { env, config, schedule } => {
            let started = std::time::Instant::now();
            let bias_env = env.clone();
            let on_eval = |p: &EvalPoint, q: &QTable| -> Result<()> {
                push(p, started.elapsed().as_millis() as u64)?;
                if let Some(settings) = &bias_settings {
                    let report = estimate_normalized_bias(
                        &bias_env,
                        |s: &usize, _: &mut _| Ok(q.greedy_action(*s)),
                        |s: &usize, a: &usize| Ok(q.get(*s, *a)),
                        settings,
                        &mut bias_rng,
                    )?;
                    bias.push(BiasReport { step: p.step, ..report });
                }
                Ok(())
            };
            let hooks = TrainHooks {
                on_step: None,
                on_eval: Some(Box::new(on_eval)),
            };
            let run = train_q_smr_with_hooks(&env, &config, &schedule, seed, hooks)?;
            let summary = SeedSummary {
                seed,
                curve,
                env_steps: run.env_steps,
                max_abs_q: Some(run.max_abs_q),
                final_q: Some(run.q),
                bias,
            };
            finish_bias(bias_path, &summary)?;
            Ok(summary)
        }
        RunPlan::Continuous { env, config, run } => {
            let bias_env = env.clone();
            let mut on_eval = |p: &EvalPoint, ms: u64, agent: &Td3Agent| -> Result<()> {
                push(p, ms)?;
                if let Some(settings) = &bias_settings {
                    let report = estimate_normalized_bias(
                        &bias_env,
                        |s: &Vec<f64>, _: &mut _| agent.params.act(s),
                        |s: &Vec<f64>, a: &Vec<f64>| agent.params.q1(s, a),
                        settings,
                        &mut bias_rng,
                    )?;
                    bias.push(BiasReport { step: p.step, ..report });
                }
                Ok(())
            };
            let out = train_td3_smr_with_eval_hook(&env, &config, &run, seed, Some(&mut on_eval))?;
            let summary = SeedSummary {
                seed,
                curve,
                env_steps: out.env_steps,
                max_abs_q: None,
                final_q: None,
                bias,
            };
            finish_bias(bias_path, &summary)?;
            Ok(summary)
        }
    }
}

fn finish_bias(path: Option<&Path>, summary: &SeedSummary) -> Result<()> {
    match path {
        Some(path) => write_bias(path, summary.seed, &summary.bias),
        None => Ok(()),
    }
}

/// One experiment per SMR ratio, each written to `<output_dir>/M<m>/`.
pub fn sweep(config: &ExperimentConfig, ratios: &[usize]) -> Result<Vec<ExperimentOutcome>> {
    if ratios.is_empty() {
        return Err(Error::Config("sweep needs at least one SMR ratio".into()));
    }
    // Resolve every point first so a bad ratio fails before any run starts.
    let cfgs = ratios
        .iter()
        .map(|&m| {
            let mut c = config.clone();
            c.smr_ratio = m;
            c.output_dir = config.output_dir.join(format!("M{m}"));
            resolve(&c).map(|_| c)
        })
        .collect::<Result<Vec<_>>>()?;
    cfgs.iter().map(run_experiment).collect()
}

/// Parses `1,2,5` into SMR ratios.
pub fn parse_ratios(text: &str) -> Result<Vec<usize>> {
    let ratios = parse_seeds(text)?;
    ratios
        .into_iter()
        .map(|m| {
            if m == 0 {
                Err(Error::Config("SMR ratio must be at least 1".into()))
            } else {
                Ok(m as usize)
            }
        })
        .collect()
}

/// Override keys accepted for `env_id`, for usage text.
pub fn known_settings(env_id: &str) -> Result<Vec<&'static str>> {
    let mut keys: Vec<&'static str> = match EnvKind::parse(env_id)? {
        EnvKind::Cliff => TABULAR_KEYS.to_vec(),
        EnvKind::Maze { .. } => [TABULAR_KEYS, MAZE_KEYS].concat(),
        EnvKind::RandomMdp => [TABULAR_KEYS, RANDOM_MDP_KEYS].concat(),
        EnvKind::PointMass => NEURAL_KEYS.to_vec(),
    };
    keys.sort_unstable();
    Ok(keys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn overrides_of(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    fn cliff(dir: &Path) -> ExperimentConfig {
        ExperimentConfig {
            env_id: "cliff".into(),
            algo_id: "q-smr".into(),
            smr_ratio: 2,
            seeds: vec![0, 1, 2],
            total_episodes: Some(15),
            output_dir: dir.to_path_buf(),
            ..Default::default()
        }
    }

    #[test]
    fn ids_parse() {
        assert_eq!(
            EnvKind::parse("maze-8x6").unwrap(),
            EnvKind::Maze { width: 8, height: 6 }
        );
        assert!(EnvKind::parse("maze-8").is_err());
        assert!(EnvKind::parse("hopper").is_err());
        assert!(AlgoKind::parse("sac").is_err());
    }

    #[test]
    fn resolve_rejects_bad_combinations() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = cliff(dir.path());
        c.algo_id = "td3-smr".into();
        assert!(resolve(&c).is_err());
        let mut c = cliff(dir.path());
        c.algo_id = "q".into();
        assert!(resolve(&c).is_err());
        let mut c = cliff(dir.path());
        c.overrides.insert("hidden".into(), "4".into());
        assert!(resolve(&c).is_err());
        let mut c = cliff(dir.path());
        c.schedule = Some("poly:1000:1".into());
        assert!(resolve(&c).is_err());
    }

    #[test]
    fn resolved_defaults_are_explicit() {
        let dir = tempfile::tempdir().unwrap();
        let r = resolve(&cliff(dir.path())).unwrap();
        assert_eq!(r.schedule.as_deref(), Some("constant:0.05"));
        assert_eq!(r.override_value("epsilon"), Some("0.1"));
        assert_eq!(r.eval_interval, Some(1));
        assert_eq!(resolve(&r).unwrap(), r);
    }

    #[test]
    fn writes_one_file_per_seed_plus_aggregate() {
        let dir = tempfile::tempdir().unwrap();
        let out = run_experiment(&cliff(dir.path())).unwrap();
        for s in 0..3 {
            assert!(seed_file(dir.path(), s).exists());
        }
        let csvs = std::fs::read_dir(dir.path())
            .unwrap()
            .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "csv"))
            .count();
        assert_eq!(csvs, 4);
        assert_eq!(out.aggregate.len(), 15);
        assert!(out.aggregate.iter().all(|p| p.n_seeds == 3));
    }

    #[test]
    fn continuous_bias_run_writes_reports() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            env_id: "pointmass".into(),
            algo_id: "td3-smr".into(),
            smr_ratio: 2,
            seeds: vec![0],
            total_steps: Some(400),
            eval_interval: Some(200),
            eval_episodes: Some(1),
            output_dir: dir.path().to_path_buf(),
            overrides: overrides_of(&[
                ("hidden", "8"),
                ("batch_size", "16"),
                ("warmup_steps", "100"),
                ("bias_rollouts", "4"),
                ("bias_burn_in", "10"),
            ]),
            ..Default::default()
        };
        let out = run_bias_experiment(&cfg).unwrap();
        assert_eq!(out.seeds[0].bias.len(), 2);
        let text = std::fs::read_to_string(bias_file(dir.path(), 0)).unwrap();
        assert_eq!(text.lines().count(), 3);
    }
}
