//! Command-line front end.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, CommandFactory, Parser, Subcommand};

use super::config::{parse_map, ExperimentConfig};
use super::experiment::{parse_ratios, run_bias_experiment, run_experiment, sweep, EnvKind, ExperimentOutcome};
use super::verify::{run_suite, Faults, Suite};
use crate::error::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "smr",
    version,
    about = "Sample multiple reuse experiments and verification suites"
)]
#[command(arg_required_else_help = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Experiment file of `key = value` lines; flags override it.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Seeds: `3`, `0..19` (inclusive) or `1,4,7`.
    #[arg(long, alias = "seed", global = true, value_name = "LIST")]
    pub seeds: Option<String>,
    /// SMR ratio M; a comma list for `sweep`.
    #[arg(long, global = true, value_name = "M")]
    pub smr_ratio: Option<String>,
    /// Training budget in environment steps.
    #[arg(long, global = true)]
    pub steps: Option<u64>,
    /// Training budget in episodes (tabular only).
    #[arg(long, global = true)]
    pub episodes: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// cliff, maze-<W>x<H>, random-mdp or pointmass.
    #[arg(long, global = true)]
    pub env: Option<String>,
    /// q, q-smr, td3, td3-smr, ddpg or ddpg-smr.
    #[arg(long, global = true)]
    pub algo: Option<String>,
    /// Extra setting, e.g. `--set epsilon=0.2`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub sets: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Q-learning / Q-SMR on a finite MDP.
    Tabular,
    /// TD3-lite / DDPG-lite with SMR on the point-mass task.
    Continuous,
    /// Run property suites (all when none are named).
    Verify {
        /// lemma1, theorem1, corollary1, stability, convergence, gradients,
        /// theorem5, buffer.
        suites: Vec<String>,
        #[arg(long, hide = true)]
        inject_fault: Option<String>,
    },
    /// Train and record the critic's normalized estimation bias at every
    /// evaluation.
    Bias,
    /// One experiment per SMR ratio (and every seed), under `<out>/M<m>/`.
    Sweep,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if is_usage_error(&e) {
                eprintln!();
                eprintln!("{}", Cli::command().render_usage());
                EXIT_USAGE
            } else {
                EXIT_FAILURE
            }
        }
    }
}

fn is_usage_error(e: &Error) -> bool {
    matches!(e, Error::Config(_) | Error::UnknownId { .. })
}

fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Verify { suites, inject_fault } => verify(suites, inject_fault.as_deref()),
        Command::Tabular => {
            let cfg = build_config(&cli.global, Some(true), "cliff", false)?;
            report(&run_experiment(&cfg)?);
            Ok(EXIT_OK)
        }
        Command::Continuous => {
            let cfg = build_config(&cli.global, Some(false), "pointmass", false)?;
            report(&run_experiment(&cfg)?);
            Ok(EXIT_OK)
        }
        Command::Bias => {
            let cfg = build_config(&cli.global, None, "pointmass", false)?;
            let out = run_bias_experiment(&cfg)?;
            report(&out);
            for s in &out.seeds {
                if let Some(last) = s.bias.last() {
                    println!(
                        "seed {}: normalized bias {:.4} +- {:.4} at step {} ({} samples)",
                        s.seed, last.mean_normalized_bias, last.std_normalized_bias, last.step, last.n_samples
                    );
                }
            }
            Ok(EXIT_OK)
        }
        Command::Sweep => {
            let cfg = build_config(&cli.global, None, "cliff", true)?;
            let ratios = match &cli.global.smr_ratio {
                Some(list) => parse_ratios(list)?,
                None => vec![1, 2, 5, 10, 20],
            };
            for out in sweep(&cfg, &ratios)? {
                println!("M = {}", out.resolved.smr_ratio);
                report(&out);
            }
            Ok(EXIT_OK)
        }
    }
}

/// Config file, then subcommand defaults for missing ids, then flags.
fn build_config(
    g: &GlobalArgs,
    tabular: Option<bool>,
    default_env: &str,
    ratio_list: bool,
) -> Result<ExperimentConfig> {
    let mut map = match &g.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            parse_map(&text)?
        }
        None => Default::default(),
    };
    if let Some(env) = &g.env {
        map.insert("env".into(), env.clone());
    }
    let env = map.entry("env".into()).or_insert_with(|| default_env.into()).clone();
    let env_tabular = EnvKind::parse(&env)?.is_tabular();
    if let Some(algo) = &g.algo {
        map.insert("algo".into(), algo.clone());
    }
    map.entry("algo".into())
        .or_insert_with(|| if env_tabular { "q-smr" } else { "td3-smr" }.into());
    if let Some(want) = tabular {
        if want != env_tabular {
            let cmd = if want { "tabular" } else { "continuous" };
            return Err(Error::Config(format!("env `{env}` cannot run under `{cmd}`")));
        }
    }
    let mut cfg = ExperimentConfig::default();
    for (k, v) in &map {
        cfg.set(k, v)?;
    }
    if let Some(s) = &g.seeds {
        cfg.set("seeds", s)?;
    }
    if let Some(m) = &g.smr_ratio {
        if !ratio_list {
            cfg.set("smr_ratio", m)?;
        }
    }
    if let Some(s) = g.steps {
        cfg.total_steps = Some(s);
        cfg.total_episodes = None;
    }
    if let Some(e) = g.episodes {
        cfg.total_episodes = Some(e);
        cfg.total_steps = None;
    }
    if let Some(out) = &g.out {
        cfg.output_dir = out.clone();
    }
    for kv in &g.sets {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if ratio_list {
        cfg.smr_ratio = 1;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn report(out: &ExperimentOutcome) {
    for s in &out.seeds {
        match s.curve.last() {
            Some(p) => println!(
                "seed {}: {} env steps, last eval {:.4} +- {:.4} at {}",
                s.seed, s.env_steps, p.eval_return_mean, p.eval_return_std, p.step
            ),
            None => println!("seed {}: {} env steps, no evaluations", s.seed, s.env_steps),
        }
    }
    println!(
        "wrote {} files to {}",
        out.files.len(),
        out.resolved.output_dir.display()
    );
}

fn verify(names: &[String], fault: Option<&str>) -> Result<i32> {
    let suites = if names.is_empty() {
        Suite::ALL.to_vec()
    } else {
        names.iter().map(|n| Suite::parse(n)).collect::<Result<Vec<_>>>()?
    };
    let faults = match fault {
        Some(f) => Faults::parse(f)?,
        None => Faults::default(),
    };
    let mut failed = 0;
    for &suite in &suites {
        let report = run_suite(suite, faults)?;
        println!("== {suite} ==");
        for check in &report.checks {
            println!("  {check}");
        }
        let ok = report.checks.iter().filter(|c| c.passed).count();
        println!(
            "  {suite}: {ok}/{} checks passed in {:.2}s",
            report.checks.len(),
            report.elapsed.as_secs_f64()
        );
        if !report.passed() {
            failed += 1;
        }
    }
    println!("verify: {}/{} suites passed", suites.len() - failed, suites.len());
    Ok(if failed == 0 { EXIT_OK } else { EXIT_FAILURE })
}
