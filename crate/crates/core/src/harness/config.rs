//! Experiment configuration and its flat `key = value` file format.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// One experiment: an environment, an algorithm, an SMR ratio and a set of
/// seeds. Unset optional fields take per-environment defaults when the
/// experiment is planned.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub env_id: String,
    pub algo_id: String,
    pub smr_ratio: usize,
    pub seeds: Vec<u64>,
    pub total_steps: Option<u64>,
    pub total_episodes: Option<usize>,
    pub eval_interval: Option<u64>,
    pub eval_episodes: Option<usize>,
    pub schedule: Option<String>,
    pub output_dir: PathBuf,
    /// Algorithm- and environment-specific settings (`epsilon`, `hidden`,
    /// `learning_rate`, ...).
    pub overrides: BTreeMap<String, String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            env_id: "cliff".into(),
            algo_id: "q-smr".into(),
            smr_ratio: 1,
            seeds: vec![0],
            total_steps: None,
            total_episodes: None,
            eval_interval: None,
            eval_episodes: None,
            schedule: None,
            output_dir: PathBuf::from("runs"),
            overrides: BTreeMap::new(),
        }
    }
}

const CORE_KEYS: &[&str] = &[
    "env",
    "algo",
    "smr_ratio",
    "seeds",
    "total_steps",
    "total_episodes",
    "eval_interval",
    "eval_episodes",
    "schedule",
    "output_dir",
];

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.smr_ratio < 1 {
            return Err(Error::Config("smr_ratio must be at least 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        if self.total_steps == Some(0) || self.total_episodes == Some(0) {
            return Err(Error::Config("training budget must be positive".into()));
        }
        if self.eval_interval == Some(0) || self.eval_episodes == Some(0) {
            return Err(Error::Config("eval_interval and eval_episodes must be positive".into()));
        }
        if let (Some(iv), Some(steps)) = (self.eval_interval, self.total_steps) {
            if iv > steps {
                return Err(Error::Config(format!("eval_interval {iv} exceeds total_steps {steps}")));
            }
        }
        Ok(())
    }

    /// Flat map with one entry per set field; overrides are stored verbatim.
    pub fn to_map(&self) -> BTreeMap<String, String> {
        let mut map = self.overrides.clone();
        map.insert("env".into(), self.env_id.clone());
        map.insert("algo".into(), self.algo_id.clone());
        map.insert("smr_ratio".into(), self.smr_ratio.to_string());
        map.insert("seeds".into(), format_seeds(&self.seeds));
        map.insert("output_dir".into(), self.output_dir.display().to_string());
        let mut opt = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                map.insert(k.into(), v);
            }
        };
        opt("total_steps", self.total_steps.map(|v| v.to_string()));
        opt("total_episodes", self.total_episodes.map(|v| v.to_string()));
        opt("eval_interval", self.eval_interval.map(|v| v.to_string()));
        opt("eval_episodes", self.eval_episodes.map(|v| v.to_string()));
        opt("schedule", self.schedule.clone());
        map
    }

    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (k, v) in map {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one key; unknown keys become overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::Config(format!("bad value `{value}` for `{key}`: expected {what}"));
        match key {
            "env" => self.env_id = value.to_string(),
            "algo" => self.algo_id = value.to_string(),
            "smr_ratio" => self.smr_ratio = value.parse().map_err(|_| bad("a positive integer"))?,
            "seeds" => self.seeds = parse_seeds(value)?,
            "total_steps" => self.total_steps = Some(value.parse().map_err(|_| bad("an integer"))?),
            "total_episodes" => self.total_episodes = Some(value.parse().map_err(|_| bad("an integer"))?),
            "eval_interval" => self.eval_interval = Some(value.parse().map_err(|_| bad("an integer"))?),
            "eval_episodes" => self.eval_episodes = Some(value.parse().map_err(|_| bad("an integer"))?),
            "schedule" => self.schedule = Some(value.to_string()),
            "output_dir" => self.output_dir = PathBuf::from(value),
            _ => {
                if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                    return Err(Error::Config(format!("invalid key `{key}`")));
                }
                self.overrides.insert(key.to_string(), value.to_string());
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        serialize_map(&self.to_map())
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_map(&parse_map(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn override_value(&self, key: &str) -> Option<&str> {
        self.overrides.get(key).map(String::as_str)
    }

    pub fn is_core_key(key: &str) -> bool {
        CORE_KEYS.contains(&key)
    }
}

/// `key = value` lines, sorted by key.
pub fn serialize_map(map: &BTreeMap<String, String>) -> String {
    let mut out = String::new();
    for (k, v) in map {
        let _ = writeln!(out, "{k} = {v}");
    }
    out
}

/// Reads `key = value` lines. Blank lines and `#` comments are skipped; a
/// value may be wrapped in double quotes.
pub fn parse_map(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
        let (k, mut v) = (k.trim(), v.trim());
        if v.len() >= 2 && v.starts_with('"') && v.ends_with('"') {
            v = &v[1..v.len() - 1];
        }
        if k.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
        }
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key `{k}`", lineno + 1)));
        }
    }
    Ok(map)
}

/// Seeds as a comma list of integers and inclusive ranges: `0..19`, `1,4,7`,
/// `0..2,10`.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let mut seeds = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || Error::Config(format!("bad seed list `{text}`"));
        if let Some((lo, hi)) = part.split_once("..") {
            let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
            let hi: u64 = hi.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
            if hi < lo {
                return Err(bad());
            }
            seeds.extend(lo..=hi);
        } else {
            seeds.push(part.parse().map_err(|_| bad())?);
        }
    }
    if seeds.is_empty() {
        return Err(Error::Config("empty seed list".into()));
    }
    Ok(seeds)
}

pub fn format_seeds(seeds: &[u64]) -> String {
    seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("0..19").unwrap(), (0..20).collect::<Vec<_>>());
        assert_eq!(parse_seeds("3, 1,4").unwrap(), vec![3, 1, 4]);
        assert_eq!(parse_seeds("0..=2,9").unwrap(), vec![0, 1, 2, 9]);
        assert!(parse_seeds("5..2").is_err());
        assert!(parse_seeds("a").is_err());
        assert!(parse_seeds("").is_err());
    }

    #[test]
    fn parses_comments_and_quotes() {
        let cfg = ExperimentConfig::parse(
            "# cliff run\nenv = cliff\nalgo = \"q-smr\"\nsmr_ratio = 10\nseeds = 0..3\nepsilon = 0.1\n",
        )
        .unwrap();
        assert_eq!(cfg.algo_id, "q-smr");
        assert_eq!(cfg.seeds, vec![0, 1, 2, 3]);
        assert_eq!(cfg.override_value("epsilon"), Some("0.1"));
    }

    #[test]
    fn rejects_malformed() {
        assert!(ExperimentConfig::parse("env cliff").is_err());
        assert!(ExperimentConfig::parse("smr_ratio = ten").is_err());
        assert!(ExperimentConfig::parse("smr_ratio = 0").is_err());
        assert!(ExperimentConfig::parse("a = 1\na = 2").is_err());
        assert!(ExperimentConfig::parse("total_steps = 10\neval_interval = 20").is_err());
    }

    #[test]
    fn output_is_sorted_key_value_lines() {
        let text = ExperimentConfig::default().to_text();
        let keys: Vec<&str> = text.lines().map(|l| l.split(" = ").next().unwrap()).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    fn arb_config() -> impl Strategy<Value = ExperimentConfig> {
        let word = "[a-z][a-z0-9-]{0,8}";
        (
            (word, word, 1usize..50, proptest::collection::vec(0u64..1000, 1..6)),
            (
                proptest::option::of(1u64..1_000_000),
                proptest::option::of(1usize..1000),
                proptest::option::of(1usize..20),
                proptest::option::of("(constant:0\\.[0-9]{1,3}|poly:[1-9][0-9]{0,2}:[1-9][0-9]{0,3})"),
            ),
            "[a-z/_]{1,12}",
            proptest::collection::btree_map("[a-z][a-z_]{0,10}", "[a-zA-Z0-9.,:_-]{1,10}", 0..5),
        )
            .prop_map(
                |((env, algo, m, seeds), (steps, episodes, eval_eps, schedule), out, overrides)| {
                    let overrides = overrides
                        .into_iter()
                        .filter(|(k, _)| !ExperimentConfig::is_core_key(k))
                        .collect();
                    ExperimentConfig {
                        env_id: env,
                        algo_id: algo,
                        smr_ratio: m,
                        seeds,
                        total_steps: steps,
                        total_episodes: episodes,
                        eval_interval: steps.map(|s| (s / 3).max(1)),
                        eval_episodes: eval_eps,
                        schedule,
                        output_dir: PathBuf::from(out),
                        overrides,
                    }
                },
            )
    }

    proptest! {
        #[test]
        fn config_round_trips(cfg in arb_config()) {
            prop_assert_eq!(ExperimentConfig::parse(&cfg.to_text()).unwrap(), cfg);
        }
    }
}
