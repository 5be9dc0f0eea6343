use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn smr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smr")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn csv_files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    names.sort();
    names
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&smr(&[])), 2);
    assert_eq!(code(&smr(&["tabular", "--bogus"])), 2);
    assert_eq!(code(&smr(&["tabular", "--env", "nope"])), 2);
    assert_eq!(code(&smr(&["tabular", "--algo", "td3"])), 2);
    assert_eq!(code(&smr(&["continuous", "--env", "cliff"])), 2);
    assert_eq!(code(&smr(&["verify", "no-such-suite"])), 2);
    assert_eq!(code(&smr(&["tabular", "--set", "nonsense=1"])), 2);
}

#[test]
fn help_exits_zero() {
    assert_eq!(code(&smr(&["--help"])), 0);
}

#[test]
fn tabular_run_writes_one_file_per_seed_and_aggregate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let res = smr(&[
        "tabular",
        "--env",
        "cliff",
        "--seeds",
        "0..2",
        "--smr-ratio",
        "2",
        "--episodes",
        "20",
        "--out",
        out,
    ]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    assert_eq!(
        csv_files(dir.path()),
        ["aggregate.csv", "seed_0.csv", "seed_1.csv", "seed_2.csv"]
    );
    let resolved = fs::read_to_string(dir.path().join("config.resolved")).unwrap();
    assert!(resolved.contains("smr_ratio = 2"));
    let seed0 = fs::read_to_string(dir.path().join("seed_0.csv")).unwrap();
    assert_eq!(
        seed0.lines().next().unwrap(),
        "seed,step,eval_return_mean,eval_return_std,wall_ms"
    );
    assert_eq!(seed0.lines().count(), 21);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    let out = dir.path().join("out");
    fs::write(
        &conf,
        format!(
            "env = cliff\nalgo = q-smr\nsmr_ratio = 3\nseeds = 0..4\ntotal_episodes = 50\noutput_dir = {}\n",
            out.display()
        ),
    )
    .unwrap();
    let res = smr(&[
        "tabular",
        "--config",
        conf.to_str().unwrap(),
        "--seeds",
        "7",
        "--episodes",
        "5",
    ]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    assert_eq!(csv_files(&out), ["aggregate.csv", "seed_7.csv"]);
    let resolved = fs::read_to_string(out.join("config.resolved")).unwrap();
    assert!(resolved.contains("smr_ratio = 3"));
    assert!(resolved.contains("total_episodes = 5"));
}

#[test]
fn sweep_creates_one_directory_per_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let res = smr(&[
        "sweep",
        "--env",
        "cliff",
        "--smr-ratio",
        "1,4",
        "--episodes",
        "5",
        "--out",
        out,
    ]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    for m in ["M1", "M4"] {
        assert_eq!(csv_files(&dir.path().join(m)), ["aggregate.csv", "seed_0.csv"]);
    }
}

#[test]
fn verify_exit_codes_follow_results() {
    let ok = smr(&["verify", "lemma1", "buffer"]);
    assert_eq!(code(&ok), 0);
    assert!(String::from_utf8_lossy(&ok.stdout).contains("verify: 2/2 suites passed"));
    let bad = smr(&["verify", "theorem1", "--inject-fault", "expansion"]);
    assert_eq!(code(&bad), 1);
    assert!(String::from_utf8_lossy(&bad.stdout).contains("[FAIL]"));
}

#[test]
fn bias_run_writes_bias_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let res = smr(&[
        "bias",
        "--env",
        "cliff",
        "--episodes",
        "10",
        "--set",
        "bias_rollouts=20",
        "--out",
        out,
    ]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    assert!(csv_files(dir.path()).contains(&"bias_seed_0.csv".to_string()));
}
