use std::path::Path;
use std::process::{Command, Output};

fn sharpsep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sharpsep"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const HEADER: &str = "experiment,d,n_queries,trials,successes,success_rate,mean,stderr,seed,backend,elapsed_ms";

#[test]
fn collision_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let o = sharpsep(&["collision", "--d", "64", "--trials", "50", "--seed", "3", "--out", path(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next().unwrap(), HEADER);
    assert_eq!(text.lines().count(), 4);
    assert!(dir.path().join("c.summary.json").exists());
}

#[test]
fn same_seed_same_bytes_serial_or_parallel() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let base = ["measure-twice", "--d", "32", "--reps", "10", "--trials", "100", "--seed", "11"];
    assert!(sharpsep(&[&base[..], &["--out", path(&a)]].concat()).status.success());
    assert!(sharpsep(&[&base[..], &["--out", path(&b), "--serial"]].concat()).status.success());
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn robust_and_per_trial() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let o = sharpsep(&[
        "measure-twice", "--d", "8", "--reps", "20", "--trials", "30", "--robust", "--per-trial", "--out", path(&out),
    ]);
    assert!(o.status.success());
    assert!(std::fs::read_to_string(&out).unwrap().contains("\nrobust,8,20,30,"));
    let trials = std::fs::read_to_string(dir.path().join("r.trials.csv")).unwrap();
    assert_eq!(trials.lines().count(), 1 + 3 * 30);
}

#[test]
fn sweep_prints_exponents() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = sharpsep(&["sweep", "--dims", "16,64,256", "--target", "0.667", "--trials", "200", "--out", path(&out)]);
    assert!(o.status.success());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("collision exponent"), "{stdout}");
}

#[test]
fn sharpness_prints_twelve_digits() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("p.json");
    std::fs::write(
        &f,
        r#"{"d":2,"kind":"povm","operators":[
            [[[0.75,0],[0,0]],[[0,0],[0.25,0]]],
            [[[0.25,0],[0,0]],[[0,0],[0.75,0]]]]}"#,
    )
    .unwrap();
    let o = sharpsep(&["sharpness", "--povm", path(&f)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "0.625000000000");
}

#[test]
fn verify_commands_pass() {
    assert_eq!(sharpsep(&["verify", "weingarten", "--t-max", "3", "--d", "9"]).status.code(), Some(0));
    assert_eq!(sharpsep(&["verify", "tv", "--d", "8", "--t", "2"]).status.code(), Some(0));
    assert_eq!(sharpsep(&["verify", "cswap", "--d", "2", "--shots", "20000"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(sharpsep(&["collision", "--trials", "3"]).status.code(), Some(2));
    assert_eq!(sharpsep(&["bogus"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    assert_eq!(sharpsep(&["collision", "--d", "1", "--trials", "3", "--out", path(&out)]).status.code(), Some(2));
    assert_eq!(
        sharpsep(&["collision", "--d", "4", "--trials", "0", "--out", path(&out)]).status.code(),
        Some(2)
    );
}

#[test]
fn run_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let out = dir.path().join("o.csv");
    std::fs::write(
        &cfg,
        format!(r#"{{"experiment":"verify-tv","dims":[4,8,64],"t":3,"out":{:?}}}"#, path(&out)),
    )
    .unwrap();
    let o = sharpsep(&["run", "--config", path(&cfg)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read_to_string(out).unwrap().lines().count(), 4);

    std::fs::write(&cfg, r#"{"experiment":"nope","dims":[4]}"#).unwrap();
    assert_eq!(sharpsep(&["run", "--config", path(&cfg)]).status.code(), Some(2));
}

#[test]
fn violation_exits_three() {
    assert_eq!(sharpsep(&["verify", "weingarten", "--t-max", "2", "--d", "5"]).status.code(), Some(0));
    // ten shots cannot meet the sampled tolerance
    assert_eq!(sharpsep(&["verify", "cswap", "--d", "3", "--shots", "10"]).status.code(), Some(3));
}
