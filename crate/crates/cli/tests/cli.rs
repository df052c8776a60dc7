use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_codenames"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn synthetic_experiment_then_rate() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["synth", "--codes", "x,y", "--out", "fam", "--seed", "2"]);
    for f in ["x.nbr", "y.nbr", "words.txt", "experiment.toml"] {
        assert!(d.join("fam").join(f).exists(), "{f}");
    }
    let tables = ok(
        d,
        &["experiment", "--config", "fam/experiment.toml", "--out", "run", "--repetitions", "2"],
    );
    assert!(tables.contains("CoLT, static pairs"));
    assert!(tables.contains("ACE"));
    let results = fs::read_to_string(d.join("run/results.csv")).unwrap();
    assert!(results.starts_with("condition,spymaster,guesser"));
    assert!(results.lines().any(|l| l.starts_with("static,x,x,2,50,")));

    let rated = ok(d, &["rate", "--log", "run/logs.jsonl"]);
    let line = rated.lines().find(|l| l.starts_with("static:x/x")).unwrap();
    // matched pairs never lose
    assert_eq!(line.split_whitespace().nth(3), Some("1.000"));
}

#[test]
fn experiments_are_reproducible_under_a_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["synth", "--codes", "p,q", "--out", "fam"]);
    let go = |out: &str, seed: &str| {
        ok(d, &["experiment", "--config", "fam/experiment.toml", "--out", out, "--repetitions", "2", "--seed", seed]);
        fs::read(d.join(out).join("logs.jsonl")).unwrap()
    };
    let a = go("a", "5");
    assert_eq!(a, go("b", "5"));
    assert_ne!(a, go("c", "6"));
}

#[test]
fn train_and_reload_dataset() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let first = ok(
        d,
        &["train-colt", "--samples", "60", "--games-per-matchup", "40", "--out", "w.tsv", "--dump-dataset", "data.csv", "--seed", "3"],
    );
    assert!(first.contains("holdout"));
    ok(d, &["train-colt", "--dataset", "data.csv", "--out", "w2.tsv"]);
    assert_eq!(fs::read(d.join("w.tsv")).unwrap(), fs::read(d.join("w2.tsv")).unwrap());
    let w = fs::read_to_string(d.join("w.tsv")).unwrap();
    assert!(w.starts_with("#colt-weights\tretrained"));
    assert_eq!(w.lines().count(), 37);

    let bad = run(d, &["train-colt", "--scheme", "lumpy", "--out", "x.tsv"]);
    assert!(!bad.status.success());
}

#[test]
fn surface_grid_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["surface", "--vectors", "20", "--games", "50", "--grid", "5", "--out", "s.csv"]);
    let text = fs::read_to_string(d.join("s.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("win_rate,win_time,colt"));
    assert_eq!(text.lines().count(), 1 + 25);
    assert!(!run(d, &["surface", "--vectors", "5", "--out", "t.csv"]).status.success());
}

#[test]
fn missing_inputs_fail_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let out = run(d, &["rate", "--log", "nope.jsonl"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.jsonl"));
    fs::write(d.join("bad.toml"), "seed = \"x\"").unwrap();
    assert!(!run(d, &["experiment", "--config", "bad.toml", "--out", "o"]).status.success());
}
