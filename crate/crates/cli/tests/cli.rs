//! End-to-end checks of the ndopt binary: exit codes, file outputs, and
//! determinism across runs.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ndopt() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ndopt"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    ndopt().args(args).current_dir(dir).env_remove("NDOPT_SEED").output().expect("spawn ndopt")
}

const SYNTH: &str = "n=800,p=0.1,sep=2.0";

#[test]
fn train_is_deterministic_and_seed_precedence_holds() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let train = |extra: &[&str], model: &str, trace: &str, env_seed: Option<&str>| {
        let mut args = vec![
            "train",
            "--solver",
            "stamp",
            "--measure",
            "fbeta:1",
            "--synth",
            SYNTH,
            "--passes",
            "3",
            "--out-model",
            model,
            "--out-trace",
            trace,
        ];
        args.extend_from_slice(extra);
        let mut cmd = ndopt();
        cmd.args(&args).current_dir(d).env_remove("NDOPT_SEED");
        if let Some(s) = env_seed {
            cmd.env("NDOPT_SEED", s);
        }
        let out = cmd.output().expect("spawn ndopt");
        assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
        out
    };

    let out_a = train(&["--seed", "7"], "a.txt", "a.csv", None);
    train(&["--seed", "7"], "b.txt", "b.csv", None);
    let bytes = |name: &str| fs::read(d.join(name)).unwrap();
    assert_eq!(bytes("a.txt"), bytes("b.txt"), "same seed, same model bytes");
    assert!(String::from_utf8_lossy(&out_a.stdout).contains("\"final_train_metric\""));

    // Config file loses to the flag, wins over the default, and the env var
    // slots between config and default.
    fs::write(d.join("cfg"), "seed=5\n").unwrap();
    train(&["--seed", "7", "--config", "cfg"], "c.txt", "c.csv", None);
    assert_eq!(bytes("a.txt"), bytes("c.txt"), "flag overrides config seed");
    train(&["--config", "cfg"], "e.txt", "e.csv", None);
    assert_ne!(bytes("a.txt"), bytes("e.txt"), "config seed 5 differs from 7");
    train(&[], "f.txt", "f.csv", Some("7"));
    assert_eq!(bytes("a.txt"), bytes("f.txt"), "NDOPT_SEED fallback");
    train(&["--config", "cfg"], "g.txt", "g.csv", Some("7"));
    assert_eq!(bytes("e.txt"), bytes("g.txt"), "config beats env");
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // Usage errors: no data source, contradictory sources, solver/measure
    // class mismatch, unknown solver.
    for args in [
        vec!["train", "--solver", "spade", "--measure", "qmean"],
        vec![
            "train", "--solver", "spade", "--measure", "qmean", "--synth", SYNTH, "--data", "x",
        ],
        vec!["train", "--solver", "spade", "--measure", "fbeta:1", "--synth", SYNTH],
        vec!["train", "--solver", "nope", "--measure", "qmean", "--synth", SYNTH],
        vec!["verify", "--suite", "nope"],
    ] {
        let out = run(&args, d);
        assert_eq!(out.status.code(), Some(2), "args {args:?}");
    }
    // clap's own usage failures also exit 2.
    let out = run(&["train", "--no-such-flag"], d);
    assert_eq!(out.status.code(), Some(2));

    // Data errors: missing file, unparseable file, single-class file.
    let out = run(&["train", "--solver", "sgd", "--measure", "min", "--data", "missing.svm"], d);
    assert_eq!(out.status.code(), Some(3));
    fs::write(d.join("garbage.svm"), "+1 not-a-feature\n").unwrap();
    let out = run(&["train", "--solver", "sgd", "--measure", "min", "--data", "garbage.svm"], d);
    assert_eq!(out.status.code(), Some(3));
    fs::write(d.join("oneclass.svm"), "+1 1:1\n+1 1:2\n").unwrap();
    let out = run(&["train", "--solver", "sgd", "--measure", "min", "--data", "oneclass.svm"], d);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn bench_emits_one_row_per_method_and_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = run(
        &[
            "bench", "--measure", "fbeta:1", "--synth", SYNTH, "--seed", "3", "--passes", "3",
            "--out", "b.csv",
        ],
        d,
    );
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(d.join("b.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("method,checkpoint,t,elapsed_ms,train_metric,test_metric"));
    let mut seen = std::collections::BTreeSet::new();
    let mut methods = std::collections::BTreeSet::new();
    for line in lines {
        let mut cols = line.split(',');
        let method = cols.next().unwrap();
        let checkpoint: usize = cols.next().unwrap().parse().unwrap();
        assert_eq!(cols.count(), 4, "row arity: {line}");
        methods.insert(method.to_string());
        assert!(seen.insert((method.to_string(), checkpoint)), "duplicate row {line}");
    }
    let expect: std::collections::BTreeSet<String> =
        ["stamp", "sgd", "plugin"].iter().map(|s| s.to_string()).collect();
    assert_eq!(methods, expect);
}

#[test]
fn evaluate_reproduces_the_training_metric_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = run(
        &[
            "train", "--solver", "sgd", "--measure", "hmean", "--synth", SYNTH, "--seed", "11",
            "--passes", "3",
        ],
        d,
    );
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let final_metric = extract(&stdout, "\"final_train_metric\":");

    let out = run(
        &[
            "evaluate", "--model", "model.txt", "--measure", "hmean", "--synth", SYNTH, "--seed",
            "11",
        ],
        d,
    );
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(extract(&stdout, "\"value\":"), final_metric, "evaluate output: {stdout}");

    // An absurd threshold forces the all-negative classifier: P = 0, N = 1.
    let out = run(
        &[
            "evaluate", "--model", "model.txt", "--measure", "min", "--synth", SYNTH, "--seed",
            "11", "--threshold", "1e9",
        ],
        d,
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(extract(&stdout, "\"P\":"), "0");
    assert_eq!(extract(&stdout, "\"value\":"), "0");
}

#[test]
fn verify_suites_pass_at_small_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &["verify", "--grid", "9", "--sets", "24", "--runs", "10", "--seed", "1"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    for suite in ["fenchel", "lemma1", "contraction", "noise"] {
        assert!(stdout.contains(&format!("{suite}: PASS")), "stdout: {stdout}");
    }
}

/// Value substring following `key` up to the next comma or brace.
fn extract(json: &str, key: &str) -> String {
    let start = json.find(key).unwrap_or_else(|| panic!("{key} in {json}")) + key.len();
    json[start..]
        .split(|c| c == ',' || c == '}')
        .next()
        .unwrap()
        .trim_matches('"')
        .to_string()
}
