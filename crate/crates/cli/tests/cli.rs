use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tsn::{sample_tsn, truncation_bounds, RngStream, SnParams, TruncationDirection, TsnModel};

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn tsn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsn")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}): {}", stdout(o)))
}

fn sample_path() -> String {
    golden("sample.csv").display().to_string()
}

const FIT_ARGS: [&str; 8] = ["--column", "value", "--upper", "2.5", "--grid-points", "41", "--method", "grid-mom"];

#[test]
fn fit_matches_golden_json() {
    let input = sample_path();
    let mut args = vec!["fit", "--input", &input];
    args.extend(FIT_ARGS);
    let out = tsn(&args);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let expected = std::fs::read_to_string(golden("fit.json")).unwrap();
    assert_eq!(stdout(&out), expected);
}

#[test]
fn fit_schema() {
    let input = sample_path();
    let mut args = vec!["fit", "--input", &input];
    args.extend(FIT_ARGS);
    let v = json(&tsn(&args));
    let obj = v.as_object().unwrap();
    let mut keys: Vec<&str> = obj.keys().map(String::as_str).collect();
    keys.sort_unstable();
    assert_eq!(
        keys,
        ["converged", "estimate", "grid", "loglik", "method", "n_used", "residual_norm", "transform", "window"]
    );
    for k in ["xi", "omega", "alpha"] {
        assert!(v["estimate"][k].is_f64());
    }
    assert!(v["converged"].is_boolean());
    assert!(v["n_used"].is_u64());
    assert_eq!(v["window"]["lower"], "-inf");
    assert_eq!(v["window"]["upper"], 2.5);
    assert_eq!(v["grid"]["points"], 41);

    // non-grid methods carry no grid block
    let mle = json(&tsn(&["fit", "--input", &input, "--column", "value", "--method", "mle"]));
    assert!(mle.get("grid").is_none());
    assert_eq!(mle["method"], "mle");
}

#[test]
fn fit_is_deterministic_and_leaves_input_alone() {
    let input = sample_path();
    let before = std::fs::read(&input).unwrap();
    let args = ["fit", "--input", &input, "--method", "mle", "--multistart", "4", "--seed", "11"];
    let a = tsn(&args);
    let b = tsn(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(std::fs::read(&input).unwrap(), before);
}

#[test]
fn consistency_on_large_sample() {
    let truth = SnParams::new(0.0, 1.0, 2.0).unwrap();
    let w = truncation_bounds(TruncationDirection::Right, 0.1, &truth).unwrap();
    let data = sample_tsn(&TsnModel::new(truth, w).unwrap(), 100_000, RngStream::new(2024, 0)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("big.csv");
    let body: String = data.iter().map(|x| format!("{x}\n")).collect();
    std::fs::write(&path, body).unwrap();
    let upper = format!("{}", w.upper());
    let out = tsn(&["fit", "--input", path.to_str().unwrap(), "--upper", &upper]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    let est = &v["estimate"];
    assert!((est["xi"].as_f64().unwrap() - 0.0).abs() <= 0.05, "{v}");
    assert!((est["omega"].as_f64().unwrap() - 1.0).abs() <= 0.05, "{v}");
    assert!((est["alpha"].as_f64().unwrap() - 2.0).abs() <= 0.15, "{v}");
    assert_eq!(v["n_used"], 100_000);
}

#[test]
fn input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    let out = tsn(&["fit", "--input", empty.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("no observations"));

    let input = sample_path();
    let out = tsn(&["fit", "--input", &input, "--column", "value", "--lower", "100"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("no observations in window"));

    let out = tsn(&["fit", "--input", dir.path().join("missing.csv").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    let text = dir.path().join("text.csv");
    std::fs::write(&text, "x\n1\nabc\n").unwrap();
    let out = tsn(&["fit", "--input", text.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("non-numeric"));

    let flat = dir.path().join("flat.csv");
    std::fs::write(&flat, "2\n2\n2\n2\n").unwrap();
    assert_eq!(tsn(&["fit", "--input", flat.to_str().unwrap()]).status.code(), Some(1));

    let out = tsn(&["bootstrap", "--input", &input, "--bootstrap-B", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sqrt_transform() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("days.csv");
    let body: String = (1..=200).map(|i| format!("{}\n", (i * i % 97) + 1)).collect();
    std::fs::write(&path, body).unwrap();
    let out = tsn(&["fit", "--input", path.to_str().unwrap(), "--lower", "1", "--upper", "356", "--sqrt-transform"]);
    assert!(matches!(out.status.code(), Some(0 | 2)), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["transform"], "sqrt");
    assert_eq!(v["window"]["lower"], 1.0);
    assert_eq!(v["window"]["upper"], 356f64.sqrt());
}

fn bootstrap(seed: &str) -> Output {
    let input = sample_path();
    tsn(&[
        "bootstrap",
        "--input",
        &input,
        "--column",
        "value",
        "--grid-points",
        "21",
        "--bootstrap-B",
        "2",
        "--seed",
        seed,
    ])
}

#[test]
fn bootstrap_output() {
    let a = bootstrap("5");
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, bootstrap("5").stdout);
    let v = json(&a);
    assert_eq!(v["B"], 2);
    assert_eq!(v["seed"], 5);
    for k in ["xi", "omega", "alpha"] {
        assert!(v["se"][k].as_f64().unwrap() >= 0.0);
    }
    let w = json(&bootstrap("6"));
    assert_eq!(v["estimate"], w["estimate"]);
    assert_ne!(v["se"], w["se"]);
}

const SCENARIO: &str = r#"
[[scenario]]
name = "small"
direction = "right"
tau = 0.1
alpha0 = 2.0
n = 200
reps = 5
methods = ["grid-mom", "mwm"]
grid_points = 41
seed = 8
"#;

#[test]
fn simulate_writes_reproducible_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.toml");
    std::fs::write(&cfg, SCENARIO).unwrap();
    let run = |out: &Path| {
        let o = tsn(&["simulate", "--input", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap(), "--reps", "2"]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    };
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run(&a);
    run(&b);
    for f in ["small.csv", "small_replicates.csv", "summary.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let reps = std::fs::read_to_string(a.join("small_replicates.csv")).unwrap();
    assert_eq!(reps.lines().count(), 1 + 2 * 2);
    let summary = std::fs::read_to_string(a.join("summary.csv")).unwrap();
    assert!(summary.starts_with("scenario,method,parameter,bias,rmse,median,iqr"));
    assert_eq!(summary.lines().count(), 1 + 2 * 3);
}

#[test]
fn simulate_rejects_unknown_method() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.toml");
    std::fs::write(&cfg, SCENARIO.replace("\"mwm\"", "\"bayes\"")).unwrap();
    let o = tsn(&["simulate", "--input", cfg.to_str().unwrap(), "--out-dir", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("scenario[0].methods[1]"), "{}", stderr(&o));
}
