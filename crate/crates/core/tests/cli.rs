use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_deep-ibp"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn tiny_config(dir: &Path) -> std::path::PathBuf {
    let p = dir.join("tiny.json");
    fs::write(
        &p,
        r#"{
  "dataset": {"n_observed": 6, "n_instances": 30},
  "inference": {"iterations": 5},
  "experiment": {"n_observed": 6, "n_instances": 30, "k_true": [3], "iterations": 5, "replicates": 2}
}"#,
    )
    .unwrap();
    p
}

#[test]
fn generate_default_shape_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("data.csv");
    let o = run(&["generate", "--seed", "4", "--out", path(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 17);
    assert_eq!(lines[0].split(',').count(), 200);
    assert!(lines[0].starts_with("t0,t1,"));
    let sidecar: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("data.json")).unwrap()).unwrap();
    assert_eq!(sidecar["shape"], serde_json::json!([16, 200]));
    assert_eq!(sidecar["seed"], 4);
    assert_eq!(sidecar["weights"][0]["mask"].as_array().unwrap().len(), 16);
    assert!(sidecar["true_k"][0].as_u64().unwrap() <= 3);

    let again = dir.path().join("again.csv");
    run(&["generate", "--seed", "4", "--out", path(&again)]);
    assert_eq!(fs::read(&out).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn zero_width_model_gives_floor_noise() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("k0.json");
    fs::write(&cfg, r#"{"hyper": {"layer_widths": [0]}}"#).unwrap();
    let out = dir.path().join("x.csv");
    let o = run(&["generate", "--seed", "1", "--config", path(&cfg), "--out", path(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let x = deep_ibp::io::read_matrix_csv(&out).unwrap();
    assert!(x.values().iter().all(|v| v.abs() < 1e-4));
}

#[test]
fn infer_smoke_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path());
    let data = dir.path().join("data.csv");
    assert!(run(&["generate", "--seed", "2", "--config", path(&cfg), "--out", path(&data)]).status.success());
    let mut traces = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let o = run(&["infer", path(&data), "--seed", "8", "--config", path(&cfg), "--out", path(&out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
        assert_eq!(trace.lines().count(), 6);
        assert!(trace.starts_with("iteration,K,log_joint,accepted_adds,accepted_deletes\n"));
        let snap: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("snapshot.json")).unwrap()).unwrap();
        assert_eq!(snap["seed"], 8);
        assert_eq!(snap["config"]["inference"]["iterations"], 5);
        assert!(snap["layers"][0]["weights"]["mask"][0].is_string());
        traces.push(trace);
    }
    assert_eq!(traces[0], traces[1]);

    let out = dir.path().join("deep");
    let o = run(&["infer", path(&data), "--seed", "8", "--config", path(&cfg), "--out", path(&out), "--depth", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("trace_layer1.csv").exists() && out.join("trace_layer2.csv").exists());
}

#[test]
fn malformed_csv_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bad.csv");
    fs::write(&data, "t0,t1,t2\n0.1,0.2,0.3\n0.4,abc,0.6\n").unwrap();
    let o = run(&["infer", path(&data), "--seed", "1", "--out", path(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.csv:3"), "{err}");

    let o = run(&["infer", path(&dir.path().join("missing.csv")), "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_configs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"inference": {"iterationz": 5}}"#).unwrap();
    let o = run(&["generate", "--config", path(&cfg), "--out", path(&dir.path().join("x.csv"))]);
    assert_eq!(o.status.code(), Some(2));
    fs::write(&cfg, r#"{"hyper": {"sigma_top": -1}}"#).unwrap();
    let o = run(&["generate", "--config", path(&cfg), "--out", path(&dir.path().join("x.csv"))]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn experiment_is_independent_of_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path());
    let (a, b) = (dir.path().join("j1"), dir.path().join("j4"));
    let start = std::time::Instant::now();
    assert!(run(&["experiment", "--seed", "3", "--config", path(&cfg), "--out", path(&a), "--jobs", "1"]).status.success());
    assert!(start.elapsed().as_secs() < 30);
    assert!(run(&["experiment", "--seed", "3", "--config", path(&cfg), "--out", path(&b), "--jobs", "4"]).status.success());
    assert_eq!(fs::read(a.join("summary.csv")).unwrap(), fs::read(b.join("summary.csv")).unwrap());
    let traces: Vec<_> = fs::read_dir(a.join("traces")).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(traces.len(), 6);
    for name in traces {
        assert_eq!(fs::read(a.join("traces").join(&name)).unwrap(), fs::read(b.join("traces").join(&name)).unwrap());
    }
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["experiment"]["base_seed"], 3);
}

#[test]
fn unseeded_runs_record_their_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.csv");
    assert!(run(&["generate", "--out", path(&out)]).status.success());
    let sidecar: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("d.json")).unwrap()).unwrap();
    let seed = sidecar["seed"].as_u64().unwrap();
    let again = dir.path().join("e.csv");
    assert!(run(&["generate", "--seed", &seed.to_string(), "--out", path(&again)]).status.success());
    assert_eq!(fs::read(&out).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn validate_passes_clean_and_catches_perturbation() {
    let o = run(&["validate", "--seed", "0"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 10);
    assert!(stdout.contains("measured") && stdout.contains("tolerance"));

    let o = run(&["validate", "--seed", "0", "--kernel-samples", "2000", "--perturb", "1e-3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}
