use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn gpc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gpc"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// CSV body without the config comment line.
fn csv_body(path: &Path) -> String {
    let text = fs::read_to_string(path).unwrap();
    assert!(text.starts_with("# config: "), "{text}");
    text.lines().skip(1).collect::<Vec<_>>().join("\n")
}

#[test]
fn construct_staircase() {
    let tmp = tempfile::tempdir().unwrap();
    let out = gpc(tmp.path(), &["construct", "--family", "staircase", "--L", "6", "--out", "s"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&tmp.path().join("s/eta.json"));
    assert_eq!(doc["nonzeros"], 10);
    assert_eq!(doc["eta"]["gamma"], serde_json::json!([1, 2]));
    assert_eq!(doc["config"]["params"]["L"], 6);
    assert_eq!(json(&tmp.path().join("s/diagnostics.json"))["symmetric"], true);
}

#[test]
fn extended_braided_matches_braided() {
    let tmp = tempfile::tempdir().unwrap();
    let a = gpc(tmp.path(), &["construct", "--family", "extended-braided", "--L", "4", "--w", "2", "--out", "a"]);
    let b = gpc(tmp.path(), &["construct", "--family", "braided", "--L", "8", "--out", "b"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(csv_body(&tmp.path().join("a/eta.csv")), csv_body(&tmp.path().join("b/eta.csv")));
}

#[test]
fn usage_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [
        &["construct", "--family", "nope", "--L", "4"][..],
        &["construct", "--family", "ensemble", "--L", "6", "--w", "2"],
        &["construct", "--family", "staircase"],
        &["de", "--family", "pc", "--t", "2"],
        &["de", "--family", "pc", "--t", "2", "--profile", "2:1", "--c", "1"],
        &["simulate", "--family", "braided", "--L", "8", "--t", "2", "--n", "13", "--c", "1"],
        &["verify", "--suite", "bogus"],
        &["frobnicate"],
    ] {
        let out = gpc(tmp.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn de_on_ensemble_writes_trace() {
    let tmp = tempfile::tempdir().unwrap();
    let out = gpc(
        tmp.path(),
        &["de", "--family", "ensemble", "--L", "6", "--w", "2", "--t", "3", "--c", "4", "--states", "--out", "d"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let trace = csv_body(&tmp.path().join("d/trace.csv"));
    assert!(trace.starts_with("iter,failure_fraction,x_min,x_max,x_mean\n1,"));
    let result = json(&tmp.path().join("d/result.json"));
    assert_eq!(result["verdict"], "converged_to_zero");
    assert!(tmp.path().join("d/states.csv").exists());
}

#[test]
fn threshold_writes_bracket_log() {
    let tmp = tempfile::tempdir().unwrap();
    let out = gpc(tmp.path(), &["threshold", "--family", "pc", "--t", "2", "--out", "t"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&tmp.path().join("t/threshold.json"));
    let c = doc["c_bar"].as_f64().unwrap();
    assert!((c - 3.35092).abs() < 1e-5, "{c}");
    assert!(!doc["log"].as_array().unwrap().is_empty());
    assert!(csv_body(&tmp.path().join("t/bracket_log.csv")).starts_with("c,verdict,iterations"));
}

#[test]
fn potential_table_and_curve() {
    let tmp = tempfile::tempdir().unwrap();
    let out = gpc(tmp.path(), &["potential", "--t", "2", "--c", "4", "--t-range", "4,5", "--out", "p"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&tmp.path().join("p/potential.json"));
    assert!((doc["c_p"].as_f64().unwrap() - 3.58805).abs() < 1e-5);
    assert_eq!(doc["t_star"], 4);
    assert_eq!(csv_body(&tmp.path().join("p/curve.csv")).lines().count(), 1002);
    assert_eq!(csv_body(&tmp.path().join("p/table.csv")).lines().count(), 3);
}

#[test]
fn config_file_with_flag_override_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("cfg.json"),
        r#"{"family": "staircase", "L": 4, "t": 2, "n": 40, "c": 1.0, "trials": 6, "max_iters": 5, "seed": 3}"#,
    )
    .unwrap();
    let run = |out: &str, jobs: &str| {
        let o = gpc(
            tmp.path(),
            &["simulate", "--config", "cfg.json", "--c", "2.5", "--jobs", jobs, "--export-graph", "--out", out],
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    };
    run("a", "1");
    run("b", "3");
    let meta = json(&tmp.path().join("a/sim.json"));
    assert_eq!(meta["config"]["params"]["c"], 2.5);
    assert_eq!(meta["config"]["params"]["trials"], 6);
    assert_eq!(meta["seed"], 3);
    let a = fs::read_to_string(tmp.path().join("a/sim.csv")).unwrap();
    let b = fs::read_to_string(tmp.path().join("b/sim.csv")).unwrap();
    // identical apart from the echoed job count
    assert_eq!(csv_body(&tmp.path().join("a/sim.csv")), csv_body(&tmp.path().join("b/sim.csv")));
    assert_ne!(a, b);
    assert!(fs::read_to_string(tmp.path().join("a/graph.txt")).unwrap().starts_with("gpc-graph v1 4 20\n"));

    fs::write(tmp.path().join("bad.json"), r#"{"bogus": 1}"#).unwrap();
    let o = gpc(tmp.path(), &["potential", "--t", "3", "--config", "bad.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_convexity_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = gpc(tmp.path(), &["verify", "--suite", "convexity", "--out", "v"]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS convexity")).count(), 19);
    assert_eq!(json(&tmp.path().join("v/verify.json"))["passed"], true);
}

#[test]
fn default_output_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let out = gpc(tmp.path(), &["optimize-tau", "--t-bar", "3.5", "--samples", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dirs: Vec<_> = fs::read_dir(tmp.path().join("out")).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(dirs.len(), 1);
    assert!(dirs[0].to_string_lossy().starts_with("optimize-tau-"));
    let doc = json(&tmp.path().join("out").join(&dirs[0]).join("optimality.json"));
    assert_eq!(doc["threshold_violations"], 0);
    assert_eq!(doc["samples"].as_array().unwrap().len(), 3);
}
