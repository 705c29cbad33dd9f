use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};
use tempfile::TempDir;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zaremba-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_with(dir: &Path, command: &str, config: &str, extra: &[&str]) -> Output {
    let cfg = dir.join(format!("{command}.json"));
    fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    let mut args = vec![command, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    lab(&args)
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(Result::unwrap).collect()
}

fn column(path: &Path, name: &str) -> String {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let idx = rdr.headers().unwrap().iter().position(|h| h == name).expect("column exists");
    rdr.records().next().unwrap().unwrap()[idx].to_string()
}

#[test]
fn barrier_report_for_flat_boundary() {
    let dir = TempDir::new().unwrap();
    let out = run_with(
        dir.path(),
        "barrier",
        r#"{"s": 1, "barrier": {"lipschitz": 0, "epsilon": 0.7853981633974483, "alpha": 0.25}}"#,
        &[],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = dir.path().join("out/barrier.csv");
    let a: f64 = column(&csv, "a").parse().unwrap();
    let eta0: f64 = column(&csv, "eta0").parse().unwrap();
    assert!((a - 1.08239).abs() < 1e-4, "{a}");
    assert!((eta0 - 0.25 * (1.0 - 1.0 / a)).abs() < 1e-12);
    for flag in ["sub_elliptic_ok", "dirichlet_bound_ok", "oblique_sign_ok", "outer_zero_ok", "lower_bound_ok"] {
        assert_eq!(column(&csv, flag), "true", "{flag}");
    }
}

#[test]
fn sphere_capacity_is_close_to_one() {
    let dir = TempDir::new().unwrap();
    let out = run_with(dir.path(), "capacity", r#"{"capacity": {"cloud": {"sphere": {"count": 1500}}}}"#, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let value: f64 = column(&dir.path().join("out/capacity.csv"), "value").parse().unwrap();
    assert!((value - 1.0).abs() < 0.05, "{value}");
    assert_eq!(column(&dir.path().join("out/capacity.csv"), "n_atoms"), "1500");
}

#[test]
fn capacity_from_csv_checks_input_measure() {
    let dir = TempDir::new().unwrap();
    let cloud = dir.path().join("pair.csv");
    fs::write(&cloud, "x1,x2,x3,mass\n0,0,0,0.1\n1,0,0,0.1\n").unwrap();
    let config = format!(r#"{{"capacity": {{"cloud": {{"csv": "{}"}}}}}}"#, cloud.display());
    let out = run_with(dir.path(), "capacity", &config, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&dir.path().join("out/input_measure.csv"));
    assert_eq!(&rows[0][0], "pair");
    assert_eq!(&rows[0][2], "true");
}

#[test]
fn empty_config_exits_with_validation_error() {
    let dir = TempDir::new().unwrap();
    for text in ["", "{}"] {
        let out = run_with(dir.path(), "barrier", text, &[]);
        assert_eq!(out.status.code(), Some(2), "{text:?}");
        let record: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
        assert_eq!(record["error"], "validation");
        assert!(!record["fields"].as_array().unwrap().is_empty());
    }
}

#[test]
fn field_level_messages_name_the_field() {
    let dir = TempDir::new().unwrap();
    let out = run_with(
        dir.path(),
        "barrier",
        r#"{"s": -1, "coefficients": "diag:[1,2]", "barrier": {"alpha": 0.25}}"#,
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
    let record: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(record["fields"][0]["field"], "s");
    let out = run_with(dir.path(), "barrier", r#"{"coefficients": "diag:[1,2]", "barrier": {}}"#, &[]);
    let record: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(record["fields"][0]["field"], "coefficients");
    let out = run_with(dir.path(), "barrier", r#"{"barrier": {}, "unknown": 1}"#, &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pipeline_errors_exit_one_with_the_module_message() {
    let dir = TempDir::new().unwrap();
    // a layer sphere that misses Ω entirely
    let out = run_with(
        dir.path(),
        "chain",
        r#"{"domain": {"preset": "disk", "center": [0, 0, -2.5], "radius": 0.3},
            "chain": {"radius": 1.0, "q": [1, 2, 2.5, 3, 4]},
            "ell": {"direction": [0, 0, 1], "epsilon": 0.5},
            "s": 1, "coefficients": "identity", "command": "chain", "out": "ignored",
            "solve": {"grid": {"lo": [0, 0, 0], "hi": [0, 0, 0]}}}"#,
        &[],
    );
    assert_eq!(out.status.code(), Some(2), "degenerate grid box is rejected up front");
    let out = run_with(
        dir.path(),
        "solve",
        r#"{"coefficients": "rot2d:0.7,1,100,1", "solve": {"grid": {"h": 0.25}}}"#,
        &[],
    );
    assert_eq!(out.status.code(), Some(1));
    let record: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(record["error"], "pipeline");
    assert!(record["message"].as_str().unwrap().contains("monotone"), "{record}");
}

#[test]
fn reruns_are_byte_identical_and_hashes_match() {
    let config = r#"{"domain": {"preset": "slit"}, "solve": {"grid": {"h": 0.125}, "data": {"far": 1}}}"#;
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for dir in [&a, &b] {
        let out = run_with(dir.path(), "solve", config, &["--svg"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.path().join("out/manifest.json")).unwrap()).unwrap();
    let outputs = manifest["outputs"].as_array().unwrap();
    assert!(outputs.iter().any(|o| o["file"] == "solution.svg"));
    for o in outputs {
        let name = o["file"].as_str().unwrap();
        let bytes = fs::read(a.path().join("out").join(name)).unwrap();
        assert_eq!(hex::encode(Sha256::digest(&bytes)), o["sha256"].as_str().unwrap());
        assert_eq!(bytes, fs::read(b.path().join("out").join(name)).unwrap(), "{name}");
    }
    assert_eq!(manifest["command"], "solve");
    assert_eq!(manifest["config"]["solve"]["tol"], 1e-10);
}

#[test]
fn chain_command_writes_replayable_csv() {
    let dir = TempDir::new().unwrap();
    let out = run_with(
        dir.path(),
        "chain",
        r#"{"domain": {"preset": "disk", "center": [0, 0, -2.5], "radius": 0.3}, "chain": {"overlap": "relaxed"}}"#,
        &["--svg"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&dir.path().join("out/chain.csv"));
    assert!(rows.len() > 10);
    let n: usize = column(&dir.path().join("out/chain_report.csv"), "n").parse().unwrap();
    assert_eq!(n + 1, rows.len());
    // adjacency lists are symmetric
    let adj: Vec<Vec<usize>> = rows
        .iter()
        .map(|r| r[5].split(';').filter(|t| !t.is_empty()).map(|t| t.parse().unwrap()).collect())
        .collect();
    for (i, list) in adj.iter().enumerate() {
        for &j in list {
            assert!(adj[j].contains(&i));
        }
    }
    assert!(dir.path().join("out/chain.svg").exists());
}

#[test]
fn mismatched_command_is_rejected() {
    let dir = TempDir::new().unwrap();
    let out = run_with(dir.path(), "barrier", r#"{"command": "capacity", "barrier": {}}"#, &[]);
    assert_eq!(out.status.code(), Some(2));
}
