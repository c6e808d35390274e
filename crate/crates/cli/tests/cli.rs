use std::path::Path;
use std::process::{Command, Output};

fn elastica(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_elastica"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("ELASTICA_CACHE")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn unknown_command_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = elastica(&["fm-double", "--config", "bundled:off_center_disk"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_problems_exit_two_with_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"name": "x", "medium": {"lambda": 2, "mu": 1, "omega": 1, "rho": 1}}"#).unwrap();
    let o = elastica(&["forward", "--config", cfg.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("medium.rho"), "{}", stderr(&o));
    let o = elastica(&["forward"], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    let o = elastica(&["forward", "--config", "bundled:circle"], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    let o = elastica(&["forward", "--config", "bundled:off_center_disk", "--noise", "-1"], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    let o = elastica(&["forward", "--config", "bundled:off_center_disk", "--threads", "0"], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    let o = elastica(&["forward", "--config", dir.path().join("missing.json").to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn forward_writes_farfield_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = elastica(&["forward", "--config", "bundled:off_center_disk", "--threads", "2"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("PASS boundary_residual"));
    let ff = elastica::harness::read_farfield(&dir.path().join("farfield.csv")).unwrap();
    assert_eq!(ff.len(), 64);
    let man: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(man["threads"], 2);
    assert!(man["outputs"]["farfield.csv"].as_str().unwrap().len() == 64);
}

#[test]
fn fm_single_records_contrast_and_exit_follows_gate() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let args = ["fm-single", "--config", "bundled:off_center_disk", "--grid-n", "24", "--ntheta", "16", "--cache-dir", cache.to_str().unwrap()];
    let o = elastica(&args, &dir.path().join("run"));
    let man: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run/manifest.json")).unwrap()).unwrap();
    let gate = &man["gates"][0];
    assert_eq!(gate["name"], "contrast");
    assert_eq!(gate["threshold"], 5.0);
    assert!(gate["value"].as_f64().unwrap() > 0.0);
    let passed = gate["passed"].as_bool().unwrap();
    assert_eq!(o.status.code(), Some(if passed { 0 } else { 1 }));
    assert!(man["cache"]["misses"].as_u64().unwrap() > 0);
    for f in ["indicator.csv", "indicator.pgm", "indicator.json", "farfield.csv"] {
        assert!(dir.path().join("run").join(f).exists(), "{f}");
    }
    let warm = elastica(&args, &dir.path().join("warm"));
    assert_eq!(warm.status.code(), o.status.code());
    let man: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("warm/manifest.json")).unwrap()).unwrap();
    assert_eq!(man["cache"]["misses"], 0);
}

#[test]
fn fm_single_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["fm-single", "--config", "bundled:off_center_disk", "--grid-n", "20", "--ntheta", "12", "--noise", "0.02", "--seed", "5"];
    elastica(&args, &dir.path().join("a"));
    elastica(&[&args[..], &["--threads", "3"]].concat(), &dir.path().join("b"));
    for f in ["indicator.csv", "farfield.csv", "indicator.pgm"] {
        let a = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
}

#[test]
fn reflect_check_reports_every_identity() {
    let dir = tempfile::tempdir().unwrap();
    let o = elastica(&["reflect-check", "--seed", "7"], dir.path());
    let out = stdout(&o);
    for name in ["lame_max_error", "navier_max_error", "helmholtz_bc_max_error"] {
        assert!(out.contains(name), "{out}");
    }
    assert!(out.contains("PASS lame_max_error"));
    assert!(out.contains("PASS helmholtz_bc_max_error"));
    assert_eq!(o.status.code(), Some(if out.contains("FAIL") { 1 } else { 0 }));
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("reflection.json")).unwrap()).unwrap();
    assert_eq!(rep.as_array().unwrap().len(), 3);
}
