use std::path::Path;
use std::process::{Command, Output};

fn roughskew(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_roughskew"));
    cmd.args(args).env_remove("ROUGHSKEW_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

const SMALL: &str = "theta.min = 1e-3\ntheta.max = 1e-1\ntheta.count = 4\nmc.n_paths = 1000\nmc.n_steps = 8\n";

#[test]
fn quick_validation_passes_and_mutation_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v");
    let ok = roughskew(&["validate", "--level", "quick", "--out", out.to_str().unwrap()], &[]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    assert!(read(&out, "report.txt").ends_with("overall: PASS\n"));

    let bad = roughskew(&["validate", "--mutate-alpha-sign", "--out", out.to_str().unwrap()], &[]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stdout).contains("FAIL theorem1-consistency"));
}

#[test]
fn malformed_config_is_rejected_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "theta.min = 0.5\ntheta.max = 0.1\n").unwrap();
    let out = dir.path().join("o");
    let r = roughskew(&["skew-term-structure", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("theta.min"));
    assert!(!out.exists());
}

#[test]
fn outputs_are_reproducible_across_threads_and_from_the_echo() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, format!("{SMALL}model.name = lsv-linear\n")).unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let c = dir.path().join("c");
    let run = |out: &Path, cfg: &Path, envs: &[(&str, &str)], extra: &[&str]| {
        let mut args = vec!["skew-term-structure", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        let r = roughskew(&args, envs);
        assert!(r.status.code() == Some(0) || r.status.code() == Some(1), "{}", String::from_utf8_lossy(&r.stderr));
    };
    run(&a, &cfg, &[], &["--threads", "1"]);
    run(&b, &cfg, &[("ROUGHSKEW_THREADS", "3")], &[]);
    for f in ["skew.csv", "fit.txt", "report.txt"] {
        assert_eq!(read(&a, f), read(&b, f), "{f}");
    }
    // The echo names its own output directory; re-running it elsewhere must reproduce the results.
    run(&c, &a.join("config.txt"), &[], &[]);
    assert_eq!(read(&a, "skew.csv"), read(&c, "skew.csv"));
    let header = read(&a, "skew.csv");
    assert!(header.starts_with("theta,z,zeta,skew,skew_se\n"));
    assert_eq!(header.lines().count(), 5);
    assert!(read(&a, "fit.txt").contains("slope = ") || read(&a, "fit.txt").starts_with("no fit"));
}

#[test]
fn seed_flag_changes_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, format!("{SMALL}model.name = lsv-linear\n")).unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for (out, seed) in [(&a, "1"), (&b, "2")] {
        roughskew(&["skew-term-structure", "--config", cfg.to_str().unwrap(), "--seed", seed, "--out", out.to_str().unwrap()], &[]);
    }
    assert_ne!(read(&a, "skew.csv"), read(&b, "skew.csv"));
    assert!(read(&b, "config.txt").contains("mc.seed = 2\n"));
}

#[test]
fn price_prints_a_quote_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p");
    let r = roughskew(
        &["price", "--set", "model.name=bs", "--set", "price.z=0.5", "--set", "mc.n_paths=500", "--out", out.to_str().unwrap()],
        &[],
    );
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let quote = read(&out, "quote.csv");
    let row: Vec<f64> = quote.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(row.len(), 6);
    assert!((row[4] - 0.2).abs() < 1e-10, "{quote}");
    assert!(String::from_utf8_lossy(&r.stdout).contains("theta,z,price,se,iv,iv_se"));
}

#[test]
fn dynamic_consistency_refuses_lsv_and_fbm_dumps_paths() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d");
    let r = roughskew(&["dynamic-consistency", "--set", "model.name=lsv-linear", "--out", out.to_str().unwrap()], &[]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("rough model"));

    let r = roughskew(
        &["simulate-fbm", "--set", "fbm.n_paths=2", "--set", "fbm.n_steps=10", "--out", out.to_str().unwrap()],
        &[],
    );
    assert_eq!(r.status.code(), Some(0));
    let csv = read(&out, "fbm_path_0001.csv");
    assert!(csv.starts_with("t,W,W_perp,WH\n"));
    assert_eq!(csv.lines().count(), 12);
}

#[test]
fn bad_flags_are_usage_errors() {
    assert_eq!(roughskew(&["validate", "--level", "fast"], &[]).status.code(), Some(2));
    assert_eq!(roughskew(&["price", "--set", "novalue"], &[]).status.code(), Some(2));
    assert_eq!(roughskew(&["price", "--set", "mc.n_paths=1000", "--threads", "0"], &[]).status.code(), Some(2));
}
