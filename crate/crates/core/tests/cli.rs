use std::path::Path;
use std::process::{Command, Output};

fn emachine(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_emachine"))
        .args(args)
        .output()
        .expect("spawn emachine")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .parse()
        .unwrap()
}

#[test]
fn help_and_version_succeed() {
    for flag in ["--help", "--version"] {
        let o = emachine(&[flag]);
        assert_eq!(o.status.code(), Some(0), "{flag}");
        assert!(!stdout(&o).is_empty());
    }
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        vec!["bogus"],
        vec!["gamma", "--t=0"],
        vec!["gamma", "--t", "abc"],
        vec!["sweep", "--t-grid", "1,,2"],
        vec!["sweep", "--noise-p", "1.5", "--t-grid", "1,2"],
    ] {
        let o = emachine(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", stderr(&o));
        assert!(!stderr(&o).is_empty());
    }
}

#[test]
fn gamma_prints_zero_field_closed_form() {
    let o = emachine(&["gamma", "--j", "1", "--b", "0", "--t", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let a = 1.0 / (1.0 + (-1.0f64).exp());
    assert!((field(&out, "gamma00") - a).abs() < 1e-12);
    assert!((field(&out, "c_c") - 1.0).abs() < 1e-12);
    assert!((field(&out, "c_q") - 0.3137).abs() < 1e-4);
}

#[test]
fn negative_field_is_accepted() {
    let o = emachine(&["gamma", "--b=-0.3", "--t", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let flipped = emachine(&["gamma", "--b", "0.3", "--t", "2"]);
    // Spin-flip symmetry: Γ00(−B) = Γ11(B).
    let d = field(&stdout(&o), "gamma00") - field(&stdout(&flipped), "gamma11");
    assert!(d.abs() < 1e-12, "{d}");
}

#[test]
fn oracle_agrees() {
    let o = emachine(&["oracle", "--b", "0.3", "--t", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(field(&stdout(&o), "max_abs_diff") < 1e-6);
}

#[test]
fn exact_tomography_is_lossless() {
    let o = emachine(&["tomography", "--exact"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(field(&out, "choi_distance_e0") < 1e-9);
    assert!(field(&out, "choi_distance_e1") < 1e-9);
}

#[test]
fn fixed_point_from_saved_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("tomo.json");
    let sol = dir.path().join("fp.json");
    let o = emachine(&[
        "tomography",
        "--noise-p=0",
        "--noise-eps=0",
        "--noise-q=0",
        "--exact",
        "--out",
        data.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = emachine(&[
        "fixed-point",
        "--input",
        data.to_str().unwrap(),
        "--out",
        sol.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&sol).unwrap()).unwrap();
    assert!(v["residual"].as_f64().unwrap() < 1e-8);
    assert!((v["t_m"].as_f64().unwrap() - 2.0).abs() < 1e-4);
    assert!((v["b_m"].as_f64().unwrap() - 0.3).abs() < 1e-4);
}

fn sweep_into(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["sweep", "--out-dir", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    emachine(&args)
}

#[test]
fn sweep_writes_every_output() {
    let dir = tempfile::tempdir().unwrap();
    let o = sweep_into(dir.path(), &["--exact", "--t-grid", "1,2,4", "--svg"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in [
        "sweep.csv",
        "manifest.json",
        "ambiguity.csv",
        "band.csv",
        "ambiguity.svg",
    ] {
        assert!(dir.path().join(f).is_file(), "{f} missing");
    }
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn failing_point_exits_two_and_names_record() {
    let dir = tempfile::tempdir().unwrap();
    let o = sweep_into(dir.path(), &["--exact", "--t-grid", "1,1e12"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("record T=1000000000000"), "{err}");
    assert!(err.contains("causal states coincide"), "{err}");
    // The healthy point is still written.
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().ends_with(",ok"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"b_nominal": 0.5, "t_grid": [1, 2, 3], "seed": 7}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = sweep_into(
        &out,
        &["--config", cfg.to_str().unwrap(), "--exact", "--b", "0.3"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let m: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["config"]["b_nominal"].as_f64(), Some(0.3));
    assert_eq!(m["config"]["seed"].as_u64(), Some(7));
    assert_eq!(m["config"]["t_grid"].as_array().unwrap().len(), 3);
    assert!(m["config"]["shots"].is_null());
}

#[test]
fn unknown_config_field_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"bogus": 1}"#).unwrap();
    let o = emachine(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bogus"));
}

#[test]
fn ambiguity_from_csv_matches_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let o = sweep_into(dir.path(), &["--exact", "--t-grid", "1,2,4"]);
    assert_eq!(o.status.code(), Some(0));
    let input = dir.path().join("sweep.csv");
    let o = emachine(&["ambiguity", "--input", input.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let written = std::fs::read_to_string(dir.path().join("ambiguity.csv")).unwrap();
    let theory: Vec<&str> = written
        .lines()
        .filter(|l| !l.starts_with("m,") && !l.starts_with("s,"))
        .collect();
    let printed = stdout(&o);
    assert_eq!(printed.lines().collect::<Vec<_>>(), theory);
}

#[test]
fn missing_input_is_usage_error() {
    let o = emachine(&["ambiguity", "--input", "/nonexistent/sweep.csv"]);
    assert_eq!(o.status.code(), Some(1));
}
