use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lab")).args(args).output().expect("lab runs")
}

fn config(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "configs", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL_SELECTION: [&str; 6] = [
    "--set",
    "ensemble.n_mc=400",
    "--set",
    "sweep.levels=[0,1]",
    "--set",
    "sweep.sensitivity=false",
];

fn run_selection(out: &Path, extra: &[&str]) -> Output {
    let cfg = config("theorem_C.toml");
    let out = out.to_string_lossy();
    let mut args = vec!["run", "theorem_C", "--config", &cfg, "--out", &out];
    args.extend_from_slice(&SMALL_SELECTION);
    args.extend_from_slice(extra);
    lab(&args)
}

#[test]
fn strict_reference_validates() {
    let o = lab(&["validate", "--config", &config("strict.toml")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("overall: pass"));
}

#[test]
fn every_shipped_config_validates() {
    for name in ["theorem_A.toml", "theorem_B.toml", "theorem_C.toml", "regularity.toml"] {
        let o = lab(&["validate", "--config", &config(name)]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stderr(&o));
    }
}

#[test]
fn unknown_key_is_rejected_with_the_valid_keys() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "preset = \"desk_small\"\n[grid]\nnodes = 64\n").unwrap();
    let o = lab(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("grid.nodes"), "{err}");
    assert!(err.contains("grid.collar_points") && err.contains("sweep.levels"), "{err}");
}

#[test]
fn unknown_override_key_is_rejected() {
    let o = lab(&["validate", "--config", &config("strict.toml"), "--set", "grid.foo=1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("valid keys"));
}

#[test]
fn empty_cascade_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    let cfg = config("theorem_A.toml");
    let o = lab(&["run", "theorem_A", "--config", &cfg, "--out", &out, "--set", "schedule.q_max=0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("q_max = 0"), "{}", stderr(&o));
}

#[test]
fn underresolved_grid_is_a_resolution_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    let cfg = config("theorem_A.toml");
    let o = lab(&["run", "theorem_A", "--config", &cfg, "--out", &out, "--set", "grid.n=16"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("resolution"), "{}", stderr(&o));
}

#[test]
fn missing_config_prints_usage() {
    let o = lab(&["validate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage"));
    let o = lab(&["run"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unknown_scenario_is_rejected() {
    let o = lab(&["run", "theorem_Z", "--config", &config("theorem_C.toml")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("theorem_C"));
}

#[test]
fn help_exits_cleanly() {
    let o = lab(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("validate"));
}

#[test]
fn selection_run_alternates_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c");
    let o = run_selection(&out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    for f in ["report.json", "config.toml", "meta.json", "pairing-vs-sigma.csv", "ledger_q0.csv"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let first = std::fs::read(out.join("report.json")).unwrap();
    let report: serde_json::Value = serde_json::from_slice(&first).unwrap();
    let pairing = |label: &str| {
        report["sweep"]
            .as_array()
            .unwrap()
            .iter()
            .find(|p| p["label"] == label)
            .map(|p| p["metrics"]["pairing"].as_f64().unwrap())
            .unwrap()
    };
    assert!(pairing("q0") * pairing("q1") < 0.0);

    let again = run_selection(&out, &[]);
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(first, std::fs::read(out.join("report.json")).unwrap());

    let seeded = run_selection(&out, &["--seed", "7"]);
    assert_eq!(seeded.status.code(), Some(0));
    assert_ne!(first, std::fs::read(out.join("report.json")).unwrap());
}

#[test]
fn failed_verdict_exits_two_and_report_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c");
    let o = run_selection(&out, &["--set", "thresholds.min_pairing=0.9"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("[FAIL] q0_pairing_magnitude"));
    let r = lab(&["report", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
    assert!(stdout(&r).contains("overall: FAIL"));
}

#[test]
fn report_of_missing_directory_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(&["report", dir.path().join("nothing").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn schedule_is_json_for_both_modes() {
    for name in ["strict.toml", "theorem_A.toml"] {
        let o = lab(&["schedule", "--config", &config(name)]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert!(v["schedule"].is_object());
        assert!(v["diffusivity"]["kappa"].is_array());
    }
}

#[test]
fn field_dump_writes_both_components() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    let cfg = config("theorem_A.toml");
    let o = lab(&["field", "dump", "--config", &cfg, "--out", &out, "--n", "32", "--time", "0.1", "--time", "0.9"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for stem in ["u1_t0", "u2_t0", "u1_t1", "u2_t1"] {
        let bytes = std::fs::read(dir.path().join(format!("{stem}.bin"))).unwrap();
        assert_eq!(bytes.len(), 32 * 32 * 8);
        let header: serde_json::Value =
            serde_json::from_slice(&std::fs::read(dir.path().join(format!("{stem}.json"))).unwrap()).unwrap();
        assert_eq!(header["N"], 32);
    }
}

#[test]
fn field_dump_outside_the_time_interval_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    let o = lab(&["field", "dump", "--config", &config("theorem_A.toml"), "--out", &out, "--time", "3.5"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn field_norms_report_levels() {
    let o = lab(&["field", "norms", "--config", &config("theorem_A.toml")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(!v["segments"].as_array().unwrap().is_empty());
}
