use std::path::Path;
use std::process::Command;

fn thinflow(dir: &Path, config: &str, args: &[&str]) -> (i32, String) {
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, config).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_thinflow"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir)
        .args(args)
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&out.stdout).into_owned() + &String::from_utf8_lossy(&out.stderr);
    (out.status.code().unwrap(), text)
}

const SMALL: &str = r#"{"nx": 16, "ny": 17, "T_final": 0.002}"#;

#[test]
fn make_datum_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = thinflow(dir.path(), SMALL, &["make-datum"]);
    assert_eq!(code, 0);
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("datum.json")).unwrap()).unwrap();
    assert!(v["convexity_margin"].as_f64().unwrap() >= 1.8);
}

#[test]
fn bad_config_exits_with_error() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = thinflow(dir.path(), r#"{"datum": {"delta": 10.0}}"#, &["make-datum"]);
    assert_eq!(code, 2);
    assert!(text.contains("delta must be <="), "{text}");
    let (code, _) = thinflow(dir.path(), r#"{"lambda": 0.5}"#, &["sweep"]);
    assert_eq!(code, 2);
}

#[test]
fn sweep_writes_outputs_and_exit_code_follows_checks() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"nx": 32, "ny": 33, "T_final": 0.002, "monitors": {"omega_remainder": false}}"#;
    let (code, text) = thinflow(dir.path(), cfg, &["sweep"]);
    assert_eq!(code, 0, "{text}");
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert!(csv.starts_with("epsilon,t_final,err_l2,err_linf,omegaR_ratio,convexity_min,noslip_defect,cancellation\n"));
    assert_eq!(csv.lines().count(), 5);
    assert!(dir.path().join("sweep.json").exists());
    let (code, text) = thinflow(dir.path(), r#"{"nx": 32, "ny": 33, "T_final": 0.002}"#, &["sweep"]);
    assert_eq!(code, 1, "{text}");
    assert!(text.contains("FAIL omega_remainder_spread"));
}

#[test]
fn simulate_writes_run_log_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = thinflow(dir.path(), SMALL, &["simulate", "--eps", "0.05"]);
    assert_eq!(code, 0, "{text}");
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run.json")).unwrap()).unwrap();
    let samples = v["samples"].as_array().unwrap();
    assert_eq!(samples.len(), 3);
    assert!(samples[0]["omegaR_ratio"].is_null());
    assert!(samples[2]["omegaR_ratio"].is_number());
    for name in ["u", "v", "omega", "phi"] {
        assert!(dir.path().join(format!("{name}_final.csv")).exists());
        assert!(dir.path().join(format!("{name}_initial.json")).exists());
    }
}

#[test]
fn verify_corrector_writes_bound_array() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = thinflow(dir.path(), SMALL, &["verify-corrector"]);
    assert_eq!(code, 0, "{text}");
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("bounds.json")).unwrap()).unwrap();
    let arr = v.as_array().unwrap();
    assert!(arr.len() > 10);
    for b in arr {
        for key in ["inequality", "grid", "measured_C", "budget_C", "pass"] {
            assert!(!b[key].is_null(), "{key} missing");
        }
    }
}

#[test]
fn check_invariants_passes_on_small_grid() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = thinflow(dir.path(), SMALL, &["check-invariants", "--chain-grid", "reference"]);
    assert_eq!(code, 0, "{text}");
    assert!(dir.path().join("invariants.json").exists());
}
