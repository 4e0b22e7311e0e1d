use thinflow::Error;
use thinflow_harness::ExperimentConfig;

fn rejects(mutate: impl FnOnce(&mut ExperimentConfig), needle: &str) {
    let mut cfg = ExperimentConfig::default();
    mutate(&mut cfg);
    match cfg.validate() {
        Err(Error::Config(msg)) => assert!(msg.contains(needle), "{msg}"),
        other => panic!("expected a config error mentioning {needle:?}, got {other:?}"),
    }
}

#[test]
fn defaults_are_valid() {
    let cfg = ExperimentConfig::default();
    cfg.validate().unwrap();
    assert_eq!(cfg.eps_list, vec![0.1, 0.05, 0.025, 0.0125]);
    assert_eq!((cfg.nx, cfg.ny), (64, 65));
    assert_eq!(cfg.steps(), 500);
}

#[test]
fn contract_cases() {
    rejects(|c| c.lambda = 0.5, "lambda");
    rejects(|c| c.t_final = 0.07, "T_final");
    rejects(|c| c.dt = 3e-4, "multiple");
    rejects(|c| c.eps_list = vec![0.1, 0.05, 0.025], "at least 4");
    rejects(|c| c.eps_list = vec![0.1, 0.05, 0.05, 0.01], "decreasing");
    rejects(|c| c.eps_list = vec![2.0, 0.5, 0.25, 0.1], "(0, 1]");
    rejects(|c| c.nx = 63, "nx");
    rejects(|c| c.ny = 5, "ny");
    rejects(|c| c.datum.ell = 40, "ell");
    rejects(|c| c.datum.c0_floor = 1.5, "c0_floor");
    rejects(|c| c.monitor_stride = 0, "monitor_stride");
}

#[test]
fn json_round_trip_and_unknown_fields() {
    let cfg = ExperimentConfig::default();
    let text = serde_json::to_string(&cfg).unwrap();
    assert!(text.contains("\"T_final\""));
    let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(back, cfg);
    let partial: ExperimentConfig = serde_json::from_str(r#"{"nx": 32, "datum": {"delta": 0.0}}"#).unwrap();
    assert_eq!(partial.nx, 32);
    assert_eq!(partial.datum.ell, 1);
    assert!(serde_json::from_str::<ExperimentConfig>(r#"{"nxx": 32}"#).is_err());
}

#[test]
fn from_path_validates() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.json");
    std::fs::write(&p, r#"{"lambda": 0.5}"#).unwrap();
    assert!(matches!(ExperimentConfig::from_path(&p), Err(Error::Config(_))));
    std::fs::write(&p, r#"{"lambda": 4.0}"#).unwrap();
    assert_eq!(ExperimentConfig::from_path(&p).unwrap().lambda, 4.0);
}
