use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_persuasion-net");

const CONFIG: &str = r#"{
  "model": {
    "gamma_h": 0.5, "mu_h1": 0.6, "mu_l1": 0.4, "mu_s1": 0.5, "q": 1.0,
    "f_h": [{"lambda": 1.7320508075688772, "prob": 1.0}],
    "f_l": [{"lambda": 1.7320508075688772, "prob": 1.0}],
    "payoff": {"kind": "linear"}
  },
  "engine": {"n": 5000, "reps": 3, "pilot_reps": 1, "grid_n": 21}
}"#;

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("PERSUASION_NET_THREADS")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("config.json");
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn limits_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let out = dir.path().join("out");
    let o = run(&out, &["limits", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("limits.csv")).unwrap();
    assert!(csv.lines().next().unwrap().starts_with("type,d,"));
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("limits.json")).unwrap()).unwrap();
    let c_hat = json["c_hat"].as_f64().unwrap();
    assert!((c_hat - 0.291405821933).abs() < 1e-9, "{c_hat}");
    assert!(out.join("config.resolved.json").exists());
}

#[test]
fn config_errors_exit_one_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let bad = CONFIG.replace("\"q\": 1.0,", "\"q\": 1.0, \"qq\": 2,");
    let cfg = write_config(dir.path(), &bad);
    let o = run(&dir.path().join("out"), &["limits", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3"), "{err}");

    let o = run(&dir.path().join("out"), &["limits", "--config", "/nonexistent/config.json"]);
    assert_eq!(o.status.code(), Some(1));

    let invalid = CONFIG.replace("\"gamma_h\": 0.5", "\"gamma_h\": 1.5");
    let cfg = write_config(dir.path(), &invalid);
    let o = run(&dir.path().join("out"), &["limits", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unknown_scenario_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["scenario", "nope"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown scenario"));
}

#[test]
fn bad_thread_env_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(BIN)
        .arg("--out")
        .arg(dir.path())
        .arg("selftest")
        .env("PERSUASION_NET_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn voting_scenario_passes_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["--threads", "2", "scenario", "voting"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("voting: pass"));
    let r: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("scenario_voting.json")).unwrap()).unwrap();
    assert_eq!(r["verdict"], true);
    assert_eq!(r["network_value"].as_f64(), Some(1.0));
    let report = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert_eq!(report.lines().count(), 2);
    assert!(report.lines().nth(1).unwrap().starts_with("voting,pass,"));
}

#[test]
fn compare_and_optimize_on_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let out = dir.path().join("out");
    let o = run(&out, &["compare", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("compare.json")).unwrap()).unwrap();
    assert_eq!(r["applicable"], "baseline");
    assert_eq!(r["verdict"], true);

    let o = run(&out, &["optimize", "--config", &cfg, "--public"]);
    assert_eq!(o.status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("optimum.json")).unwrap()).unwrap();
    assert!(r["network"].is_null());
    assert!(r["public"]["value"].as_f64().unwrap() > 0.5);
}

#[test]
fn simulate_and_sample_write_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let with_strategy = CONFIG.replace(
        "\"engine\"",
        r#""strategy": {"signals": [{"label": "good", "pi1": 0.6, "pi0": 0.35, "seeding": "on_l1"}]},
  "engine""#,
    );
    let cfg = write_config(dir.path(), &with_strategy);
    let out = dir.path().join("out");
    let o = run(&out, &["simulate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let sim = std::fs::read_to_string(out.join("sim.csv")).unwrap();
    assert_eq!(sim.lines().next().unwrap(), "rep,state,signal,n_observed,fraction_action1,payoff");
    assert_eq!(sim.lines().count(), 4);
    let obs = std::fs::read_to_string(out.join("obsfrac.csv")).unwrap();
    assert_eq!(obs.lines().next().unwrap(), "type,d,signal,empirical_fraction,zeta_prediction");

    let o = run(&out, &["sample", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0));
    assert!(out.join("network.edges").exists() && out.join("network.nodes").exists());
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["selftest"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(dir.path().join("selftest.json").exists());
}
