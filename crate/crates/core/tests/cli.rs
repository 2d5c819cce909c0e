use std::path::PathBuf;
use std::process::{Command, Output};

use covertsim::expcli::{replay_trial, ExperimentConfig, ExperimentReport, TrialRecord};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_covertsim"))
}

fn scratch(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("covertsim-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn lists_every_scenario() {
    let o = run(&["list-scenarios"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for s in covertsim::expcli::Scenario::ALL {
        assert!(text.contains(s.name()), "{}", s.name());
    }
}

#[test]
fn run_writes_report_and_csv_with_flag_overrides() {
    let dir = scratch("run");
    let cfg = dir.join("cfg.json");
    std::fs::write(&cfg, r#"{"scenario":"parity","n":6,"trials":50,"seed":1}"#).unwrap();
    let out = dir.join("out");
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--trials", "7", "--seed", "9", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: ExperimentReport = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report.config.trials, 7);
    assert_eq!(report.config.seed, 9);
    assert_eq!(report.trials.len(), 7);
    let csv = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(csv.starts_with("kind,name,value"));
    assert!(csv.contains("rate,success,"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn exit_codes() {
    let dir = scratch("exit");
    let out = dir.to_str().unwrap();
    // config errors
    assert_eq!(run(&["run", "--scenario", "teleport", "--out", out]).status.code(), Some(2));
    assert_eq!(run(&["run", "--scenario", "parity", "--n", "2", "--out", out]).status.code(), Some(2));
    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"scenario":"acquire-uni","adversary":{"kind":"swap-attack"}}"#).unwrap();
    assert_eq!(run(&["run", "--config", bad.to_str().unwrap(), "--out", out]).status.code(), Some(2));
    assert_eq!(run(&["run", "--scenario", "parity", "--assert", "success=1", "--out", out]).status.code(), Some(2));
    // the adversary never learns s at n = 10 with a handful of examples
    let fail = run(&["run", "--scenario", "parity", "--n", "10", "--trials", "20", "--assert", "adversary_success>=0.9", "--out", out]);
    assert_eq!(fail.status.code(), Some(3));
    assert!(stdout(&fail).contains("FAIL"));
    let ok = run(&["run", "--scenario", "parity", "--trials", "20", "--assert", "success>=0.9", "--out", out]);
    assert_eq!(ok.status.code(), Some(0));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn replay_reproduces_a_trial_bit_exactly() {
    let dir = scratch("replay");
    let out = dir.join("out");
    let o = run(&["run", "--scenario", "simon", "--n", "3", "--trials", "4", "--seed", "5", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let report: ExperimentReport = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let o = run(&["replay", "--scenario", "simon", "--n", "3", "--seed", "5", "--trial", "3"]);
    assert!(o.status.success());
    let rec: TrialRecord = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rec, report.trials[3]);
    assert_eq!(replay_trial(&report.config, 3).unwrap(), rec);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn resources_table_and_json() {
    let o = run(&["resources", "--scenario", "acquire-af", "--m", "2", "--delta-leak", "0.5"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("0.437500"));
    let o = run(&["resources", "--scenario", "forrelation", "--delta", "0.05", "--json"]);
    let rows: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let ell = rows.as_array().unwrap().iter().find(|r| r["quantity"] == "rounds ell").unwrap();
    assert_eq!(ell["value"], 17.0);
}

#[test]
fn shipped_configs_load() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut seen = 0;
    for sub in ["acceptance", "examples"] {
        let Ok(rd) = std::fs::read_dir(dir.join(sub)) else { continue };
        for e in rd {
            let p = e.unwrap().path();
            if p.extension().is_some_and(|x| x == "json") {
                ExperimentConfig::load(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
                seen += 1;
            }
        }
    }
    assert!(seen >= 9);
}
