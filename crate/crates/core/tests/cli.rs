//! Command-line contract: reports, exit codes and error messages.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const TASKS: &[&str] = &[
    "generate",
    "detect-embed",
    "detect-sequence",
    "social-embed",
    "credibility",
    "factcheck",
    "stance",
    "provenance",
    "leaders",
    "estimate-audience",
    "block",
    "campaign",
];

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_misinfo-netkit"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn schema() -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schema/report.schema.json");
    let text = std::fs::read_to_string(&path).expect("schema is published");
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).expect("schema compiles")
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn out_dir(root: &Path, name: &str) -> PathBuf {
    root.join(name)
}

#[test]
fn every_task_report_validates() {
    let tmp = tempfile::tempdir().unwrap();
    let validator = schema();
    for task in TASKS {
        let dir = out_dir(tmp.path(), task);
        let o = run(&[task, "--seed", "3", "--out", dir.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{task}: {}", String::from_utf8_lossy(&o.stderr));
        let r = report(&dir);
        let errors: Vec<String> = validator.iter_errors(&r).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{task}: {errors:?}");
        assert_eq!(r["task"], *task);
        for a in r["artifacts"].as_array().unwrap() {
            assert!(dir.join(a.as_str().unwrap()).is_file(), "{task}: missing artifact {a}");
        }
    }
}

#[test]
fn detect_embed_reports_detection_metrics() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["detect-embed", "--seed", "1", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let m = &report(tmp.path())["metrics"];
    for key in ["accuracy", "precision", "recall", "f1"] {
        let v = m[key].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&v), "{key} = {v}");
    }
}

#[test]
fn csv_format_writes_key_value_report() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["leaders", "--format", "csv", "--seed", "2", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(tmp.path().join("report.csv")).unwrap();
    assert!(text.starts_with("key,value\n"), "{text}");
    assert!(text.contains("task,leaders"));
    assert!(!tmp.path().join("report.json").exists());
}

#[test]
fn unknown_task_is_a_validation_error() {
    let o = run(&["summon-oracle", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_config_names_the_path() {
    let o = run(&["stance", "--config", "/nonexistent/cfg.json", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/cfg.json"));
}

#[test]
fn missing_input_file_names_the_path() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.json");
    std::fs::write(&cfg, r#"{"input": "data/absent.json"}"#).unwrap();
    let o = run(&["credibility", "--config", cfg.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("absent.json"), "{err}");
    assert!(!tmp.path().join("o").exists());
}

#[test]
fn unknown_config_field_is_named() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.json");
    std::fs::write(&cfg, r#"{"stance": {"max_rounds": 10, "shrinkage": 0.3}}"#).unwrap();
    let o = run(&["stance", "--config", cfg.to_str().unwrap(), "--seed", "1", "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("shrinkage"));
}

#[test]
fn stochastic_task_without_seed_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["campaign", "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));
}

#[test]
fn mismatched_config_task_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.json");
    std::fs::write(&cfg, r#"{"task": "leaders"}"#).unwrap();
    let o = run(&["block", "--config", cfg.to_str().unwrap(), "--seed", "1", "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn non_convergence_exits_three_with_report() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.json");
    std::fs::write(&cfg, r#"{"credibility": {"max_iters": 1, "tolerance": 1e-15}}"#).unwrap();
    let dir = tmp.path().join("o");
    let o = run(&["credibility", "--config", cfg.to_str().unwrap(), "--seed", "1", "--out", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(report(&dir)["converged"], false);
}

#[test]
fn bad_thread_count_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["leaders", "--seed", "1", "--out", tmp.path().to_str().unwrap()])
        .env("MISINFO_NETKIT_THREADS", "lots")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("MISINFO_NETKIT_THREADS"));
}

#[test]
fn config_seed_is_used_and_cli_seed_wins() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.json");
    std::fs::write(&cfg, r#"{"seed": 11}"#).unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert_eq!(run(&["stance", "--config", cfg.to_str().unwrap(), "--out", a.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(
        run(&["stance", "--config", cfg.to_str().unwrap(), "--seed", "12", "--out", b.to_str().unwrap()]).status.code(),
        Some(0)
    );
    assert_eq!(report(&a)["seed"], 11);
    assert_eq!(report(&b)["seed"], 12);
}

#[test]
fn generated_bundle_feeds_later_tasks() {
    let tmp = tempfile::tempdir().unwrap();
    let gen = tmp.path().join("gen");
    assert_eq!(run(&["generate", "--seed", "5", "--out", gen.to_str().unwrap()]).status.code(), Some(0));
    let artifacts = report(&gen)["artifacts"].clone();
    let bundle = artifacts.as_array().unwrap().iter().map(|a| a.as_str().unwrap()).find(|a| a.ends_with(".json")).unwrap().to_string();
    let cfg = tmp.path().join("c.json");
    std::fs::write(&cfg, format!(r#"{{"input": "gen/{bundle}"}}"#)).unwrap();
    let o = run(&["leaders", "--config", cfg.to_str().unwrap(), "--out", tmp.path().join("l").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}
