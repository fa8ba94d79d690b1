use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn manifest() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn config(name: &str) -> String {
    manifest().join("configs").join(name).to_string_lossy().into_owned()
}

struct Run {
    code: i32,
    json: Value,
    text: String,
    dir: PathBuf,
}

fn run(args: &[&str], out: &Path) -> Run {
    let status = Command::new(env!("CARGO_BIN_EXE_quasirelax")).args(args).arg("--out").arg(out).status().unwrap();
    let text = std::fs::read_to_string(out.join("result.json")).unwrap();
    Run { code: status.code().unwrap(), json: serde_json::from_str(&text).unwrap(), text, dir: out.to_path_buf() }
}

fn validate(v: &Value) {
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(manifest().join("schema/result.schema.json")).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(v).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "schema violations: {errors:#?}");
}

fn listing(dir: &Path) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap()))
        .collect();
    out.sort();
    out
}

fn fast_runs() -> Vec<(&'static str, Vec<String>)> {
    let fixture = manifest().join("fixtures/oracle.json");
    vec![
        ("envelope", vec!["envelope".into(), "--config".into(), config("ks.toml"), "--override".into(), "mesh_k=4".into()]),
        ("reduce", vec!["reduce".into(), "--config".into(), config("neo-reduce.toml")]),
        (
            "membrane",
            vec!["membrane".into(), "--config".into(), config("neo-membrane.toml"), "--override".into(), "resolution=3".into()],
        ),
        (
            "gamma-probe",
            ["gamma-probe", "--config", &config("quad.toml"), "--override", "cells=4", "--override", "eps=0.2,0.1", "--override", "kappas=0,1", "--override", "restarts=1", "--override", "iters=20"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        ),
        ("check", vec!["check".into(), "--config".into(), config("neo.toml")]),
        ("oracle-fixtures", vec!["oracle-fixtures".into(), "--override".into(), format!("compare=\"{}\"", fixture.display())]),
    ]
}

#[test]
fn every_command_is_deterministic_and_valid() {
    let tmp = tempfile::tempdir().unwrap();
    for (name, args) in fast_runs() {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let a = run(&args, &tmp.path().join(format!("{name}-a")));
        let b = run(&args, &tmp.path().join(format!("{name}-b")));
        assert_eq!(a.code, 0, "{name}: {}", a.text);
        assert_eq!(a.json["status"], "ok");
        assert_eq!(a.json["command"], name);
        validate(&a.json);
        assert_eq!(listing(&a.dir), listing(&b.dir), "{name}: outputs differ between runs");
        for f in ["result.json", "report.txt", "effective-config.toml"] {
            assert!(a.dir.join(f).exists(), "{name}: missing {f}");
        }
    }
}

#[test]
fn effective_config_reproduces_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let first = run(&["envelope", "--config", &config("ks.toml"), "--override", "mesh_k=4", "--override", "query=0.5,0,0,0"], &tmp.path().join("a"));
    let eff = first.dir.join("effective-config.toml").to_string_lossy().into_owned();
    let second = run(&["envelope", "--config", &eff], &tmp.path().join("b"));
    assert_eq!(first.text, second.text);
}

#[test]
fn unknown_keys_fail_with_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let r = run(&["envelope", "--config", &config("ks.toml"), "--override", "tolerance=1e-3"], &tmp.path().join("a"));
    assert_eq!(r.code, 1);
    assert_eq!(r.json["status"], "error");
    assert_eq!(r.json["error"]["kind"], "config");
    validate(&r.json);

    let cfg = tmp.path().join("bad.toml");
    std::fs::write(&cfg, "command = \"reduce\"\n[reduce]\nxi = [1, 0, 0, 1, 0, 0]\nzeta = [0, 0, 1]\n").unwrap();
    let r = run(&["reduce", "--config", &cfg.to_string_lossy()], &tmp.path().join("b"));
    assert_eq!(r.code, 1);
    validate(&r.json);
}

#[test]
fn failed_predicate_exits_two_with_witness() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("zero.toml");
    std::fs::write(&cfg, "command = \"check\"\n[integrand]\nexpr = \"0\"\ndims = [2, 2]\n[check]\npredicates = [\"coercivity\"]\nsamples = 200\n").unwrap();
    let r = run(&["check", "--config", &cfg.to_string_lossy()], &tmp.path().join("a"));
    assert_eq!(r.code, 2);
    assert_eq!(r.json["status"], "predicate-failed");
    assert_eq!(r.json["error"]["kind"], "predicate");
    assert!(r.json["error"]["witness"].is_object());
    validate(&r.json);
}

#[test]
fn parallel_columns_give_infinite_fiber() {
    let tmp = tempfile::tempdir().unwrap();
    let r = run(&["reduce", "--config", &config("neo-reduce.toml"), "--override", "xi=1,2,0.5,1,0,0"], &tmp.path().join("a"));
    assert_eq!(r.code, 0);
    assert_eq!(r.json["value"], "inf");
    assert!(r.json["zeta"].is_null());
    validate(&r.json);
}

#[test]
fn thread_count_does_not_change_results() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["envelope", "--config", &config("ks.toml"), "--override", "mesh_k=4"];
    let one = run(&[&args[..], &["--threads", "1"]].concat(), &tmp.path().join("a"));
    let many = run(&[&args[..], &["--threads", "4"]].concat(), &tmp.path().join("b"));
    assert_eq!(one.text, many.text);
}
