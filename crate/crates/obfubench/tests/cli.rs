//! The `obfubench` binary: subcommands, files and exit codes.

mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use obfubench::corpus::load_manifest;
use obfubench::obfuscate::templates::default_template;
use obfubench::obfuscate::{cache_key, canonical_request, ResponseCache};
use obfubench::report::run_record::response_path;
use obfubench::report::{read_metrics_csv, read_run};
use obfubench_core::prompt::render_prompt;
use obfubench_core::Regime;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_obfubench"));
    c.env_remove("OBFUBENCH_API_KEY_GPT_4_TURBO");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn dataset() -> PathBuf {
    common::dataset()
}

fn write_small_dataset(dir: &Path, literal: &str) {
    fs::create_dir_all(dir.join("functions")).unwrap();
    fs::write(dir.join("functions/twice.py"), "def twice(x):\n    return 2 * x\n").unwrap();
    let mut cases = vec![r#"{"args":["1"]}"#.to_string(); 7];
    cases.push(format!(r#"{{"args":[{}]}}"#, serde_json::to_string(literal).unwrap()));
    fs::write(
        dir.join("manifest.json"),
        format!(
            r#"{{"version":1,"functions":[{{"id":"twice","category":"mathematical","entry":"twice","source":"functions/twice.py","cases":[{}]}}]}}"#,
            cases.join(",")
        ),
    )
    .unwrap();
}

#[test]
fn validate_reference_dataset() {
    let Some(py) = common::python() else { return };
    let o = bin().args(["validate", "--dataset", s(&dataset())]).env("OBFUBENCH_PYTHON", py).output().unwrap();
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    assert!(text(&o.stdout).contains("30/30 valid"));
}

#[test]
fn validate_reports_broken_literal() {
    let dir = tempfile::tempdir().unwrap();
    write_small_dataset(dir.path(), "len([1])");
    let o = run(&["validate", "--dataset", s(dir.path())]);
    assert_eq!(code(&o), 1);
    let out = text(&o.stdout);
    assert!(out.contains("invalid twice"), "{out}");
    assert!(out.contains("not a literal"), "{out}");
}

#[test]
fn missing_manifest_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["validate", "--dataset", s(dir.path())]);
    assert_eq!(code(&o), 2);
    assert!(text(&o.stderr).contains("manifest.json"), "{}", text(&o.stderr));
    let o = run(&["validate", "--config", s(&dir.path().join("absent.json"))]);
    assert_eq!(code(&o), 2);
}

#[test]
fn baseline_obfuscation_is_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for out in [a.path(), b.path()] {
        let o = run(&[
            "obfuscate", "--baseline", "rename", "--seed", "7", "--dataset", s(&dataset()), "--out", s(out),
        ]);
        assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    }
    let (ra, rb) = (a.path().join("baseline-rename__zero_shot"), b.path().join("baseline-rename__zero_shot"));
    let record = read_run(&ra).unwrap();
    assert_eq!(record.functions.len(), 30);
    assert!(record.functions.iter().all(|f| f.failure.is_none() && f.run.extracted_source.is_some()));
    assert_eq!(fs::read(ra.join("run.json")).unwrap(), fs::read(rb.join("run.json")).unwrap());
    for id in &record.function_ids {
        assert_eq!(fs::read(response_path(&ra, id)).unwrap(), fs::read(response_path(&rb, id)).unwrap());
    }
}

fn config(dir: &Path, cache: &Path) -> PathBuf {
    let path = dir.join("config.json");
    let body = serde_json::json!({
        "dataset": dataset(),
        "cache_dir": cache,
        "out_dir": dir.join("runs"),
        "regimes": ["zero_shot", "few_shot"],
        "providers": [{
            "name": "gpt-4-turbo",
            "kind": "openai",
            "base_url": "http://127.0.0.1:9/v1",
            "model": "gpt-4-turbo",
            "seed": 3
        }]
    });
    fs::write(&path, body.to_string()).unwrap();
    path
}

#[test]
fn cold_cache_offline_exits_with_cache_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), &dir.path().join("cache"));
    let o = run(&["obfuscate", "--config", s(&cfg), "--model", "gpt-4-turbo", "--pet", "few-shot", "--offline"]);
    assert_eq!(code(&o), 3, "{}", text(&o.stderr));
    let record = read_run(&dir.path().join("runs/gpt-4-turbo__few_shot")).unwrap();
    assert_eq!(record.functions.len(), 30);
    for f in &record.functions {
        let failure = f.failure.as_ref().unwrap();
        assert_eq!(serde_json::to_value(failure.kind).unwrap(), "cache_miss");
        assert!(!f.run.rendered_prompt.is_empty());
    }
}

#[test]
fn warm_cache_offline_replays_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cache_dir = dir.path().join("cache");
    let cfg_path = config(dir.path(), &cache_dir);
    let cfg = obfubench::config::RunConfig::load(&cfg_path).unwrap();
    let corpus = load_manifest(&dataset()).unwrap();
    let cache = ResponseCache::new(&cache_dir);
    let template = default_template(Regime::FewShot, 2);
    let mut provider = cfg.providers[0].clone();
    provider.seed = Some(3);
    for f in &corpus.functions {
        let request = canonical_request(&provider, &render_prompt(&template, f).unwrap());
        let answer = format!("```python\n{}```\n", f.source.text);
        cache.put(&cache_key(&request), request, &answer).unwrap();
    }
    let run_dir = dir.path().join("runs/gpt-4-turbo__few_shot");
    let mut snapshots = Vec::new();
    for force in [false, true] {
        let mut args = vec!["obfuscate", "--config", s(&cfg_path), "--model", "gpt-4-turbo", "--pet", "few_shot", "--offline"];
        if force {
            args.push("--force");
        }
        let o = run(&args);
        assert_eq!(code(&o), 0, "{}", text(&o.stderr));
        snapshots.push(fs::read(run_dir.join("run.json")).unwrap());
    }
    assert_eq!(snapshots[0], snapshots[1]);
    let record = read_run(&run_dir).unwrap();
    assert!(record.functions.iter().all(|f| f.failure.is_none()));
    assert!(record.recorded_at.is_some());
    assert_eq!(record.seed, Some(3));
}

#[test]
fn unknown_model_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), &dir.path().join("cache"));
    let o = run(&["obfuscate", "--config", s(&cfg), "--model", "nobody"]);
    assert_eq!(code(&o), 2);
}

fn evaluate_baseline(out: &Path, py: &str, baseline: &str) -> PathBuf {
    let o = run(&[
        "obfuscate", "--baseline", baseline, "--seed", "11", "--dataset", s(&dataset()), "--out", s(out),
    ]);
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    let run_dir = out.join(format!("baseline-{baseline}__zero_shot"));
    let o = bin()
        .args(["evaluate", s(&run_dir), "--dataset", s(&dataset()), "--workers", "4"])
        .env("OBFUBENCH_PYTHON", py)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    run_dir.join("metrics.csv")
}

#[test]
fn evaluate_rename_baseline() {
    let Some(py) = common::python() else { return };
    let out = tempfile::tempdir().unwrap();
    let metrics = read_metrics_csv(&evaluate_baseline(out.path(), &py, "rename")).unwrap();
    assert_eq!(metrics.len(), 30);
    for m in metrics {
        assert_eq!((m.pass_rate, m.expansion, m.cc_delta), (1.0, Some(1.0), Some(0)), "{}", m.function_id);
        assert_eq!(m.entropy_delta, Some(0.0));
        assert_eq!(m.semantic_elasticity, 0.0);
    }
}

#[test]
fn unparsable_response_scores_load_error() {
    let Some(py) = common::python() else { return };
    let out = tempfile::tempdir().unwrap();
    let csv = evaluate_baseline(out.path(), &py, "rename");
    let run_dir = csv.parent().unwrap();
    let path = response_path(run_dir, "gcd");
    let mut stored: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    stored["extracted_source"]["text"] = "def gcd(a, b:\n    return a\n".into();
    fs::write(&path, stored.to_string()).unwrap();
    let o = bin().args(["evaluate", s(run_dir), "--dataset", s(&dataset())]).env("OBFUBENCH_PYTHON", &py).output().unwrap();
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    let metrics = read_metrics_csv(&csv).unwrap();
    let gcd = metrics.iter().find(|m| m.function_id == "gcd").unwrap();
    assert_eq!((gcd.status.as_str(), gcd.pass_rate), ("load_error", 0.0));
    assert!(metrics.iter().filter(|m| m.function_id != "gcd").all(|m| m.pass_rate == 1.0));
}

#[test]
fn end_to_end_is_deterministic() {
    let Some(py) = common::python() else { return };
    let mut artifacts = Vec::new();
    for _ in 0..2 {
        let out = tempfile::tempdir().unwrap();
        let o = bin().args(["validate", "--dataset", s(&dataset())]).env("OBFUBENCH_PYTHON", &py).output().unwrap();
        assert_eq!(code(&o), 0);
        let csv = evaluate_baseline(out.path(), &py, "wrap");
        let summary = run(&["report", s(&csv)]);
        assert_eq!(code(&summary), 0);
        let rows: Vec<String> = fs::read_to_string(&csv)
            .unwrap()
            .lines()
            .map(|l| {
                let mut cols: Vec<&str> = l.split(',').collect();
                cols.remove(12);
                cols.join(",")
            })
            .collect();
        artifacts.push((rows, summary.stdout));
    }
    assert_eq!(artifacts[0], artifacts[1]);
}

const HEADER: &str = "function_id,category,model,pet,pass_rate,expansion_ratio,cc_original,cc_obfuscated,cc_delta,entropy_original,entropy_obfuscated,entropy_delta,time_delta_s,semantic_elasticity,status";

fn metrics_file(dir: &Path, rows: &[String]) -> PathBuf {
    let path = dir.join("metrics.csv");
    let mut body = format!("{HEADER}\n");
    for r in rows {
        body.push_str(r);
        body.push('\n');
    }
    fs::write(&path, body).unwrap();
    path
}

fn row(id: &str, category: &str, pet: &str, pass: f64, cc_delta: i64, se: f64) -> String {
    format!(
        "{id},{category},m,{pet},{pass:.6},1.500000,3,{},{cc_delta},2.000000,2.100000,0.100000,,{se:.6},ok",
        3 + cc_delta
    )
}

#[test]
fn report_with_two_regimes() {
    let dir = tempfile::tempdir().unwrap();
    let rows: Vec<String> = (0..4)
        .flat_map(|i| {
            [
                row(&format!("z{i}"), "recursive", "zero_shot", 0.25 * i as f64, -(i as i64), 0.1 * i as f64),
                row(&format!("f{i}"), "mathematical", "few_shot", 1.0 - 0.2 * i as f64, i as i64, 0.2),
            ]
        })
        .collect();
    let csv = metrics_file(dir.path(), &rows);
    let out = dir.path().join("summary.md");
    let o = run(&["report", s(&csv), "--output", s(&out)]);
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    let doc = fs::read_to_string(out).unwrap();
    assert!(doc.contains("Welch two-tailed tests"), "{doc}");
    assert!(doc.contains("- ΔCC: t = "), "{doc}");
    assert!(doc.contains("| Recursive | 37.50% | n/a |"), "{doc}");
}

#[test]
fn single_row_statistics() {
    let dir = tempfile::tempdir().unwrap();
    let csv = metrics_file(dir.path(), &[row("factorial", "mathematical", "zero_shot", 1.0, -1, 0.8)]);
    let o = run(&["report", s(&csv)]);
    assert_eq!(code(&o), 0);
    let doc = text(&o.stdout);
    assert!(doc.contains("| m | Zero-shot | 0.800 | 0.000 | 0.800 | 0.800 |"), "{doc}");
    assert!(doc.contains("Omitted: the records cover a single prompt regime"), "{doc}");
    let o = run(&["stats", s(&csv)]);
    assert_eq!(code(&o), 0);
    assert!(text(&o.stdout).starts_with("| Model | PET | n |"), "{}", text(&o.stdout));
}

#[test]
fn stats_grouped_by_category() {
    let dir = tempfile::tempdir().unwrap();
    let categories = ["data_structures", "mathematical", "recursive", "sorting_searching", "string_manipulation"];
    let rows: Vec<String> = categories
        .iter()
        .enumerate()
        .flat_map(|(i, c)| {
            ["zero_shot", "few_shot"].map(|pet| row(&format!("f{i}"), c, pet, 0.5, 0, 0.0))
        })
        .collect();
    let csv = metrics_file(dir.path(), &rows);
    let o = run(&["stats", s(&csv), "--group", "category"]);
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    let out = text(&o.stdout);
    let body: Vec<&str> = out.lines().skip(2).collect();
    assert_eq!(body.len(), 5, "{out}");
    assert!(body[0].starts_with("| Data Structure | 2 | 50.00% |"), "{out}");
}

#[test]
fn empty_metrics_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let csv = metrics_file(dir.path(), &[]);
    for sub in ["stats", "report"] {
        let o = run(&[sub, s(&csv)]);
        assert_eq!(code(&o), 4, "{sub}: {}", text(&o.stderr));
    }
    let o = run(&["report", s(&dir.path().join("missing.csv"))]);
    assert_eq!(code(&o), 2);
}
