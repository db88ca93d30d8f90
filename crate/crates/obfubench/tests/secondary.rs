//! Whole-corpus runs through the Python runner. Skipped when no interpreter
//! is available.

mod common;

use std::time::{Duration, Instant};

use obfubench::corpus::{load_manifest, validate_corpus};
use obfubench::obfuscate::Baseline;
use obfubench::pipeline::{evaluate_run, obfuscate_corpus, BatchOptions, Source};
use obfubench::pool::parallel_map;
use obfubench::sandbox::{Executor, PythonSandbox};
use obfubench_core::{build_metric_record, ObfuscationRun, RecordStatus, Regime};

const WORKERS: usize = 4;

#[test]
fn corpus_identity() {
    let Some(py) = common::python() else {
        eprintln!("skipping: no Python interpreter");
        return;
    };
    let corpus = load_manifest(&common::dataset()).unwrap();
    let sandbox = PythonSandbox::new(py);
    let report = validate_corpus(&corpus, &sandbox, WORKERS).unwrap();
    let invalid: Vec<_> = report.functions.iter().filter(|f| !f.is_valid()).collect();
    assert!(invalid.is_empty(), "{invalid:#?}");
    assert_eq!(report.valid_count(), 30);
    assert!(report.shape_notes.is_empty(), "{:?}", report.shape_notes);

    let pass: Vec<f64> = parallel_map(&corpus.functions, WORKERS, |f| {
        let run = ObfuscationRun {
            function_id: f.id.clone(),
            model_id: "identity".into(),
            regime: Regime::ZeroShot,
            rendered_prompt: String::new(),
            raw_response: f.source.text.clone(),
            extracted_source: Some(f.source.clone()),
            cache_key: String::new(),
            endpoint: String::new(),
            temperature: 0.0,
            seed: None,
        };
        let report = sandbox
            .run_differential(&f.id, &f.source, &f.source, &f.entry, &f.entry, &f.cases)
            .unwrap();
        let m = build_metric_record(f, &run, &report).unwrap();
        assert_eq!(m.semantic_elasticity, 0.0, "{}", f.id);
        m.pass_rate
    });
    assert!(pass.iter().all(|p| *p == 1.0), "{pass:?}");
}

#[test]
fn baseline_preservation() {
    let Some(py) = common::python() else {
        eprintln!("skipping: no Python interpreter");
        return;
    };
    let start = Instant::now();
    let corpus = load_manifest(&common::dataset()).unwrap();
    let sandbox = PythonSandbox::new(py);
    for baseline in [Baseline::Rename, Baseline::Wrap] {
        let out = tempfile::tempdir().unwrap();
        let source = Source::Baseline { baseline, seed: 7 };
        let opts = BatchOptions {
            workers: WORKERS,
            force: false,
        };
        let run = obfuscate_corpus(&corpus, &source, out.path(), opts).unwrap();
        let metrics = evaluate_run(&corpus, &run, &sandbox, WORKERS).unwrap();
        assert_eq!(metrics.len(), 30);
        for m in &metrics {
            assert_eq!(m.status, RecordStatus::Ok, "{baseline:?} {}", m.function_id);
            assert_eq!(m.pass_rate, 1.0, "{baseline:?} {}", m.function_id);
            match baseline {
                Baseline::Rename => {
                    assert_eq!(m.expansion, Some(1.0), "{}", m.function_id);
                    assert_eq!(m.cc_delta, Some(0), "{}", m.function_id);
                    assert!(m.entropy_delta.unwrap().abs() < 1e-12, "{}", m.function_id);
                }
                Baseline::Wrap => assert!(m.expansion.unwrap() > 1.0, "{}", m.function_id),
            }
        }
    }
    assert!(start.elapsed() < Duration::from_secs(180), "took {:?}", start.elapsed());
}
