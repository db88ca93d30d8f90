//! Batch orchestration: obfuscate a corpus into a run directory, then
//! evaluate a run against the corpus.

use std::path::Path;

use obfubench_core::prompt::PromptTemplate;
use obfubench_core::{
    build_metric_record, resolve_entry_point, CaseOutcome, DifferentialReport, FunctionSpec, MetricError,
    MetricRecord, Regime, Verdict,
};
use thiserror::Error;

use crate::corpus::Corpus;
use crate::obfuscate::{baseline_run, model_run, Baseline, FailureKind, FunctionRun, Mode, ProviderClient, ResponseCache};
use crate::pool::parallel_map;
use crate::report::run_record::{read_function_run, response_path, write_function_run, write_run};
use crate::report::{ReportError, RunRecord};
use crate::sandbox::{Executor, SandboxError};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error(transparent)]
    Sandbox(#[from] SandboxError),
    #[error("{id}: {source}")]
    Metric { id: String, source: MetricError },
    #[error("run contains {0:?}, which is not in the corpus")]
    UnknownFunction(String),
    #[error("run was recorded against manifest {run}, the corpus is {corpus}")]
    DigestMismatch { run: String, corpus: String },
}

/// Where obfuscated sources come from.
pub enum Source<'a> {
    Baseline {
        baseline: Baseline,
        seed: u64,
    },
    Model {
        client: &'a ProviderClient<'a>,
        template: &'a PromptTemplate,
        cache: &'a ResponseCache,
        mode: Mode,
    },
}

impl Source<'_> {
    fn model(&self) -> &str {
        match self {
            Self::Baseline { baseline, .. } => baseline.model_id(),
            Self::Model { client, .. } => &client.config.name,
        }
    }

    fn regime(&self) -> Regime {
        match self {
            Self::Baseline { .. } => Regime::ZeroShot,
            Self::Model { template, .. } => template.regime,
        }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            Self::Baseline { seed, .. } => Some(*seed),
            Self::Model { client, .. } => client.config.effective_seed(),
        }
    }

    fn produce(&self, spec: &FunctionSpec) -> FunctionRun {
        match self {
            Self::Baseline { baseline, seed } => baseline_run(spec, *baseline, *seed),
            Self::Model {
                client,
                template,
                cache,
                mode,
            } => model_run(spec, client, template, cache, *mode),
        }
    }

    fn header(&self, corpus: &Corpus) -> RunRecord {
        let (provider, endpoint) = match self {
            Self::Baseline { .. } => ("baseline".to_string(), String::new()),
            Self::Model { client, .. } => (
                serde_json::to_value(client.config.kind)
                    .ok()
                    .and_then(|v| v.as_str().map(String::from))
                    .unwrap_or_default(),
                client.config.base_url.clone(),
            ),
        };
        RunRecord {
            tool_version: TOOL_VERSION.into(),
            manifest_digest: corpus.digest.clone(),
            model: self.model().into(),
            provider,
            endpoint,
            regime: self.regime(),
            seed: self.seed(),
            recorded_at: None,
            function_ids: Vec::new(),
            functions: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BatchOptions {
    pub workers: usize,
    /// Regenerate responses that already exist in the run directory.
    pub force: bool,
}

/// Name of the run directory for a model and regime.
pub fn run_dir_name(model: &str, regime: Regime) -> String {
    let safe: String = model
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect();
    format!("{safe}__{}", regime.as_str())
}

fn reusable(existing: &FunctionRun, source: &Source<'_>) -> bool {
    existing.failure.is_none()
        && existing.run.model_id == source.model()
        && existing.run.regime == source.regime()
        && existing.run.seed == source.seed()
}

/// Obfuscates every corpus function into `run_dir`. Each response file is
/// written as soon as it is produced, so an interrupted batch resumes where
/// it stopped; successful responses already on disk are kept unless
/// `force` is set. Per-function failures are recorded, never raised.
pub fn obfuscate_corpus(
    corpus: &Corpus,
    source: &Source<'_>,
    run_dir: &Path,
    opts: BatchOptions,
) -> Result<RunRecord, PipelineError> {
    let results = parallel_map(&corpus.functions, opts.workers, |spec| -> Result<FunctionRun, ReportError> {
        if !opts.force && response_path(run_dir, &spec.id).exists() {
            if let Ok(existing) = read_function_run(run_dir, &spec.id) {
                if reusable(&existing, source) {
                    return Ok(existing);
                }
            }
        }
        let run = source.produce(spec);
        write_function_run(run_dir, &run)?;
        Ok(run)
    });
    let mut record = source.header(corpus);
    record.functions = results.into_iter().collect::<Result<_, _>>()?;
    let record = record.seal();
    write_run(run_dir, &record)?;
    Ok(record)
}

pub fn count_failures(record: &RunRecord, kind: FailureKind) -> usize {
    record
        .functions
        .iter()
        .filter(|f| f.failure.as_ref().is_some_and(|x| x.kind == kind))
        .count()
}

fn unloaded(spec: &FunctionSpec, why: &str) -> DifferentialReport {
    DifferentialReport {
        function_id: spec.id.clone(),
        outcomes: spec.cases.iter().map(|_| CaseOutcome::failed(Verdict::ObfError, why)).collect(),
        load_ok: false,
    }
}

pub fn differential_for(spec: &FunctionSpec, run: &FunctionRun, executor: &dyn Executor) -> Result<DifferentialReport, SandboxError> {
    let Some(obf) = &run.run.extracted_source else {
        return Ok(unloaded(spec, "no obfuscated source"));
    };
    let entry = resolve_entry_point(obf.as_str(), &spec.entry).unwrap_or_else(|_| spec.entry.clone());
    executor.run_differential(&spec.id, &spec.source, obf, &spec.entry, &entry, &spec.cases)
}

/// Differential execution and static metrics for every function of a run.
/// Fails only when the run does not belong to the corpus or the executor
/// cannot start.
pub fn evaluate_run(
    corpus: &Corpus,
    record: &RunRecord,
    executor: &dyn Executor,
    workers: usize,
) -> Result<Vec<MetricRecord>, PipelineError> {
    if record.manifest_digest != corpus.digest {
        return Err(PipelineError::DigestMismatch {
            run: record.manifest_digest.clone(),
            corpus: corpus.digest.clone(),
        });
    }
    let pairs = record
        .functions
        .iter()
        .map(|f| {
            corpus
                .get(&f.run.function_id)
                .map(|spec| (spec, f))
                .ok_or_else(|| PipelineError::UnknownFunction(f.run.function_id.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    parallel_map(&pairs, workers, |(spec, f)| -> Result<MetricRecord, PipelineError> {
        let report = differential_for(spec, f, executor)?;
        build_metric_record(spec, &f.run, &report).map_err(|source| PipelineError::Metric {
            id: spec.id.clone(),
            source,
        })
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::load_manifest;
    use obfubench_core::{SourceText, TestCase};
    use std::fs;
    use std::sync::atomic::{AtomicUsize, Ordering};

    /// Every case matches; loading fails when the source contains `raise`.
    struct Stub {
        calls: AtomicUsize,
    }

    impl Executor for Stub {
        fn load_check(&self, src: &SourceText) -> Result<bool, SandboxError> {
            Ok(!src.text.contains("raise"))
        }

        fn run_differential(
            &self,
            id: &str,
            _: &SourceText,
            obf: &SourceText,
            _: &str,
            _: &str,
            cases: &[TestCase],
        ) -> Result<DifferentialReport, SandboxError> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            let load_ok = self.load_check(obf)?;
            let outcomes = cases
                .iter()
                .map(|_| CaseOutcome {
                    verdict: if load_ok { Verdict::Match } else { Verdict::ObfError },
                    orig_time_s: Some(0.001),
                    obf_time_s: Some(0.002),
                    detail: String::new(),
                })
                .collect();
            Ok(DifferentialReport {
                function_id: id.into(),
                outcomes,
                load_ok,
            })
        }
    }

    fn dataset(dir: &Path) -> Corpus {
        fs::create_dir_all(dir.join("functions")).unwrap();
        let case = r#"{"args":["3"]}"#;
        let cases = [case; 8].join(",");
        fs::write(
            dir.join("manifest.json"),
            format!(
                r#"{{"version":1,"functions":[
                {{"id":"factorial","category":"mathematical","entry":"factorial","source":"functions/factorial.py","cases":[{cases}]}},
                {{"id":"fib","category":"recursive","entry":"fib","source":"functions/fib.py","cases":[{cases}]}}]}}"#
            ),
        )
        .unwrap();
        fs::write(
            dir.join("functions/factorial.py"),
            "def factorial(n):\n    if n <= 1:\n        return 1\n    return n * factorial(n-1)\n",
        )
        .unwrap();
        fs::write(
            dir.join("functions/fib.py"),
            "def fib(n):\n    if n < 2:\n        return n\n    return fib(n - 1) + fib(n - 2)\n",
        )
        .unwrap();
        load_manifest(dir).unwrap()
    }

    fn opts(force: bool) -> BatchOptions {
        BatchOptions { workers: 2, force }
    }

    #[test]
    fn baseline_batch_and_evaluation() {
        let data = tempfile::tempdir().unwrap();
        let out = tempfile::tempdir().unwrap();
        let corpus = dataset(data.path());
        let src = Source::Baseline {
            baseline: Baseline::Rename,
            seed: 7,
        };
        let record = obfuscate_corpus(&corpus, &src, out.path(), opts(false)).unwrap();
        assert_eq!(record.function_ids, ["factorial", "fib"]);
        assert_eq!(record.provider, "baseline");
        let stub = Stub {
            calls: AtomicUsize::new(0),
        };
        let metrics = evaluate_run(&corpus, &record, &stub, 2).unwrap();
        assert_eq!(stub.calls.load(Ordering::SeqCst), 2);
        for m in &metrics {
            assert_eq!((m.pass_rate, m.expansion, m.cc_delta), (1.0, Some(1.0), Some(0)));
            assert_eq!(m.semantic_elasticity, 0.0);
            assert!(m.entropy_delta.unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn resume_keeps_existing_responses() {
        let data = tempfile::tempdir().unwrap();
        let out = tempfile::tempdir().unwrap();
        let corpus = dataset(data.path());
        let src = Source::Baseline {
            baseline: Baseline::Wrap,
            seed: 1,
        };
        obfuscate_corpus(&corpus, &src, out.path(), opts(false)).unwrap();
        let path = response_path(out.path(), "fib");
        let mut edited = read_function_run(out.path(), "fib").unwrap();
        edited.run.raw_response = "kept".into();
        write_function_run(out.path(), &edited).unwrap();

        let again = obfuscate_corpus(&corpus, &src, out.path(), opts(false)).unwrap();
        assert_eq!(again.functions[1].run.raw_response, "kept");
        let forced = obfuscate_corpus(&corpus, &src, out.path(), opts(true)).unwrap();
        assert_ne!(forced.functions[1].run.raw_response, "kept");
        assert!(path.exists());
    }

    #[test]
    fn missing_source_scores_load_error_without_executing() {
        let data = tempfile::tempdir().unwrap();
        let out = tempfile::tempdir().unwrap();
        let corpus = dataset(data.path());
        let src = Source::Baseline {
            baseline: Baseline::Rename,
            seed: 7,
        };
        let mut record = obfuscate_corpus(&corpus, &src, out.path(), opts(false)).unwrap();
        record.functions[0].run.extracted_source = None;
        record.functions[1].run.extracted_source = Some(SourceText::new("def fib(n):\n    raise ValueError\n", "x"));
        let stub = Stub {
            calls: AtomicUsize::new(0),
        };
        let metrics = evaluate_run(&corpus, &record, &stub, 1).unwrap();
        assert_eq!(stub.calls.load(Ordering::SeqCst), 1);
        for m in &metrics {
            assert_eq!(m.status.as_str(), "load_error");
            assert_eq!(m.pass_rate, 0.0);
        }
    }

    #[test]
    fn foreign_runs_are_rejected() {
        let data = tempfile::tempdir().unwrap();
        let out = tempfile::tempdir().unwrap();
        let corpus = dataset(data.path());
        let src = Source::Baseline {
            baseline: Baseline::Rename,
            seed: 7,
        };
        let mut record = obfuscate_corpus(&corpus, &src, out.path(), opts(false)).unwrap();
        let stub = Stub {
            calls: AtomicUsize::new(0),
        };
        record.functions[0].run.function_id = "nope".into();
        assert!(matches!(evaluate_run(&corpus, &record, &stub, 1), Err(PipelineError::UnknownFunction(_))));
        record.manifest_digest = "0".repeat(64);
        assert!(matches!(evaluate_run(&corpus, &record, &stub, 1), Err(PipelineError::DigestMismatch { .. })));
    }

    #[test]
    fn run_dir_names() {
        assert_eq!(run_dir_name("gpt-4-turbo", Regime::FewShot), "gpt-4-turbo__few_shot");
        assert_eq!(run_dir_name("a/b c", Regime::ZeroShot), "a_b_c__zero_shot");
    }
}
