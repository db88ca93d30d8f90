//! Run directories: `run.json` plus `responses/<function_id>.json`.

use std::fs;
use std::path::{Path, PathBuf};

use obfubench_core::Regime;
use serde::{Deserialize, Serialize};

use super::{io_at, ReportError};
use crate::obfuscate::FunctionRun;

pub const RUN_FILE: &str = "run.json";
pub const RESPONSES_DIR: &str = "responses";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub tool_version: String,
    pub manifest_digest: String,
    pub model: String,
    /// Provider kind, or `baseline` for rule-based transforms.
    pub provider: String,
    pub endpoint: String,
    pub regime: Regime,
    pub seed: Option<u64>,
    /// Latest response timestamp among the functions, seconds since the epoch.
    pub recorded_at: Option<u64>,
    pub function_ids: Vec<String>,
    /// Stored separately under `responses/`.
    #[serde(skip)]
    pub functions: Vec<FunctionRun>,
}

impl RunRecord {
    /// Fills the derived fields from `functions`.
    pub fn seal(mut self) -> Self {
        self.functions.sort_by(|a, b| a.run.function_id.cmp(&b.run.function_id));
        self.function_ids = self.functions.iter().map(|f| f.run.function_id.clone()).collect();
        self.recorded_at = self.functions.iter().filter_map(|f| f.recorded_at).max();
        self
    }
}

pub fn response_path(run_dir: &Path, function_id: &str) -> PathBuf {
    run_dir.join(RESPONSES_DIR).join(format!("{function_id}.json"))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ReportError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| ReportError::Json {
        path: path.into(),
        source,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(io_at(path))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, ReportError> {
    let text = fs::read_to_string(path).map_err(io_at(path))?;
    serde_json::from_str(&text).map_err(|source| ReportError::Json {
        path: path.into(),
        source,
    })
}

pub fn write_function_run(run_dir: &Path, run: &FunctionRun) -> Result<(), ReportError> {
    let dir = run_dir.join(RESPONSES_DIR);
    fs::create_dir_all(&dir).map_err(io_at(&dir))?;
    write_json(&response_path(run_dir, &run.run.function_id), run)
}

pub fn read_function_run(run_dir: &Path, function_id: &str) -> Result<FunctionRun, ReportError> {
    read_json(&response_path(run_dir, function_id))
}

pub fn write_run(run_dir: &Path, record: &RunRecord) -> Result<(), ReportError> {
    fs::create_dir_all(run_dir).map_err(io_at(run_dir))?;
    for f in &record.functions {
        write_function_run(run_dir, f)?;
    }
    write_json(&run_dir.join(RUN_FILE), record)
}

pub fn read_run(run_dir: &Path) -> Result<RunRecord, ReportError> {
    let mut record: RunRecord = read_json(&run_dir.join(RUN_FILE))?;
    record.functions = record
        .function_ids
        .iter()
        .map(|id| read_function_run(run_dir, id))
        .collect::<Result<_, _>>()?;
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::obfuscate::{baseline_run, Baseline};
    use obfubench_core::{Category, FunctionSpec, SourceText, TestCase};

    fn spec(id: &str) -> FunctionSpec {
        FunctionSpec {
            id: id.into(),
            category: Category::Mathematical,
            entry: id.into(),
            source: SourceText::new(format!("def {id}(n):\n    return n + 1\n"), format!("functions/{id}.py")),
            cases: vec![TestCase::new(["1"])],
        }
    }

    fn record() -> RunRecord {
        let mut runs: Vec<FunctionRun> = ["b", "a"].iter().map(|id| baseline_run(&spec(id), Baseline::Rename, 3)).collect();
        runs[0].recorded_at = Some(10);
        runs[1].recorded_at = Some(20);
        RunRecord {
            tool_version: "0.1.0".into(),
            manifest_digest: "abc".into(),
            model: "baseline-rename".into(),
            provider: "baseline".into(),
            endpoint: String::new(),
            regime: Regime::ZeroShot,
            seed: Some(3),
            recorded_at: None,
            function_ids: Vec::new(),
            functions: runs,
        }
        .seal()
    }

    #[test]
    fn seal_orders_and_stamps() {
        let r = record();
        assert_eq!(r.function_ids, ["a", "b"]);
        assert_eq!(r.recorded_at, Some(20));
    }

    #[test]
    fn directory_roundtrip_is_stable() {
        let dir = tempfile::tempdir().unwrap();
        let r = record();
        write_run(dir.path(), &r).unwrap();
        assert!(response_path(dir.path(), "a").exists());
        let back = read_run(dir.path()).unwrap();
        assert_eq!(back, r);
        let first = fs::read(dir.path().join(RUN_FILE)).unwrap();
        write_run(dir.path(), &back).unwrap();
        assert_eq!(fs::read(dir.path().join(RUN_FILE)).unwrap(), first);
    }

    #[test]
    fn missing_response_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        write_run(dir.path(), &record()).unwrap();
        fs::remove_file(response_path(dir.path(), "b")).unwrap();
        assert!(read_run(dir.path()).is_err());
    }
}
