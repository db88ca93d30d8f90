//! Durable artifacts: the metrics CSV, the Markdown summary and run records.

pub mod metrics_csv;
pub mod run_record;
pub mod summary;

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter};
use std::path::{Path, PathBuf};

use obfubench_core::stats::StatsError;
use obfubench_core::MetricRecord;
use thiserror::Error;

pub use metrics_csv::{read_metrics, write_metrics};
pub use run_record::{read_run, write_run, RunRecord};
pub use summary::render_summary;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no records to report")]
    EmptyInput,
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error(transparent)]
    Stats(#[from] StatsError),
}

impl From<io::Error> for ReportError {
    fn from(source: io::Error) -> Self {
        Self::Io {
            path: PathBuf::new(),
            source,
        }
    }
}

pub(crate) fn io_at(path: &Path) -> impl FnOnce(io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_metrics_csv(records: &[MetricRecord], path: &Path) -> Result<(), ReportError> {
    if records.is_empty() {
        return Err(ReportError::EmptyInput);
    }
    let file = File::create(path).map_err(io_at(path))?;
    write_metrics(records, BufWriter::new(file))
}

pub fn read_metrics_csv(path: &Path) -> Result<Vec<MetricRecord>, ReportError> {
    let file = File::open(path).map_err(io_at(path))?;
    read_metrics(BufReader::new(file))
}

pub fn write_summary(records: &[MetricRecord], path: &Path) -> Result<(), ReportError> {
    let text = render_summary(records)?;
    fs::write(path, text).map_err(io_at(path))
}
