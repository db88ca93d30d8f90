//! The six transformation metrics and the per-function record that carries them.
//!
//! Pass rate `P`, expansion `E`, complexity change `ΔCC`, identifier entropy
//! change `ΔH`, execution-time change `ΔT` and Semantic Elasticity
//! `SE = |ΔCC| * P^2 / E`.

use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::pysurface::{
    count_code_lines, cyclomatic_complexity, extract_identifiers, IdentifierMultiset, LexError,
};
use crate::types::{Category, DifferentialReport, FunctionSpec, ObfuscationRun, Regime};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("pass rate of an empty test suite")]
    EmptyTestSuite,
    #[error("source has no code lines")]
    EmptySource,
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("inputs belong to different functions: {0}")]
    MismatchedInputs(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RecordStatus {
    Ok,
    LoadError,
    LexError,
}

impl RecordStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Ok => "ok",
            Self::LoadError => "load_error",
            Self::LexError => "lex_error",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ok" => Some(Self::Ok),
            "load_error" => Some(Self::LoadError),
            "lex_error" => Some(Self::LexError),
            _ => None,
        }
    }
}

/// One row of metrics for a (function, model, regime) triple.
///
/// Fields derived from the obfuscated text are `None` when that text is
/// absent or does not lex.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRecord {
    pub function_id: String,
    pub category: Category,
    pub model_id: String,
    pub regime: Regime,
    pub pass_rate: f64,
    pub expansion: Option<f64>,
    pub cc_original: u32,
    pub cc_obfuscated: Option<u32>,
    pub cc_delta: Option<i64>,
    pub entropy_original: f64,
    pub entropy_obfuscated: Option<f64>,
    pub entropy_delta: Option<f64>,
    pub time_delta: Option<f64>,
    pub semantic_elasticity: f64,
    pub status: RecordStatus,
}

/// Direction of the cyclomatic complexity change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ComplexityShift {
    Reduced,
    Unchanged,
    Increased,
}

impl ComplexityShift {
    pub fn of(cc_delta: i64) -> Self {
        match cc_delta {
            d if d < 0 => Self::Reduced,
            0 => Self::Unchanged,
            _ => Self::Increased,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Reduced => "reduced",
            Self::Unchanged => "unchanged",
            Self::Increased => "increased",
        }
    }
}

pub fn pass_rate(verdicts: &[bool]) -> Result<f64, MetricError> {
    if verdicts.is_empty() {
        return Err(MetricError::EmptyTestSuite);
    }
    let passed = verdicts.iter().filter(|v| **v).count();
    Ok(passed as f64 / verdicts.len() as f64)
}

pub fn expansion_ratio(orig: &str, obf: &str) -> Result<f64, MetricError> {
    let (orig_lines, obf_lines) = (count_code_lines(orig), count_code_lines(obf));
    if orig_lines == 0 || obf_lines == 0 {
        return Err(MetricError::EmptySource);
    }
    Ok(obf_lines as f64 / orig_lines as f64)
}

pub fn complexity_delta(orig: &str, obf: &str) -> Result<i64, MetricError> {
    let before = cyclomatic_complexity(orig)? as i64;
    let after = cyclomatic_complexity(obf)? as i64;
    Ok(after - before)
}

/// Shannon entropy in bits of the identifier frequency distribution.
pub fn multiset_entropy(ids: &IdentifierMultiset) -> f64 {
    let total = ids.total() as f64;
    if ids.distinct() < 2 {
        return 0.0;
    }
    ids.counts()
        .values()
        .map(|&c| {
            let p = c as f64 / total;
            -p * libm::log2(p)
        })
        .sum()
}

pub fn identifier_entropy(src: &str) -> Result<f64, MetricError> {
    Ok(multiset_entropy(&extract_identifiers(src)?))
}

pub fn entropy_delta(orig: &str, obf: &str) -> Result<f64, MetricError> {
    Ok(identifier_entropy(obf)? - identifier_entropy(orig)?)
}

/// Mean of `obf - orig` seconds; `None` when no case produced both timings.
pub fn time_delta(timings: &[(f64, f64)]) -> Option<f64> {
    if timings.is_empty() {
        return None;
    }
    let sum: f64 = timings.iter().map(|(orig, obf)| obf - orig).sum();
    Some(sum / timings.len() as f64)
}

pub fn semantic_elasticity(cc_delta: i64, pass_rate: f64, expansion: f64) -> Result<f64, MetricError> {
    if !expansion.is_finite() || expansion <= 0.0 {
        return Err(MetricError::Domain("expansion ratio must be positive"));
    }
    if !(0.0..=1.0).contains(&pass_rate) {
        return Err(MetricError::Domain("pass rate must lie in [0, 1]"));
    }
    Ok((cc_delta.unsigned_abs() as f64) * pass_rate * pass_rate / expansion)
}

struct StaticMetrics {
    expansion: f64,
    cc_obfuscated: u32,
    entropy_obfuscated: f64,
}

fn static_metrics(orig: &str, obf: &str) -> Result<StaticMetrics, MetricError> {
    Ok(StaticMetrics {
        expansion: expansion_ratio(orig, obf)?,
        cc_obfuscated: cyclomatic_complexity(obf)? as u32,
        entropy_obfuscated: identifier_entropy(obf)?,
    })
}

/// Assembles every metric for one transformed function.
///
/// An obfuscation that produced no source or failed to load scores `P = 0`
/// and `SE = 0` with status `load_error`. One whose text cannot be analysed
/// statically keeps its measured `P`, has no static fields, and scores
/// `SE = 0` with status `lex_error`.
pub fn build_metric_record(
    spec: &FunctionSpec,
    run: &ObfuscationRun,
    report: &DifferentialReport,
) -> Result<MetricRecord, MetricError> {
    if run.function_id != spec.id || report.function_id != spec.id {
        return Err(MetricError::MismatchedInputs(alloc::format!(
            "spec {:?}, run {:?}, report {:?}",
            spec.id,
            run.function_id,
            report.function_id
        )));
    }
    let orig = spec.source.as_str();
    let cc_original = cyclomatic_complexity(orig)? as u32;
    let entropy_original = identifier_entropy(orig)?;

    let obf = run.extracted_source.as_ref().map(|s| s.as_str());
    let loaded = obf.is_some() && report.load_ok;
    let pass = if loaded {
        pass_rate(&report.verdicts())?
    } else {
        0.0
    };
    let timings: Vec<(f64, f64)> = report.outcomes.iter().filter_map(|o| o.timing_pair()).collect();
    let statics = obf.map(|o| static_metrics(orig, o));

    let mut record = MetricRecord {
        function_id: spec.id.clone(),
        category: spec.category,
        model_id: run.model_id.clone(),
        regime: run.regime,
        pass_rate: pass,
        expansion: None,
        cc_original,
        cc_obfuscated: None,
        cc_delta: None,
        entropy_original,
        entropy_obfuscated: None,
        entropy_delta: None,
        time_delta: if loaded { time_delta(&timings) } else { None },
        semantic_elasticity: 0.0,
        status: if loaded {
            RecordStatus::Ok
        } else {
            RecordStatus::LoadError
        },
    };
    match statics {
        Some(Ok(s)) => {
            let delta = s.cc_obfuscated as i64 - cc_original as i64;
            record.expansion = Some(s.expansion);
            record.cc_obfuscated = Some(s.cc_obfuscated);
            record.cc_delta = Some(delta);
            record.entropy_obfuscated = Some(s.entropy_obfuscated);
            record.entropy_delta = Some(s.entropy_obfuscated - entropy_original);
            if loaded {
                record.semantic_elasticity = semantic_elasticity(delta, pass, s.expansion)?;
            }
        }
        Some(Err(_)) if loaded => record.status = RecordStatus::LexError,
        _ => {}
    }
    Ok(record)
}
