//! Dataset manifest loading and validation.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use obfubench_core::pysurface::{is_literal_expression, EntryPointError};
use obfubench_core::{
    cyclomatic_complexity, extract_identifiers, pass_rate, resolve_entry_point, Category,
    FunctionSpec, SourceText, TestCase,
};
use serde::Deserialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::pool::parallel_map;
use crate::sandbox::{Executor, SandboxError};

pub const MIN_CASES: usize = 8;
pub const REFERENCE_FUNCTIONS: usize = 30;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("cannot read manifest {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("manifest is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("manifest field `{field}`: {reason}")]
    Field { field: String, reason: String },
    #[error("source file {0} is missing")]
    MissingSourceFile(PathBuf),
}

impl ManifestError {
    fn field(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::Field {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    version: u32,
    functions: Vec<RawFunction>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFunction {
    id: String,
    category: String,
    entry: String,
    source: String,
    cases: Vec<TestCase>,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub version: u32,
    pub functions: Vec<FunctionSpec>,
    /// SHA-256 over the manifest bytes and every source file, in order.
    pub digest: String,
    pub root: PathBuf,
}

impl Corpus {
    pub fn get(&self, id: &str) -> Option<&FunctionSpec> {
        self.functions.iter().find(|f| f.id == id)
    }

    pub fn categories(&self) -> BTreeSet<Category> {
        self.functions.iter().map(|f| f.category).collect()
    }
}

/// Accepts either the manifest file or the dataset directory holding
/// `manifest.json`.
pub fn load_manifest(path: &Path) -> Result<Corpus, ManifestError> {
    let manifest_path = if path.is_dir() {
        path.join("manifest.json")
    } else {
        path.to_path_buf()
    };
    let root = manifest_path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let bytes = fs::read(&manifest_path).map_err(|source| ManifestError::Io {
        path: manifest_path.clone(),
        source,
    })?;
    let raw: RawManifest = serde_json::from_slice(&bytes)?;
    if raw.version != 1 {
        return Err(ManifestError::field("version", format!("unsupported version {}", raw.version)));
    }
    if raw.functions.is_empty() {
        return Err(ManifestError::field("functions", "no functions listed"));
    }

    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    let mut seen = BTreeSet::new();
    let mut functions = Vec::with_capacity(raw.functions.len());
    for (i, f) in raw.functions.into_iter().enumerate() {
        let at = |name: &str| format!("functions[{i}].{name}");
        if f.id.is_empty() {
            return Err(ManifestError::field(at("id"), "empty id"));
        }
        if !seen.insert(f.id.clone()) {
            return Err(ManifestError::field(at("id"), format!("duplicate id {:?}", f.id)));
        }
        let category: Category = f
            .category
            .parse()
            .map_err(|_| ManifestError::field(at("category"), format!("unknown category {:?}", f.category)))?;
        if f.cases.len() < MIN_CASES {
            return Err(ManifestError::field(
                at("cases"),
                format!("{} has {} cases, at least {MIN_CASES} required", f.id, f.cases.len()),
            ));
        }
        for (j, case) in f.cases.iter().enumerate() {
            if case.timeout_ms == 0 || case.repeats == 0 {
                return Err(ManifestError::field(
                    format!("functions[{i}].cases[{j}]"),
                    "timeout_ms and repeats must be positive",
                ));
            }
        }
        let source_path = root.join(&f.source);
        let text = fs::read_to_string(&source_path)
            .map_err(|_| ManifestError::MissingSourceFile(source_path.clone()))?;
        hasher.update(f.source.as_bytes());
        hasher.update(text.as_bytes());
        if text.trim().is_empty() {
            return Err(ManifestError::field(at("source"), "source file is empty"));
        }
        match resolve_entry_point(&text, &f.entry) {
            Ok(name) if name == f.entry => {}
            Ok(_) | Err(EntryPointError::NoTopLevelDef) => {
                return Err(ManifestError::field(
                    at("entry"),
                    format!("{:?} is not a top-level function of {}", f.entry, f.source),
                ))
            }
            Err(EntryPointError::Lex(e)) => {
                return Err(ManifestError::field(at("source"), format!("{}: {e}", f.source)))
            }
        }
        functions.push(FunctionSpec {
            id: f.id,
            category,
            entry: f.entry,
            source: SourceText::new(text, f.source),
            cases: f.cases,
        });
    }
    Ok(Corpus {
        version: raw.version,
        functions,
        digest: hex::encode(hasher.finalize()),
        root,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionValidation {
    pub id: String,
    pub reasons: Vec<String>,
}

impl FunctionValidation {
    pub fn is_valid(&self) -> bool {
        self.reasons.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub functions: Vec<FunctionValidation>,
    /// Differences from the reference corpus shape. Informational only.
    pub shape_notes: Vec<String>,
}

impl ValidationReport {
    pub fn valid_count(&self) -> usize {
        self.functions.iter().filter(|f| f.is_valid()).count()
    }

    pub fn all_valid(&self) -> bool {
        self.valid_count() == self.functions.len()
    }
}

fn static_reasons(f: &FunctionSpec) -> Vec<String> {
    let mut reasons = Vec::new();
    let src = f.source.as_str();
    match cyclomatic_complexity(src) {
        Ok(_) => {}
        Err(e) => reasons.push(format!("does not lex: {e}")),
    }
    if extract_identifiers(src).map(|ids| ids.is_empty()).unwrap_or(false) {
        reasons.push("no identifiers".into());
    }
    for (i, case) in f.cases.iter().enumerate() {
        for arg in case.args.iter().chain(case.kwargs.values()) {
            if !is_literal_expression(arg) {
                reasons.push(format!("case {i}: {arg:?} is not a literal"));
            }
        }
    }
    reasons
}

/// Checks every function statically, then runs the identity differential.
/// Only executor spawn failures abort; everything else is a report entry.
pub fn validate_corpus(corpus: &Corpus, executor: &dyn Executor, workers: usize) -> Result<ValidationReport, SandboxError> {
    let mut report = ValidationReport::default();
    let by_category: BTreeMap<Category, usize> = corpus.functions.iter().fold(BTreeMap::new(), |mut m, f| {
        *m.entry(f.category).or_default() += 1;
        m
    });
    if by_category.len() != Category::ALL.len() {
        report
            .shape_notes
            .push(format!("{} of {} categories present", by_category.len(), Category::ALL.len()));
    }
    if corpus.functions.len() != REFERENCE_FUNCTIONS {
        report.shape_notes.push(format!(
            "{} functions, the reference corpus has {REFERENCE_FUNCTIONS}",
            corpus.functions.len()
        ));
    }

    let checked = parallel_map(&corpus.functions, workers, |f| -> Result<FunctionValidation, SandboxError> {
        let mut reasons = static_reasons(f);
        if reasons.is_empty() {
            let src = &f.source;
            let diff = executor.run_differential(&f.id, src, src, &f.entry, &f.entry, &f.cases)?;
            if !diff.load_ok {
                reasons.push("source fails to load".into());
            }
            for (i, o) in diff.outcomes.iter().enumerate() {
                if !o.verdict.is_match() {
                    reasons.push(format!("case {i}: {:?} {}", o.verdict, o.detail).trim_end().to_string());
                }
            }
            if reasons.is_empty() && pass_rate(&diff.verdicts()).ok() != Some(1.0) {
                reasons.push("identity differential below 1.0".into());
            }
        }
        Ok(FunctionValidation {
            id: f.id.clone(),
            reasons,
        })
    });
    report.functions = checked.into_iter().collect::<Result<_, _>>()?;
    Ok(report)
}
