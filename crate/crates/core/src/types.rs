//! Domain records shared by the corpus, sandbox, obfuscation and metric code.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

/// Source text plus a label used in diagnostics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceText {
    pub text: String,
    pub origin: String,
}

impl SourceText {
    pub fn new(text: impl Into<String>, origin: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            origin: origin.into(),
        }
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    /// Usable as an analysis input.
    pub fn is_blank(&self) -> bool {
        self.text.trim().is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    DataStructures,
    Mathematical,
    Recursive,
    SortingSearching,
    StringManipulation,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::DataStructures,
        Category::Mathematical,
        Category::Recursive,
        Category::SortingSearching,
        Category::StringManipulation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::DataStructures => "data_structures",
            Self::Mathematical => "mathematical",
            Self::Recursive => "recursive",
            Self::SortingSearching => "sorting_searching",
            Self::StringManipulation => "string_manipulation",
        }
    }

    /// Row label used in the pass-rate table.
    pub fn display_name(self) -> &'static str {
        match self {
            Self::DataStructures => "Data Structure",
            Self::Mathematical => "Mathematical",
            Self::Recursive => "Recursive",
            Self::SortingSearching => "Sorting & Searching",
            Self::StringManipulation => "String Manipulation",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownVariant(pub String);

impl fmt::Display for UnknownVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown value {:?}", self.0)
    }
}

impl core::error::Error for UnknownVariant {}

impl FromStr for Category {
    type Err = UnknownVariant;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| UnknownVariant(s.into()))
    }
}

/// Prompt-engineering technique.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    ZeroShot,
    FewShot,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::ZeroShot => "zero_shot",
            Self::FewShot => "few_shot",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Self::ZeroShot => "Zero-shot",
            Self::FewShot => "Few-shot",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = UnknownVariant;

    /// Accepts `zero_shot`, `zero-shot`, `zero`, `standard` and the few-shot
    /// equivalents.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "zero_shot" | "zero" | "standard" => Ok(Self::ZeroShot),
            "few_shot" | "few" => Ok(Self::FewShot),
            _ => Err(UnknownVariant(s.into())),
        }
    }
}

pub const DEFAULT_TIMEOUT_MS: u64 = 2000;
pub const DEFAULT_REPEATS: u32 = 5;

/// One call of the function under test. Arguments are Python literal
/// expressions evaluated fresh for every call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    pub args: Vec<String>,
    #[serde(default)]
    pub kwargs: BTreeMap<String, String>,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    #[serde(default = "default_repeats")]
    pub repeats: u32,
}

fn default_timeout_ms() -> u64 {
    DEFAULT_TIMEOUT_MS
}

fn default_repeats() -> u32 {
    DEFAULT_REPEATS
}

impl TestCase {
    pub fn new<I, S>(args: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            args: args.into_iter().map(Into::into).collect(),
            kwargs: BTreeMap::new(),
            timeout_ms: DEFAULT_TIMEOUT_MS,
            repeats: DEFAULT_REPEATS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionSpec {
    pub id: String,
    pub category: Category,
    pub entry: String,
    pub source: SourceText,
    pub cases: Vec<TestCase>,
}

/// Provenance of one transformation of one corpus function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObfuscationRun {
    pub function_id: String,
    pub model_id: String,
    pub regime: Regime,
    pub rendered_prompt: String,
    pub raw_response: String,
    pub extracted_source: Option<SourceText>,
    pub cache_key: String,
    #[serde(default)]
    pub endpoint: String,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Match,
    Mismatch,
    ObfError,
    Timeout,
}

impl Verdict {
    pub fn is_match(self) -> bool {
        self == Self::Match
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseOutcome {
    pub verdict: Verdict,
    pub orig_time_s: Option<f64>,
    pub obf_time_s: Option<f64>,
    #[serde(default)]
    pub detail: String,
}

impl CaseOutcome {
    pub fn failed(verdict: Verdict, detail: impl Into<String>) -> Self {
        Self {
            verdict,
            orig_time_s: None,
            obf_time_s: None,
            detail: detail.into(),
        }
    }

    /// Both timings, when both versions completed normally.
    pub fn timing_pair(&self) -> Option<(f64, f64)> {
        Some((self.orig_time_s?, self.obf_time_s?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferentialReport {
    pub function_id: String,
    pub outcomes: Vec<CaseOutcome>,
    /// The obfuscated source loaded in a fresh namespace.
    pub load_ok: bool,
}

impl DifferentialReport {
    pub fn verdicts(&self) -> Vec<bool> {
        self.outcomes.iter().map(|o| o.verdict.is_match()).collect()
    }
}
