//! Pure analysis core for the obfuscation benchmark.
//!
//! Everything in this crate is a function of its inputs: the Python surface
//! lexer and the counts built on it, the six transformation metrics, the
//! statistics used in the summaries, the rule-based baseline obfuscators and
//! prompt rendering. Process spawning, HTTP and file formats live in the
//! `obfubench` crate.

#![no_std]

extern crate alloc;

pub mod metrics;
pub mod prompt;
pub mod pysurface;
pub mod stats;
pub mod transform;
pub mod types;

pub use metrics::{
    build_metric_record, complexity_delta, entropy_delta, expansion_ratio, identifier_entropy,
    pass_rate, semantic_elasticity, time_delta, ComplexityShift, MetricError, MetricRecord,
    RecordStatus,
};
pub use pysurface::{
    count_code_lines, count_decision_points, cyclomatic_complexity, extract_identifiers,
    resolve_entry_point, tokenize, IdentifierMultiset, LexError, Token, TokenKind,
};
pub use types::{
    CaseOutcome, Category, DifferentialReport, FunctionSpec, ObfuscationRun, Regime, SourceText,
    TestCase, Verdict,
};
