//! Benchmark harness for LLM and rule-based obfuscation of Python functions.
//!
//! Corpus loading, the Python sandbox, provider access with a record/replay
//! cache, the evaluation pipeline and the report formats. The pure metrics
//! and statistics come from [`obfubench_core`].

pub mod config;
pub mod corpus;
pub mod obfuscate;
pub mod pipeline;
pub mod pool;
pub mod report;
pub mod sandbox;
