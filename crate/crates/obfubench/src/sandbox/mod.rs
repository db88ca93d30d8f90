//! Differential execution of original against obfuscated functions.

mod process;
pub mod protocol;

use obfubench_core::{DifferentialReport, SourceText, TestCase};
use thiserror::Error;

pub use process::{PythonSandbox, RUNNER_SOURCE};

#[derive(Debug, Error)]
pub enum SandboxError {
    #[error("cannot start runner {interpreter:?}: {source}")]
    Spawn {
        interpreter: String,
        source: std::io::Error,
    },
    #[error("runner protocol violation: {0}")]
    Protocol(String),
    #[error("no test cases given")]
    NoCases,
}

/// Executes subject code. Implementations own their worker processes; one
/// call is one isolated run.
pub trait Executor: Sync {
    /// True when `src` runs at module scope in a fresh namespace.
    fn load_check(&self, src: &SourceText) -> Result<bool, SandboxError>;

    /// Loads `obf`, then runs every case against both versions. When `obf`
    /// fails to load every outcome is `obf_error` and `load_ok` is false.
    fn run_differential(
        &self,
        function_id: &str,
        orig: &SourceText,
        obf: &SourceText,
        entry_orig: &str,
        entry_obf: &str,
        cases: &[TestCase],
    ) -> Result<DifferentialReport, SandboxError>;
}
