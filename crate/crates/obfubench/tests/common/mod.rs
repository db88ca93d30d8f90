#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use obfubench::obfuscate::client::HttpResponse;
use obfubench::obfuscate::{ProviderConfig, ProviderKind, Sleeper, Transport};
use obfubench::sandbox::{Executor, SandboxError};
use obfubench_core::prompt::extract_code;
use obfubench_core::transform::{baseline_rename, baseline_wrap};
use obfubench_core::{CaseOutcome, DifferentialReport, SourceText, TestCase, Verdict};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub fn dataset() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../dataset")
}

/// Interpreter for tests that need the Python runner, if one works.
pub fn python() -> Option<String> {
    let candidate = std::env::var("OBFUBENCH_PYTHON").unwrap_or_else(|_| "python3".into());
    let ok = Command::new(&candidate)
        .args(["-c", "import sys; sys.exit(0 if sys.version_info >= (3, 8) else 1)"])
        .status()
        .is_ok_and(|s| s.success());
    ok.then_some(candidate)
}

fn digest(text: &str) -> u64 {
    let d = Sha256::digest(text.as_bytes());
    u64::from_le_bytes(d[..8].try_into().unwrap())
}

/// Deterministic executor. A source without `def ` fails to load; otherwise
/// a case mismatches when a hash of the obfuscated text and the case index
/// says so, unless the two sources are identical.
pub struct StubExecutor {
    pub calls: AtomicUsize,
}

impl StubExecutor {
    pub fn new() -> Self {
        Self {
            calls: AtomicUsize::new(0),
        }
    }
}

impl Executor for StubExecutor {
    fn load_check(&self, src: &SourceText) -> Result<bool, SandboxError> {
        Ok(src.text.contains("def "))
    }

    fn run_differential(
        &self,
        function_id: &str,
        orig: &SourceText,
        obf: &SourceText,
        _: &str,
        _: &str,
        cases: &[TestCase],
    ) -> Result<DifferentialReport, SandboxError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let load_ok = self.load_check(obf)?;
        let h = digest(&obf.text);
        let outcomes = cases
            .iter()
            .enumerate()
            .map(|(i, _)| {
                if !load_ok {
                    CaseOutcome::failed(Verdict::ObfError, "load failed")
                } else if orig.text != obf.text && (h >> (i % 48)).is_multiple_of(4) {
                    CaseOutcome::failed(Verdict::Mismatch, "stub mismatch")
                } else {
                    CaseOutcome {
                        verdict: Verdict::Match,
                        orig_time_s: Some(1e-5 * (i + 1) as f64),
                        obf_time_s: Some(1.5e-5 * (i + 1) as f64),
                        detail: String::new(),
                    }
                }
            })
            .collect();
        Ok(DifferentialReport {
            function_id: function_id.into(),
            outcomes,
            load_ok,
        })
    }
}

pub struct NoSleep;

impl Sleeper for NoSleep {
    fn sleep(&self, _: Duration) {}
}

/// Answers chat requests for every provider kind by obfuscating the code in
/// the last user turn: `gpt` models wrap, `claude` models rename, anything
/// else wraps for even hashes and replies with prose for odd ones.
pub struct StubTransport {
    pub calls: AtomicUsize,
}

impl StubTransport {
    pub fn new() -> Self {
        Self {
            calls: AtomicUsize::new(0),
        }
    }
}

fn last_user_text(body: &Value) -> String {
    if let Some(contents) = body["contents"].as_array() {
        return contents.last().unwrap()["parts"][0]["text"].as_str().unwrap().to_string();
    }
    let msgs = body["messages"].as_array().unwrap();
    msgs.last().unwrap()["content"].as_str().unwrap().to_string()
}

impl Transport for StubTransport {
    fn post(&self, url: &str, _: &[(String, String)], body: &str, _: Duration) -> Result<HttpResponse, String> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let body: Value = serde_json::from_str(body).unwrap();
        let code = extract_code(&last_user_text(&body)).unwrap();
        let h = digest(&code);
        let model = body["model"].as_str().unwrap_or(url);
        let text = if model.contains("gpt") {
            format!("Here you go:\n```python\n{}```\n", baseline_wrap(&code, h).unwrap())
        } else if model.contains("claude") {
            format!("```python\n{}```", baseline_rename(&code, h).unwrap())
        } else if h.is_multiple_of(2) {
            format!("```python\n{}```", baseline_wrap(&code, h ^ 1).unwrap())
        } else {
            "I would rather explain the function in prose.".into()
        };
        let reply = if url.contains("/chat/completions") {
            json!({"choices": [{"message": {"role": "assistant", "content": text}}]})
        } else if url.contains("/messages") {
            json!({"content": [{"type": "text", "text": text}]})
        } else {
            json!({"candidates": [{"content": {"parts": [{"text": text}]}}]})
        };
        Ok(HttpResponse {
            status: 200,
            body: reply.to_string(),
        })
    }
}

/// Fails the test if any request is attempted.
pub struct NoNetwork;

impl Transport for NoNetwork {
    fn post(&self, url: &str, _: &[(String, String)], _: &str, _: Duration) -> Result<HttpResponse, String> {
        panic!("network request to {url} in offline mode");
    }
}

pub fn providers() -> Vec<ProviderConfig> {
    let mut gpt = ProviderConfig::new("gpt-4-turbo", ProviderKind::OpenAi, "http://stub/v1", "gpt-4-turbo");
    gpt.seed = Some(1);
    let claude = ProviderConfig::new("claude-3-opus", ProviderKind::Anthropic, "http://stub/v1", "claude-3-opus");
    let gemini = ProviderConfig::new("gemini-pro", ProviderKind::Gemini, "http://stub/v1beta", "gemini-pro");
    [gpt, claude, gemini]
        .into_iter()
        .map(|mut p| {
            p.min_interval_ms = 0;
            p
        })
        .collect()
}
