//! NDJSON messages exchanged with the runner process.

use std::collections::BTreeMap;

use obfubench_core::{CaseOutcome, Verdict};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Request {
    Load {
        source: String,
    },
    Case {
        orig_source: String,
        obf_source: String,
        orig_entry: String,
        obf_entry: String,
        args: Vec<String>,
        kwargs: BTreeMap<String, String>,
        repeats: u32,
        /// Absolute tolerance for float comparison; exact when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        float_tol: Option<f64>,
    },
}

impl Request {
    pub fn to_line(&self) -> String {
        let mut line = serde_json::to_string(self).expect("requests always serialize");
        line.push('\n');
        line
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResponse {
    pub verdict: Verdict,
    #[serde(default)]
    pub orig_time_s: Option<f64>,
    #[serde(default)]
    pub obf_time_s: Option<f64>,
    #[serde(default)]
    pub detail: String,
}

impl From<CaseResponse> for CaseOutcome {
    fn from(r: CaseResponse) -> Self {
        let timed = r.verdict == Verdict::Match;
        CaseOutcome {
            verdict: r.verdict,
            orig_time_s: r.orig_time_s.filter(|_| timed),
            obf_time_s: r.obf_time_s.filter(|_| timed),
            detail: r.detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Response {
    Case(CaseResponse),
    Load { ok: bool, detail: String },
    Error(String),
}

/// Parses one response line. `None` means the line is not a protocol message.
pub fn parse_response(line: &str) -> Option<Response> {
    let value: Value = serde_json::from_str(line.trim()).ok()?;
    let obj = value.as_object()?;
    if let Some(err) = obj.get("error") {
        let text = err.as_str().map(String::from).unwrap_or_else(|| err.to_string());
        return Some(Response::Error(text));
    }
    let detail = obj.get("detail").and_then(Value::as_str).unwrap_or_default().to_string();
    if let Some(ok) = obj.get("ok") {
        return Some(Response::Load {
            ok: ok.as_bool()?,
            detail,
        });
    }
    serde_json::from_value(value).ok().map(Response::Case)
}
