//! Producing obfuscated sources from models or rule-based baselines.

pub mod cache;
pub mod client;
pub mod provider;
pub mod templates;

use std::fmt;
use std::str::FromStr;

use obfubench_core::prompt::{extract_code, render_prompt, transcript, PromptTemplate};
use obfubench_core::transform::{baseline_rename, baseline_wrap};
use obfubench_core::{FunctionSpec, ObfuscationRun, Regime, SourceText};
use serde::{Deserialize, Serialize};
use serde_json::json;

pub use cache::{cache_key, canonical_request, CacheEntry, ResponseCache};
pub use client::{Mode, ProviderClient, RequestError, Sleeper, ThreadSleeper, Transport, UreqTransport};
pub use provider::{ProviderConfig, ProviderKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Baseline {
    Rename,
    Wrap,
}

impl Baseline {
    pub fn model_id(self) -> &'static str {
        match self {
            Self::Rename => "baseline-rename",
            Self::Wrap => "baseline-wrap",
        }
    }
}

impl FromStr for Baseline {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rename" => Ok(Self::Rename),
            "wrap" => Ok(Self::Wrap),
            other => Err(format!("unknown baseline {other:?}, expected rename or wrap")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    CacheMiss,
    Request,
    Template,
    Transform,
    EmptyResponse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub kind: FailureKind,
    pub message: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.kind, self.message)
    }
}

/// One function's obfuscation, stored as `responses/<function_id>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionRun {
    #[serde(flatten)]
    pub run: ObfuscationRun,
    #[serde(default)]
    pub failure: Option<Failure>,
    /// When the response was recorded, seconds since the Unix epoch.
    #[serde(default)]
    pub recorded_at: Option<u64>,
}

fn origin(model: &str, id: &str) -> String {
    format!("{model}/{id}")
}

pub fn baseline_run(spec: &FunctionSpec, baseline: Baseline, seed: u64) -> FunctionRun {
    let model = baseline.model_id();
    let key = cache_key(&json!({
        "transform": baseline,
        "seed": seed,
        "source": spec.source.text,
    }));
    let result = match baseline {
        Baseline::Rename => baseline_rename(spec.source.as_str(), seed),
        Baseline::Wrap => baseline_wrap(spec.source.as_str(), seed),
    };
    let (raw, extracted, failure) = match result {
        Ok(text) => (text.clone(), Some(SourceText::new(text, origin(model, &spec.id))), None),
        Err(e) => (
            String::new(),
            None,
            Some(Failure {
                kind: FailureKind::Transform,
                message: e.to_string(),
            }),
        ),
    };
    FunctionRun {
        run: ObfuscationRun {
            function_id: spec.id.clone(),
            model_id: model.into(),
            regime: Regime::ZeroShot,
            rendered_prompt: String::new(),
            raw_response: raw,
            extracted_source: extracted,
            cache_key: key,
            endpoint: String::new(),
            temperature: 0.0,
            seed: Some(seed),
        },
        failure,
        recorded_at: None,
    }
}

pub fn model_run(
    spec: &FunctionSpec,
    client: &ProviderClient<'_>,
    template: &PromptTemplate,
    cache: &ResponseCache,
    mode: Mode,
) -> FunctionRun {
    let p = &client.config;
    let mut run = ObfuscationRun {
        function_id: spec.id.clone(),
        model_id: p.name.clone(),
        regime: template.regime,
        rendered_prompt: String::new(),
        raw_response: String::new(),
        extracted_source: None,
        cache_key: String::new(),
        endpoint: p.base_url.clone(),
        temperature: p.temperature,
        seed: p.effective_seed(),
    };
    let fail = |run, kind, message: String| FunctionRun {
        run,
        failure: Some(Failure { kind, message }),
        recorded_at: None,
    };
    let messages = match render_prompt(template, spec) {
        Ok(m) => m,
        Err(e) => return fail(run, FailureKind::Template, e.to_string()),
    };
    run.rendered_prompt = transcript(&messages);
    run.cache_key = cache_key(&canonical_request(p, &messages));
    let answer = match client.request_obfuscation(&messages, cache, mode) {
        Ok(a) => a,
        Err(e @ RequestError::CacheMiss(_)) => return fail(run, FailureKind::CacheMiss, e.to_string()),
        Err(e) => return fail(run, FailureKind::Request, e.to_string()),
    };
    run.raw_response = answer.text;
    let failure = match extract_code(&run.raw_response) {
        Ok(code) => {
            run.extracted_source = Some(SourceText::new(code, origin(&p.name, &spec.id)));
            None
        }
        Err(e) => Some(Failure {
            kind: FailureKind::EmptyResponse,
            message: e.to_string(),
        }),
    };
    FunctionRun {
        run,
        failure,
        recorded_at: Some(answer.recorded_at),
    }
}
