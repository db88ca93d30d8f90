//! Chat-completion request and response bodies for each provider.

use obfubench_core::prompt::{Message, Role};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    #[serde(alias = "openai_compatible")]
    OpenAi,
    Anthropic,
    Gemini,
}

fn default_max_tokens() -> u32 {
    2048
}

fn default_timeout_secs() -> u64 {
    120
}

fn default_min_interval_ms() -> u64 {
    1000
}

/// One model endpoint. The API key is never part of this struct; it is read
/// from the environment variable named by [`ProviderConfig::auth_env_var`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderConfig {
    /// Label used on the command line and in reports, e.g. `gpt-4-turbo`.
    pub name: String,
    pub kind: ProviderKind,
    pub base_url: String,
    pub model: String,
    #[serde(default)]
    pub auth_env: Option<String>,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    /// Minimum spacing between requests to this provider.
    #[serde(default = "default_min_interval_ms")]
    pub min_interval_ms: u64,
}

impl ProviderConfig {
    pub fn new(name: &str, kind: ProviderKind, base_url: &str, model: &str) -> Self {
        Self {
            name: name.into(),
            kind,
            base_url: base_url.into(),
            model: model.into(),
            auth_env: None,
            max_tokens: default_max_tokens(),
            temperature: 0.0,
            seed: None,
            timeout_secs: default_timeout_secs(),
            min_interval_ms: default_min_interval_ms(),
        }
    }

    pub fn auth_env_var(&self) -> String {
        self.auth_env.clone().unwrap_or_else(|| {
            let suffix: String = self
                .name
                .chars()
                .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_uppercase() } else { '_' })
                .collect();
            format!("OBFUBENCH_API_KEY_{suffix}")
        })
    }

    /// Seed actually sent; only OpenAI-style endpoints accept one.
    pub fn effective_seed(&self) -> Option<u64> {
        match self.kind {
            ProviderKind::OpenAi => self.seed,
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HttpRequest {
    pub url: String,
    pub headers: Vec<(String, String)>,
    pub body: Value,
}

fn role_name(role: Role) -> &'static str {
    match role {
        Role::System => "system",
        Role::User => "user",
        Role::Assistant => "assistant",
    }
}

/// Joins consecutive turns of one role, for APIs that require alternation.
fn merged_turns(messages: &[Message]) -> Vec<(Role, String)> {
    let mut turns: Vec<(Role, String)> = Vec::new();
    for m in messages.iter().filter(|m| m.role != Role::System) {
        match turns.last_mut() {
            Some((role, text)) if *role == m.role => {
                text.push_str("\n\n");
                text.push_str(&m.content);
            }
            _ => turns.push((m.role, m.content.clone())),
        }
    }
    turns
}

fn system_text(messages: &[Message]) -> Option<String> {
    let parts: Vec<&str> = messages
        .iter()
        .filter(|m| m.role == Role::System)
        .map(|m| m.content.as_str())
        .collect();
    (!parts.is_empty()).then(|| parts.join("\n\n"))
}

/// Builds the HTTP request, leaving out authentication headers.
pub fn build_request(p: &ProviderConfig, messages: &[Message]) -> HttpRequest {
    let base = p.base_url.trim_end_matches('/');
    match p.kind {
        ProviderKind::OpenAi => {
            let msgs: Vec<Value> = messages
                .iter()
                .map(|m| json!({"role": role_name(m.role), "content": m.content}))
                .collect();
            let mut body = json!({
                "model": p.model,
                "messages": msgs,
                "temperature": p.temperature,
                "max_tokens": p.max_tokens,
            });
            if let Some(seed) = p.effective_seed() {
                body["seed"] = json!(seed);
            }
            HttpRequest {
                url: format!("{base}/chat/completions"),
                headers: vec![("content-type".into(), "application/json".into())],
                body,
            }
        }
        ProviderKind::Anthropic => {
            let msgs: Vec<Value> = merged_turns(messages)
                .into_iter()
                .map(|(role, text)| json!({"role": role_name(role), "content": text}))
                .collect();
            let mut body = json!({
                "model": p.model,
                "messages": msgs,
                "temperature": p.temperature,
                "max_tokens": p.max_tokens,
            });
            if let Some(system) = system_text(messages) {
                body["system"] = json!(system);
            }
            HttpRequest {
                url: format!("{base}/messages"),
                headers: vec![
                    ("content-type".into(), "application/json".into()),
                    ("anthropic-version".into(), "2023-06-01".into()),
                ],
                body,
            }
        }
        ProviderKind::Gemini => {
            let contents: Vec<Value> = merged_turns(messages)
                .into_iter()
                .map(|(role, text)| {
                    let role = if role == Role::Assistant { "model" } else { "user" };
                    json!({"role": role, "parts": [{"text": text}]})
                })
                .collect();
            let mut body = json!({
                "contents": contents,
                "generationConfig": {"temperature": p.temperature, "maxOutputTokens": p.max_tokens},
            });
            if let Some(system) = system_text(messages) {
                body["systemInstruction"] = json!({"parts": [{"text": system}]});
            }
            HttpRequest {
                url: format!("{base}/models/{}:generateContent", p.model),
                headers: vec![("content-type".into(), "application/json".into())],
                body,
            }
        }
    }
}

pub fn auth_headers(kind: ProviderKind, key: &str) -> Vec<(String, String)> {
    match kind {
        ProviderKind::OpenAi => vec![("authorization".into(), format!("Bearer {key}"))],
        ProviderKind::Anthropic => vec![("x-api-key".into(), key.into())],
        ProviderKind::Gemini => vec![("x-goog-api-key".into(), key.into())],
    }
}

/// Text of the first answer in a provider response body.
pub fn parse_response(kind: ProviderKind, body: &Value) -> Option<String> {
    match kind {
        ProviderKind::OpenAi => body["choices"][0]["message"]["content"].as_str().map(String::from),
        ProviderKind::Anthropic => {
            let blocks = body["content"].as_array()?;
            let text: Vec<&str> = blocks
                .iter()
                .filter(|b| b["type"] == "text")
                .filter_map(|b| b["text"].as_str())
                .collect();
            (!text.is_empty()).then(|| text.concat())
        }
        ProviderKind::Gemini => {
            let parts = body["candidates"][0]["content"]["parts"].as_array()?;
            let text: Vec<&str> = parts.iter().filter_map(|p| p["text"].as_str()).collect();
            (!text.is_empty()).then(|| text.concat())
        }
    }
}
