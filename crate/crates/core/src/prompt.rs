//! Prompt templates for zero- and few-shot obfuscation requests, and
//! extraction of code from model answers.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pysurface::resolve_entry_point;
use crate::types::{FunctionSpec, Regime};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateError {
    #[error("template has no {{function_source}} placeholder")]
    MissingSource,
    #[error("unresolved placeholder {{{0}}}")]
    Unresolved(String),
    #[error("unbalanced brace at byte {0}")]
    UnbalancedBrace(usize),
    #[error("zero-shot templates carry no exemplars")]
    ZeroShotExemplars,
    #[error("few-shot templates need at least one exemplar")]
    MissingExemplars,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exemplar {
    pub original: String,
    pub obfuscated: String,
}

/// Instruction text with `{function_source}` and `{entry}` placeholders;
/// `{{` and `}}` produce literal braces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub regime: Regime,
    pub system_text: String,
    pub user_text: String,
    #[serde(default)]
    pub exemplars: Vec<Exemplar>,
    /// User turn that opens the exemplar block in few-shot prompts.
    #[serde(default = "default_exemplar_intro")]
    pub exemplar_intro: String,
}

pub const DEFAULT_EXEMPLAR_INTRO: &str =
    "Here are examples of functions and obfuscated versions with identical behaviour.";

fn default_exemplar_intro() -> String {
    DEFAULT_EXEMPLAR_INTRO.into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn new(role: Role, content: impl Into<String>) -> Self {
        Self {
            role,
            content: content.into(),
        }
    }
}

fn fill(template: &str, source: &str, entry: &str) -> Result<String, TemplateError> {
    let mut out = String::with_capacity(template.len() + source.len());
    let mut rest = template;
    let mut consumed = 0;
    while let Some(i) = rest.find(['{', '}']) {
        out.push_str(&rest[..i]);
        let tail = &rest[i..];
        if tail.starts_with("{{") || tail.starts_with("}}") {
            out.push_str(&tail[..1]);
            rest = &tail[2..];
            consumed += i + 2;
            continue;
        }
        if tail.starts_with('}') {
            return Err(TemplateError::UnbalancedBrace(consumed + i));
        }
        let close = tail.find('}').ok_or(TemplateError::UnbalancedBrace(consumed + i))?;
        match &tail[1..close] {
            "function_source" => out.push_str(source),
            "entry" => out.push_str(entry),
            other => return Err(TemplateError::Unresolved(other.to_string())),
        }
        rest = &tail[close + 1..];
        consumed += i + close + 1;
    }
    out.push_str(rest);
    Ok(out)
}

fn fenced(code: &str) -> String {
    format!("```python\n{}\n```", code.trim_end())
}

/// Chat messages for one function: the system instruction, then for
/// few-shot an introduction turn and one user and assistant turn per
/// exemplar, then the request itself.
pub fn render_prompt(t: &PromptTemplate, f: &FunctionSpec) -> Result<Vec<Message>, TemplateError> {
    if !t.user_text.contains("{function_source}") {
        return Err(TemplateError::MissingSource);
    }
    match (t.regime, t.exemplars.is_empty()) {
        (Regime::ZeroShot, false) => return Err(TemplateError::ZeroShotExemplars),
        (Regime::FewShot, true) => return Err(TemplateError::MissingExemplars),
        _ => {}
    }
    let source = f.source.as_str();
    let mut messages = Vec::with_capacity(3 + 2 * t.exemplars.len());
    messages.push(Message::new(Role::System, fill(&t.system_text, source, &f.entry)?));
    if !t.exemplars.is_empty() {
        messages.push(Message::new(Role::User, t.exemplar_intro.clone()));
    }
    for ex in &t.exemplars {
        let entry = resolve_entry_point(&ex.original, "").unwrap_or_default();
        messages.push(Message::new(Role::User, fill(&t.user_text, &ex.original, &entry)?));
        messages.push(Message::new(Role::Assistant, fenced(&ex.obfuscated)));
    }
    messages.push(Message::new(Role::User, fill(&t.user_text, source, &f.entry)?));
    Ok(messages)
}

/// Plain-text transcript of a message list, as stored in run records.
pub fn transcript(messages: &[Message]) -> String {
    let mut out = String::new();
    for m in messages {
        let role = match m.role {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        };
        out.push_str(&format!("[{role}]\n{}\n\n", m.content));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("model response contains no code")]
pub struct EmptyResponse;

fn fenced_blocks(raw: &str) -> Vec<String> {
    let mut blocks = Vec::new();
    let mut current: Option<Vec<&str>> = None;
    for line in raw.lines() {
        let is_fence = line.trim_start().starts_with("```");
        match (&mut current, is_fence) {
            (None, true) => current = Some(Vec::new()),
            (Some(lines), true) => {
                blocks.push(lines.join("\n"));
                current = None;
            }
            (Some(lines), false) => lines.push(line),
            (None, false) => {}
        }
    }
    if let Some(lines) = current {
        blocks.push(lines.join("\n"));
    }
    blocks
}

fn defines_function(code: &str) -> bool {
    code.lines().any(|l| l.trim_start().starts_with("def "))
}

fn tidy(code: &str) -> String {
    let lines: Vec<&str> = code.lines().skip_while(|l| l.trim().is_empty()).collect();
    let mut s = lines.join("\n");
    s.truncate(s.trim_end().len());
    s.push('\n');
    s
}

/// The code inside a model answer: the first fenced block that defines a
/// function, else the first fenced block, else the whole trimmed response.
pub fn extract_code(raw: &str) -> Result<String, EmptyResponse> {
    let blocks = fenced_blocks(raw);
    let chosen = blocks
        .iter()
        .find(|b| defines_function(b))
        .or_else(|| blocks.first())
        .map(String::as_str)
        .unwrap_or(raw);
    if chosen.trim().is_empty() {
        return Err(EmptyResponse);
    }
    Ok(tidy(chosen))
}
