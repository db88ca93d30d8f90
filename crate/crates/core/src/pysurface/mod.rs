//! Lexical and structural analysis of Python source text.
//!
//! These are the static counts every metric is built from: decision points
//! and cyclomatic complexity, the identifier multiset, and code lines.

mod lexer;
mod literal;

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

pub use lexer::{is_keyword, tokenize, LexError, LexErrorReason, Token, TokenKind, KEYWORDS};
pub use literal::is_literal_expression;

/// Occurrence counts of identifier lexemes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdentifierMultiset {
    counts: BTreeMap<String, usize>,
}

impl IdentifierMultiset {
    pub fn counts(&self) -> &BTreeMap<String, usize> {
        &self.counts
    }

    pub fn get(&self, name: &str) -> usize {
        self.counts.get(name).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Counts sorted descending; equal for any two sources related by a
    /// bijective renaming.
    pub fn count_vector(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.counts.values().copied().collect();
        v.sort_unstable_by(|a, b| b.cmp(a));
        v
    }
}

impl<'a> FromIterator<&'a str> for IdentifierMultiset {
    fn from_iter<I: IntoIterator<Item = &'a str>>(iter: I) -> Self {
        let mut counts = BTreeMap::new();
        for name in iter {
            *counts.entry(name.to_string()).or_insert(0) += 1;
        }
        Self { counts }
    }
}

/// Statement-position `if`/`elif`/`while`/`for` plus every `lambda`.
///
/// Conditional expressions and comprehension clauses never start a logical
/// line, so they are not counted; this matches counting `If`, `While`, `For`
/// and `Lambda` nodes of a Python parse tree.
pub fn count_decision_points(src: &str) -> Result<usize, LexError> {
    Ok(tokenize(src)?.iter().filter(|t| is_decision_point(t)).count())
}

fn is_decision_point(t: &Token<'_>) -> bool {
    if t.kind != TokenKind::Keyword {
        return false;
    }
    match t.lexeme {
        "if" | "elif" | "while" | "for" => t.line_start,
        "lambda" => true,
        _ => false,
    }
}

/// McCabe complexity: one plus the decision points.
pub fn cyclomatic_complexity(src: &str) -> Result<usize, LexError> {
    Ok(1 + count_decision_points(src)?)
}

/// Every identifier token: definitions, parameters, uses, attributes and
/// builtins. Keywords, literals and comments are excluded.
pub fn extract_identifiers(src: &str) -> Result<IdentifierMultiset, LexError> {
    Ok(tokenize(src)?
        .iter()
        .filter(|t| t.kind == TokenKind::Identifier)
        .map(|t| t.lexeme)
        .collect())
}

/// Physical lines that are neither blank nor comment-only.
pub fn count_code_lines(src: &str) -> usize {
    src.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .count()
}

/// A `def` at column zero, with the name token following it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TopLevelDef<'src> {
    /// Index of the `def` keyword in the token stream.
    pub token_index: usize,
    pub name: &'src str,
}

fn at_column_zero(src: &str, byte_offset: usize) -> bool {
    byte_offset == 0 || matches!(src.as_bytes()[byte_offset - 1], b'\n' | b'\r')
}

/// Column-zero function definitions in source order. Nested definitions are
/// indented and never reported.
pub fn top_level_defs<'src>(src: &'src str, tokens: &[Token<'src>]) -> Vec<TopLevelDef<'src>> {
    tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| t.is_keyword("def") && t.line_start && at_column_zero(src, t.byte_offset))
        .filter_map(|(i, _)| {
            let name = tokens.get(i + 1).filter(|n| n.kind == TokenKind::Identifier)?;
            Some(TopLevelDef { token_index: i, name: name.lexeme })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EntryPointError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error("no top-level function definition found")]
    NoTopLevelDef,
}

/// The function the harness should call.
///
/// The declared name wins when a top-level definition with that name exists;
/// otherwise the last top-level definition is used, because obfuscators may
/// rename the entry point.
pub fn resolve_entry_point(src: &str, declared: &str) -> Result<String, EntryPointError> {
    let tokens = tokenize(src)?;
    let defs = top_level_defs(src, &tokens);
    if defs.iter().any(|d| d.name == declared) {
        return Ok(declared.to_string());
    }
    defs.last()
        .map(|d| d.name.to_string())
        .ok_or(EntryPointError::NoTopLevelDef)
}
