use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{is_builtin, TransformError};
use crate::pysurface::{tokenize, Token, TokenKind};

/// Characters fresh names are drawn from. Names always start with `_`.
pub const CONFUSABLE_ALPHABET: [char; 5] = ['I', 'l', '1', 'O', '0'];

const BASE_NAME_LEN: usize = 5;

fn is_dunder(name: &str) -> bool {
    name.len() > 4 && name.starts_with("__") && name.ends_with("__")
}

fn significant(t: &Token<'_>) -> bool {
    !matches!(t.kind, TokenKind::Comment | TokenKind::Indent | TokenKind::Newline)
}

/// Names whose binding lives outside the source: builtins, dunders,
/// attribute names, keyword-argument names at call sites and anything on an
/// import line. Protection is global, so a protected name is never renamed
/// anywhere and consistency is kept.
fn protected_names<'s>(tokens: &[Token<'s>]) -> Result<BTreeSet<&'s str>, TransformError> {
    let mut protected = BTreeSet::new();
    // (open bracket, opened a def parameter list)
    let mut brackets: Vec<(&str, bool)> = Vec::new();
    let mut import_line = false;
    let sig: Vec<&Token<'s>> = tokens.iter().filter(|t| significant(t)).collect();

    for (i, t) in sig.iter().enumerate() {
        if t.line_start {
            import_line = t.is_keyword("import") || t.is_keyword("from");
        }
        let prev = i.checked_sub(1).map(|p| sig[p]);
        let next = sig.get(i + 1);
        match t.kind {
            TokenKind::Punctuation if matches!(t.lexeme, "(" | "[" | "{") => {
                let def_params = t.lexeme == "("
                    && i >= 2
                    && sig[i - 1].kind == TokenKind::Identifier
                    && sig[i - 2].is_keyword("def");
                brackets.push((t.lexeme, def_params));
            }
            TokenKind::Punctuation if matches!(t.lexeme, ")" | "]" | "}") => {
                brackets.pop();
            }
            TokenKind::String => {
                let prefix: String = t
                    .lexeme
                    .chars()
                    .take_while(|c| *c != '\'' && *c != '"')
                    .collect();
                if prefix.contains(['f', 'F']) && t.lexeme.contains('{') {
                    return Err(TransformError::Unsupported("f-string interpolation"));
                }
            }
            TokenKind::Identifier => {
                let call_kwarg = next.is_some_and(|n| n.is_op("="))
                    && matches!(brackets.last(), Some(("(", false)));
                if import_line
                    || call_kwarg
                    || prev.is_some_and(|p| p.is_punct("."))
                    || is_builtin(t.lexeme)
                    || is_dunder(t.lexeme)
                {
                    protected.insert(t.lexeme);
                }
            }
            _ => {}
        }
    }
    Ok(protected)
}

fn fresh_name(rng: &mut ChaCha8Rng, len: usize) -> String {
    let mut name = String::with_capacity(len + 1);
    name.push('_');
    for _ in 0..len {
        name.push(CONFUSABLE_ALPHABET[rng.gen_range(0..CONFUSABLE_ALPHABET.len())]);
    }
    name
}

/// The seed-deterministic renaming `baseline_rename` applies, in order of
/// first appearance.
pub fn rename_map(src: &str, seed: u64) -> Result<Vec<(String, String)>, TransformError> {
    let tokens = tokenize(src)?;
    rename_map_for(&tokens, seed)
}

fn rename_map_for(tokens: &[Token<'_>], seed: u64) -> Result<Vec<(String, String)>, TransformError> {
    let protected = protected_names(tokens)?;
    let existing: BTreeSet<&str> = tokens
        .iter()
        .filter(|t| t.kind == TokenKind::Identifier)
        .map(|t| t.lexeme)
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut taken: BTreeSet<String> = BTreeSet::new();
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut map = Vec::new();
    for t in tokens.iter().filter(|t| t.kind == TokenKind::Identifier) {
        if protected.contains(t.lexeme) || !seen.insert(t.lexeme) {
            continue;
        }
        let mut attempts = 0usize;
        let name = loop {
            let candidate = fresh_name(&mut rng, BASE_NAME_LEN + attempts / 64);
            attempts += 1;
            if !taken.contains(&candidate) && !existing.contains(candidate.as_str()) {
                break candidate;
            }
        };
        taken.insert(name.clone());
        map.push((String::from(t.lexeme), name));
    }
    Ok(map)
}

pub(super) fn apply(src: &str, tokens: &[Token<'_>], map: &BTreeMap<&str, &str>) -> String {
    let mut out = String::with_capacity(src.len());
    let mut cursor = 0;
    for t in tokens.iter().filter(|t| t.kind == TokenKind::Identifier) {
        if let Some(new) = map.get(t.lexeme) {
            out.push_str(&src[cursor..t.byte_offset]);
            out.push_str(new);
            cursor = t.byte_end();
        }
    }
    out.push_str(&src[cursor..]);
    out
}

/// Replaces every renameable identifier with a confusable name such as
/// `_I1l0O`, using the same fresh name for every occurrence.
///
/// Output is byte-identical for equal `(src, seed)`. Code lines, decision
/// points and the identifier count vector are unchanged.
pub fn baseline_rename(src: &str, seed: u64) -> Result<String, TransformError> {
    let tokens = tokenize(src)?;
    let pairs = rename_map_for(&tokens, seed)?;
    let map: BTreeMap<&str, &str> = pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    Ok(apply(src, &tokens, &map))
}
