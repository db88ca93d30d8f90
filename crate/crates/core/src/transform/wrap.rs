use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{baseline_rename, TransformError};
use crate::pysurface::{tokenize, top_level_defs, Token, TokenKind};

fn line_start_of(src: &str, byte: usize) -> usize {
    src[..byte].rfind('\n').map_or(0, |i| i + 1)
}

fn fresh_local(base: &str, taken: &BTreeSet<&str>) -> String {
    if !taken.contains(base) {
        return base.into();
    }
    (1..)
        .map(|i| format!("{base}_{i}"))
        .find(|n| !taken.contains(n.as_str()))
        .expect("unbounded search")
}

/// Parameter names of a `def` whose `(` is `tokens[open]`, and the index of
/// the matching `)`.
fn parameters<'s>(tokens: &[Token<'s>], open: usize) -> Option<(Vec<&'s str>, usize)> {
    let mut names = Vec::new();
    let mut depth = 0usize;
    let mut in_lambda = false;
    let mut prev: Option<&Token<'s>> = None;
    for (i, t) in tokens.iter().enumerate().skip(open) {
        if matches!(t.kind, TokenKind::Comment | TokenKind::Indent | TokenKind::Newline) {
            continue;
        }
        match t.lexeme {
            "(" | "[" | "{" if t.kind == TokenKind::Punctuation => depth += 1,
            ")" | "]" | "}" if t.kind == TokenKind::Punctuation => {
                depth -= 1;
                if depth == 0 {
                    return Some((names, i));
                }
            }
            _ => {}
        }
        if depth == 1 {
            if t.is_keyword("lambda") {
                in_lambda = true;
            } else if in_lambda && t.is_punct(":") {
                in_lambda = false;
            } else if !in_lambda && t.kind == TokenKind::Identifier {
                let after_separator = prev.is_some_and(|p| {
                    p.is_punct("(") || p.is_punct(",") || p.is_op("*") || p.is_op("**")
                });
                if after_separator {
                    names.push(t.lexeme);
                }
            }
        }
        prev = Some(t);
    }
    None
}

/// Wraps the single top-level function's body in a nested helper, adds a
/// side-effect-free dead assignment, delegates to the helper, then applies
/// [`baseline_rename`] with the same seed.
///
/// The helper shares the outer parameters through `nonlocal`, so rebinding a
/// parameter inside the body behaves exactly as before.
pub fn baseline_wrap(src: &str, seed: u64) -> Result<String, TransformError> {
    let tokens = tokenize(src)?;
    let defs = top_level_defs(src, &tokens);
    let class_at_top = tokens
        .iter()
        .any(|t| t.is_keyword("class") && t.line_start && line_start_of(src, t.byte_offset) == t.byte_offset);
    let def = match defs.as_slice() {
        [only] if !class_at_top => *only,
        [] => return Err(TransformError::UnsupportedShape("no top-level function")),
        _ => return Err(TransformError::UnsupportedShape("multiple top-level definitions")),
    };

    let open = def.token_index + 2;
    if !tokens.get(open).is_some_and(|t| t.is_punct("(")) {
        return Err(TransformError::UnsupportedShape("malformed def header"));
    }
    let (params, close) =
        parameters(&tokens, open).ok_or(TransformError::UnsupportedShape("malformed def header"))?;
    let colon = tokens[close..]
        .iter()
        .position(|t| t.is_punct(":"))
        .map(|p| close + p)
        .ok_or(TransformError::UnsupportedShape("malformed def header"))?;
    let header_end = tokens[colon].byte_end();

    let header_newline = tokens[colon..]
        .iter()
        .position(|t| t.kind == TokenKind::Newline)
        .map(|p| colon + p);
    let inline_body = tokens[colon + 1..header_newline.unwrap_or(tokens.len())]
        .iter()
        .any(|t| t.kind != TokenKind::Comment);

    // byte range of the body and the text after the function
    // (text, starts inside a multi-line string)
    let (body_lines, body_end): (Vec<(String, bool)>, usize) = if inline_body {
        let first = &tokens[colon + 1];
        let end = header_newline.map_or(src.len(), |n| tokens[n].byte_offset);
        (alloc::vec![(String::from(src[first.byte_offset..end].trim_end()), false)], end)
    } else {
        let body_start = header_newline.map_or(src.len(), |n| tokens[n].byte_end());
        let end = tokens
            .iter()
            .skip(header_newline.map_or(tokens.len(), |n| n + 1))
            .find(|t| {
                !matches!(t.kind, TokenKind::Comment | TokenKind::Indent | TokenKind::Newline)
                    && line_start_of(src, t.byte_offset) == t.byte_offset
            })
            .map_or(src.len(), |t| t.byte_offset);
        let strings: Vec<(usize, usize)> = tokens
            .iter()
            .filter(|t| t.kind == TokenKind::String && t.lexeme.contains('\n'))
            .map(|t| (t.byte_offset, t.byte_end()))
            .collect();
        let mut lines = Vec::new();
        let mut pos = body_start;
        for raw in src[body_start..end].split_inclusive('\n') {
            let inside_string = strings.iter().any(|(s, e)| *s < pos && pos < *e);
            let text = raw.trim_end_matches(['\n', '\r']);
            lines.push((String::from(text), inside_string));
            pos += raw.len();
        }
        (lines, end)
    };
    if body_lines.iter().all(|(l, _)| l.trim().is_empty()) {
        return Err(TransformError::UnsupportedShape("empty function body"));
    }

    let indent: String = if inline_body {
        String::from("    ")
    } else {
        body_lines
            .iter()
            .find(|(l, verbatim)| !l.trim().is_empty() && !verbatim)
            .map(|(l, _)| l.chars().take_while(|c| *c == ' ' || *c == '\t').collect())
            .unwrap_or_else(|| String::from("    "))
    };

    let taken: BTreeSet<&str> = tokens
        .iter()
        .filter(|t| t.kind == TokenKind::Identifier)
        .map(|t| t.lexeme)
        .collect();
    let helper = fresh_local("_calculate", &taken);
    let dead = fresh_local("_unused", &taken);
    let repeat: u32 = ChaCha8Rng::seed_from_u64(seed).gen_range(1..=9);

    let mut out = String::with_capacity(src.len() + 128);
    out.push_str(&src[..header_end]);
    out.push('\n');
    out.push_str(&format!("{indent}def {helper}():\n"));
    if !params.is_empty() {
        out.push_str(&format!("{indent}{indent}nonlocal {}\n", params.join(", ")));
    }
    for (line, verbatim) in &body_lines {
        if *verbatim {
            out.push_str(line);
        } else if line.trim().is_empty() {
            // blank lines stay blank
        } else if inline_body {
            out.push_str(&format!("{indent}{indent}{line}"));
        } else {
            out.push_str(&format!("{indent}{line}"));
        }
        out.push('\n');
    }
    out.push_str(&format!("{indent}{dead} = \"x\" * {repeat}\n"));
    out.push_str(&format!("{indent}return {helper}()\n"));
    let rest = &src[body_end..];
    if inline_body {
        // drop the newline that ended the inline body; we already wrote one
        let rest = rest.strip_prefix("\r\n").or_else(|| rest.strip_prefix('\n')).unwrap_or(rest);
        out.push_str(rest);
    } else {
        out.push_str(rest);
    }
    baseline_rename(&out, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pysurface::{count_code_lines, cyclomatic_complexity, resolve_entry_point};

    const LISTING_1: &str =
        "def factorial(n):\n    if n <= 1:\n        return 1\n    return n * factorial(n-1)\n";

    #[test]
    fn listing_shape() {
        let out = baseline_wrap(LISTING_1, 42).unwrap();
        let tokens = tokenize(&out).unwrap();
        let defs = tokens.iter().filter(|t| t.is_keyword("def")).count();
        assert_eq!(defs, 2, "{out}");
        assert_eq!(top_level_defs(&out, &tokens).len(), 1);
        assert!(out.contains("= \"x\" * "));
        assert!(out.contains("nonlocal "));
        let last = out.lines().rev().find(|l| !l.trim().is_empty()).unwrap();
        assert!(last.trim_start().starts_with("return _") && last.ends_with("()"));
        assert!(resolve_entry_point(&out, "factorial").unwrap().starts_with('_'));
    }

    #[test]
    fn metric_effects() {
        let out = baseline_wrap(LISTING_1, 1).unwrap();
        assert!(count_code_lines(&out) > count_code_lines(LISTING_1));
        assert_eq!(cyclomatic_complexity(&out).unwrap(), cyclomatic_complexity(LISTING_1).unwrap());
    }

    #[test]
    fn unwrapped_text_before_rename() {
        // seed-independent structure check through a source with no renameable names
        let src = "def f():\n    return len('abc')\n";
        let out = baseline_wrap(src, 0).unwrap();
        assert_eq!(out.lines().count(), 5, "{out}");
        assert!(!out.contains("nonlocal"));
    }

    #[test]
    fn inline_body() {
        let out = baseline_wrap("def f(x): return x * 2\nprint(1)\n", 5).unwrap();
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines.len(), 7, "{out}");
        assert!(lines[3].starts_with("        return "));
        assert_eq!(lines[6], "print(1)");
    }

    #[test]
    fn keeps_multiline_strings_verbatim() {
        let src = "def f(a):\n    s = '''x\ny'''\n    return s + a\n";
        let out = baseline_wrap(src, 2).unwrap();
        assert!(out.contains("'''x\ny'''"), "{out}");
    }

    #[test]
    fn parameter_forms() {
        let src = "def f(a, b=[1, 2], *rest, key=lambda q, r: q, **kw):\n    return a\n";
        let tokens = tokenize(src).unwrap();
        let (names, _) = parameters(&tokens, 2).unwrap();
        assert_eq!(names, alloc::vec!["a", "b", "rest", "key", "kw"]);
    }

    #[test]
    fn shapes_rejected() {
        let two = "def a():\n    return 1\n\ndef b():\n    return 2\n";
        assert_eq!(
            baseline_wrap(two, 0).unwrap_err(),
            TransformError::UnsupportedShape("multiple top-level definitions")
        );
        assert!(matches!(baseline_wrap("x = 1\n", 0), Err(TransformError::UnsupportedShape(_))));
        let with_class = "class A:\n    pass\n\ndef b():\n    return 2\n";
        assert!(matches!(baseline_wrap(with_class, 0), Err(TransformError::UnsupportedShape(_))));
    }
}
