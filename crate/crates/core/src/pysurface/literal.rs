use super::lexer::{tokenize, TokenKind};

/// Whether `expr` is built only from literals: numbers, non-f strings,
/// `True`/`False`/`None`, containers and unary signs.
///
/// This mirrors the restricted literal evaluator the runner uses, so test
/// arguments can be rejected before any process is spawned.
pub fn is_literal_expression(expr: &str) -> bool {
    let Ok(tokens) = tokenize(expr) else {
        return false;
    };
    let mut significant = 0;
    for t in &tokens {
        let ok = match t.kind {
            TokenKind::Number => true,
            TokenKind::String => !t
                .lexeme
                .chars()
                .take_while(|c| *c != '\'' && *c != '"')
                .any(|c| c == 'f' || c == 'F'),
            TokenKind::Keyword => matches!(t.lexeme, "True" | "False" | "None"),
            TokenKind::Punctuation => matches!(t.lexeme, "(" | ")" | "[" | "]" | "{" | "}" | "," | ":"),
            TokenKind::Operator => matches!(t.lexeme, "-" | "+"),
            TokenKind::Newline | TokenKind::Indent | TokenKind::Comment => true,
            TokenKind::Identifier => false,
        };
        if !ok {
            return false;
        }
        if !matches!(t.kind, TokenKind::Newline | TokenKind::Indent | TokenKind::Comment) {
            significant += 1;
        }
    }
    significant > 0
}
