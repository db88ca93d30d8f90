//! Hand-written tokenizer for the subset of Python the corpus uses.
//!
//! The token stream is lossless for non-whitespace text: every
//! non-whitespace character belongs to exactly one token. Only logical line
//! ends produce `Newline` tokens; line breaks inside brackets or after a
//! backslash continuation are skipped like ordinary whitespace.

use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

/// Python 3 hard keywords. `async` is lexed but rejected as unsupported.
pub const KEYWORDS: &[&str] = &[
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class",
    "continue", "def", "del", "elif", "else", "except", "finally", "for", "from", "global", "if",
    "import", "in", "is", "lambda", "nonlocal", "not", "or", "pass", "raise", "return", "try",
    "while", "with", "yield",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Identifier,
    Keyword,
    Number,
    String,
    Operator,
    Punctuation,
    Comment,
    Newline,
    /// Leading whitespace of a logical line.
    Indent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token<'src> {
    pub kind: TokenKind,
    pub lexeme: &'src str,
    /// Character (not byte) index of the first character.
    pub offset: usize,
    pub byte_offset: usize,
    /// First non-whitespace token of a logical line.
    pub line_start: bool,
}

impl Token<'_> {
    pub fn byte_end(&self) -> usize {
        self.byte_offset + self.lexeme.len()
    }

    pub fn is_keyword(&self, word: &str) -> bool {
        self.kind == TokenKind::Keyword && self.lexeme == word
    }

    pub fn is_punct(&self, p: &str) -> bool {
        self.kind == TokenKind::Punctuation && self.lexeme == p
    }

    pub fn is_op(&self, op: &str) -> bool {
        self.kind == TokenKind::Operator && self.lexeme == op
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LexErrorReason {
    UnterminatedString,
    IllegalCharacter(char),
    UnbalancedBracket(char),
    UnclosedBracket(char),
    Unsupported(&'static str),
}

impl fmt::Display for LexErrorReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::UnterminatedString => f.write_str("unterminated string literal"),
            Self::IllegalCharacter(c) => write!(f, "illegal character {c:?}"),
            Self::UnbalancedBracket(c) => write!(f, "unbalanced closing bracket {c:?}"),
            Self::UnclosedBracket(c) => write!(f, "bracket {c:?} never closed"),
            Self::Unsupported(what) => write!(f, "unsupported construct: {what}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("lex error at offset {offset}: {reason}")]
pub struct LexError {
    /// Character index where the problem was detected.
    pub offset: usize,
    pub reason: LexErrorReason,
}

const OPERATORS: &[&str] = &[
    "**=", "//=", ">>=", "<<=", "...", "->", ":=", "**", "//", "<<", ">>", "<=", ">=", "==", "!=",
    "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "@=", "+", "-", "*", "/", "%", "@", "&", "|",
    "^", "~", "<", ">", "=", ".", ",", ":", ";", "(", ")", "[", "]", "{", "}",
];

fn is_punctuation(op: &str) -> bool {
    matches!(op, "(" | ")" | "[" | "]" | "{" | "}" | "," | ":" | ";" | "." | "..." | "->")
}

fn is_ident_start(c: char) -> bool {
    c == '_' || c.is_alphabetic()
}

fn is_ident_continue(c: char) -> bool {
    c == '_' || c.is_alphanumeric()
}

struct Lexer<'src> {
    src: &'src str,
    pos: usize,
    chars: usize,
    brackets: Vec<char>,
    logical_start: bool,
    physical_start: bool,
    tokens: Vec<Token<'src>>,
}

impl<'src> Lexer<'src> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn rest(&self) -> &'src str {
        &self.src[self.pos..]
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        self.chars += 1;
        Some(c)
    }

    fn err(&self, offset: usize, reason: LexErrorReason) -> LexError {
        LexError { offset, reason }
    }

    fn push(&mut self, kind: TokenKind, start: usize, start_chars: usize) {
        let line_start = self.logical_start
            && !matches!(kind, TokenKind::Comment | TokenKind::Indent | TokenKind::Newline);
        if line_start {
            self.logical_start = false;
        }
        self.tokens.push(Token {
            kind,
            lexeme: &self.src[start..self.pos],
            offset: start_chars,
            byte_offset: start,
            line_start,
        });
    }

    fn run(mut self) -> Result<Vec<Token<'src>>, LexError> {
        while let Some(c) = self.peek() {
            let (start, start_chars) = (self.pos, self.chars);

            if self.physical_start && self.brackets.is_empty() && self.logical_start {
                self.physical_start = false;
                while matches!(self.peek(), Some(' ' | '\t' | '\x0c')) {
                    self.bump();
                }
                let blank = matches!(self.peek(), None | Some('\n' | '\r' | '#'));
                if !blank && self.pos > start {
                    self.push(TokenKind::Indent, start, start_chars);
                }
                continue;
            }
            self.physical_start = false;

            match c {
                ' ' | '\t' | '\x0c' => {
                    self.bump();
                }
                '\n' | '\r' => {
                    self.bump();
                    if c == '\r' && self.peek() == Some('\n') {
                        self.bump();
                    }
                    if self.brackets.is_empty() && !self.logical_start {
                        self.push(TokenKind::Newline, start, start_chars);
                        self.logical_start = true;
                    }
                    self.physical_start = true;
                }
                '#' => {
                    while !matches!(self.peek(), None | Some('\n' | '\r')) {
                        self.bump();
                    }
                    self.push(TokenKind::Comment, start, start_chars);
                }
                '\\' => {
                    if !matches!(self.peek_at(1), Some('\n' | '\r')) {
                        return Err(self.err(start_chars, LexErrorReason::IllegalCharacter('\\')));
                    }
                    self.bump();
                    self.push(TokenKind::Punctuation, start, start_chars);
                    if self.bump() == Some('\r') && self.peek() == Some('\n') {
                        self.bump();
                    }
                }
                '\'' | '"' => self.string(start, start_chars, 0)?,
                c if is_ident_start(c) => {
                    if let Some(prefix_len) = self.string_prefix() {
                        self.string(start, start_chars, prefix_len)?;
                        continue;
                    }
                    while self.peek().is_some_and(is_ident_continue) {
                        self.bump();
                    }
                    let word = &self.src[start..self.pos];
                    if word == "async" {
                        return Err(self.err(start_chars, LexErrorReason::Unsupported("async")));
                    }
                    let kind = if is_keyword(word) {
                        TokenKind::Keyword
                    } else {
                        TokenKind::Identifier
                    };
                    self.push(kind, start, start_chars);
                }
                c if c.is_ascii_digit()
                    || (c == '.' && self.peek_at(1).is_some_and(|d| d.is_ascii_digit())) =>
                {
                    self.number();
                    self.push(TokenKind::Number, start, start_chars);
                }
                _ => self.operator(start, start_chars)?,
            }
        }
        if let Some(&open) = self.brackets.last() {
            return Err(self.err(self.chars, LexErrorReason::UnclosedBracket(open)));
        }
        Ok(self.tokens)
    }

    /// Length of a string prefix (`r`, `b`, `f`, `u`, `rb`, `fr`, ...) when
    /// the identifier-looking text at the cursor actually opens a string.
    fn string_prefix(&self) -> Option<usize> {
        let rest = self.rest().as_bytes();
        let quote_at = |i: usize| matches!(rest.get(i), Some(b'\'' | b'"'));
        let lower = |i: usize| rest.get(i).map(u8::to_ascii_lowercase);
        match (lower(0), lower(1)) {
            (Some(b'r' | b'b' | b'f' | b'u'), _) if quote_at(1) => Some(1),
            (Some(b'r'), Some(b'b' | b'f')) | (Some(b'b' | b'f'), Some(b'r')) if quote_at(2) => {
                Some(2)
            }
            _ => None,
        }
    }

    fn string(&mut self, start: usize, start_chars: usize, prefix: usize) -> Result<(), LexError> {
        for _ in 0..prefix {
            self.bump();
        }
        let quote = self.bump().expect("caller saw a quote");
        let triple = self.peek() == Some(quote) && self.peek_at(1) == Some(quote);
        if triple {
            self.bump();
            self.bump();
        }
        loop {
            let Some(c) = self.bump() else {
                return Err(self.err(start_chars, LexErrorReason::UnterminatedString));
            };
            match c {
                '\\' => {
                    if self.bump().is_none() {
                        return Err(self.err(start_chars, LexErrorReason::UnterminatedString));
                    }
                }
                '\n' | '\r' if !triple => {
                    return Err(self.err(start_chars, LexErrorReason::UnterminatedString));
                }
                c if c == quote => {
                    if !triple {
                        break;
                    }
                    if self.peek() == Some(quote) && self.peek_at(1) == Some(quote) {
                        self.bump();
                        self.bump();
                        break;
                    }
                }
                _ => {}
            }
        }
        self.push(TokenKind::String, start, start_chars);
        Ok(())
    }

    fn number(&mut self) {
        let radix_prefix = self.peek() == Some('0')
            && matches!(self.peek_at(1), Some('x' | 'X' | 'o' | 'O' | 'b' | 'B'));
        if radix_prefix {
            self.bump();
            self.bump();
            while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
                self.bump();
            }
            return;
        }
        let digits = |lx: &mut Self| {
            while lx.peek().is_some_and(|c| c.is_ascii_digit() || c == '_') {
                lx.bump();
            }
        };
        digits(self);
        if self.peek() == Some('.') {
            self.bump();
            digits(self);
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let signed = matches!(self.peek_at(1), Some('+' | '-'));
            let exp_digit = self.peek_at(if signed { 2 } else { 1 });
            if exp_digit.is_some_and(|c| c.is_ascii_digit()) {
                self.bump();
                if signed {
                    self.bump();
                }
                digits(self);
            }
        }
        if matches!(self.peek(), Some('j' | 'J')) {
            self.bump();
        }
    }

    fn operator(&mut self, start: usize, start_chars: usize) -> Result<(), LexError> {
        let rest = self.rest();
        let Some(op) = OPERATORS.iter().find(|op| rest.starts_with(**op)) else {
            let c = self.peek().unwrap_or('\0');
            return Err(self.err(start_chars, LexErrorReason::IllegalCharacter(c)));
        };
        for _ in 0..op.len() {
            self.bump();
        }
        match *op {
            "(" | "[" | "{" => self.brackets.push(op.as_bytes()[0] as char),
            ")" | "]" | "}" => {
                let close = op.as_bytes()[0] as char;
                let expected = match self.brackets.pop() {
                    Some('(') => ')',
                    Some('[') => ']',
                    Some('{') => '}',
                    _ => '\0',
                };
                if expected != close {
                    return Err(self.err(start_chars, LexErrorReason::UnbalancedBracket(close)));
                }
            }
            _ => {}
        }
        let kind = if is_punctuation(op) {
            TokenKind::Punctuation
        } else {
            TokenKind::Operator
        };
        self.push(kind, start, start_chars);
        Ok(())
    }
}

/// Tokenizes Python source.
///
/// Keywords inside strings or comments are never reported as keywords; each
/// string literal (raw, byte, f- and triple-quoted included) and each comment
/// is a single token.
pub fn tokenize(src: &str) -> Result<Vec<Token<'_>>, LexError> {
    Lexer {
        src,
        pos: 0,
        chars: 0,
        brackets: Vec::new(),
        logical_start: true,
        physical_start: true,
        tokens: Vec::new(),
    }
    .run()
}
