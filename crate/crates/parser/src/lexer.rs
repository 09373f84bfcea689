//! Tokenizer for the policy language. Comments are collected out of band so
//! the formatter can re-attach them; string tokens keep their raw (escaped)
//! text and are decoded on demand.

use std::fmt;

use thiserror::Error;

/// Byte offsets into the input, `start <= end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
}

impl SourceSpan {
    pub fn new(start: usize, end: usize) -> Self {
        SourceSpan { start, end }
    }
}

/// Syntax error with the byte range it was detected at. Parsing never panics
/// or aborts; every failure is reported as a value of this type.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} (at byte {})", span.start)]
pub struct ParseError {
    pub message: String,
    pub span: SourceSpan,
}

impl ParseError {
    pub fn new(message: impl Into<String>, span: SourceSpan) -> Self {
        ParseError {
            message: message.into(),
            span,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    /// Identifier or keyword; keywords are distinguished by text.
    Ident(String),
    /// String literal; the raw text between the quotes, escapes undecoded.
    Str(String),
    /// Integer literal digits, value undecoded.
    Num(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    DoubleColon,
    Dot,
    Eq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Bang,
    AndAnd,
    OrOr,
}

impl TokenKind {
    /// The surface text of the token, used by the formatter.
    pub fn text(&self) -> String {
        match self {
            TokenKind::Ident(s) => s.clone(),
            TokenKind::Str(raw) => format!("\"{raw}\""),
            TokenKind::Num(s) => s.clone(),
            TokenKind::LParen => "(".to_string(),
            TokenKind::RParen => ")".to_string(),
            TokenKind::LBrace => "{".to_string(),
            TokenKind::RBrace => "}".to_string(),
            TokenKind::LBracket => "[".to_string(),
            TokenKind::RBracket => "]".to_string(),
            TokenKind::Comma => ",".to_string(),
            TokenKind::Semi => ";".to_string(),
            TokenKind::Colon => ":".to_string(),
            TokenKind::DoubleColon => "::".to_string(),
            TokenKind::Dot => ".".to_string(),
            TokenKind::Eq => "==".to_string(),
            TokenKind::Neq => "!=".to_string(),
            TokenKind::Lt => "<".to_string(),
            TokenKind::Le => "<=".to_string(),
            TokenKind::Gt => ">".to_string(),
            TokenKind::Ge => ">=".to_string(),
            TokenKind::Plus => "+".to_string(),
            TokenKind::Minus => "-".to_string(),
            TokenKind::Bang => "!".to_string(),
            TokenKind::AndAnd => "&&".to_string(),
            TokenKind::OrOr => "||".to_string(),
        }
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Ident(s) => write!(f, "`{s}`"),
            TokenKind::Str(_) => write!(f, "string literal"),
            TokenKind::Num(_) => write!(f, "integer literal"),
            other => write!(f, "`{}`", other.text()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
}

/// A line comment: the text after `//`, excluding the newline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comment {
    pub text: String,
    pub span: SourceSpan,
}

/// Words with special meaning; they cannot be used as bare attribute names
/// or record keys (string syntax covers those).
pub const RESERVED: &[&str] = &[
    "permit", "forbid", "when", "unless", "principal", "action", "resource", "context", "true",
    "false", "if", "then", "else", "in", "like", "has",
];

pub fn is_reserved(word: &str) -> bool {
    RESERVED.contains(&word)
}

/// Tokenizes `input`, returning tokens and comments separately.
pub fn lex(input: &str) -> Result<(Vec<Token>, Vec<Comment>), ParseError> {
    let mut tokens = Vec::new();
    let mut comments = Vec::new();
    let mut chars = input.char_indices().peekable();

    while let Some((start, c)) = chars.next() {
        let kind = match c {
            c if c.is_whitespace() => continue,
            '/' => {
                if chars.peek().map(|&(_, c)| c) == Some('/') {
                    chars.next();
                    let text_start = start + 2;
                    let mut end = input.len();
                    for (i, c) in chars.by_ref() {
                        if c == '\n' {
                            end = i;
                            break;
                        }
                    }
                    comments.push(Comment {
                        text: input[text_start..end].to_string(),
                        span: SourceSpan::new(start, end),
                    });
                    continue;
                }
                return Err(ParseError::new(
                    "unexpected character `/`",
                    SourceSpan::new(start, start + 1),
                ));
            }
            '(' => TokenKind::LParen,
            ')' => TokenKind::RParen,
            '{' => TokenKind::LBrace,
            '}' => TokenKind::RBrace,
            '[' => TokenKind::LBracket,
            ']' => TokenKind::RBracket,
            ',' => TokenKind::Comma,
            ';' => TokenKind::Semi,
            '.' => TokenKind::Dot,
            '+' => TokenKind::Plus,
            '-' => TokenKind::Minus,
            ':' => {
                if chars.peek().map(|&(_, c)| c) == Some(':') {
                    chars.next();
                    TokenKind::DoubleColon
                } else {
                    TokenKind::Colon
                }
            }
            '=' => {
                if chars.peek().map(|&(_, c)| c) == Some('=') {
                    chars.next();
                    TokenKind::Eq
                } else {
                    return Err(ParseError::new(
                        "expected `==`",
                        SourceSpan::new(start, start + 1),
                    ));
                }
            }
            '!' => {
                if chars.peek().map(|&(_, c)| c) == Some('=') {
                    chars.next();
                    TokenKind::Neq
                } else {
                    TokenKind::Bang
                }
            }
            '<' => {
                if chars.peek().map(|&(_, c)| c) == Some('=') {
                    chars.next();
                    TokenKind::Le
                } else {
                    TokenKind::Lt
                }
            }
            '>' => {
                if chars.peek().map(|&(_, c)| c) == Some('=') {
                    chars.next();
                    TokenKind::Ge
                } else {
                    TokenKind::Gt
                }
            }
            '&' => {
                if chars.peek().map(|&(_, c)| c) == Some('&') {
                    chars.next();
                    TokenKind::AndAnd
                } else {
                    return Err(ParseError::new(
                        "expected `&&`",
                        SourceSpan::new(start, start + 1),
                    ));
                }
            }
            '|' => {
                if chars.peek().map(|&(_, c)| c) == Some('|') {
                    chars.next();
                    TokenKind::OrOr
                } else {
                    return Err(ParseError::new(
                        "expected `||`",
                        SourceSpan::new(start, start + 1),
                    ));
                }
            }
            '"' => {
                let content_start = start + 1;
                let mut end = None;
                while let Some((i, c)) = chars.next() {
                    match c {
                        '"' => {
                            end = Some(i);
                            break;
                        }
                        '\\' => {
                            // Skip the escaped character so `\"` does not
                            // close the literal.
                            chars.next();
                        }
                        '\n' => {
                            return Err(ParseError::new(
                                "string literal contains a raw newline",
                                SourceSpan::new(start, i),
                            ));
                        }
                        _ => {}
                    }
                }
                let Some(end) = end else {
                    return Err(ParseError::new(
                        "unterminated string literal",
                        SourceSpan::new(start, input.len()),
                    ));
                };
                let token = Token {
                    kind: TokenKind::Str(input[content_start..end].to_string()),
                    span: SourceSpan::new(start, end + 1),
                };
                tokens.push(token);
                continue;
            }
            c if c.is_ascii_digit() => {
                let mut end = start + 1;
                while let Some(&(i, c)) = chars.peek() {
                    if c.is_ascii_digit() {
                        chars.next();
                        end = i + 1;
                    } else {
                        break;
                    }
                }
                tokens.push(Token {
                    kind: TokenKind::Num(input[start..end].to_string()),
                    span: SourceSpan::new(start, end),
                });
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut end = start + c.len_utf8();
                while let Some(&(i, c)) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        chars.next();
                        end = i + 1;
                    } else {
                        break;
                    }
                }
                tokens.push(Token {
                    kind: TokenKind::Ident(input[start..end].to_string()),
                    span: SourceSpan::new(start, end),
                });
                continue;
            }
            c => {
                return Err(ParseError::new(
                    format!("unexpected character `{}`", c.escape_debug()),
                    SourceSpan::new(start, start + c.len_utf8()),
                ));
            }
        };
        let len = match &kind {
            TokenKind::DoubleColon
            | TokenKind::Eq
            | TokenKind::Neq
            | TokenKind::Le
            | TokenKind::Ge
            | TokenKind::AndAnd
            | TokenKind::OrOr => 2,
            _ => 1,
        };
        tokens.push(Token {
            kind,
            span: SourceSpan::new(start, start + len),
        });
    }

    Ok((tokens, comments))
}

/// Decodes the escapes of a plain string literal body.
///
/// Supported escapes: `\"  \\  \n  \t  \0  \u{hex}`.
pub fn unescape_string(raw: &str, span: SourceSpan) -> Result<String, ParseError> {
    let mut out = String::with_capacity(raw.len());
    let mut chars = raw.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('"') => out.push('"'),
            Some('\\') => out.push('\\'),
            Some('n') => out.push('\n'),
            Some('t') => out.push('\t'),
            Some('0') => out.push('\0'),
            Some('u') => out.push(unescape_unicode(&mut chars, span)?),
            Some(c) => {
                return Err(ParseError::new(
                    format!("unknown escape `\\{}`", c.escape_debug()),
                    span,
                ));
            }
            None => return Err(ParseError::new("dangling escape", span)),
        }
    }
    Ok(out)
}

/// Decodes a `like` pattern literal body: plain string escapes plus `\*` for
/// a literal asterisk; a bare `*` is the wildcard.
pub fn unescape_pattern(
    raw: &str,
    span: SourceSpan,
) -> Result<warden_core::Pattern, ParseError> {
    use warden_core::PatElem;
    let mut elems = Vec::new();
    let mut chars = raw.chars();
    while let Some(c) = chars.next() {
        match c {
            '*' => elems.push(PatElem::Wildcard),
            '\\' => {
                let lit = match chars.next() {
                    Some('*') => '*',
                    Some('"') => '"',
                    Some('\\') => '\\',
                    Some('n') => '\n',
                    Some('t') => '\t',
                    Some('0') => '\0',
                    Some('u') => unescape_unicode(&mut chars, span)?,
                    Some(c) => {
                        return Err(ParseError::new(
                            format!("unknown escape `\\{}` in pattern", c.escape_debug()),
                            span,
                        ));
                    }
                    None => return Err(ParseError::new("dangling escape in pattern", span)),
                };
                elems.push(PatElem::Literal(lit));
            }
            c => elems.push(PatElem::Literal(c)),
        }
    }
    Ok(warden_core::Pattern(elems))
}

fn unescape_unicode(
    chars: &mut std::str::Chars<'_>,
    span: SourceSpan,
) -> Result<char, ParseError> {
    if chars.next() != Some('{') {
        return Err(ParseError::new("expected `{` after `\\u`", span));
    }
    let mut hex = String::new();
    for c in chars.by_ref() {
        if c == '}' {
            let code = u32::from_str_radix(&hex, 16)
                .ok()
                .filter(|_| !hex.is_empty() && hex.len() <= 6)
                .ok_or_else(|| ParseError::new("invalid unicode escape", span))?;
            return char::from_u32(code)
                .ok_or_else(|| ParseError::new("escape is not a unicode scalar value", span));
        }
        hex.push(c);
    }
    Err(ParseError::new("unterminated unicode escape", span))
}

/// Escapes a string for a policy-text literal; [`unescape_string`] inverts
/// it for every input.
pub fn escape_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\0' => out.push_str("\\0"),
            c if (c as u32) < 0x20 || c as u32 == 0x7f => {
                out.push_str(&format!("\\u{{{:x}}}", c as u32));
            }
            c => out.push(c),
        }
    }
    out
}

/// Escapes a pattern for a `like` literal; [`unescape_pattern`] inverts it.
pub fn escape_pattern(pattern: &warden_core::Pattern) -> String {
    use warden_core::PatElem;
    let mut out = String::new();
    for elem in &pattern.0 {
        match elem {
            PatElem::Wildcard => out.push('*'),
            PatElem::Literal('*') => out.push_str("\\*"),
            PatElem::Literal(c) => out.push_str(&escape_string(&c.to_string())),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_policy_shapes() {
        let (tokens, comments) =
            lex("permit(principal == User::\"a\", action, resource); // done").unwrap();
        assert_eq!(comments.len(), 1);
        assert_eq!(comments[0].text, " done");
        assert!(matches!(tokens[0].kind, TokenKind::Ident(ref s) if s == "permit"));
        assert!(tokens.iter().any(|t| t.kind == TokenKind::DoubleColon));
        assert!(matches!(
            tokens.last().unwrap().kind,
            TokenKind::Semi
        ));
    }

    #[test]
    fn rejects_stray_characters() {
        assert!(lex("permit @").is_err());
        assert!(lex("a & b").is_err());
        assert!(lex("a = b").is_err());
        assert!(lex("\"unterminated").is_err());
        assert!(lex("\"raw\nnewline\"").is_err());
    }

    #[test]
    fn escape_roundtrip_samples() {
        for s in ["", "plain", "q\"uote", "back\\slash", "new\nline", "t\tab", "nul\0", "héλ", "\r"] {
            let escaped = escape_string(s);
            assert!(!escaped.contains('\n'));
            let back = unescape_string(&escaped, SourceSpan::default()).unwrap();
            assert_eq!(back, s);
        }
    }

    #[test]
    fn pattern_escapes() {
        use warden_core::{PatElem, Pattern};
        let p = Pattern(vec![
            PatElem::Literal('a'),
            PatElem::Literal('*'),
            PatElem::Wildcard,
        ]);
        let text = escape_pattern(&p);
        assert_eq!(text, "a\\**");
        let back = unescape_pattern(&text, SourceSpan::default()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn unicode_escapes() {
        let s = unescape_string("\\u{1F600}", SourceSpan::default()).unwrap();
        assert_eq!(s, "\u{1F600}");
        assert!(unescape_string("\\u{}", SourceSpan::default()).is_err());
        assert!(unescape_string("\\u{d800}", SourceSpan::default()).is_err());
        assert!(unescape_string("\\u{110000}", SourceSpan::default()).is_err());
        assert!(unescape_string("\\q", SourceSpan::default()).is_err());
    }
}
