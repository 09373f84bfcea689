//! Comment-preserving formatter.
//!
//! Formatting re-emits the token stream with canonical spacing and
//! width-aware line breaks, so the formatted text parses to the same AST as
//! the input. Every comment is kept, attached to the nearest following token
//! (or end of input) and emitted on its own line. Layout is a pure function
//! of the token stream and width, which makes formatting idempotent.

use crate::lexer::{lex, Comment, ParseError, Token, TokenKind};
use crate::parse::parse_tokens;

/// Reformats policy text to the target width. Unparsable input is rejected.
pub fn format_text(text: &str, width: usize) -> Result<String, ParseError> {
    let (tokens, comments) = lex(text)?;
    parse_tokens(&tokens)?;
    Ok(layout(&tokens, &comments, width))
}

/// The comment texts of `text`, in source order; the formatter preserves
/// this multiset exactly.
pub fn comment_texts(text: &str) -> Result<Vec<String>, ParseError> {
    let (_tokens, comments) = lex(text)?;
    Ok(comments.into_iter().map(|c| c.text).collect())
}

#[derive(Clone, Copy, PartialEq)]
enum BraceKind {
    Condition,
    Record,
}

fn is_operand_end(kind: &TokenKind) -> bool {
    match kind {
        TokenKind::Ident(s) => !matches!(
            s.as_str(),
            "permit" | "forbid" | "when" | "unless" | "if" | "then" | "else" | "in" | "like"
                | "has"
        ),
        TokenKind::Num(_)
        | TokenKind::Str(_)
        | TokenKind::RParen
        | TokenKind::RBracket
        | TokenKind::RBrace => true,
        _ => false,
    }
}

struct Emitter<'a> {
    width: usize,
    out: String,
    line: String,
    line_indent: usize,
    pending_indent: usize,
    comments: &'a [Comment],
    next_comment: usize,
    prev: Option<TokenKind>,
    prev_minus_unary: bool,
    braces: Vec<BraceKind>,
    /// Char position in `line` after the last break opportunity.
    last_break: Option<usize>,
}

impl<'a> Emitter<'a> {
    fn new(width: usize, comments: &'a [Comment]) -> Self {
        Emitter {
            width,
            out: String::new(),
            line: String::new(),
            line_indent: 0,
            pending_indent: 0,
            comments,
            next_comment: 0,
            prev: None,
            prev_minus_unary: false,
            braces: Vec::new(),
            last_break: None,
        }
    }

    fn flush_line(&mut self) {
        if !self.line.is_empty() {
            self.out.push_str(&self.line);
            self.out.push('\n');
            self.line.clear();
        }
        self.last_break = None;
    }

    /// Ends the current line; the next one starts at `indent`.
    fn newline(&mut self, indent: usize) {
        self.flush_line();
        self.pending_indent = indent;
    }

    fn blank_line(&mut self) {
        self.flush_line();
        if !self.out.is_empty() {
            self.out.push('\n');
        }
    }

    /// Emits comments positioned before `pos`, each on its own line.
    fn comments_before(&mut self, pos: usize) {
        while self
            .comments
            .get(self.next_comment)
            .is_some_and(|c| c.span.start < pos)
        {
            let text = self.comments[self.next_comment].text.clone();
            self.next_comment += 1;
            let indent = if self.line.is_empty() {
                self.pending_indent
            } else {
                self.line_indent
            };
            self.flush_line();
            self.out.push_str(&" ".repeat(indent));
            self.out.push_str("//");
            self.out.push_str(&text);
            self.out.push('\n');
            self.pending_indent = indent;
        }
    }

    fn space_before(&self, kind: &TokenKind) -> bool {
        let Some(prev) = &self.prev else {
            return false;
        };
        match kind {
            TokenKind::Comma
            | TokenKind::Semi
            | TokenKind::RParen
            | TokenKind::RBracket
            | TokenKind::Dot
            | TokenKind::DoubleColon
            | TokenKind::Colon => return false,
            TokenKind::RBrace => {
                return self.braces.last() == Some(&BraceKind::Condition)
                    && *prev != TokenKind::LBrace;
            }
            _ => {}
        }
        match prev {
            TokenKind::LParen
            | TokenKind::LBracket
            | TokenKind::Dot
            | TokenKind::DoubleColon
            | TokenKind::Bang => return false,
            TokenKind::LBrace => return self.braces.last() == Some(&BraceKind::Condition),
            TokenKind::Minus if self.prev_minus_unary => return false,
            _ => {}
        }
        match kind {
            TokenKind::LParen => match prev {
                TokenKind::Ident(s) => matches!(
                    s.as_str(),
                    "if" | "then" | "else" | "in" | "like" | "has" | "when" | "unless"
                ),
                _ => true,
            },
            TokenKind::LBracket => !is_operand_end(prev),
            _ => true,
        }
    }

    fn token(&mut self, tok: &Token) {
        self.comments_before(tok.span.start);
        let space = self.space_before(&tok.kind);
        let text = tok.kind.text();

        if self.line.is_empty() {
            self.line = " ".repeat(self.pending_indent);
            self.line_indent = self.pending_indent;
        } else {
            let needed = self.line.chars().count() + usize::from(space) + text.chars().count();
            if needed > self.width {
                if let Some(break_at) = self.last_break {
                    // Move everything after the last break opportunity to a
                    // continuation line.
                    let head: String = self.line.chars().take(break_at).collect();
                    let tail: String = self.line.chars().skip(break_at).collect();
                    self.out.push_str(head.trim_end());
                    self.out.push('\n');
                    self.line_indent += 2;
                    self.line =
                        format!("{}{}", " ".repeat(self.line_indent), tail.trim_start());
                    self.last_break = None;
                    if space {
                        self.line.push(' ');
                    }
                } else if space {
                    // No earlier break point: break before this token.
                    self.flush_line();
                    self.line_indent += 2;
                    self.line = " ".repeat(self.line_indent);
                }
            } else if space {
                self.line.push(' ');
            }
        }
        self.line.push_str(&text);

        match &tok.kind {
            TokenKind::LBrace => {
                let kind = match &self.prev {
                    Some(TokenKind::Ident(s)) if s == "when" || s == "unless" => {
                        BraceKind::Condition
                    }
                    _ => BraceKind::Record,
                };
                self.braces.push(kind);
            }
            TokenKind::RBrace => {
                self.braces.pop();
            }
            TokenKind::AndAnd | TokenKind::OrOr | TokenKind::Comma => {
                self.last_break = Some(self.line.chars().count());
            }
            _ => {}
        }

        self.prev_minus_unary = tok.kind == TokenKind::Minus
            && !self.prev.as_ref().is_some_and(is_operand_end);
        self.prev = Some(tok.kind.clone());
    }

    fn finish(mut self) -> String {
        // Trailing comments attach to end of input.
        self.comments_before(usize::MAX);
        self.flush_line();
        self.out
    }
}

/// Width of the token run when rendered inline, ignoring comments.
fn inline_width(tokens: &[Token]) -> usize {
    let mut emitter = Emitter::new(usize::MAX, &[]);
    for tok in tokens {
        emitter.token(tok);
    }
    emitter.line.chars().count()
}

/// One policy's structure within the token stream.
struct PolicyShape {
    /// Range of the scope tokens: `effect ( ... )`.
    scope: std::ops::Range<usize>,
    /// `(keyword index, open brace, close brace)` per condition.
    conditions: Vec<(usize, usize, usize)>,
    semi: usize,
}

/// Splits a parse-validated token stream into policy shapes.
fn shape_policies(tokens: &[Token]) -> Vec<PolicyShape> {
    let mut shapes = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let start = i;
        // effect '(' ... ')'
        let mut depth = 0usize;
        let mut scope_end = i;
        for (j, tok) in tokens.iter().enumerate().skip(i) {
            match tok.kind {
                TokenKind::LParen => depth += 1,
                TokenKind::RParen => {
                    depth -= 1;
                    if depth == 0 {
                        scope_end = j + 1;
                        break;
                    }
                }
                _ => {}
            }
        }
        i = scope_end;
        let mut conditions = Vec::new();
        while matches!(&tokens.get(i).map(|t| &t.kind), Some(TokenKind::Ident(s)) if *s == "when" || *s == "unless")
        {
            let kw = i;
            let open = i + 1;
            let mut depth = 0usize;
            let mut close = open;
            for (j, tok) in tokens.iter().enumerate().skip(open) {
                match tok.kind {
                    TokenKind::LBrace => depth += 1,
                    TokenKind::RBrace => {
                        depth -= 1;
                        if depth == 0 {
                            close = j;
                            break;
                        }
                    }
                    _ => {}
                }
            }
            conditions.push((kw, open, close));
            i = close + 1;
        }
        // The parser guarantees a terminating semicolon.
        let semi = i;
        i += 1;
        shapes.push(PolicyShape {
            scope: start..scope_end,
            conditions,
            semi,
        });
    }
    shapes
}

fn layout(tokens: &[Token], comments: &[Comment], width: usize) -> String {
    let width = width.max(16);
    let mut emitter = Emitter::new(width, comments);
    for shape in shape_policies(tokens) {
        emitter.blank_line();
        emitter.pending_indent = 0;

        let scope_tokens = &tokens[shape.scope.clone()];
        if inline_width(scope_tokens) <= width || scope_tokens.len() < 4 {
            for tok in scope_tokens {
                emitter.token(tok);
            }
        } else {
            // effect '(' on one line, one scope component per line.
            emitter.token(&tokens[shape.scope.start]);
            emitter.token(&tokens[shape.scope.start + 1]);
            emitter.newline(2);
            let inner = (shape.scope.start + 2)..(shape.scope.end - 1);
            let mut depth = 0usize;
            for j in inner {
                match tokens[j].kind {
                    TokenKind::LParen | TokenKind::LBracket | TokenKind::LBrace => depth += 1,
                    TokenKind::RParen | TokenKind::RBracket | TokenKind::RBrace => depth -= 1,
                    _ => {}
                }
                emitter.token(&tokens[j]);
                if tokens[j].kind == TokenKind::Comma && depth == 0 {
                    emitter.newline(2);
                }
            }
            emitter.newline(0);
            emitter.token(&tokens[shape.scope.end - 1]);
        }

        for (kw, open, close) in &shape.conditions {
            emitter.newline(2);
            let fits = {
                let head = inline_width(&tokens[*kw..=*close]);
                2 + head <= width
            };
            emitter.token(&tokens[*kw]);
            emitter.token(&tokens[*open]);
            if fits {
                for tok in &tokens[open + 1..*close] {
                    emitter.token(tok);
                }
                emitter.token(&tokens[*close]);
            } else {
                emitter.newline(4);
                for tok in &tokens[open + 1..*close] {
                    emitter.token(tok);
                }
                emitter.newline(2);
                emitter.token(&tokens[*close]);
            }
        }
        emitter.token(&tokens[shape.semi]);
        emitter.newline(0);
    }
    emitter.finish()
}
