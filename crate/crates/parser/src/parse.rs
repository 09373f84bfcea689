//! Recursive-descent parser from tokens to the policy AST.
//!
//! Total on arbitrary input: every failure is a [`ParseError`], and a nesting
//! depth limit keeps the descent stack bounded on adversarial input.

use warden_core::{
    ActionScopeConstraint, BinOp, Condition, ConditionKind, Effect, EntityType, EntityUid, Expr,
    Policy, PolicySet, ScopeConstraint,
};

use crate::lexer::{
    is_reserved, lex, unescape_pattern, unescape_string, ParseError, SourceSpan, Token,
    TokenKind,
};

/// Maximum expression nesting depth accepted by the parser.
pub const MAX_NESTING_DEPTH: usize = 128;

/// Parses policy text into a policy set. Ids are assigned `policy0`,
/// `policy1`, ... in textual order.
pub fn parse_policy_set(text: &str) -> Result<PolicySet, ParseError> {
    let (tokens, _comments) = lex(text)?;
    parse_tokens(&tokens)
}

/// Like [`parse_policy_set`] but on raw bytes; invalid UTF-8 is a
/// [`ParseError`].
pub fn parse_policy_set_bytes(bytes: &[u8]) -> Result<PolicySet, ParseError> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_policy_set(text),
        Err(e) => Err(ParseError::new(
            "input is not valid UTF-8",
            SourceSpan::new(e.valid_up_to(), bytes.len()),
        )),
    }
}

/// Parses a lexed token stream; used by the formatter to validate input
/// without re-lexing.
pub fn parse_tokens(tokens: &[Token]) -> Result<PolicySet, ParseError> {
    let mut parser = Parser { tokens, pos: 0 };
    let mut policies = Vec::new();
    while !parser.at_end() {
        let mut policy = parser.policy()?;
        policy.id = format!("policy{}", policies.len());
        policies.push(policy);
    }
    PolicySet::new(policies)
        .map_err(|e| ParseError::new(e.to_string(), SourceSpan::default()))
}

/// Parses a single expression followed by end of input; test convenience.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let (tokens, _comments) = lex(text)?;
    let mut parser = Parser {
        tokens: &tokens,
        pos: 0,
    };
    let expr = parser.expr(0)?;
    if !parser.at_end() {
        return Err(parser.error_here("unexpected trailing tokens"));
    }
    Ok(expr)
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
}

impl<'t> Parser<'t> {
    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn peek(&self) -> Option<&'t TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn peek2(&self) -> Option<&'t TokenKind> {
        self.tokens.get(self.pos + 1).map(|t| &t.kind)
    }

    fn here(&self) -> SourceSpan {
        self.tokens
            .get(self.pos)
            .or_else(|| self.tokens.last())
            .map(|t| t.span)
            .unwrap_or_default()
    }

    fn error_here(&self, message: impl Into<String>) -> ParseError {
        ParseError::new(message, self.here())
    }

    fn advance(&mut self) -> Option<&'t Token> {
        let tok = self.tokens.get(self.pos);
        if tok.is_some() {
            self.pos += 1;
        }
        tok
    }

    fn expect(&mut self, kind: &TokenKind) -> Result<(), ParseError> {
        match self.peek() {
            Some(k) if k == kind => {
                self.pos += 1;
                Ok(())
            }
            Some(k) => Err(self.error_here(format!("expected {kind}, found {k}"))),
            None => Err(self.error_here(format!("expected {kind}, found end of input"))),
        }
    }

    /// Consumes an identifier with exactly the given text.
    fn expect_word(&mut self, word: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(TokenKind::Ident(s)) if s == word => {
                self.pos += 1;
                Ok(())
            }
            Some(k) => Err(self.error_here(format!("expected `{word}`, found {k}"))),
            None => Err(self.error_here(format!("expected `{word}`, found end of input"))),
        }
    }

    fn eat_word(&mut self, word: &str) -> bool {
        if matches!(self.peek(), Some(TokenKind::Ident(s)) if s == word) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek() == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    // ---- policies ----

    fn policy(&mut self) -> Result<Policy, ParseError> {
        let effect = match self.peek() {
            Some(TokenKind::Ident(s)) if s == "permit" => Effect::Permit,
            Some(TokenKind::Ident(s)) if s == "forbid" => Effect::Forbid,
            Some(k) => return Err(self.error_here(format!("expected `permit` or `forbid`, found {k}"))),
            None => return Err(self.error_here("expected `permit` or `forbid`, found end of input")),
        };
        self.pos += 1;
        self.expect(&TokenKind::LParen)?;
        self.expect_word("principal")?;
        let principal_scope = self.entity_scope()?;
        self.expect(&TokenKind::Comma)?;
        self.expect_word("action")?;
        let action_scope = self.action_scope()?;
        self.expect(&TokenKind::Comma)?;
        self.expect_word("resource")?;
        let resource_scope = self.entity_scope()?;
        self.expect(&TokenKind::RParen)?;

        let mut conditions = Vec::new();
        loop {
            let kind = if self.eat_word("when") {
                ConditionKind::When
            } else if self.eat_word("unless") {
                ConditionKind::Unless
            } else {
                break;
            };
            self.expect(&TokenKind::LBrace)?;
            let body = self.expr(0)?;
            self.expect(&TokenKind::RBrace)?;
            conditions.push(Condition { kind, body });
        }
        self.expect(&TokenKind::Semi)?;
        Ok(Policy {
            id: String::new(), // assigned by the caller in textual order
            effect,
            principal_scope,
            action_scope,
            resource_scope,
            conditions,
        })
    }

    fn entity_scope(&mut self) -> Result<ScopeConstraint, ParseError> {
        if self.eat(&TokenKind::Eq) {
            Ok(ScopeConstraint::Eq(self.entity_uid()?))
        } else if self.eat_word("in") {
            Ok(ScopeConstraint::In(self.entity_uid()?))
        } else {
            Ok(ScopeConstraint::Any)
        }
    }

    fn action_scope(&mut self) -> Result<ActionScopeConstraint, ParseError> {
        if self.eat(&TokenKind::Eq) {
            Ok(ActionScopeConstraint::Eq(self.entity_uid()?))
        } else if self.eat_word("in") {
            self.expect(&TokenKind::LBracket)?;
            let mut uids = vec![self.entity_uid()?];
            while self.eat(&TokenKind::Comma) {
                uids.push(self.entity_uid()?);
            }
            self.expect(&TokenKind::RBracket)?;
            Ok(ActionScopeConstraint::InSet(uids))
        } else {
            Ok(ActionScopeConstraint::Any)
        }
    }

    fn entity_uid(&mut self) -> Result<EntityUid, ParseError> {
        let mut segments = Vec::new();
        let span = self.here();
        loop {
            match self.advance().map(|t| &t.kind) {
                Some(TokenKind::Ident(s)) => segments.push(s.clone()),
                Some(k) => {
                    return Err(ParseError::new(
                        format!("expected an entity type segment, found {k}"),
                        span,
                    ))
                }
                None => {
                    return Err(ParseError::new(
                        "expected an entity type segment, found end of input",
                        span,
                    ))
                }
            }
            self.expect(&TokenKind::DoubleColon)?;
            if let Some(TokenKind::Str(raw)) = self.peek() {
                let str_span = self.here();
                self.pos += 1;
                let id = unescape_string(raw, str_span)?;
                let ty = EntityType::new(segments)
                    .map_err(|e| ParseError::new(e.to_string(), span))?;
                return Ok(EntityUid::new(ty, id));
            }
        }
    }

    // ---- expressions ----

    fn expr(&mut self, depth: usize) -> Result<Expr, ParseError> {
        if depth > MAX_NESTING_DEPTH {
            return Err(self.error_here("expression nesting too deep"));
        }
        if self.eat_word("if") {
            let guard = self.expr(depth + 1)?;
            self.expect_word("then")?;
            let then = self.expr(depth + 1)?;
            self.expect_word("else")?;
            let els = self.expr(depth + 1)?;
            return Ok(Expr::ite(guard, then, els));
        }
        self.or_expr(depth)
    }

    fn or_expr(&mut self, depth: usize) -> Result<Expr, ParseError> {
        let mut lhs = self.and_expr(depth)?;
        while self.eat(&TokenKind::OrOr) {
            let rhs = self.and_expr(depth + 1)?;
            lhs = Expr::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self, depth: usize) -> Result<Expr, ParseError> {
        let mut lhs = self.rel_expr(depth)?;
        while self.eat(&TokenKind::AndAnd) {
            let rhs = self.rel_expr(depth + 1)?;
            lhs = Expr::and(lhs, rhs);
        }
        Ok(lhs)
    }

    /// Relations are non-associative: `a < b < c` is a parse error.
    fn rel_expr(&mut self, depth: usize) -> Result<Expr, ParseError> {
        let lhs = self.add_expr(depth)?;
        let expr = match self.peek() {
            Some(TokenKind::Eq) => self.rel_rhs(BinOp::Eq, lhs, depth)?,
            Some(TokenKind::Neq) => self.rel_rhs(BinOp::Neq, lhs, depth)?,
            Some(TokenKind::Lt) => self.rel_rhs(BinOp::Lt, lhs, depth)?,
            Some(TokenKind::Le) => self.rel_rhs(BinOp::Le, lhs, depth)?,
            Some(TokenKind::Gt) => self.rel_rhs(BinOp::Gt, lhs, depth)?,
            Some(TokenKind::Ge) => self.rel_rhs(BinOp::Ge, lhs, depth)?,
            Some(TokenKind::Ident(s)) if s == "in" => {
                self.pos += 1;
                let rhs = self.add_expr(depth + 1)?;
                Expr::binop(BinOp::In, lhs, rhs)
            }
            Some(TokenKind::Ident(s)) if s == "like" => {
                self.pos += 1;
                match self.peek() {
                    Some(TokenKind::Str(raw)) => {
                        let span = self.here();
                        self.pos += 1;
                        Expr::like(lhs, unescape_pattern(raw, span)?)
                    }
                    _ => return Err(self.error_here("expected a pattern string after `like`")),
                }
            }
            Some(TokenKind::Ident(s)) if s == "has" => {
                self.pos += 1;
                let attr = self.attr_name()?;
                Expr::has_attr(lhs, attr)
            }
            _ => return Ok(lhs),
        };
        if self.rel_follows() {
            return Err(self.error_here("comparison operators cannot be chained"));
        }
        Ok(expr)
    }

    fn rel_rhs(&mut self, op: BinOp, lhs: Expr, depth: usize) -> Result<Expr, ParseError> {
        self.pos += 1;
        let rhs = self.add_expr(depth + 1)?;
        Ok(Expr::binop(op, lhs, rhs))
    }

    fn rel_follows(&self) -> bool {
        matches!(
            self.peek(),
            Some(
                TokenKind::Eq
                    | TokenKind::Neq
                    | TokenKind::Lt
                    | TokenKind::Le
                    | TokenKind::Gt
                    | TokenKind::Ge
            )
        ) || matches!(self.peek(), Some(TokenKind::Ident(s)) if s == "in" || s == "like" || s == "has")
    }

    fn add_expr(&mut self, depth: usize) -> Result<Expr, ParseError> {
        let mut lhs = self.unary_expr(depth)?;
        loop {
            let op = match self.peek() {
                Some(TokenKind::Plus) => BinOp::Add,
                Some(TokenKind::Minus) => BinOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.unary_expr(depth + 1)?;
            lhs = Expr::binop(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary_expr(&mut self, depth: usize) -> Result<Expr, ParseError> {
        if depth > MAX_NESTING_DEPTH {
            return Err(self.error_here("expression nesting too deep"));
        }
        if self.eat(&TokenKind::Bang) {
            return Ok(Expr::not(self.unary_expr(depth + 1)?));
        }
        if self.eat(&TokenKind::Minus) {
            // A minus immediately before an integer literal folds into a
            // negative literal, so the full i64 range is expressible.
            if let Some(TokenKind::Num(digits)) = self.peek() {
                let span = self.here();
                self.pos += 1;
                let n = parse_negative_long(digits, span)?;
                return self.member_tail(Expr::lit_long(n), depth);
            }
            return Ok(Expr::neg(self.unary_expr(depth + 1)?));
        }
        let primary = self.primary(depth)?;
        self.member_tail(primary, depth)
    }

    /// Postfix attribute access, indexing, and `.contains(...)`.
    fn member_tail(&mut self, mut expr: Expr, depth: usize) -> Result<Expr, ParseError> {
        loop {
            if self.eat(&TokenKind::Dot) {
                let name = match self.peek() {
                    Some(TokenKind::Ident(s)) => s.clone(),
                    Some(k) => {
                        return Err(self.error_here(format!("expected an attribute name, found {k}")))
                    }
                    None => {
                        return Err(
                            self.error_here("expected an attribute name, found end of input")
                        )
                    }
                };
                if name == "contains" && self.peek2() == Some(&TokenKind::LParen) {
                    self.pos += 2;
                    let arg = self.expr(depth + 1)?;
                    self.expect(&TokenKind::RParen)?;
                    expr = Expr::binop(BinOp::Contains, expr, arg);
                    continue;
                }
                if is_reserved(&name) {
                    return Err(self.error_here(format!(
                        "`{name}` is a reserved word; write [\"{name}\"] to access it as an attribute"
                    )));
                }
                self.pos += 1;
                expr = Expr::get_attr(expr, name);
            } else if self.peek() == Some(&TokenKind::LBracket)
                && matches!(self.peek2(), Some(TokenKind::Str(_)))
            {
                self.pos += 1;
                let Some(TokenKind::Str(raw)) = self.peek() else {
                    unreachable!()
                };
                let span = self.here();
                let attr = unescape_string(raw, span)?;
                self.pos += 1;
                self.expect(&TokenKind::RBracket)?;
                expr = Expr::get_attr(expr, attr);
            } else {
                return Ok(expr);
            }
        }
    }

    fn attr_name(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(TokenKind::Ident(s)) if !is_reserved(s) => {
                let name = s.clone();
                self.pos += 1;
                Ok(name)
            }
            Some(TokenKind::Str(raw)) => {
                let span = self.here();
                let name = unescape_string(raw, span)?;
                self.pos += 1;
                Ok(name)
            }
            Some(k) => Err(self.error_here(format!("expected an attribute name, found {k}"))),
            None => Err(self.error_here("expected an attribute name, found end of input")),
        }
    }

    fn primary(&mut self, depth: usize) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(TokenKind::Num(digits)) => {
                let span = self.here();
                let n: i64 = digits.parse().map_err(|_| {
                    ParseError::new("integer literal out of range", span)
                })?;
                self.pos += 1;
                Ok(Expr::lit_long(n))
            }
            Some(TokenKind::Str(raw)) => {
                let span = self.here();
                let s = unescape_string(raw, span)?;
                self.pos += 1;
                Ok(Expr::lit_str(s))
            }
            Some(TokenKind::LParen) => {
                self.pos += 1;
                let inner = self.expr(depth + 1)?;
                self.expect(&TokenKind::RParen)?;
                Ok(inner)
            }
            Some(TokenKind::LBracket) => {
                self.pos += 1;
                let mut items = Vec::new();
                if !self.eat(&TokenKind::RBracket) {
                    items.push(self.expr(depth + 1)?);
                    while self.eat(&TokenKind::Comma) {
                        items.push(self.expr(depth + 1)?);
                    }
                    self.expect(&TokenKind::RBracket)?;
                }
                Ok(Expr::SetLit(items))
            }
            Some(TokenKind::LBrace) => {
                self.pos += 1;
                let mut fields: Vec<(String, Expr)> = Vec::new();
                if !self.eat(&TokenKind::RBrace) {
                    loop {
                        let span = self.here();
                        let name = self.attr_name()?;
                        if fields.iter().any(|(n, _)| *n == name) {
                            return Err(ParseError::new(
                                format!("duplicate record key `{name}`"),
                                span,
                            ));
                        }
                        self.expect(&TokenKind::Colon)?;
                        let value = self.expr(depth + 1)?;
                        fields.push((name, value));
                        if !self.eat(&TokenKind::Comma) {
                            break;
                        }
                    }
                    self.expect(&TokenKind::RBrace)?;
                }
                Ok(Expr::RecordLit(fields))
            }
            Some(TokenKind::Ident(word)) => match word.as_str() {
                "true" => {
                    self.pos += 1;
                    Ok(Expr::lit_bool(true))
                }
                "false" => {
                    self.pos += 1;
                    Ok(Expr::lit_bool(false))
                }
                "principal" => {
                    self.pos += 1;
                    Ok(Expr::Var(warden_core::Var::Principal))
                }
                "action" => {
                    self.pos += 1;
                    Ok(Expr::Var(warden_core::Var::Action))
                }
                "resource" => {
                    self.pos += 1;
                    Ok(Expr::Var(warden_core::Var::Resource))
                }
                "context" => {
                    self.pos += 1;
                    Ok(Expr::Var(warden_core::Var::Context))
                }
                w if is_reserved(w) => {
                    Err(self.error_here(format!("unexpected keyword `{w}`")))
                }
                _ => Ok(Expr::EntityLit(self.entity_uid()?)),
            },
            Some(k) => Err(self.error_here(format!("expected an expression, found {k}"))),
            None => Err(self.error_here("expected an expression, found end of input")),
        }
    }
}

fn parse_negative_long(digits: &str, span: SourceSpan) -> Result<i64, ParseError> {
    // Negate via i128 so `-9223372036854775808` parses.
    let n: i128 = digits
        .parse()
        .map_err(|_| ParseError::new("integer literal out of range", span))?;
    i64::try_from(-n).map_err(|_| ParseError::new("integer literal out of range", span))
}

#[cfg(test)]
mod tests {
    use super::*;
    use warden_core::Var;

    #[test]
    fn parses_minimal_policy() {
        let ps = parse_policy_set("permit(principal, action, resource);").unwrap();
        assert_eq!(ps.len(), 1);
        let p = ps.get("policy0").unwrap();
        assert_eq!(p.effect, Effect::Permit);
        assert_eq!(p.principal_scope, ScopeConstraint::Any);
        assert_eq!(p.action_scope, ActionScopeConstraint::Any);
        assert_eq!(p.resource_scope, ScopeConstraint::Any);
        assert!(p.conditions.is_empty());
    }

    #[test]
    fn parses_fig1_policies() {
        let text = r#"
            // Policy 1
            permit(principal, action, resource)
            when {
                resource has owner &&
                resource.owner == principal
            };

            // Policy 2
            permit(
                principal,
                action == Action::"GetList",
                resource)
            when {
                principal in resource.readers ||
                principal in resource.editors
            };

            // Policy 3
            forbid (
                principal in Team::"interns",
                action == Action::"CreateList",
                resource == Application::"TinyTodo"
            );
        "#;
        let ps = parse_policy_set(text).unwrap();
        assert_eq!(ps.len(), 3);
        let p0 = ps.get("policy0").unwrap();
        assert_eq!(p0.effect, Effect::Permit);
        assert_eq!(p0.conditions.len(), 1);
        assert!(matches!(p0.conditions[0].body, Expr::And(..)));

        let p1 = ps.get("policy1").unwrap();
        assert_eq!(
            p1.action_scope,
            ActionScopeConstraint::Eq(EntityUid::of("Action", "GetList"))
        );

        let p2 = ps.get("policy2").unwrap();
        assert_eq!(p2.effect, Effect::Forbid);
        assert_eq!(
            p2.principal_scope,
            ScopeConstraint::In(EntityUid::of("Team", "interns"))
        );
        assert_eq!(
            p2.resource_scope,
            ScopeConstraint::Eq(EntityUid::of("Application", "TinyTodo"))
        );
        assert!(p2.conditions.is_empty());
    }

    #[test]
    fn unclosed_scope_is_an_error() {
        assert!(parse_policy_set("permit(principal").is_err());
    }

    #[test]
    fn like_pattern_escapes() {
        let ps = parse_policy_set(
            r#"permit(principal, action, resource) when { context.s like "a\*b" };"#,
        )
        .unwrap();
        let p = ps.get("policy0").unwrap();
        let Expr::Like(_, pattern) = &p.conditions[0].body else {
            panic!("expected like");
        };
        use warden_core::PatElem::*;
        assert_eq!(pattern.0, vec![Literal('a'), Literal('*'), Literal('b')]);

        let ps = parse_policy_set(
            r#"permit(principal, action, resource) when { context.s like "a*b" };"#,
        )
        .unwrap();
        let Expr::Like(_, pattern) = &ps.get("policy0").unwrap().conditions[0].body else {
            panic!("expected like");
        };
        assert_eq!(pattern.0, vec![Literal('a'), Wildcard, Literal('b')]);
    }

    #[test]
    fn negative_literal_folding() {
        assert_eq!(parse_expr("-5").unwrap(), Expr::lit_long(-5));
        assert_eq!(
            parse_expr("-(5)").unwrap(),
            Expr::neg(Expr::lit_long(5))
        );
        assert_eq!(
            parse_expr("1 - 5").unwrap(),
            Expr::binop(BinOp::Sub, Expr::lit_long(1), Expr::lit_long(5))
        );
        assert_eq!(
            parse_expr("1 - -5").unwrap(),
            Expr::binop(BinOp::Sub, Expr::lit_long(1), Expr::lit_long(-5))
        );
        assert_eq!(
            parse_expr("-9223372036854775808").unwrap(),
            Expr::lit_long(i64::MIN)
        );
        assert!(parse_expr("9223372036854775808").is_err());
        assert!(parse_expr("--5").is_ok()); // Neg(Lit(-5))
        assert_eq!(
            parse_expr("--5").unwrap(),
            Expr::neg(Expr::lit_long(-5))
        );
    }

    #[test]
    fn comparison_chaining_rejected() {
        assert!(parse_expr("1 < 2 < 3").is_err());
        assert!(parse_expr("a in b in c").is_err());
        assert!(parse_expr("(1 < 2) == true").is_ok());
    }

    #[test]
    fn member_access_forms() {
        assert_eq!(
            parse_expr("principal.a.b").unwrap(),
            Expr::get_attr(Expr::get_attr(Expr::Var(Var::Principal), "a"), "b")
        );
        assert_eq!(
            parse_expr(r#"principal["b c"]"#).unwrap(),
            Expr::get_attr(Expr::Var(Var::Principal), "b c")
        );
        assert_eq!(
            parse_expr("context.xs.contains(1)").unwrap(),
            Expr::binop(
                BinOp::Contains,
                Expr::get_attr(Expr::Var(Var::Context), "xs"),
                Expr::lit_long(1)
            )
        );
        // An attribute literally named `contains`, without a call.
        assert_eq!(
            parse_expr("principal.contains").unwrap(),
            Expr::get_attr(Expr::Var(Var::Principal), "contains")
        );
        assert!(parse_expr("principal.in").is_err());
    }

    #[test]
    fn record_literals() {
        assert_eq!(parse_expr("{}").unwrap(), Expr::RecordLit(vec![]));
        let e = parse_expr(r#"{a: 1, "b c": true}"#).unwrap();
        assert_eq!(
            e,
            Expr::RecordLit(vec![
                ("a".to_string(), Expr::lit_long(1)),
                ("b c".to_string(), Expr::lit_bool(true)),
            ])
        );
        assert!(parse_expr("{a: 1, a: 2}").is_err());
    }

    #[test]
    fn if_then_else() {
        let e = parse_expr("if true then 1 else 2 + 3").unwrap();
        assert_eq!(
            e,
            Expr::ite(
                Expr::lit_bool(true),
                Expr::lit_long(1),
                Expr::binop(BinOp::Add, Expr::lit_long(2), Expr::lit_long(3))
            )
        );
    }

    #[test]
    fn nesting_depth_is_bounded() {
        let deep = format!("{}1{}", "(".repeat(500), ")".repeat(500));
        let err = parse_expr(&deep).unwrap_err();
        assert!(err.message.contains("nesting"));

        let bangs = format!("{}true", "!".repeat(500));
        assert!(parse_expr(&bangs).is_err());
    }

    #[test]
    fn flat_operator_chains_parse_and_drop_safely() {
        // Attribute and operator chains are parsed in loops, so no nesting
        // error fires; the resulting deep AST must still drop without
        // exhausting the stack.
        let chain = format!("principal{}", ".a".repeat(400_000));
        let e = parse_expr(&chain).unwrap();
        assert!(matches!(e, Expr::GetAttr(..)));
        drop(e);

        let sums = vec!["1"; 400_000].join(" + ");
        assert!(parse_expr(&sums).is_ok());

        let ands = vec!["true"; 200_000].join(" && ");
        assert!(parse_expr(&ands).is_ok());

        // And a policy-level variant through the byte entry point.
        let text = format!(
            "permit(principal, action, resource) when {{ context{} }};",
            ".x".repeat(200_000)
        );
        assert!(parse_policy_set_bytes(text.as_bytes()).is_ok());
    }

    #[test]
    fn empty_input_is_empty_policy_set() {
        let ps = parse_policy_set("").unwrap();
        assert!(ps.is_empty());
        let ps = parse_policy_set("// just a comment\n").unwrap();
        assert!(ps.is_empty());
    }

    #[test]
    fn multi_segment_uids() {
        let e = parse_expr(r#"A::B::C::"id""#).unwrap();
        let Expr::EntityLit(ref uid) = e else { panic!() };
        assert_eq!(uid.entity_type().segments(), ["A", "B", "C"]);
        assert_eq!(uid.id(), "id");
    }
}
