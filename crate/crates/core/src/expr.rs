//! The condition-expression AST shared by the evaluator, validator, parser,
//! and generators.

use std::fmt;

use crate::uid::EntityUid;

/// A literal constant. Entity literals are a separate [`Expr`] variant.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Lit {
    Bool(bool),
    Long(i64),
    Str(String),
}

/// The four request variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    Principal,
    Action,
    Resource,
    Context,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::Principal => "principal",
            Var::Action => "action",
            Var::Resource => "resource",
            Var::Context => "context",
        }
    }
}

/// Binary operators. `And`/`Or` are separate variants because they
/// short-circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BinOp {
    Eq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    In,
    Contains,
}

/// One element of a `like` pattern: a literal character or the `*` wildcard.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PatElem {
    Literal(char),
    Wildcard,
}

/// A `like` pattern; `*` matches any (possibly empty) sequence of characters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pattern(pub Vec<PatElem>);

impl Pattern {
    /// Matches `text` against the pattern over Unicode scalar values.
    pub fn matches(&self, text: &str) -> bool {
        let chars: Vec<char> = text.chars().collect();
        // Classic two-pointer glob match with wildcard backtracking.
        let (mut t, mut p) = (0usize, 0usize);
        let mut star: Option<(usize, usize)> = None;
        while t < chars.len() {
            match self.0.get(p) {
                Some(PatElem::Literal(c)) if *c == chars[t] => {
                    t += 1;
                    p += 1;
                }
                Some(PatElem::Wildcard) => {
                    star = Some((p, t));
                    p += 1;
                }
                _ => match star {
                    Some((sp, st)) => {
                        p = sp + 1;
                        t = st + 1;
                        star = Some((sp, st + 1));
                    }
                    None => return false,
                },
            }
        }
        while let Some(PatElem::Wildcard) = self.0.get(p) {
            p += 1;
        }
        p == self.0.len()
    }
}

impl fmt::Display for Pattern {
    /// Pattern surface form without quotes: `*` for wildcards, `\*` for a
    /// literal asterisk, other characters unescaped.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for elem in &self.0 {
            match elem {
                PatElem::Wildcard => write!(f, "*")?,
                PatElem::Literal('*') => write!(f, "\\*")?,
                PatElem::Literal(c) => write!(f, "{c}")?,
            }
        }
        Ok(())
    }
}

/// Recursion ceiling shared by the production and reference interpreters.
/// Generated and parsed expressions stay far below it; the guard exists so
/// evaluation is total even on hostile ASTs constructed through the API.
pub const MAX_EVAL_DEPTH: usize = 512;

/// A condition expression.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Lit(Lit),
    EntityLit(EntityUid),
    Var(Var),
    Not(Box<Expr>),
    Neg(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    BinOp(BinOp, Box<Expr>, Box<Expr>),
    Like(Box<Expr>, Pattern),
    HasAttr(Box<Expr>, String),
    GetAttr(Box<Expr>, String),
    SetLit(Vec<Expr>),
    RecordLit(Vec<(String, Expr)>),
}

impl Drop for Expr {
    /// Iterative drop. The parser builds operator and attribute chains in
    /// loops, so hostile input can produce ASTs far deeper than the stack
    /// could unwind through the default recursive drop glue.
    fn drop(&mut self) {
        fn take(slot: &mut Expr, stack: &mut Vec<Expr>) {
            // Leave a child-free expression behind; the old value moves onto
            // the explicit stack.
            stack.push(std::mem::replace(slot, Expr::Lit(Lit::Bool(false))));
        }
        fn spill(e: &mut Expr, stack: &mut Vec<Expr>) {
            match e {
                Expr::Lit(_) | Expr::EntityLit(_) | Expr::Var(_) => {}
                Expr::Not(a) | Expr::Neg(a) | Expr::Like(a, _) => take(a, stack),
                Expr::HasAttr(a, _) | Expr::GetAttr(a, _) => take(a, stack),
                Expr::And(a, b) | Expr::Or(a, b) | Expr::BinOp(_, a, b) => {
                    take(a, stack);
                    take(b, stack);
                }
                Expr::If(g, t, f) => {
                    take(g, stack);
                    take(t, stack);
                    take(f, stack);
                }
                Expr::SetLit(items) => stack.extend(std::mem::take(items)),
                Expr::RecordLit(fields) => {
                    stack.extend(std::mem::take(fields).into_iter().map(|(_, v)| v));
                }
            }
        }
        if matches!(self, Expr::Lit(_) | Expr::EntityLit(_) | Expr::Var(_)) {
            return;
        }
        let mut stack = Vec::new();
        spill(self, &mut stack);
        while let Some(mut e) = stack.pop() {
            spill(&mut e, &mut stack);
        }
    }
}

impl Expr {
    pub fn lit_bool(b: bool) -> Expr {
        Expr::Lit(Lit::Bool(b))
    }

    pub fn lit_long(n: i64) -> Expr {
        Expr::Lit(Lit::Long(n))
    }

    pub fn lit_str(s: impl Into<String>) -> Expr {
        Expr::Lit(Lit::Str(s.into()))
    }

    pub fn not(e: Expr) -> Expr {
        Expr::Not(Box::new(e))
    }

    pub fn neg(e: Expr) -> Expr {
        Expr::Neg(Box::new(e))
    }

    pub fn and(a: Expr, b: Expr) -> Expr {
        Expr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Expr, b: Expr) -> Expr {
        Expr::Or(Box::new(a), Box::new(b))
    }

    pub fn ite(g: Expr, t: Expr, f: Expr) -> Expr {
        Expr::If(Box::new(g), Box::new(t), Box::new(f))
    }

    pub fn binop(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::BinOp(op, Box::new(a), Box::new(b))
    }

    pub fn like(e: Expr, pattern: Pattern) -> Expr {
        Expr::Like(Box::new(e), pattern)
    }

    pub fn has_attr(e: Expr, attr: impl Into<String>) -> Expr {
        Expr::HasAttr(Box::new(e), attr.into())
    }

    pub fn get_attr(e: Expr, attr: impl Into<String>) -> Expr {
        Expr::GetAttr(Box::new(e), attr.into())
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }

    /// Calls `f` on this node and every descendant, preorder.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Lit(_) | Expr::EntityLit(_) | Expr::Var(_) => {}
            Expr::Not(e) | Expr::Neg(e) | Expr::Like(e, _) => e.walk(f),
            Expr::HasAttr(e, _) | Expr::GetAttr(e, _) => e.walk(f),
            Expr::And(a, b) | Expr::Or(a, b) | Expr::BinOp(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
            Expr::If(g, t, e) => {
                g.walk(f);
                t.walk(f);
                e.walk(f);
            }
            Expr::SetLit(es) => {
                for e in es {
                    e.walk(f);
                }
            }
            Expr::RecordLit(fields) => {
                for (_, e) in fields {
                    e.walk(f);
                }
            }
        }
    }

    /// A short tag naming the top-level node, used in diagnostics and
    /// generator statistics.
    pub fn node_tag(&self) -> &'static str {
        match self {
            Expr::Lit(Lit::Bool(_)) => "lit_bool",
            Expr::Lit(Lit::Long(_)) => "lit_long",
            Expr::Lit(Lit::Str(_)) => "lit_str",
            Expr::EntityLit(_) => "lit_entity",
            Expr::Var(_) => "var",
            Expr::Not(_) => "not",
            Expr::Neg(_) => "neg",
            Expr::And(..) => "and",
            Expr::Or(..) => "or",
            Expr::If(..) => "if",
            Expr::BinOp(BinOp::Eq, ..) => "eq",
            Expr::BinOp(BinOp::Neq, ..) => "neq",
            Expr::BinOp(BinOp::Lt, ..) => "lt",
            Expr::BinOp(BinOp::Le, ..) => "le",
            Expr::BinOp(BinOp::Gt, ..) => "gt",
            Expr::BinOp(BinOp::Ge, ..) => "ge",
            Expr::BinOp(BinOp::Add, ..) => "add",
            Expr::BinOp(BinOp::Sub, ..) => "sub",
            Expr::BinOp(BinOp::In, ..) => "in",
            Expr::BinOp(BinOp::Contains, ..) => "contains",
            Expr::Like(..) => "like",
            Expr::HasAttr(..) => "has",
            Expr::GetAttr(..) => "get_attr",
            Expr::SetLit(_) => "set",
            Expr::RecordLit(_) => "record",
        }
    }
}
