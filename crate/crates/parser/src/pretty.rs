//! Canonical printing of policy sets. The printer fully parenthesizes
//! operator operands (atoms excepted), never folds constants, and emits no
//! comments; parsing its output reproduces the AST exactly.

use std::fmt::Write;

use warden_core::{
    ActionScopeConstraint, BinOp, ConditionKind, EntityUid, Expr, Lit, Policy, PolicySet,
    ScopeConstraint,
};

use crate::lexer::{escape_pattern, escape_string, is_reserved};

/// Canonical text for a policy set: one policy per stanza, one clause per
/// line, two-space indents.
pub fn pretty_print(policies: &PolicySet) -> String {
    let mut out = String::new();
    for (i, policy) in policies.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        print_policy(policy, &mut out);
        out.push('\n');
    }
    out
}

fn print_policy(policy: &Policy, out: &mut String) {
    let _ = write!(out, "{}(", policy.effect);
    match &policy.principal_scope {
        ScopeConstraint::Any => out.push_str("principal"),
        ScopeConstraint::Eq(uid) => {
            let _ = write!(out, "principal == {}", print_uid(uid));
        }
        ScopeConstraint::In(uid) => {
            let _ = write!(out, "principal in {}", print_uid(uid));
        }
    }
    out.push_str(", ");
    match &policy.action_scope {
        ActionScopeConstraint::Any => out.push_str("action"),
        ActionScopeConstraint::Eq(uid) => {
            let _ = write!(out, "action == {}", print_uid(uid));
        }
        ActionScopeConstraint::InSet(uids) => {
            let list: Vec<String> = uids.iter().map(print_uid).collect();
            let _ = write!(out, "action in [{}]", list.join(", "));
        }
    }
    out.push_str(", ");
    match &policy.resource_scope {
        ScopeConstraint::Any => out.push_str("resource"),
        ScopeConstraint::Eq(uid) => {
            let _ = write!(out, "resource == {}", print_uid(uid));
        }
        ScopeConstraint::In(uid) => {
            let _ = write!(out, "resource in {}", print_uid(uid));
        }
    }
    out.push(')');
    for condition in &policy.conditions {
        let keyword = match condition.kind {
            ConditionKind::When => "when",
            ConditionKind::Unless => "unless",
        };
        let _ = write!(out, "\n  {keyword} {{ ");
        print_expr(&condition.body, out);
        out.push_str(" }");
    }
    out.push(';');
}

fn print_uid(uid: &EntityUid) -> String {
    format!("{}::\"{}\"", uid.entity_type(), escape_string(uid.id()))
}

/// Atoms are self-delimiting and never need parentheses as operands.
fn is_atom(e: &Expr) -> bool {
    matches!(
        e,
        Expr::Lit(_) | Expr::EntityLit(_) | Expr::Var(_) | Expr::SetLit(_) | Expr::RecordLit(_)
    )
}

/// Prints `e` as an operand: parenthesized unless atomic.
fn operand(e: &Expr, out: &mut String) {
    if is_atom(e) {
        print_expr(e, out);
    } else {
        out.push('(');
        print_expr(e, out);
        out.push(')');
    }
}

fn attr_suffix(name: &str) -> String {
    if warden_core::uid::is_ident(name) && !is_reserved(name) && name != "contains" {
        format!(".{name}")
    } else {
        format!("[\"{}\"]", escape_string(name))
    }
}

/// Prints `e` bare; callers add parentheses via [`operand`] where needed.
pub fn print_expr(e: &Expr, out: &mut String) {
    match e {
        Expr::Lit(Lit::Bool(b)) => {
            let _ = write!(out, "{b}");
        }
        Expr::Lit(Lit::Long(n)) => {
            let _ = write!(out, "{n}");
        }
        Expr::Lit(Lit::Str(s)) => {
            let _ = write!(out, "\"{}\"", escape_string(s));
        }
        Expr::EntityLit(uid) => out.push_str(&print_uid(uid)),
        Expr::Var(v) => out.push_str(v.name()),
        Expr::Not(inner) => {
            out.push('!');
            operand(inner, out);
        }
        Expr::Neg(inner) => {
            // Always parenthesize so `-(1)` stays distinct from the literal
            // `-1`.
            out.push_str("-(");
            print_expr(inner, out);
            out.push(')');
        }
        Expr::And(a, b) => {
            operand(a, out);
            out.push_str(" && ");
            operand(b, out);
        }
        Expr::Or(a, b) => {
            operand(a, out);
            out.push_str(" || ");
            operand(b, out);
        }
        Expr::If(guard, then, els) => {
            out.push_str("if ");
            print_expr(guard, out);
            out.push_str(" then ");
            print_expr(then, out);
            out.push_str(" else ");
            print_expr(els, out);
        }
        Expr::BinOp(BinOp::Contains, a, b) => {
            operand(a, out);
            out.push_str(".contains(");
            print_expr(b, out);
            out.push(')');
        }
        Expr::BinOp(op, a, b) => {
            let symbol = match op {
                BinOp::Eq => "==",
                BinOp::Neq => "!=",
                BinOp::Lt => "<",
                BinOp::Le => "<=",
                BinOp::Gt => ">",
                BinOp::Ge => ">=",
                BinOp::Add => "+",
                BinOp::Sub => "-",
                BinOp::In => "in",
                BinOp::Contains => unreachable!(),
            };
            operand(a, out);
            let _ = write!(out, " {symbol} ");
            operand(b, out);
        }
        Expr::Like(inner, pattern) => {
            operand(inner, out);
            let _ = write!(out, " like \"{}\"", escape_pattern(pattern));
        }
        Expr::HasAttr(inner, attr) => {
            operand(inner, out);
            if warden_core::uid::is_ident(attr) && !is_reserved(attr) {
                let _ = write!(out, " has {attr}");
            } else {
                let _ = write!(out, " has \"{}\"", escape_string(attr));
            }
        }
        Expr::GetAttr(inner, attr) => {
            operand(inner, out);
            out.push_str(&attr_suffix(attr));
        }
        Expr::SetLit(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                print_expr(item, out);
            }
            out.push(']');
        }
        Expr::RecordLit(fields) => {
            out.push('{');
            for (i, (name, value)) in fields.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                if warden_core::uid::is_ident(name) && !is_reserved(name) {
                    let _ = write!(out, "{name}: ");
                } else {
                    let _ = write!(out, "\"{}\": ", escape_string(name));
                }
                print_expr(value, out);
            }
            out.push('}');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_expr, parse_policy_set};
    use warden_core::Var;

    fn roundtrip_expr(e: &Expr) {
        let mut text = String::new();
        print_expr(e, &mut text);
        let back = parse_expr(&text)
            .unwrap_or_else(|err| panic!("failed to reparse `{text}`: {err}"));
        assert_eq!(&back, e, "text was `{text}`");
    }

    #[test]
    fn negation_is_fully_parenthesized() {
        let e = Expr::not(Expr::neg(Expr::lit_long(1)));
        let mut text = String::new();
        print_expr(&e, &mut text);
        assert_eq!(text, "!(-(1))");
        roundtrip_expr(&e);
    }

    #[test]
    fn negative_literal_vs_negation() {
        roundtrip_expr(&Expr::lit_long(-5));
        roundtrip_expr(&Expr::neg(Expr::lit_long(5)));
        roundtrip_expr(&Expr::neg(Expr::lit_long(-5)));
        roundtrip_expr(&Expr::lit_long(i64::MIN));
        roundtrip_expr(&Expr::binop(
            BinOp::Sub,
            Expr::lit_long(1),
            Expr::lit_long(-5),
        ));
    }

    #[test]
    fn empty_set_prints_as_brackets() {
        let mut text = String::new();
        print_expr(&Expr::SetLit(vec![]), &mut text);
        assert_eq!(text, "[]");
    }

    #[test]
    fn awkward_attribute_names_use_index_syntax() {
        roundtrip_expr(&Expr::get_attr(Expr::Var(Var::Principal), "b c"));
        roundtrip_expr(&Expr::get_attr(Expr::Var(Var::Principal), "in"));
        roundtrip_expr(&Expr::get_attr(Expr::Var(Var::Principal), "contains"));
        roundtrip_expr(&Expr::has_attr(Expr::Var(Var::Principal), "like"));
        roundtrip_expr(&Expr::RecordLit(vec![(
            "when".to_string(),
            Expr::lit_long(1),
        )]));
        roundtrip_expr(&Expr::get_attr(Expr::Var(Var::Principal), "a\"b\\c"));
    }

    #[test]
    fn nested_operators_roundtrip() {
        let e = Expr::and(
            Expr::or(Expr::lit_bool(true), Expr::lit_bool(false)),
            Expr::binop(
                BinOp::Eq,
                Expr::binop(BinOp::Add, Expr::lit_long(1), Expr::lit_long(2)),
                Expr::lit_long(3),
            ),
        );
        roundtrip_expr(&e);

        let e = Expr::ite(
            Expr::lit_bool(true),
            Expr::binop(BinOp::In, Expr::Var(Var::Principal), Expr::Var(Var::Resource)),
            Expr::has_attr(Expr::Var(Var::Resource), "owner"),
        );
        roundtrip_expr(&e);

        let e = Expr::get_attr(
            Expr::ite(
                Expr::lit_bool(false),
                Expr::Var(Var::Principal),
                Expr::Var(Var::Resource),
            ),
            "x",
        );
        roundtrip_expr(&e);

        let e = Expr::binop(
            BinOp::Contains,
            Expr::SetLit(vec![Expr::lit_long(1), Expr::lit_long(2)]),
            Expr::binop(BinOp::Sub, Expr::lit_long(3), Expr::lit_long(1)),
        );
        roundtrip_expr(&e);
    }

    #[test]
    fn fig1_roundtrips_through_pretty() {
        let text = r#"
            permit(principal, action, resource)
            when { resource has owner && resource.owner == principal };
            permit(principal, action == Action::"GetList", resource)
            when { principal in resource.readers || principal in resource.editors };
            forbid(
              principal in Team::"interns",
              action == Action::"CreateList",
              resource == Application::"TinyTodo"
            );
        "#;
        let ps = parse_policy_set(text).unwrap();
        let printed = pretty_print(&ps);
        let back = parse_policy_set(&printed).unwrap();
        assert_eq!(back, ps);
        assert!(!printed.contains("//"));
    }

    #[test]
    fn uid_ids_with_tricky_characters_roundtrip() {
        let uid = EntityUid::of("User", "we\"ird\\\n*id");
        roundtrip_expr(&Expr::EntityLit(uid.clone()));
        let ps = parse_policy_set(&format!(
            "permit(principal == {}, action, resource);",
            print_uid(&uid)
        ))
        .unwrap();
        assert_eq!(
            ps.get("policy0").unwrap().principal_scope,
            ScopeConstraint::Eq(uid)
        );
    }

    #[test]
    fn like_patterns_roundtrip() {
        use warden_core::{PatElem, Pattern};
        let e = Expr::like(
            Expr::lit_str("x"),
            Pattern(vec![
                PatElem::Literal('a'),
                PatElem::Literal('*'),
                PatElem::Wildcard,
                PatElem::Literal('"'),
                PatElem::Literal('\\'),
            ]),
        );
        roundtrip_expr(&e);
    }
}
