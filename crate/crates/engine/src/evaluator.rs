//! Big-step expression evaluation and per-policy satisfaction.

use warden_core::expr::MAX_EVAL_DEPTH;
use warden_core::{
    ActionScopeConstraint, BinOp, Condition, ConditionKind, Entities, EvalError, Expr, Lit,
    Policy, Request, ScopeConstraint, Value, ValueKind, Var,
};

pub use warden_core::EvalError as Error;

type EvalResult = Result<Value, EvalError>;

/// Evaluates an expression against a request and entity store.
///
/// Evaluation is deterministic and total: every finite expression produces a
/// value or an [`EvalError`]. `&&`/`||` short-circuit left to right, and `==`
/// on values of different kinds is `false`, never an error.
pub fn evaluate(expr: &Expr, request: &Request, store: &Entities) -> EvalResult {
    eval(expr, request, store, 0)
}

fn eval(expr: &Expr, request: &Request, store: &Entities, depth: usize) -> EvalResult {
    if depth > MAX_EVAL_DEPTH {
        return Err(EvalError::ArityOrDomain(
            "expression nesting exceeds the evaluation depth limit".to_string(),
        ));
    }
    let depth = depth + 1;
    match expr {
        Expr::Lit(Lit::Bool(b)) => Ok(Value::Bool(*b)),
        Expr::Lit(Lit::Long(n)) => Ok(Value::Long(*n)),
        Expr::Lit(Lit::Str(s)) => Ok(Value::Str(s.clone())),
        Expr::EntityLit(uid) => Ok(Value::EntityRef(uid.clone())),
        Expr::Var(Var::Principal) => Ok(Value::EntityRef(request.principal.clone())),
        Expr::Var(Var::Action) => Ok(Value::EntityRef(request.action.clone())),
        Expr::Var(Var::Resource) => Ok(Value::EntityRef(request.resource.clone())),
        Expr::Var(Var::Context) => Ok(request.context_value()),
        Expr::Not(e) => match eval(e, request, store, depth)? {
            Value::Bool(b) => Ok(Value::Bool(!b)),
            v => Err(expected(ValueKind::Bool, &v)),
        },
        Expr::Neg(e) => match eval(e, request, store, depth)? {
            Value::Long(n) => n.checked_neg().map(Value::Long).ok_or(EvalError::Overflow),
            v => Err(expected(ValueKind::Long, &v)),
        },
        Expr::And(a, b) => match eval(a, request, store, depth)? {
            Value::Bool(false) => Ok(Value::Bool(false)),
            Value::Bool(true) => match eval(b, request, store, depth)? {
                v @ Value::Bool(_) => Ok(v),
                v => Err(expected(ValueKind::Bool, &v)),
            },
            v => Err(expected(ValueKind::Bool, &v)),
        },
        Expr::Or(a, b) => match eval(a, request, store, depth)? {
            Value::Bool(true) => Ok(Value::Bool(true)),
            Value::Bool(false) => match eval(b, request, store, depth)? {
                v @ Value::Bool(_) => Ok(v),
                v => Err(expected(ValueKind::Bool, &v)),
            },
            v => Err(expected(ValueKind::Bool, &v)),
        },
        Expr::If(guard, then, els) => match eval(guard, request, store, depth)? {
            Value::Bool(true) => eval(then, request, store, depth),
            Value::Bool(false) => eval(els, request, store, depth),
            v => Err(expected(ValueKind::Bool, &v)),
        },
        Expr::BinOp(op, a, b) => {
            let lhs = eval(a, request, store, depth)?;
            let rhs = eval(b, request, store, depth)?;
            eval_binop(*op, lhs, rhs, store)
        }
        Expr::Like(e, pattern) => match eval(e, request, store, depth)? {
            Value::Str(s) => Ok(Value::Bool(pattern.matches(&s))),
            v => Err(expected(ValueKind::Str, &v)),
        },
        Expr::HasAttr(e, attr) => match eval(e, request, store, depth)? {
            Value::EntityRef(uid) => Ok(Value::Bool(
                store
                    .get(&uid)
                    .is_some_and(|data| data.attrs.contains_key(attr)),
            )),
            Value::Record(fields) => Ok(Value::Bool(fields.contains_key(attr))),
            v => Err(EvalError::type_error(
                [ValueKind::Entity, ValueKind::Record],
                v.kind(),
            )),
        },
        Expr::GetAttr(e, attr) => match eval(e, request, store, depth)? {
            Value::EntityRef(uid) => store
                .get(&uid)
                .and_then(|data| data.attrs.get(attr).cloned())
                .ok_or_else(|| EvalError::MissingAttr(attr.clone())),
            Value::Record(fields) => fields
                .get(attr)
                .cloned()
                .ok_or_else(|| EvalError::MissingAttr(attr.clone())),
            v => Err(EvalError::type_error(
                [ValueKind::Entity, ValueKind::Record],
                v.kind(),
            )),
        },
        Expr::SetLit(items) => {
            let mut set = std::collections::BTreeSet::new();
            for item in items {
                set.insert(eval(item, request, store, depth)?);
            }
            Ok(Value::Set(set))
        }
        Expr::RecordLit(fields) => {
            // Later duplicate keys overwrite earlier ones.
            let mut record = std::collections::BTreeMap::new();
            for (name, value) in fields {
                record.insert(name.clone(), eval(value, request, store, depth)?);
            }
            Ok(Value::Record(record))
        }
    }
}

fn expected(kind: ValueKind, got: &Value) -> EvalError {
    EvalError::type_error([kind], got.kind())
}

fn eval_binop(op: BinOp, lhs: Value, rhs: Value, store: &Entities) -> EvalResult {
    match op {
        BinOp::Eq => Ok(Value::Bool(lhs == rhs)),
        BinOp::Neq => Ok(Value::Bool(lhs != rhs)),
        BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => match (lhs, rhs) {
            (Value::Long(a), Value::Long(b)) => Ok(Value::Bool(match op {
                BinOp::Lt => a < b,
                BinOp::Le => a <= b,
                BinOp::Gt => a > b,
                _ => a >= b,
            })),
            (Value::Long(_), v) | (v, _) => Err(expected(ValueKind::Long, &v)),
        },
        BinOp::Add | BinOp::Sub => match (lhs, rhs) {
            (Value::Long(a), Value::Long(b)) => {
                let r = if op == BinOp::Add {
                    a.checked_add(b)
                } else {
                    a.checked_sub(b)
                };
                r.map(Value::Long).ok_or(EvalError::Overflow)
            }
            (Value::Long(_), v) | (v, _) => Err(expected(ValueKind::Long, &v)),
        },
        BinOp::In => {
            let Value::EntityRef(child) = lhs else {
                return Err(expected(ValueKind::Entity, &lhs));
            };
            match rhs {
                Value::EntityRef(parent) => Ok(Value::Bool(store.in_relation(&child, &parent))),
                Value::Set(items) => {
                    // Every element must be an entity before membership can
                    // be decided; a match does not excuse a later non-entity.
                    let mut found = false;
                    for item in &items {
                        let Value::EntityRef(parent) = item else {
                            return Err(expected(ValueKind::Entity, item));
                        };
                        found = found || store.in_relation(&child, parent);
                    }
                    Ok(Value::Bool(found))
                }
                v => Err(EvalError::type_error(
                    [ValueKind::Entity, ValueKind::Set],
                    v.kind(),
                )),
            }
        }
        BinOp::Contains => match lhs {
            Value::Set(items) => Ok(Value::Bool(items.contains(&rhs))),
            v => Err(expected(ValueKind::Set, &v)),
        },
    }
}

/// Whether a policy's scope constraints match a request. Scope matching is
/// total: entity-literal scopes cannot error.
pub fn scope_matches(policy: &Policy, request: &Request, store: &Entities) -> bool {
    let principal = match &policy.principal_scope {
        ScopeConstraint::Any => true,
        ScopeConstraint::Eq(uid) => request.principal == *uid,
        ScopeConstraint::In(uid) => store.in_relation(&request.principal, uid),
    };
    let action = match &policy.action_scope {
        ActionScopeConstraint::Any => true,
        ActionScopeConstraint::Eq(uid) => request.action == *uid,
        ActionScopeConstraint::InSet(uids) => {
            uids.iter().any(|uid| store.in_relation(&request.action, uid))
        }
    };
    let resource = match &policy.resource_scope {
        ScopeConstraint::Any => true,
        ScopeConstraint::Eq(uid) => request.resource == *uid,
        ScopeConstraint::In(uid) => store.in_relation(&request.resource, uid),
    };
    principal && action && resource
}

/// Outcome of checking one policy against a request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Satisfaction {
    Satisfied,
    NotSatisfied,
    Errored(EvalError),
}

/// Checks whether a policy is satisfied: the scope must match and every
/// condition must pass (`when` bodies true, `unless` bodies false).
///
/// Conditions are evaluated in textual order and checking stops at the first
/// deciding clause: a failing condition yields `NotSatisfied` without
/// evaluating later clauses, and an erroring condition yields `Errored`. An
/// errored policy neither permits nor forbids.
pub fn satisfied(policy: &Policy, request: &Request, store: &Entities) -> Satisfaction {
    if !scope_matches(policy, request, store) {
        return Satisfaction::NotSatisfied;
    }
    for Condition { kind, body } in &policy.conditions {
        match evaluate(body, request, store) {
            Ok(Value::Bool(b)) => {
                let pass = match kind {
                    ConditionKind::When => b,
                    ConditionKind::Unless => !b,
                };
                if !pass {
                    return Satisfaction::NotSatisfied;
                }
            }
            Ok(v) => {
                return Satisfaction::Errored(expected(ValueKind::Bool, &v));
            }
            Err(e) => return Satisfaction::Errored(e),
        }
    }
    Satisfaction::Satisfied
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{BTreeMap, BTreeSet};
    use warden_core::{EntityData, EntityUid};

    fn uid(ty: &str, id: &str) -> EntityUid {
        EntityUid::of(ty, id)
    }

    /// Store with `List::"l1"` owned by alice and readable by team r1, which
    /// bob belongs to.
    fn fig1_store() -> Entities {
        let mut store = Entities::new();
        store.insert(uid("User", "alice"), EntityData::default());
        store.insert(
            uid("User", "bob"),
            EntityData {
                attrs: BTreeMap::new(),
                parents: [uid("Team", "interns"), uid("Team", "r1")]
                    .into_iter()
                    .collect(),
            },
        );
        store.insert(uid("Team", "interns"), EntityData::default());
        store.insert(uid("Team", "r1"), EntityData::default());
        store.insert(
            uid("List", "l1"),
            EntityData {
                attrs: [
                    ("owner".to_string(), Value::EntityRef(uid("User", "alice"))),
                    ("readers".to_string(), Value::EntityRef(uid("Team", "r1"))),
                ]
                .into_iter()
                .collect(),
                parents: BTreeSet::new(),
            },
        );
        store
    }

    fn request(principal: EntityUid, resource: EntityUid) -> Request {
        Request::new(principal, uid("Action", "GetList"), resource, BTreeMap::new()).unwrap()
    }

    #[test]
    fn owner_guard_pattern() {
        // resource has owner && resource.owner == principal
        let body = Expr::and(
            Expr::has_attr(Expr::Var(Var::Resource), "owner"),
            Expr::binop(
                BinOp::Eq,
                Expr::get_attr(Expr::Var(Var::Resource), "owner"),
                Expr::Var(Var::Principal),
            ),
        );
        let store = fig1_store();
        let req = request(uid("User", "alice"), uid("List", "l1"));
        assert_eq!(evaluate(&body, &req, &store), Ok(Value::Bool(true)));

        let req_bob = request(uid("User", "bob"), uid("List", "l1"));
        assert_eq!(evaluate(&body, &req_bob, &store), Ok(Value::Bool(false)));
    }

    #[test]
    fn missing_attribute_errors() {
        let store = fig1_store();
        let req = request(uid("User", "alice"), uid("List", "l1"));
        let e = Expr::get_attr(Expr::Var(Var::Resource), "pwner");
        assert_eq!(
            evaluate(&e, &req, &store),
            Err(EvalError::MissingAttr("pwner".to_string()))
        );
    }

    #[test]
    fn comparison_on_entities_is_a_type_error() {
        let store = fig1_store();
        let req = request(uid("User", "alice"), uid("List", "l1"));
        let e = Expr::binop(BinOp::Lt, Expr::Var(Var::Principal), Expr::Var(Var::Resource));
        assert_eq!(
            evaluate(&e, &req, &store),
            Err(EvalError::type_error([ValueKind::Long], ValueKind::Entity))
        );
    }

    #[test]
    fn short_circuit_absorbs_rhs_error() {
        let store = fig1_store();
        let req = request(uid("User", "alice"), uid("List", "l1"));
        // false && (1 < User::"x")
        let e = Expr::and(
            Expr::lit_bool(false),
            Expr::binop(
                BinOp::Lt,
                Expr::lit_long(1),
                Expr::EntityLit(uid("User", "x")),
            ),
        );
        assert_eq!(evaluate(&e, &req, &store), Ok(Value::Bool(false)));

        let e = Expr::or(
            Expr::lit_bool(true),
            Expr::get_attr(Expr::Var(Var::Resource), "pwner"),
        );
        assert_eq!(evaluate(&e, &req, &store), Ok(Value::Bool(true)));
    }

    #[test]
    fn addition_overflows() {
        let store = Entities::new();
        let req = request(uid("User", "a"), uid("List", "l"));
        let e = Expr::binop(BinOp::Add, Expr::lit_long(i64::MAX), Expr::lit_long(1));
        assert_eq!(evaluate(&e, &req, &store), Err(EvalError::Overflow));
        let e = Expr::neg(Expr::lit_long(i64::MIN));
        assert_eq!(evaluate(&e, &req, &store), Err(EvalError::Overflow));
    }

    #[test]
    fn in_on_attribute_group() {
        // principal in resource.readers, bob in Team::"r1"
        let store = fig1_store();
        let req = request(uid("User", "bob"), uid("List", "l1"));
        let e = Expr::binop(
            BinOp::In,
            Expr::Var(Var::Principal),
            Expr::get_attr(Expr::Var(Var::Resource), "readers"),
        );
        assert_eq!(evaluate(&e, &req, &store), Ok(Value::Bool(true)));
    }

    #[test]
    fn in_set_right_operand() {
        let store = fig1_store();
        let req = request(uid("User", "bob"), uid("List", "l1"));
        let e = Expr::binop(
            BinOp::In,
            Expr::Var(Var::Principal),
            Expr::SetLit(vec![
                Expr::EntityLit(uid("Team", "other")),
                Expr::EntityLit(uid("Team", "interns")),
            ]),
        );
        assert_eq!(evaluate(&e, &req, &store), Ok(Value::Bool(true)));

        // Non-entity element in the set is a type error.
        let e = Expr::binop(
            BinOp::In,
            Expr::Var(Var::Principal),
            Expr::SetLit(vec![Expr::lit_long(1)]),
        );
        assert!(matches!(
            evaluate(&e, &req, &store),
            Err(EvalError::TypeError { .. })
        ));
    }

    #[test]
    fn eq_across_kinds_is_false_not_error() {
        let store = Entities::new();
        let req = request(uid("User", "a"), uid("List", "l"));
        let e = Expr::binop(BinOp::Eq, Expr::lit_long(1), Expr::lit_str("1"));
        assert_eq!(evaluate(&e, &req, &store), Ok(Value::Bool(false)));
        let e = Expr::binop(BinOp::Neq, Expr::lit_bool(true), Expr::lit_long(0));
        assert_eq!(evaluate(&e, &req, &store), Ok(Value::Bool(true)));
    }

    #[test]
    fn contains_and_like() {
        let store = Entities::new();
        let req = request(uid("User", "a"), uid("List", "l"));
        let e = Expr::binop(
            BinOp::Contains,
            Expr::SetLit(vec![Expr::lit_long(1), Expr::lit_long(2)]),
            Expr::lit_long(2),
        );
        assert_eq!(evaluate(&e, &req, &store), Ok(Value::Bool(true)));

        let e = Expr::like(
            Expr::lit_str("abc"),
            warden_core::Pattern(vec![
                warden_core::PatElem::Literal('a'),
                warden_core::PatElem::Wildcard,
            ]),
        );
        assert_eq!(evaluate(&e, &req, &store), Ok(Value::Bool(true)));
    }

    #[test]
    fn satisfied_stops_at_first_decider() {
        let store = fig1_store();
        let req = request(uid("User", "alice"), uid("List", "l1"));
        let erroring = Expr::binop(BinOp::Add, Expr::lit_long(1), Expr::lit_bool(true));
        let policy = |conditions: Vec<Condition>| Policy {
            id: "p".to_string(),
            effect: warden_core::Effect::Permit,
            principal_scope: ScopeConstraint::Any,
            action_scope: ActionScopeConstraint::Any,
            resource_scope: ScopeConstraint::Any,
            conditions,
        };

        // An erroring condition marks the policy errored...
        let p = policy(vec![Condition {
            kind: ConditionKind::When,
            body: erroring.clone(),
        }]);
        assert!(matches!(
            satisfied(&p, &req, &store),
            Satisfaction::Errored(EvalError::TypeError { .. })
        ));

        // ...unless an earlier condition already decided.
        let p = policy(vec![
            Condition {
                kind: ConditionKind::When,
                body: Expr::lit_bool(false),
            },
            Condition {
                kind: ConditionKind::When,
                body: erroring,
            },
        ]);
        assert_eq!(satisfied(&p, &req, &store), Satisfaction::NotSatisfied);

        // Non-boolean condition result is a type error.
        let p = policy(vec![Condition {
            kind: ConditionKind::When,
            body: Expr::lit_long(1),
        }]);
        assert!(matches!(
            satisfied(&p, &req, &store),
            Satisfaction::Errored(EvalError::TypeError { .. })
        ));

        // Unless requires the body to be false.
        let p = policy(vec![Condition {
            kind: ConditionKind::Unless,
            body: Expr::lit_bool(false),
        }]);
        assert_eq!(satisfied(&p, &req, &store), Satisfaction::Satisfied);
    }

    #[test]
    fn owner_policy_unsatisfied_without_owner_attr() {
        // The has-guard makes the condition false, not an error.
        let mut store = fig1_store();
        store.insert(uid("List", "bare"), EntityData::default());
        let policy = Policy {
            id: "policy0".to_string(),
            effect: warden_core::Effect::Permit,
            principal_scope: ScopeConstraint::Any,
            action_scope: ActionScopeConstraint::Any,
            resource_scope: ScopeConstraint::Any,
            conditions: vec![Condition {
                kind: ConditionKind::When,
                body: Expr::and(
                    Expr::has_attr(Expr::Var(Var::Resource), "owner"),
                    Expr::binop(
                        BinOp::Eq,
                        Expr::get_attr(Expr::Var(Var::Resource), "owner"),
                        Expr::Var(Var::Principal),
                    ),
                ),
            }],
        };
        let req = request(uid("User", "alice"), uid("List", "bare"));
        assert_eq!(satisfied(&policy, &req, &store), Satisfaction::NotSatisfied);
    }

    #[test]
    fn scope_matching() {
        let store = fig1_store();
        let policy3 = Policy {
            id: "policy2".to_string(),
            effect: warden_core::Effect::Forbid,
            principal_scope: ScopeConstraint::In(uid("Team", "interns")),
            action_scope: ActionScopeConstraint::Eq(uid("Action", "CreateList")),
            resource_scope: ScopeConstraint::Eq(uid("Application", "TinyTodo")),
            conditions: vec![],
        };
        let req = Request::new(
            uid("User", "bob"),
            uid("Action", "CreateList"),
            uid("Application", "TinyTodo"),
            BTreeMap::new(),
        )
        .unwrap();
        assert!(scope_matches(&policy3, &req, &store));

        let req_l1 = Request::new(
            uid("User", "bob"),
            uid("Action", "CreateList"),
            uid("List", "l1"),
            BTreeMap::new(),
        )
        .unwrap();
        assert!(!scope_matches(&policy3, &req_l1, &store));

        let all_any = Policy {
            principal_scope: ScopeConstraint::Any,
            action_scope: ActionScopeConstraint::Any,
            resource_scope: ScopeConstraint::Any,
            ..policy3
        };
        assert!(scope_matches(&all_any, &req_l1, &store));
    }

    #[test]
    fn depth_guard_fires_only_on_absurd_nesting() {
        let store = Entities::new();
        let req = request(uid("User", "a"), uid("List", "l"));
        let mut e = Expr::lit_bool(true);
        for _ in 0..=MAX_EVAL_DEPTH {
            e = Expr::not(e);
        }
        assert!(matches!(
            evaluate(&e, &req, &store),
            Err(EvalError::ArityOrDomain(_))
        ));

        let mut e = Expr::lit_bool(true);
        for _ in 0..64 {
            e = Expr::not(e);
        }
        assert_eq!(evaluate(&e, &req, &store), Ok(Value::Bool(true)));
    }
}
