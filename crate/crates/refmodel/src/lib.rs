//! Reference model: a second, independent implementation of evaluation,
//! authorization, slicing, and validation, written for auditability rather
//! than speed and used as the oracle in differential testing.
//!
//! It deliberately shares only the core data model with the production
//! engine: everything here is direct structural recursion with naive
//! transitive closures, no caching, no indexes, and no early exits beyond
//! the specified `&&`/`||` short-circuits.

use std::collections::{BTreeMap, BTreeSet};

use warden_core::expr::MAX_EVAL_DEPTH;
use warden_core::{
    ActionScopeConstraint, AttrDecl, BinOp, ConditionKind, Decision, Effect, Entities, EntityType,
    EntityUid, EvalError, Expr, Lit, Policy, PolicySet, Request, Response, Schema,
    ScopeConstraint, Type, Value, ValueKind, Var,
};

fn ancestors(store: &Entities, uid: &EntityUid) -> BTreeSet<EntityUid> {
    fn go(store: &Entities, uid: &EntityUid, acc: &mut BTreeSet<EntityUid>) {
        let parents = store.get(uid).map(|d| d.parents.clone()).unwrap_or_default();
        for p in parents {
            if acc.insert(p.clone()) {
                go(store, &p, acc);
            }
        }
    }
    let mut acc = BTreeSet::new();
    go(store, uid, &mut acc);
    acc.remove(uid);
    acc
}

fn entity_in(store: &Entities, a: &EntityUid, b: &EntityUid) -> bool {
    a == b || ancestors(store, a).contains(b)
}

fn type_error(expected: Vec<ValueKind>, got: ValueKind) -> EvalError {
    EvalError::TypeError { expected, got }
}

fn as_bool(v: Value) -> Result<bool, EvalError> {
    match v {
        Value::Bool(b) => Ok(b),
        v => Err(type_error(vec![ValueKind::Bool], v.kind())),
    }
}

fn as_long(v: Value) -> Result<i64, EvalError> {
    match v {
        Value::Long(n) => Ok(n),
        v => Err(type_error(vec![ValueKind::Long], v.kind())),
    }
}

pub fn ref_evaluate(e: &Expr, req: &Request, store: &Entities) -> Result<Value, EvalError> {
    eval(e, req, store, 0)
}

fn eval(e: &Expr, req: &Request, store: &Entities, depth: usize) -> Result<Value, EvalError> {
    if depth > MAX_EVAL_DEPTH {
        return Err(EvalError::ArityOrDomain(
            "expression nesting exceeds the evaluation depth limit".to_string(),
        ));
    }
    let d = depth + 1;
    match e {
        Expr::Lit(Lit::Bool(b)) => Ok(Value::Bool(*b)),
        Expr::Lit(Lit::Long(n)) => Ok(Value::Long(*n)),
        Expr::Lit(Lit::Str(s)) => Ok(Value::Str(s.clone())),
        Expr::EntityLit(u) => Ok(Value::EntityRef(u.clone())),
        Expr::Var(Var::Principal) => Ok(Value::EntityRef(req.principal.clone())),
        Expr::Var(Var::Action) => Ok(Value::EntityRef(req.action.clone())),
        Expr::Var(Var::Resource) => Ok(Value::EntityRef(req.resource.clone())),
        Expr::Var(Var::Context) => Ok(Value::Record(req.context.clone())),
        Expr::Not(a) => Ok(Value::Bool(!as_bool(eval(a, req, store, d)?)?)),
        Expr::Neg(a) => as_long(eval(a, req, store, d)?)?
            .checked_neg()
            .map(Value::Long)
            .ok_or(EvalError::Overflow),
        Expr::And(a, b) => match as_bool(eval(a, req, store, d)?)? {
            false => Ok(Value::Bool(false)),
            true => Ok(Value::Bool(as_bool(eval(b, req, store, d)?)?)),
        },
        Expr::Or(a, b) => match as_bool(eval(a, req, store, d)?)? {
            true => Ok(Value::Bool(true)),
            false => Ok(Value::Bool(as_bool(eval(b, req, store, d)?)?)),
        },
        Expr::If(g, t, f) => match as_bool(eval(g, req, store, d)?)? {
            true => eval(t, req, store, d),
            false => eval(f, req, store, d),
        },
        Expr::BinOp(op, a, b) => {
            let va = eval(a, req, store, d)?;
            let vb = eval(b, req, store, d)?;
            match op {
                BinOp::Eq => Ok(Value::Bool(va == vb)),
                BinOp::Neq => Ok(Value::Bool(va != vb)),
                BinOp::Lt => Ok(Value::Bool(as_long(va)? < as_long(vb)?)),
                BinOp::Le => Ok(Value::Bool(as_long(va)? <= as_long(vb)?)),
                BinOp::Gt => Ok(Value::Bool(as_long(va)? > as_long(vb)?)),
                BinOp::Ge => Ok(Value::Bool(as_long(va)? >= as_long(vb)?)),
                BinOp::Add => as_long(va)?
                    .checked_add(as_long(vb)?)
                    .map(Value::Long)
                    .ok_or(EvalError::Overflow),
                BinOp::Sub => as_long(va)?
                    .checked_sub(as_long(vb)?)
                    .map(Value::Long)
                    .ok_or(EvalError::Overflow),
                BinOp::In => {
                    let Value::EntityRef(child) = va else {
                        return Err(type_error(vec![ValueKind::Entity], va.kind()));
                    };
                    match vb {
                        Value::EntityRef(parent) => {
                            Ok(Value::Bool(entity_in(store, &child, &parent)))
                        }
                        Value::Set(items) => {
                            let mut found = false;
                            for item in items {
                                let Value::EntityRef(parent) = item else {
                                    return Err(type_error(
                                        vec![ValueKind::Entity],
                                        item.kind(),
                                    ));
                                };
                                found = found || entity_in(store, &child, &parent);
                            }
                            Ok(Value::Bool(found))
                        }
                        v => Err(type_error(
                            vec![ValueKind::Entity, ValueKind::Set],
                            v.kind(),
                        )),
                    }
                }
                BinOp::Contains => match va {
                    Value::Set(items) => Ok(Value::Bool(items.contains(&vb))),
                    v => Err(type_error(vec![ValueKind::Set], v.kind())),
                },
            }
        }
        Expr::Like(a, pattern) => match eval(a, req, store, d)? {
            Value::Str(s) => Ok(Value::Bool(pattern.matches(&s))),
            v => Err(type_error(vec![ValueKind::Str], v.kind())),
        },
        Expr::HasAttr(a, attr) => match eval(a, req, store, d)? {
            Value::EntityRef(u) => Ok(Value::Bool(match store.get(&u) {
                Some(data) => data.attrs.contains_key(attr),
                None => false,
            })),
            Value::Record(fields) => Ok(Value::Bool(fields.contains_key(attr))),
            v => Err(type_error(
                vec![ValueKind::Entity, ValueKind::Record],
                v.kind(),
            )),
        },
        Expr::GetAttr(a, attr) => {
            let attrs = match eval(a, req, store, d)? {
                Value::EntityRef(u) => match store.get(&u) {
                    Some(data) => data.attrs.clone(),
                    None => BTreeMap::new(),
                },
                Value::Record(fields) => fields,
                v => {
                    return Err(type_error(
                        vec![ValueKind::Entity, ValueKind::Record],
                        v.kind(),
                    ))
                }
            };
            attrs
                .get(attr)
                .cloned()
                .ok_or_else(|| EvalError::MissingAttr(attr.clone()))
        }
        Expr::SetLit(items) => {
            let mut out = BTreeSet::new();
            for item in items {
                out.insert(eval(item, req, store, d)?);
            }
            Ok(Value::Set(out))
        }
        Expr::RecordLit(fields) => {
            let mut out = BTreeMap::new();
            for (k, v) in fields {
                out.insert(k.clone(), eval(v, req, store, d)?);
            }
            Ok(Value::Record(out))
        }
    }
}

fn scope_matches(p: &Policy, req: &Request, store: &Entities) -> bool {
    (match &p.principal_scope {
        ScopeConstraint::Any => true,
        ScopeConstraint::Eq(u) => req.principal == *u,
        ScopeConstraint::In(u) => entity_in(store, &req.principal, u),
    }) && (match &p.action_scope {
        ActionScopeConstraint::Any => true,
        ActionScopeConstraint::Eq(u) => req.action == *u,
        ActionScopeConstraint::InSet(us) => us.iter().any(|u| entity_in(store, &req.action, u)),
    }) && (match &p.resource_scope {
        ScopeConstraint::Any => true,
        ScopeConstraint::Eq(u) => req.resource == *u,
        ScopeConstraint::In(u) => entity_in(store, &req.resource, u),
    })
}

enum Sat {
    Yes,
    No,
    Err(EvalError),
}

fn satisfied(p: &Policy, req: &Request, store: &Entities) -> Sat {
    if !scope_matches(p, req, store) {
        return Sat::No;
    }
    for cond in &p.conditions {
        let holds = match ref_evaluate(&cond.body, req, store) {
            Ok(Value::Bool(b)) => match cond.kind {
                ConditionKind::When => b,
                ConditionKind::Unless => !b,
            },
            Ok(v) => return Sat::Err(type_error(vec![ValueKind::Bool], v.kind())),
            Err(e) => return Sat::Err(e),
        };
        if !holds {
            return Sat::No;
        }
    }
    Sat::Yes
}

pub fn ref_is_authorized(req: &Request, store: &Entities, policies: &PolicySet) -> Response {
    let mut permits = BTreeSet::new();
    let mut forbids = BTreeSet::new();
    let mut errors = Vec::new();
    for p in policies.iter() {
        match satisfied(p, req, store) {
            Sat::Yes => {
                if p.effect == Effect::Permit {
                    permits.insert(p.id.clone());
                } else {
                    forbids.insert(p.id.clone());
                }
            }
            Sat::No => {}
            Sat::Err(e) => errors.push((p.id.clone(), e)),
        }
    }
    if forbids.is_empty() && !permits.is_empty() {
        Response {
            decision: Decision::Allow,
            determining: permits,
            errors,
        }
    } else {
        Response {
            decision: Decision::Deny,
            determining: forbids,
            errors,
        }
    }
}

pub fn ref_slice(policies: &PolicySet, req: &Request, store: &Entities) -> PolicySet {
    policies.filtered(|p| scope_matches(p, req, store))
}

// ----- validation -----

type Caps = BTreeSet<(Var, Vec<String>)>;

fn path_of(e: &Expr) -> Option<(Var, Vec<String>)> {
    match e {
        Expr::Var(v) => Some((*v, vec![])),
        Expr::GetAttr(inner, a) => {
            let (v, mut path) = path_of(inner)?;
            path.push(a.clone());
            Some((v, path))
        }
        _ => None,
    }
}

fn attrs_of<'s>(ty: &EntityType, schema: &'s Schema) -> Option<&'s BTreeMap<String, AttrDecl>> {
    schema.entity_types.get(ty).map(|d| &d.attributes)
}

/// Type synthesis; errors carry no detail, the verdict is what parity
/// compares.
fn tc(
    e: &Expr,
    env: &(EntityType, EntityUid, EntityType, BTreeMap<String, AttrDecl>),
    caps: &Caps,
    schema: &Schema,
    depth: usize,
) -> Result<(Type, Caps), ()> {
    if depth > MAX_EVAL_DEPTH {
        return Err(());
    }
    let d = depth + 1;
    let (ptype, action, rtype, ctx) = env;
    let plain = |t: Type| Ok((t, Caps::new()));
    match e {
        Expr::Lit(Lit::Bool(_)) => plain(Type::Bool),
        Expr::Lit(Lit::Long(_)) => plain(Type::Long),
        Expr::Lit(Lit::Str(_)) => plain(Type::String),
        Expr::EntityLit(u) => {
            let ok = if u.entity_type().is_action() {
                schema.actions.contains_key(u)
            } else {
                schema.entity_types.contains_key(u.entity_type())
            };
            if ok {
                plain(Type::Entity(u.entity_type().clone()))
            } else {
                Err(())
            }
        }
        Expr::Var(Var::Principal) => plain(Type::Entity(ptype.clone())),
        Expr::Var(Var::Action) => plain(Type::Entity(action.entity_type().clone())),
        Expr::Var(Var::Resource) => plain(Type::Entity(rtype.clone())),
        Expr::Var(Var::Context) => plain(Type::Record(ctx.clone())),
        Expr::Not(a) => match tc(a, env, caps, schema, d)? {
            (Type::Bool, _) => plain(Type::Bool),
            _ => Err(()),
        },
        Expr::Neg(a) => match tc(a, env, caps, schema, d)? {
            (Type::Long, _) => plain(Type::Long),
            _ => Err(()),
        },
        Expr::And(a, b) => {
            let (ta, ca) = tc(a, env, caps, schema, d)?;
            let mut caps2 = caps.clone();
            caps2.extend(ca.iter().cloned());
            let (tb, cb) = tc(b, env, &caps2, schema, d)?;
            if ta == Type::Bool && tb == Type::Bool {
                let mut out = ca;
                out.extend(cb);
                Ok((Type::Bool, out))
            } else {
                Err(())
            }
        }
        Expr::Or(a, b) => {
            let (ta, _) = tc(a, env, caps, schema, d)?;
            let (tb, _) = tc(b, env, caps, schema, d)?;
            if ta == Type::Bool && tb == Type::Bool {
                plain(Type::Bool)
            } else {
                Err(())
            }
        }
        Expr::If(g, t, f) => {
            let (tg, cg) = tc(g, env, caps, schema, d)?;
            if tg != Type::Bool {
                return Err(());
            }
            let mut caps2 = caps.clone();
            caps2.extend(cg);
            let (tt, _) = tc(t, env, &caps2, schema, d)?;
            let (tf, _) = tc(f, env, caps, schema, d)?;
            if tt == tf {
                plain(tt)
            } else {
                Err(())
            }
        }
        Expr::BinOp(op, a, b) => {
            let (ta, _) = tc(a, env, caps, schema, d)?;
            let (tb, _) = tc(b, env, caps, schema, d)?;
            match op {
                BinOp::Eq | BinOp::Neq => plain(Type::Bool),
                BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                    if ta == Type::Long && tb == Type::Long {
                        plain(Type::Bool)
                    } else {
                        Err(())
                    }
                }
                BinOp::Add | BinOp::Sub => {
                    if ta == Type::Long && tb == Type::Long {
                        plain(Type::Long)
                    } else {
                        Err(())
                    }
                }
                BinOp::In => match (ta, tb) {
                    (Type::Entity(_), Type::Entity(_)) => plain(Type::Bool),
                    (Type::Entity(_), Type::Set(elem)) if matches!(*elem, Type::Entity(_)) => {
                        plain(Type::Bool)
                    }
                    _ => Err(()),
                },
                BinOp::Contains => match ta {
                    Type::Set(_) => plain(Type::Bool),
                    _ => Err(()),
                },
            }
        }
        Expr::Like(a, _) => match tc(a, env, caps, schema, d)? {
            (Type::String, _) => plain(Type::Bool),
            _ => Err(()),
        },
        Expr::HasAttr(a, attr) => {
            let (ta, _) = tc(a, env, caps, schema, d)?;
            let declared = match &ta {
                Type::Entity(ty) => attrs_of(ty, schema)
                    .map(|m| m.contains_key(attr))
                    .unwrap_or(false),
                Type::Record(fields) => fields.contains_key(attr),
                _ => return Err(()),
            };
            let mut out = Caps::new();
            if declared {
                if let Some((v, mut path)) = path_of(a) {
                    path.push(attr.clone());
                    out.insert((v, path));
                }
            }
            Ok((Type::Bool, out))
        }
        Expr::GetAttr(a, attr) => {
            let (ta, _) = tc(a, env, caps, schema, d)?;
            let decl = match &ta {
                Type::Entity(ty) => attrs_of(ty, schema).and_then(|m| m.get(attr)).cloned(),
                Type::Record(fields) => fields.get(attr).cloned(),
                _ => return Err(()),
            };
            let decl = decl.ok_or(())?;
            if !decl.required && path_of(e).map(|p| caps.contains(&p)) != Some(true) {
                return Err(());
            }
            plain(decl.ty)
        }
        Expr::SetLit(items) => {
            let (first, rest) = items.split_first().ok_or(())?;
            let (t0, _) = tc(first, env, caps, schema, d)?;
            for item in rest {
                if tc(item, env, caps, schema, d)?.0 != t0 {
                    return Err(());
                }
            }
            plain(Type::Set(Box::new(t0)))
        }
        Expr::RecordLit(fields) => {
            let mut shape = BTreeMap::new();
            for (k, v) in fields {
                let (t, _) = tc(v, env, caps, schema, d)?;
                if shape
                    .insert(k.clone(), AttrDecl { ty: t, required: true })
                    .is_some()
                {
                    return Err(());
                }
            }
            plain(Type::Record(shape))
        }
    }
}

fn type_reaches(from: &EntityType, to: &EntityType, schema: &Schema, seen: &mut BTreeSet<EntityType>) -> bool {
    if from == to {
        return true;
    }
    if !seen.insert(from.clone()) {
        return false;
    }
    match schema.entity_types.get(from) {
        Some(decl) => decl
            .allowed_parent_types
            .iter()
            .any(|p| type_reaches(p, to, schema, seen)),
        None => false,
    }
}

fn action_reaches(from: &EntityUid, to: &EntityUid, schema: &Schema, seen: &mut BTreeSet<EntityUid>) -> bool {
    if from == to {
        return true;
    }
    if !seen.insert(from.clone()) {
        return false;
    }
    match schema.actions.get(from) {
        Some(decl) => decl
            .parents
            .iter()
            .any(|p| action_reaches(p, to, schema, seen)),
        None => false,
    }
}

fn compatible(
    p: &Policy,
    env: &(EntityType, EntityUid, EntityType, BTreeMap<String, AttrDecl>),
    schema: &Schema,
) -> bool {
    let (ptype, action, rtype, _) = env;
    (match &p.principal_scope {
        ScopeConstraint::Any => true,
        ScopeConstraint::Eq(u) => ptype == u.entity_type(),
        ScopeConstraint::In(u) => type_reaches(ptype, u.entity_type(), schema, &mut BTreeSet::new()),
    }) && (match &p.action_scope {
        ActionScopeConstraint::Any => true,
        ActionScopeConstraint::Eq(u) => action == u,
        ActionScopeConstraint::InSet(us) => us
            .iter()
            .any(|u| action_reaches(action, u, schema, &mut BTreeSet::new())),
    }) && (match &p.resource_scope {
        ScopeConstraint::Any => true,
        ScopeConstraint::Eq(u) => rtype == u.entity_type(),
        ScopeConstraint::In(u) => type_reaches(rtype, u.entity_type(), schema, &mut BTreeSet::new()),
    })
}

/// Validation verdict: every condition of the policy must typecheck to bool
/// in every scope-compatible environment of the schema.
pub fn ref_validate_policy(p: &Policy, schema: &Schema) -> bool {
    for (action, decl) in &schema.actions {
        for ptype in &decl.principal_types {
            for rtype in &decl.resource_types {
                let env = (
                    ptype.clone(),
                    action.clone(),
                    rtype.clone(),
                    decl.context_shape.clone(),
                );
                if !compatible(p, &env, schema) {
                    continue;
                }
                for cond in &p.conditions {
                    match tc(&cond.body, &env, &Caps::new(), schema, 0) {
                        Ok((Type::Bool, _)) => {}
                        _ => return false,
                    }
                }
            }
        }
    }
    true
}
