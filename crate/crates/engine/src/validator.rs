//! Schema-based static typechecking of policies.
//!
//! A policy validates when every condition body typechecks to bool in every
//! request environment its scope is compatible with. Optional attributes may
//! only be read under a `has` guard: the guard establishes a capability that
//! flows along the true branch of `&&` and `if`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use warden_core::expr::MAX_EVAL_DEPTH;
use warden_core::{
    ActionScopeConstraint, AttrDecl, BinOp, Expr, Lit, Policy, PolicySet, Schema, ScopeConstraint,
    Type, Var,
};
use warden_core::{EntityType, EntityUid};

/// One (action, principal type, resource type) combination a schema allows,
/// together with the action's context shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestEnv {
    pub principal_type: EntityType,
    pub action: EntityUid,
    pub resource_type: EntityType,
    pub context_shape: BTreeMap<String, AttrDecl>,
}

impl fmt::Display for RequestEnv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {})",
            self.principal_type, self.action, self.resource_type
        )
    }
}

/// All request environments of a schema, ordered by action uid, then
/// principal type, then resource type.
pub fn request_envs(schema: &Schema) -> Vec<RequestEnv> {
    let mut envs = Vec::new();
    for (action, decl) in &schema.actions {
        for principal_type in &decl.principal_types {
            for resource_type in &decl.resource_types {
                envs.push(RequestEnv {
                    principal_type: principal_type.clone(),
                    action: action.clone(),
                    resource_type: resource_type.clone(),
                    context_shape: decl.context_shape.clone(),
                });
            }
        }
    }
    envs
}

/// A fact established by a `has` guard: the attribute path rooted at a
/// request variable is known to be present.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Capability {
    pub root: Var,
    pub path: Vec<String>,
}

pub type CapabilitySet = BTreeSet<Capability>;

/// Static type error, carrying a rendering of the offending subexpression.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeCheckError {
    #[error("expected {expected}, found {actual}")]
    UnexpectedType { expected: String, actual: String },
    #[error("attribute `{attr}` is not declared for {on}")]
    UndeclaredAttr { on: String, attr: String },
    #[error("optional attribute `{attr}` of {on} read without a `has` guard")]
    UnguardedOptionalAttr { on: String, attr: String },
    #[error("entity type `{0}` is not declared in the schema")]
    UndeclaredEntityType(EntityType),
    #[error("action `{0}` is not declared in the schema")]
    UndeclaredAction(EntityUid),
    #[error("cannot infer an element type for an empty set literal")]
    EmptySetLiteral,
    #[error("duplicate record key `{0}`")]
    DuplicateRecordKey(String),
    #[error("branches have incompatible types {0} and {1}")]
    IncompatibleBranches(String, String),
    #[error("set elements have incompatible types {0} and {1}")]
    HeterogeneousSet(String, String),
    #[error("expression nesting exceeds the typechecking depth limit")]
    DepthExceeded,
    #[error("condition has type {0}, expected bool")]
    NonBooleanCondition(String),
}

/// A per-environment validation failure.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("in environment {env}: {error}")]
pub struct ValidationError {
    pub env: String,
    pub error: TypeCheckError,
}

/// Synthesizes the type of `e` in environment `env` given capabilities
/// `caps`, returning the type together with the capabilities that hold
/// whenever `e` evaluates to `true`.
pub fn typecheck(
    e: &Expr,
    env: &RequestEnv,
    caps: &CapabilitySet,
    schema: &Schema,
) -> Result<(Type, CapabilitySet), TypeCheckError> {
    check(e, env, caps, schema, 0)
}

fn no_caps(ty: Type) -> (Type, CapabilitySet) {
    (ty, CapabilitySet::new())
}

/// The attribute-path shape of `e`, when it is a chain of attribute reads
/// rooted at a request variable. Capabilities are only tracked for such
/// expressions.
fn var_path(e: &Expr) -> Option<Capability> {
    match e {
        Expr::Var(v) => Some(Capability {
            root: *v,
            path: Vec::new(),
        }),
        Expr::GetAttr(inner, attr) => {
            let mut cap = var_path(inner)?;
            cap.path.push(attr.clone());
            Some(cap)
        }
        _ => None,
    }
}

/// The attributes declared for `ty`: entity-type attributes for declared
/// types, none for action entities and other undeclared-but-typeable uids.
fn declared_attrs<'s>(
    ty: &EntityType,
    schema: &'s Schema,
) -> Option<&'s BTreeMap<String, AttrDecl>> {
    schema.entity_types.get(ty).map(|decl| &decl.attributes)
}

fn check(
    e: &Expr,
    env: &RequestEnv,
    caps: &CapabilitySet,
    schema: &Schema,
    depth: usize,
) -> Result<(Type, CapabilitySet), TypeCheckError> {
    if depth > MAX_EVAL_DEPTH {
        return Err(TypeCheckError::DepthExceeded);
    }
    let depth = depth + 1;
    match e {
        Expr::Lit(Lit::Bool(_)) => Ok(no_caps(Type::Bool)),
        Expr::Lit(Lit::Long(_)) => Ok(no_caps(Type::Long)),
        Expr::Lit(Lit::Str(_)) => Ok(no_caps(Type::String)),
        Expr::EntityLit(uid) => {
            let ty = uid.entity_type();
            if ty.is_action() {
                if !schema.actions.contains_key(uid) {
                    return Err(TypeCheckError::UndeclaredAction(uid.clone()));
                }
            } else if !schema.entity_types.contains_key(ty) {
                return Err(TypeCheckError::UndeclaredEntityType(ty.clone()));
            }
            Ok(no_caps(Type::Entity(ty.clone())))
        }
        Expr::Var(Var::Principal) => Ok(no_caps(Type::Entity(env.principal_type.clone()))),
        Expr::Var(Var::Action) => Ok(no_caps(Type::Entity(env.action.entity_type().clone()))),
        Expr::Var(Var::Resource) => Ok(no_caps(Type::Entity(env.resource_type.clone()))),
        Expr::Var(Var::Context) => Ok(no_caps(Type::Record(env.context_shape.clone()))),
        Expr::Not(inner) => {
            expect_bool(inner, env, caps, schema, depth)?;
            Ok(no_caps(Type::Bool))
        }
        Expr::Neg(inner) => {
            expect_type(Type::Long, inner, env, caps, schema, depth)?;
            Ok(no_caps(Type::Long))
        }
        Expr::And(a, b) => {
            let caps_a = expect_bool(a, env, caps, schema, depth)?;
            let mut caps_ab = caps.clone();
            caps_ab.extend(caps_a.iter().cloned());
            let caps_b = expect_bool(b, env, &caps_ab, schema, depth)?;
            let mut out = caps_a;
            out.extend(caps_b);
            Ok((Type::Bool, out))
        }
        Expr::Or(a, b) => {
            // Capabilities do not survive `||`.
            expect_bool(a, env, caps, schema, depth)?;
            expect_bool(b, env, caps, schema, depth)?;
            Ok(no_caps(Type::Bool))
        }
        Expr::If(guard, then, els) => {
            let caps_g = expect_bool(guard, env, caps, schema, depth)?;
            let mut caps_then = caps.clone();
            caps_then.extend(caps_g);
            let (t_then, _) = check(then, env, &caps_then, schema, depth)?;
            let (t_else, _) = check(els, env, caps, schema, depth)?;
            if t_then != t_else {
                return Err(TypeCheckError::IncompatibleBranches(
                    t_then.to_string(),
                    t_else.to_string(),
                ));
            }
            Ok(no_caps(t_then))
        }
        Expr::BinOp(op, a, b) => {
            match op {
                BinOp::Eq | BinOp::Neq => {
                    // Equality is total at runtime, so any operand types are
                    // fine, including provably-different entity types.
                    check(a, env, caps, schema, depth)?;
                    check(b, env, caps, schema, depth)?;
                    Ok(no_caps(Type::Bool))
                }
                BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                    expect_type(Type::Long, a, env, caps, schema, depth)?;
                    expect_type(Type::Long, b, env, caps, schema, depth)?;
                    Ok(no_caps(Type::Bool))
                }
                BinOp::Add | BinOp::Sub => {
                    expect_type(Type::Long, a, env, caps, schema, depth)?;
                    expect_type(Type::Long, b, env, caps, schema, depth)?;
                    Ok(no_caps(Type::Long))
                }
                BinOp::In => {
                    let (t_a, _) = check(a, env, caps, schema, depth)?;
                    if !matches!(t_a, Type::Entity(_)) {
                        return Err(TypeCheckError::UnexpectedType {
                            expected: "an entity".to_string(),
                            actual: t_a.to_string(),
                        });
                    }
                    let (t_b, _) = check(b, env, caps, schema, depth)?;
                    match t_b {
                        Type::Entity(_) => Ok(no_caps(Type::Bool)),
                        Type::Set(elem) if matches!(*elem, Type::Entity(_)) => {
                            Ok(no_caps(Type::Bool))
                        }
                        t => Err(TypeCheckError::UnexpectedType {
                            expected: "an entity or set of entities".to_string(),
                            actual: t.to_string(),
                        }),
                    }
                }
                BinOp::Contains => {
                    let (t_a, _) = check(a, env, caps, schema, depth)?;
                    if !matches!(t_a, Type::Set(_)) {
                        return Err(TypeCheckError::UnexpectedType {
                            expected: "a set".to_string(),
                            actual: t_a.to_string(),
                        });
                    }
                    check(b, env, caps, schema, depth)?;
                    Ok(no_caps(Type::Bool))
                }
            }
        }
        Expr::Like(inner, _) => {
            expect_type(Type::String, inner, env, caps, schema, depth)?;
            Ok(no_caps(Type::Bool))
        }
        Expr::HasAttr(inner, attr) => {
            let (t, _) = check(inner, env, caps, schema, depth)?;
            let declared = match &t {
                Type::Entity(ty) => declared_attrs(ty, schema)
                    .map(|attrs| attrs.contains_key(attr))
                    .unwrap_or(false),
                Type::Record(fields) => fields.contains_key(attr),
                t => {
                    return Err(TypeCheckError::UnexpectedType {
                        expected: "an entity or record".to_string(),
                        actual: t.to_string(),
                    })
                }
            };
            // `has` on an undeclared attribute is statically false but
            // runtime-total; it just establishes no capability.
            let mut caps_if_true = CapabilitySet::new();
            if declared {
                if let Some(mut cap) = var_path(inner) {
                    cap.path.push(attr.clone());
                    caps_if_true.insert(cap);
                }
            }
            Ok((Type::Bool, caps_if_true))
        }
        Expr::GetAttr(inner, attr) => {
            let (t, _) = check(inner, env, caps, schema, depth)?;
            let decl = match &t {
                Type::Entity(ty) => declared_attrs(ty, schema).and_then(|a| a.get(attr)).cloned(),
                Type::Record(fields) => fields.get(attr).cloned(),
                t => {
                    return Err(TypeCheckError::UnexpectedType {
                        expected: "an entity or record".to_string(),
                        actual: t.to_string(),
                    })
                }
            };
            let Some(decl) = decl else {
                return Err(TypeCheckError::UndeclaredAttr {
                    on: t.to_string(),
                    attr: attr.clone(),
                });
            };
            if !decl.required {
                let guarded = var_path(e).is_some_and(|cap| caps.contains(&cap));
                if !guarded {
                    return Err(TypeCheckError::UnguardedOptionalAttr {
                        on: t.to_string(),
                        attr: attr.clone(),
                    });
                }
            }
            Ok(no_caps(decl.ty))
        }
        Expr::SetLit(items) => {
            let Some((first, rest)) = items.split_first() else {
                return Err(TypeCheckError::EmptySetLiteral);
            };
            let (elem_ty, _) = check(first, env, caps, schema, depth)?;
            for item in rest {
                let (t, _) = check(item, env, caps, schema, depth)?;
                if t != elem_ty {
                    return Err(TypeCheckError::HeterogeneousSet(
                        elem_ty.to_string(),
                        t.to_string(),
                    ));
                }
            }
            Ok(no_caps(Type::Set(Box::new(elem_ty))))
        }
        Expr::RecordLit(fields) => {
            let mut shape = BTreeMap::new();
            for (name, value) in fields {
                let (t, _) = check(value, env, caps, schema, depth)?;
                if shape.insert(name.clone(), AttrDecl::required(t)).is_some() {
                    return Err(TypeCheckError::DuplicateRecordKey(name.clone()));
                }
            }
            Ok(no_caps(Type::Record(shape)))
        }
    }
}

fn expect_bool(
    e: &Expr,
    env: &RequestEnv,
    caps: &CapabilitySet,
    schema: &Schema,
    depth: usize,
) -> Result<CapabilitySet, TypeCheckError> {
    let (t, caps_if_true) = check(e, env, caps, schema, depth)?;
    if t != Type::Bool {
        return Err(TypeCheckError::UnexpectedType {
            expected: Type::Bool.to_string(),
            actual: t.to_string(),
        });
    }
    Ok(caps_if_true)
}

fn expect_type(
    want: Type,
    e: &Expr,
    env: &RequestEnv,
    caps: &CapabilitySet,
    schema: &Schema,
    depth: usize,
) -> Result<(), TypeCheckError> {
    let (t, _) = check(e, env, caps, schema, depth)?;
    if t != want {
        return Err(TypeCheckError::UnexpectedType {
            expected: want.to_string(),
            actual: t.to_string(),
        });
    }
    Ok(())
}

/// Whether a request environment can satisfy the policy's scope constraints,
/// judged from schema-declared parent types and action groups.
pub fn env_compatible(policy: &Policy, env: &RequestEnv, schema: &Schema) -> bool {
    let principal = match &policy.principal_scope {
        ScopeConstraint::Any => true,
        ScopeConstraint::Eq(uid) => env.principal_type == *uid.entity_type(),
        ScopeConstraint::In(uid) => schema
            .reachable_parent_types(&env.principal_type)
            .contains(uid.entity_type()),
    };
    let action = match &policy.action_scope {
        ActionScopeConstraint::Any => true,
        ActionScopeConstraint::Eq(uid) => env.action == *uid,
        ActionScopeConstraint::InSet(uids) => {
            uids.iter().any(|uid| schema.action_in(&env.action, uid))
        }
    };
    let resource = match &policy.resource_scope {
        ScopeConstraint::Any => true,
        ScopeConstraint::Eq(uid) => env.resource_type == *uid.entity_type(),
        ScopeConstraint::In(uid) => schema
            .reachable_parent_types(&env.resource_type)
            .contains(uid.entity_type()),
    };
    principal && action && resource
}

/// Validates one policy: every condition body must typecheck to bool, from an
/// empty capability set, in every scope-compatible environment.
pub fn validate_policy(policy: &Policy, schema: &Schema) -> Result<(), Vec<ValidationError>> {
    let mut errors = Vec::new();
    for env in request_envs(schema) {
        if !env_compatible(policy, &env, schema) {
            continue;
        }
        for condition in &policy.conditions {
            match typecheck(&condition.body, &env, &CapabilitySet::new(), schema) {
                Ok((Type::Bool, _)) => {}
                Ok((t, _)) => errors.push(ValidationError {
                    env: env.to_string(),
                    error: TypeCheckError::NonBooleanCondition(t.to_string()),
                }),
                Err(error) => errors.push(ValidationError {
                    env: env.to_string(),
                    error,
                }),
            }
        }
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

/// Pointwise [`validate_policy`]; the error map holds exactly the failing
/// policy ids.
pub fn validate_policy_set(
    policies: &PolicySet,
    schema: &Schema,
) -> Result<(), BTreeMap<String, Vec<ValidationError>>> {
    let mut failures = BTreeMap::new();
    for policy in policies.iter() {
        if let Err(errors) = validate_policy(policy, schema) {
            failures.insert(policy.id.clone(), errors);
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(failures)
    }
}
