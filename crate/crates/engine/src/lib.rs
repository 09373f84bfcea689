//! Production authorization engine: expression evaluator, authorizer with
//! policy slicing, and the schema-based policy validator.

pub mod authorizer;
pub mod evaluator;
pub mod validator;

pub use authorizer::{is_authorized, satisfied_policies, slice};
pub use evaluator::{evaluate, satisfied, scope_matches, Satisfaction};
pub use validator::{
    env_compatible, request_envs, typecheck, validate_policy, validate_policy_set, Capability,
    CapabilitySet, RequestEnv, TypeCheckError, ValidationError,
};

#[cfg(test)]
pub(crate) mod testutil {
    use std::collections::{BTreeMap, BTreeSet};

    use warden_core::{
        ActionDecl, ActionScopeConstraint, AttrDecl, BinOp, Condition, ConditionKind, Effect,
        EntityType, EntityTypeDecl, EntityUid, Expr, Policy, PolicySet, Schema, ScopeConstraint,
        Type, Var,
    };

    fn ty(name: &str) -> EntityType {
        EntityType::parse(name).unwrap()
    }

    /// Schema for the task-list example: User, Team, List, Application, with
    /// GetList and CreateList actions. `owner` is optional so the has-guard
    /// pattern is exercised; it is declared on Application too so the
    /// unscoped owner policy typechecks in every environment.
    pub fn tinytodo_schema() -> Schema {
        let mut schema = Schema::default();
        schema.entity_types.insert(
            ty("User"),
            EntityTypeDecl {
                attributes: BTreeMap::new(),
                allowed_parent_types: [ty("Team")].into_iter().collect(),
            },
        );
        schema.entity_types.insert(
            ty("Team"),
            EntityTypeDecl {
                attributes: BTreeMap::new(),
                allowed_parent_types: [ty("Team")].into_iter().collect(),
            },
        );
        schema.entity_types.insert(
            ty("List"),
            EntityTypeDecl {
                attributes: [
                    (
                        "owner".to_string(),
                        AttrDecl::optional(Type::Entity(ty("User"))),
                    ),
                    (
                        "readers".to_string(),
                        AttrDecl::required(Type::Entity(ty("Team"))),
                    ),
                    (
                        "editors".to_string(),
                        AttrDecl::required(Type::Entity(ty("Team"))),
                    ),
                ]
                .into_iter()
                .collect(),
                allowed_parent_types: BTreeSet::new(),
            },
        );
        schema.entity_types.insert(
            ty("Application"),
            EntityTypeDecl {
                attributes: [(
                    "owner".to_string(),
                    AttrDecl::optional(Type::Entity(ty("User"))),
                )]
                .into_iter()
                .collect(),
                allowed_parent_types: BTreeSet::new(),
            },
        );
        schema.actions.insert(
            EntityUid::of("Action", "GetList"),
            ActionDecl {
                principal_types: [ty("User")].into_iter().collect(),
                resource_types: [ty("List")].into_iter().collect(),
                context_shape: BTreeMap::new(),
                parents: BTreeSet::new(),
            },
        );
        schema.actions.insert(
            EntityUid::of("Action", "CreateList"),
            ActionDecl {
                principal_types: [ty("User")].into_iter().collect(),
                resource_types: [ty("Application")].into_iter().collect(),
                context_shape: BTreeMap::new(),
                parents: BTreeSet::new(),
            },
        );
        schema
    }

    /// The three example policies, ids `policy0..policy2` in textual order.
    pub fn fig1_policy_set() -> PolicySet {
        let policy0 = Policy {
            id: "policy0".to_string(),
            effect: Effect::Permit,
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
        let policy1 = Policy {
            id: "policy1".to_string(),
            effect: Effect::Permit,
            principal_scope: ScopeConstraint::Any,
            action_scope: ActionScopeConstraint::Eq(EntityUid::of("Action", "GetList")),
            resource_scope: ScopeConstraint::Any,
            conditions: vec![Condition {
                kind: ConditionKind::When,
                body: Expr::or(
                    Expr::binop(
                        BinOp::In,
                        Expr::Var(Var::Principal),
                        Expr::get_attr(Expr::Var(Var::Resource), "readers"),
                    ),
                    Expr::binop(
                        BinOp::In,
                        Expr::Var(Var::Principal),
                        Expr::get_attr(Expr::Var(Var::Resource), "editors"),
                    ),
                ),
            }],
        };
        let policy2 = Policy {
            id: "policy2".to_string(),
            effect: Effect::Forbid,
            principal_scope: ScopeConstraint::In(EntityUid::of("Team", "interns")),
            action_scope: ActionScopeConstraint::Eq(EntityUid::of("Action", "CreateList")),
            resource_scope: ScopeConstraint::Eq(EntityUid::of("Application", "TinyTodo")),
            conditions: vec![],
        };
        PolicySet::new(vec![policy0, policy1, policy2]).unwrap()
    }
}
