//! Policy-set generation in three styles: type-directed single-policy ABAC,
//! arbitrary-condition single-policy ABAC, and multi-policy condition-free
//! RBAC.

use warden_core::{
    ActionScopeConstraint, Condition, ConditionKind, Effect, EntityUid, Policy, PolicySet,
    ScopeConstraint,
};
use warden_engine::RequestEnv;

use crate::cursor::ByteCursor;
use crate::expr::{gen_expr, gen_untyped_expr, perturb_expr};
use crate::world::World;

/// Generation style for [`gen_policies`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyGenMode {
    /// One policy whose condition is type-directed; with `perturb`, a
    /// subterm is occasionally replaced by an ill-typed one.
    TypeDirectedAbac { perturb: bool },
    /// One policy whose condition uses only schema-declared names but obeys
    /// no type discipline.
    ArbitraryAbac,
    /// One to eight condition-free policies over scopes only.
    Rbac,
}

/// The request environment the world's own request inhabits.
pub fn request_env(world: &World) -> RequestEnv {
    let action = world.request.action.clone();
    let context_shape = world
        .schema
        .actions
        .get(&action)
        .map(|a| a.context_shape.clone())
        .unwrap_or_default();
    RequestEnv {
        principal_type: world.request.principal.entity_type().clone(),
        action,
        resource_type: world.request.resource.entity_type().clone(),
        context_shape,
    }
}

fn non_action_uids(world: &World) -> Vec<EntityUid> {
    world
        .store
        .iter()
        .map(|(u, _)| u.clone())
        .filter(|u| !u.entity_type().is_action())
        .collect()
}

fn action_uids(world: &World) -> Vec<EntityUid> {
    world.schema.actions.keys().cloned().collect()
}

fn gen_effect(c: &mut ByteCursor) -> Effect {
    // Permit-heavy so allows stay reachable under default-deny.
    if c.choose(4) == 3 {
        Effect::Forbid
    } else {
        Effect::Permit
    }
}

fn gen_entity_scope(c: &mut ByteCursor, pool: &[EntityUid]) -> ScopeConstraint {
    if pool.is_empty() {
        return ScopeConstraint::Any;
    }
    match c.choose(3) {
        0 => ScopeConstraint::Any,
        1 => ScopeConstraint::Eq(pool[c.choose(pool.len())].clone()),
        _ => ScopeConstraint::In(pool[c.choose(pool.len())].clone()),
    }
}

fn gen_action_scope(c: &mut ByteCursor, actions: &[EntityUid]) -> ActionScopeConstraint {
    match c.choose(3) {
        0 => ActionScopeConstraint::Any,
        1 => ActionScopeConstraint::Eq(actions[c.choose(actions.len())].clone()),
        _ => {
            let n = c.range(1, actions.len().min(3));
            ActionScopeConstraint::InSet(
                (0..n)
                    .map(|_| actions[c.choose(actions.len())].clone())
                    .collect(),
            )
        }
    }
}

/// Generates a policy set in the requested style. Ids are `policy0…` in
/// order, matching the parser's assignment.
pub fn gen_policies(mode: PolicyGenMode, c: &mut ByteCursor, world: &World) -> PolicySet {
    let policies = match mode {
        PolicyGenMode::TypeDirectedAbac { perturb } => {
            vec![gen_typed_policy(c, world, perturb)]
        }
        PolicyGenMode::ArbitraryAbac => vec![gen_arbitrary_policy(c, world)],
        PolicyGenMode::Rbac => {
            let entity_pool = non_action_uids(world);
            let action_pool = action_uids(world);
            let n = c.range(1, 8);
            (0..n)
                .map(|_| Policy {
                    id: String::new(),
                    effect: gen_effect(c),
                    principal_scope: gen_entity_scope(c, &entity_pool),
                    action_scope: gen_action_scope(c, &action_pool),
                    resource_scope: gen_entity_scope(c, &entity_pool),
                    conditions: Vec::new(),
                })
                .collect()
        }
    };
    let policies = policies
        .into_iter()
        .enumerate()
        .map(|(i, mut p)| {
            p.id = format!("policy{i}");
            p
        })
        .collect();
    PolicySet::new(policies).expect("generated ids are distinct")
}

/// Type-directed policy: the scope pins the request's own environment (so
/// every scope-compatible environment is the one the condition was generated
/// for), and the condition targets bool under that environment.
fn gen_typed_policy(c: &mut ByteCursor, world: &World, perturb: bool) -> Policy {
    let env = request_env(world);
    let action_decl = &world.schema.actions[&world.request.action];

    // `Any` keeps the same environment set only when the applicability side
    // is a singleton.
    let principal_scope = if action_decl.principal_types.len() == 1 && c.flag() {
        ScopeConstraint::Any
    } else {
        ScopeConstraint::Eq(world.request.principal.clone())
    };
    let resource_scope = if action_decl.resource_types.len() == 1 && c.flag() {
        ScopeConstraint::Any
    } else {
        ScopeConstraint::Eq(world.request.resource.clone())
    };
    let action_scope = ActionScopeConstraint::Eq(world.request.action.clone());

    let n_conds = c.range(1, 2);
    let conditions = (0..n_conds)
        .map(|_| {
            let kind = if c.choose(4) == 3 {
                ConditionKind::Unless
            } else {
                ConditionKind::When
            };
            let depth = c.range(1, 4);
            let mut body = gen_expr(c, &env, &warden_core::Type::Bool, world, depth);
            if perturb && c.rare() {
                body = perturb_expr(c, &body);
            }
            Condition { kind, body }
        })
        .collect();

    Policy {
        id: String::new(),
        effect: gen_effect(c),
        principal_scope,
        action_scope,
        resource_scope,
        conditions,
    }
}

fn gen_arbitrary_policy(c: &mut ByteCursor, world: &World) -> Policy {
    let entity_pool = non_action_uids(world);
    let action_pool = action_uids(world);
    let n_conds = c.range(1, 2);
    let conditions = (0..n_conds)
        .map(|_| {
            let kind = if c.choose(4) == 3 {
                ConditionKind::Unless
            } else {
                ConditionKind::When
            };
            let depth = c.range(1, 4);
            Condition {
                kind,
                body: gen_untyped_expr(c, world, depth),
            }
        })
        .collect();
    Policy {
        id: String::new(),
        effect: gen_effect(c),
        principal_scope: gen_entity_scope(c, &entity_pool),
        action_scope: gen_action_scope(c, &action_pool),
        resource_scope: gen_entity_scope(c, &entity_pool),
        conditions,
    }
}
