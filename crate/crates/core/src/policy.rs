//! Policies: effect, scope constraints, and condition clauses.

use std::fmt;

use thiserror::Error;

use crate::expr::Expr;
use crate::uid::EntityUid;

/// Whether a policy grants or removes access.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Effect {
    Permit,
    Forbid,
}

impl fmt::Display for Effect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Effect::Permit => write!(f, "permit"),
            Effect::Forbid => write!(f, "forbid"),
        }
    }
}

/// Scope constraint on the principal or resource component.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ScopeConstraint {
    Any,
    Eq(EntityUid),
    In(EntityUid),
}

/// Scope constraint on the action component; `in` takes a non-empty list so
/// role-style policies can name action groups.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ActionScopeConstraint {
    Any,
    Eq(EntityUid),
    InSet(Vec<EntityUid>),
}

/// Condition clause kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConditionKind {
    When,
    Unless,
}

/// A `when` or `unless` clause.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Condition {
    pub kind: ConditionKind,
    pub body: Expr,
}

/// A single policy.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Policy {
    pub id: String,
    pub effect: Effect,
    pub principal_scope: ScopeConstraint,
    pub action_scope: ActionScopeConstraint,
    pub resource_scope: ScopeConstraint,
    pub conditions: Vec<Condition>,
}

/// Error for a [`PolicySet`] with two policies sharing an id.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("duplicate policy id `{0}`")]
pub struct DuplicatePolicyId(pub String);

/// An ordered set of policies with pairwise-distinct ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PolicySet {
    policies: Vec<Policy>,
}

impl PolicySet {
    pub fn new(policies: Vec<Policy>) -> Result<Self, DuplicatePolicyId> {
        for (i, p) in policies.iter().enumerate() {
            if policies[..i].iter().any(|q| q.id == p.id) {
                return Err(DuplicatePolicyId(p.id.clone()));
            }
        }
        Ok(PolicySet { policies })
    }

    pub fn empty() -> Self {
        PolicySet::default()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Policy> {
        self.policies.iter()
    }

    pub fn len(&self) -> usize {
        self.policies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.policies.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Policy> {
        self.policies.iter().find(|p| p.id == id)
    }

    /// Keeps the policies satisfying `keep`, preserving order and ids.
    pub fn filtered(&self, mut keep: impl FnMut(&Policy) -> bool) -> PolicySet {
        PolicySet {
            policies: self.policies.iter().filter(|p| keep(p)).cloned().collect(),
        }
    }
}
