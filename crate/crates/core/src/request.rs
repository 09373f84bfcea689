//! Requests and authorization responses.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::error::EvalError;
use crate::uid::EntityUid;
use crate::value::Value;

/// Error constructing a request whose action uid is not an action type.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("request action `{0}` does not have an Action entity type")]
pub struct BadActionUid(pub EntityUid);

/// An authorization request: who wants to do what to which resource, plus
/// contextual data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Request {
    pub principal: EntityUid,
    pub action: EntityUid,
    pub resource: EntityUid,
    pub context: BTreeMap<String, Value>,
}

impl Request {
    pub fn new(
        principal: EntityUid,
        action: EntityUid,
        resource: EntityUid,
        context: BTreeMap<String, Value>,
    ) -> Result<Self, BadActionUid> {
        if !action.entity_type().is_action() {
            return Err(BadActionUid(action));
        }
        Ok(Request {
            principal,
            action,
            resource,
            context,
        })
    }

    /// The context as a record value.
    pub fn context_value(&self) -> Value {
        Value::Record(self.context.clone())
    }
}

/// The authorization decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Allow,
    Deny,
}

/// The authorizer's answer: the decision, the policies that determined it,
/// and any policies that errored during evaluation (such policies neither
/// permit nor forbid).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Response {
    pub decision: Decision,
    pub determining: BTreeSet<String>,
    pub errors: Vec<(String, EvalError)>,
}

impl Response {
    /// The ids of policies that errored, as a set.
    pub fn error_ids(&self) -> BTreeSet<String> {
        self.errors.iter().map(|(id, _)| id.clone()).collect()
    }
}
