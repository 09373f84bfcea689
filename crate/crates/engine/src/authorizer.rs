//! The authorization decision rule and request-relevant policy slicing.

use std::collections::BTreeSet;

use warden_core::{Decision, Effect, Entities, PolicySet, Request, Response};

use crate::evaluator::{satisfied, scope_matches, Satisfaction};

/// Ids of the policies with the given effect that are satisfied by the
/// request.
pub fn satisfied_policies(
    effect: Effect,
    policies: &PolicySet,
    request: &Request,
    store: &Entities,
) -> BTreeSet<String> {
    policies
        .iter()
        .filter(|p| p.effect == effect)
        .filter(|p| satisfied(p, request, store) == Satisfaction::Satisfied)
        .map(|p| p.id.clone())
        .collect()
}

/// Decides a request: deny if any forbid policy is satisfied or no permit
/// policy is, allow otherwise. The determining set is the satisfied forbids
/// on deny and the satisfied permits on allow; erroring policies are ignored
/// by the decision and reported in `errors`.
pub fn is_authorized(request: &Request, store: &Entities, policies: &PolicySet) -> Response {
    let mut errors = Vec::new();
    let mut permits = BTreeSet::new();
    let mut forbids = BTreeSet::new();
    for policy in policies.iter() {
        match satisfied(policy, request, store) {
            Satisfaction::Satisfied => {
                match policy.effect {
                    Effect::Permit => permits.insert(policy.id.clone()),
                    Effect::Forbid => forbids.insert(policy.id.clone()),
                };
            }
            Satisfaction::NotSatisfied => {}
            Satisfaction::Errored(e) => errors.push((policy.id.clone(), e)),
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

/// The subset of policies whose scope matches the request, ids preserved.
///
/// Slicing is semantic (it consults the store for `in` constraints), so a
/// sliced set always yields the same decision as the full set: policies
/// outside the slice cannot be satisfied.
pub fn slice(policies: &PolicySet, request: &Request, store: &Entities) -> PolicySet {
    policies.filtered(|p| scope_matches(p, request, store))
}
