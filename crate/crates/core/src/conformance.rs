//! Schema conformance for stores and requests.
//!
//! Conformance is what makes validation soundness meaningful: the validator's
//! verdict only protects evaluation over stores and requests that match the
//! schema, so both checks are explicit operations that report violations
//! rather than aborting.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::entities::Entities;
use crate::request::Request;
use crate::schema::{AttrDecl, Schema, Type};
use crate::uid::EntityUid;
use crate::value::Value;
use std::collections::BTreeMap;

/// A single conformance violation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("entity `{0}` has undeclared entity type")]
    UndeclaredEntityType(EntityUid),
    #[error("entity `{0}` has undeclared attribute `{1}`")]
    UndeclaredAttr(EntityUid, String),
    #[error("entity `{0}` is missing required attribute `{1}`")]
    MissingRequiredAttr(EntityUid, String),
    #[error("attribute `{attr}` of `{entity}` does not match its declared type: {detail}")]
    AttrTypeMismatch {
        entity: EntityUid,
        attr: String,
        detail: String,
    },
    #[error("entity `{child}` has parent `{parent}` of a disallowed type")]
    DisallowedParent { child: EntityUid, parent: EntityUid },
    #[error("entity hierarchy has a cycle through `{0}`")]
    HierarchyCycle(EntityUid),
    #[error("entity `{0}` is not a declared action")]
    UndeclaredActionEntity(EntityUid),
    #[error("action entity `{0}` must not carry attributes")]
    ActionEntityHasAttrs(EntityUid),
    #[error("action entity `{child}` has parent `{parent}` not declared for it in the schema")]
    UndeclaredActionParent { child: EntityUid, parent: EntityUid },
    #[error("request action `{0}` is not declared")]
    UndeclaredAction(EntityUid),
    #[error("request {component} type `{ty}` is not applicable to action `{action}`")]
    InapplicableType {
        component: &'static str,
        ty: String,
        action: EntityUid,
    },
    #[error("request context does not match the action's context shape: {0}")]
    ContextMismatch(String),
}

/// Checks a value against a declared type. When `store` is given, entity
/// references must also point at entities present in the store (attribute
/// access on a conformant store then never dangles).
fn value_conforms(
    value: &Value,
    ty: &Type,
    store: Option<&Entities>,
) -> Result<(), String> {
    match (value, ty) {
        (Value::Bool(_), Type::Bool) => Ok(()),
        (Value::Long(_), Type::Long) => Ok(()),
        (Value::Str(_), Type::String) => Ok(()),
        (Value::EntityRef(uid), Type::Entity(want)) => {
            if uid.entity_type() != want {
                return Err(format!(
                    "expected a `{want}` entity reference, got `{uid}`"
                ));
            }
            if let Some(store) = store {
                if !store.contains(uid) {
                    return Err(format!("referenced entity `{uid}` is not in the store"));
                }
            }
            Ok(())
        }
        (Value::Set(items), Type::Set(elem)) => {
            for item in items {
                value_conforms(item, elem, store)?;
            }
            Ok(())
        }
        (Value::Record(fields), Type::Record(shape)) => {
            record_conforms(fields, shape, store)
        }
        (v, t) => Err(format!("expected {t}, got a {} value", v.kind())),
    }
}

/// Checks a record value against a record shape: no undeclared fields, all
/// required fields present, every present field of the declared type.
fn record_conforms(
    fields: &BTreeMap<String, Value>,
    shape: &BTreeMap<String, AttrDecl>,
    store: Option<&Entities>,
) -> Result<(), String> {
    for name in fields.keys() {
        if !shape.contains_key(name) {
            return Err(format!("undeclared field `{name}`"));
        }
    }
    for (name, decl) in shape {
        match fields.get(name) {
            Some(v) => value_conforms(v, &decl.ty, store)
                .map_err(|e| format!("field `{name}`: {e}"))?,
            None if decl.required => {
                return Err(format!("missing required field `{name}`"));
            }
            None => {}
        }
    }
    Ok(())
}

/// Checks every entity in the store against the schema. Returns all
/// violations found; an empty list means the store conforms.
pub fn store_conforms(store: &Entities, schema: &Schema) -> Vec<Violation> {
    let mut violations = Vec::new();

    for (uid, data) in store.iter() {
        if uid.entity_type().is_action() {
            // Action entities mirror the schema's action hierarchy. Their
            // parents must be a subset of the declared parent edges, so the
            // validator's schema-side view over-approximates the store.
            let Some(decl) = schema.actions.get(uid) else {
                violations.push(Violation::UndeclaredActionEntity(uid.clone()));
                continue;
            };
            if !data.attrs.is_empty() {
                violations.push(Violation::ActionEntityHasAttrs(uid.clone()));
            }
            for parent in &data.parents {
                if !decl.parents.contains(parent) {
                    violations.push(Violation::UndeclaredActionParent {
                        child: uid.clone(),
                        parent: parent.clone(),
                    });
                }
            }
            continue;
        }

        let Some(decl) = schema.entity_types.get(uid.entity_type()) else {
            violations.push(Violation::UndeclaredEntityType(uid.clone()));
            continue;
        };
        for attr in data.attrs.keys() {
            if !decl.attributes.contains_key(attr) {
                violations.push(Violation::UndeclaredAttr(uid.clone(), attr.clone()));
            }
        }
        for (attr, attr_decl) in &decl.attributes {
            match data.attrs.get(attr) {
                Some(v) => {
                    if let Err(detail) = value_conforms(v, &attr_decl.ty, Some(store)) {
                        violations.push(Violation::AttrTypeMismatch {
                            entity: uid.clone(),
                            attr: attr.clone(),
                            detail,
                        });
                    }
                }
                None if attr_decl.required => {
                    violations.push(Violation::MissingRequiredAttr(uid.clone(), attr.clone()));
                }
                None => {}
            }
        }
        for parent in &data.parents {
            if !decl.allowed_parent_types.contains(parent.entity_type()) {
                violations.push(Violation::DisallowedParent {
                    child: uid.clone(),
                    parent: parent.clone(),
                });
            }
        }
    }

    violations.extend(find_cycle(store).map(Violation::HierarchyCycle));
    violations
}

/// Finds some entity on a parent-relation cycle, if one exists.
fn find_cycle(store: &Entities) -> Option<EntityUid> {
    let mut done: BTreeSet<&EntityUid> = BTreeSet::new();
    for (root, _) in store.iter() {
        if done.contains(root) {
            continue;
        }
        // Iterative DFS with an explicit on-path set.
        let mut on_path: Vec<&EntityUid> = Vec::new();
        let mut on_path_set: BTreeSet<&EntityUid> = BTreeSet::new();
        let mut stack: Vec<(&EntityUid, bool)> = vec![(root, false)];
        while let Some((node, exiting)) = stack.pop() {
            if exiting {
                on_path.pop();
                on_path_set.remove(node);
                done.insert(node);
                continue;
            }
            if done.contains(node) {
                continue;
            }
            if on_path_set.contains(node) {
                return Some(node.clone());
            }
            on_path.push(node);
            on_path_set.insert(node);
            stack.push((node, true));
            if let Some(data) = store.get(node) {
                for parent in &data.parents {
                    if on_path_set.contains(parent) {
                        return Some(parent.clone());
                    }
                    if !done.contains(parent) && store.contains(parent) {
                        stack.push((parent, false));
                    }
                }
            }
        }
    }
    None
}

/// Checks a request against the schema: the action must be declared, the
/// principal and resource types applicable, and the context must match the
/// action's context shape.
pub fn request_conforms(request: &Request, schema: &Schema) -> Result<(), Violation> {
    let Some(action) = schema.actions.get(&request.action) else {
        return Err(Violation::UndeclaredAction(request.action.clone()));
    };
    if !action
        .principal_types
        .contains(request.principal.entity_type())
    {
        return Err(Violation::InapplicableType {
            component: "principal",
            ty: request.principal.entity_type().to_string(),
            action: request.action.clone(),
        });
    }
    if !action
        .resource_types
        .contains(request.resource.entity_type())
    {
        return Err(Violation::InapplicableType {
            component: "resource",
            ty: request.resource.entity_type().to_string(),
            action: request.action.clone(),
        });
    }
    record_conforms(&request.context, &action.context_shape, None)
        .map_err(Violation::ContextMismatch)
}
