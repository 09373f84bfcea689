//! Schemas: entity-type shapes, allowed parent types, and action
//! applicability, plus the validator's type language.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::uid::{EntityType, EntityUid};

/// The validator's type language.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Type {
    Bool,
    Long,
    String,
    Entity(EntityType),
    Set(Box<Type>),
    Record(BTreeMap<String, AttrDecl>),
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Bool => write!(f, "bool"),
            Type::Long => write!(f, "long"),
            Type::String => write!(f, "string"),
            Type::Entity(ty) => write!(f, "entity<{ty}>"),
            Type::Set(elem) => write!(f, "set<{elem}>"),
            Type::Record(fields) => {
                write!(f, "record{{")?;
                for (i, (name, decl)) in fields.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    let opt = if decl.required { "" } else { "?" };
                    write!(f, "{name}{opt}: {}", decl.ty)?;
                }
                write!(f, "}}")
            }
        }
    }
}

/// A declared attribute: its type and whether it must be present.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AttrDecl {
    pub ty: Type,
    pub required: bool,
}

impl AttrDecl {
    pub fn required(ty: Type) -> Self {
        AttrDecl { ty, required: true }
    }

    pub fn optional(ty: Type) -> Self {
        AttrDecl {
            ty,
            required: false,
        }
    }
}

/// Shape of one entity type: its attributes and which entity types its
/// instances may have as direct parents.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EntityTypeDecl {
    pub attributes: BTreeMap<String, AttrDecl>,
    pub allowed_parent_types: BTreeSet<EntityType>,
}

/// One declared action: applicability sets, context shape, action groups.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ActionDecl {
    pub principal_types: BTreeSet<EntityType>,
    pub resource_types: BTreeSet<EntityType>,
    pub context_shape: BTreeMap<String, AttrDecl>,
    pub parents: BTreeSet<EntityUid>,
}

/// Schema well-formedness violation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error("undeclared entity type `{0}` referenced at {1}")]
    UndeclaredType(EntityType, String),
    #[error("undeclared action `{0}` referenced at {1}")]
    UndeclaredAction(EntityUid, String),
    #[error("action uid `{0}` does not have an Action entity type")]
    NotAnActionType(EntityUid),
}

/// Entity type declarations plus action declarations.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Schema {
    pub entity_types: BTreeMap<EntityType, EntityTypeDecl>,
    pub actions: BTreeMap<EntityUid, ActionDecl>,
}

impl Schema {
    /// Checks that every entity type and action referenced anywhere in the
    /// schema is declared.
    pub fn well_formed(&self) -> Result<(), Vec<SchemaError>> {
        let mut errors = Vec::new();
        let check_type = |ty: &EntityType, at: String, errors: &mut Vec<SchemaError>| {
            if !self.entity_types.contains_key(ty) {
                errors.push(SchemaError::UndeclaredType(ty.clone(), at));
            }
        };
        fn check_attr_types(
            schema: &Schema,
            ty: &Type,
            at: &str,
            errors: &mut Vec<SchemaError>,
        ) {
            match ty {
                Type::Bool | Type::Long | Type::String => {}
                Type::Entity(name) => {
                    if !schema.entity_types.contains_key(name) {
                        errors.push(SchemaError::UndeclaredType(name.clone(), at.to_string()));
                    }
                }
                Type::Set(elem) => check_attr_types(schema, elem, at, errors),
                Type::Record(fields) => {
                    for (name, decl) in fields {
                        check_attr_types(schema, &decl.ty, &format!("{at}.{name}"), errors);
                    }
                }
            }
        }

        for (ty_name, decl) in &self.entity_types {
            for (attr, attr_decl) in &decl.attributes {
                check_attr_types(
                    self,
                    &attr_decl.ty,
                    &format!("entity type {ty_name}, attribute {attr}"),
                    &mut errors,
                );
            }
            for parent in &decl.allowed_parent_types {
                check_type(
                    parent,
                    format!("entity type {ty_name}, allowed parent types"),
                    &mut errors,
                );
            }
        }
        for (uid, action) in &self.actions {
            if !uid.entity_type().is_action() {
                errors.push(SchemaError::NotAnActionType(uid.clone()));
            }
            for ty in action.principal_types.iter().chain(&action.resource_types) {
                check_type(ty, format!("action {uid} applicability"), &mut errors);
            }
            for (attr, attr_decl) in &action.context_shape {
                check_attr_types(
                    self,
                    &attr_decl.ty,
                    &format!("action {uid}, context attribute {attr}"),
                    &mut errors,
                );
            }
            for parent in &action.parents {
                if !self.actions.contains_key(parent) {
                    errors.push(SchemaError::UndeclaredAction(
                        parent.clone(),
                        format!("action {uid} memberOf"),
                    ));
                }
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }

    /// All entity types an instance of `ty` can be `in`, per the declared
    /// parent-type relation, including `ty` itself (membership is reflexive).
    pub fn reachable_parent_types(&self, ty: &EntityType) -> BTreeSet<EntityType> {
        let mut seen: BTreeSet<EntityType> = BTreeSet::new();
        let mut work = vec![ty.clone()];
        while let Some(next) = work.pop() {
            if seen.insert(next.clone()) {
                if let Some(decl) = self.entity_types.get(&next) {
                    work.extend(decl.allowed_parent_types.iter().cloned());
                }
            }
        }
        seen
    }

    /// Reflexive-transitive action-group membership per the declared action
    /// parent relation: can `action` be `in` `group`?
    pub fn action_in(&self, action: &EntityUid, group: &EntityUid) -> bool {
        if action == group {
            return true;
        }
        let mut seen: BTreeSet<&EntityUid> = BTreeSet::new();
        let mut work = vec![action];
        while let Some(next) = work.pop() {
            if next == group {
                return true;
            }
            if seen.insert(next) {
                if let Some(decl) = self.actions.get(next) {
                    work.extend(decl.parents.iter());
                }
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ty(name: &str) -> EntityType {
        EntityType::parse(name).unwrap()
    }

    #[test]
    fn well_formedness_catches_undeclared_references() {
        let mut schema = Schema::default();
        schema.entity_types.insert(
            ty("User"),
            EntityTypeDecl {
                attributes: [(
                    "team".to_string(),
                    AttrDecl::required(Type::Entity(ty("Team"))),
                )]
                .into_iter()
                .collect(),
                allowed_parent_types: BTreeSet::new(),
            },
        );
        let errs = schema.well_formed().unwrap_err();
        assert_eq!(errs.len(), 1);
        assert!(matches!(errs[0], SchemaError::UndeclaredType(..)));

        schema
            .entity_types
            .insert(ty("Team"), EntityTypeDecl::default());
        assert!(schema.well_formed().is_ok());
    }

    #[test]
    fn reachable_parent_types_is_reflexive_transitive() {
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
                allowed_parent_types: [ty("Org")].into_iter().collect(),
            },
        );
        schema
            .entity_types
            .insert(ty("Org"), EntityTypeDecl::default());
        let reach = schema.reachable_parent_types(&ty("User"));
        assert_eq!(reach, [ty("User"), ty("Team"), ty("Org")].into_iter().collect());
    }

    #[test]
    fn action_groups() {
        let mut schema = Schema::default();
        let read = EntityUid::of("Action", "read");
        let all = EntityUid::of("Action", "all");
        schema.actions.insert(
            read.clone(),
            ActionDecl {
                parents: [all.clone()].into_iter().collect(),
                ..ActionDecl::default()
            },
        );
        schema.actions.insert(all.clone(), ActionDecl::default());
        assert!(schema.action_in(&read, &all));
        assert!(schema.action_in(&read, &read));
        assert!(!schema.action_in(&all, &read));
    }
}
