//! World generation: a schema, an entity store conforming to it, and a
//! request conforming to both — valid by construction.

use std::collections::{BTreeMap, BTreeSet};

use warden_core::{
    ActionDecl, AttrDecl, Entities, EntityData, EntityType, EntityTypeDecl, EntityUid, Request,
    Schema, Type, Value,
};

use crate::cursor::ByteCursor;

/// Size bounds for generated worlds.
#[derive(Debug, Clone)]
pub struct Limits {
    pub max_entity_types: usize,
    pub max_attrs_per_type: usize,
    pub max_entities: usize,
    pub max_type_depth: usize,
    pub max_actions: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_entity_types: 4,
            max_attrs_per_type: 4,
            max_entities: 8,
            max_type_depth: 3,
            max_actions: 4,
        }
    }
}

/// A generated (schema, store, request) triple. `store_conforms` and
/// `request_conforms` hold by construction.
#[derive(Debug, Clone)]
pub struct World {
    pub schema: Schema,
    pub store: Entities,
    pub request: Request,
}

const TYPE_POOL: [&str; 4] = ["User", "Team", "Doc", "App"];
const ATTR_POOL: [&str; 4] = ["a", "b", "c", "d"];
const FIELD_POOL: [&str; 2] = ["x", "y"];
const CTX_POOL: [&str; 2] = ["ca", "cb"];

/// Sample strings chosen to exercise escaping and pattern matching.
pub const STR_POOL: [&str; 8] = ["", "a", "ab", "*", "a*b", "λx", "li\nne", "q\"uo\\te"];

pub(crate) fn type_name(i: usize) -> EntityType {
    EntityType::parse(TYPE_POOL[i]).expect("pool names are valid")
}

pub(crate) fn action_uid(i: usize) -> EntityUid {
    EntityUid::of("Action", format!("a{i}"))
}

fn gen_type(c: &mut ByteCursor, depth: usize, n_types: usize) -> Type {
    let n_choices = if depth == 0 { 4 } else { 6 };
    match c.choose(n_choices) {
        0 => Type::Bool,
        1 => Type::Long,
        2 => Type::String,
        3 => Type::Entity(type_name(c.choose(n_types))),
        4 => Type::Set(Box::new(gen_type(c, depth - 1, n_types))),
        _ => {
            let n_fields = c.range(1, FIELD_POOL.len());
            let mut fields = BTreeMap::new();
            for field in FIELD_POOL.iter().take(n_fields) {
                fields.insert(
                    field.to_string(),
                    AttrDecl {
                        ty: gen_type(c, depth - 1, n_types),
                        required: c.flag(),
                    },
                );
            }
            Type::Record(fields)
        }
    }
}

fn gen_attr_decls(
    c: &mut ByteCursor,
    max_attrs: usize,
    depth: usize,
    n_types: usize,
    pool: &[&str],
) -> BTreeMap<String, AttrDecl> {
    let n = c.choose(max_attrs + 1);
    let mut attrs = BTreeMap::new();
    for attr in pool.iter().take(n) {
        attrs.insert(
            attr.to_string(),
            AttrDecl {
                ty: gen_type(c, depth, n_types),
                required: c.flag(),
            },
        );
    }
    attrs
}

/// A value of the given type whose entity references point into the store.
pub(crate) fn gen_value(
    c: &mut ByteCursor,
    ty: &Type,
    by_type: &BTreeMap<EntityType, Vec<EntityUid>>,
) -> Value {
    match ty {
        Type::Bool => Value::Bool(c.flag()),
        Type::Long => Value::Long(i64::from(c.byte()) - 128),
        Type::String => Value::Str(STR_POOL[c.choose(STR_POOL.len())].to_string()),
        Type::Entity(name) => {
            let instances = &by_type[name];
            Value::EntityRef(instances[c.choose(instances.len())].clone())
        }
        Type::Set(elem) => {
            let n = c.choose(3);
            Value::Set((0..n).map(|_| gen_value(c, elem, by_type)).collect())
        }
        Type::Record(shape) => {
            let mut fields = BTreeMap::new();
            for (name, decl) in shape {
                if decl.required || c.flag() {
                    fields.insert(name.clone(), gen_value(c, &decl.ty, by_type));
                }
            }
            Value::Record(fields)
        }
    }
}

/// Generates a world within the limits. Identical bytes produce identical
/// worlds; an exhausted cursor degrades to the minimal world (one entity
/// type, no attributes, one entity, one action).
pub fn gen_world(c: &mut ByteCursor, limits: &Limits) -> World {
    let n_types = c.range(1, limits.max_entity_types.min(TYPE_POOL.len()));

    // Entity type declarations.
    let mut schema = Schema::default();
    for i in 0..n_types {
        let attributes = gen_attr_decls(
            c,
            limits.max_attrs_per_type.min(ATTR_POOL.len()),
            limits.max_type_depth,
            n_types,
            &ATTR_POOL,
        );
        let mut allowed_parent_types = BTreeSet::new();
        for j in 0..n_types {
            if c.flag() {
                allowed_parent_types.insert(type_name(j));
            }
        }
        schema.entity_types.insert(
            type_name(i),
            EntityTypeDecl {
                attributes,
                allowed_parent_types,
            },
        );
    }

    // Actions: parents point at higher indices only, so the group graph is a
    // DAG by construction.
    let n_actions = c.range(1, limits.max_actions);
    for i in 0..n_actions {
        let mut parents = BTreeSet::new();
        for j in i + 1..n_actions {
            if c.flag() {
                parents.insert(action_uid(j));
            }
        }
        let mut principal_types = BTreeSet::new();
        let mut resource_types = BTreeSet::new();
        for j in 0..n_types {
            if c.flag() {
                principal_types.insert(type_name(j));
            }
            if c.flag() {
                resource_types.insert(type_name(j));
            }
        }
        if principal_types.is_empty() {
            principal_types.insert(type_name(0));
        }
        if resource_types.is_empty() {
            resource_types.insert(type_name(0));
        }
        let context_shape = gen_attr_decls(c, CTX_POOL.len(), 2, n_types, &CTX_POOL);
        schema.actions.insert(
            action_uid(i),
            ActionDecl {
                principal_types,
                resource_types,
                context_shape,
                parents,
            },
        );
    }

    // Entity skeleton first (uids and types), so attribute values can
    // reference entities that exist. The first `n_types` entities guarantee
    // an instance of every declared type.
    let n_entities = n_types + c.choose(limits.max_entities.saturating_sub(n_types) + 1);
    let mut skeleton: Vec<(EntityUid, EntityType)> = Vec::new();
    let mut by_type: BTreeMap<EntityType, Vec<EntityUid>> = BTreeMap::new();
    for i in 0..n_entities {
        let ty = if i < n_types {
            type_name(i)
        } else {
            type_name(c.choose(n_types))
        };
        let uid = EntityUid::new(ty.clone(), format!("e{i}"));
        by_type.entry(ty.clone()).or_default().push(uid.clone());
        skeleton.push((uid, ty));
    }

    // Parent edges point at higher indices only (instance-level DAG), and
    // only at types the schema allows.
    let mut store = Entities::new();
    for (i, (uid, ty)) in skeleton.iter().enumerate() {
        let allowed = &schema.entity_types[ty].allowed_parent_types;
        let mut parents = BTreeSet::new();
        for (parent_uid, parent_ty) in skeleton.iter().skip(i + 1) {
            if allowed.contains(parent_ty) && c.flag() {
                parents.insert(parent_uid.clone());
            }
        }
        let mut attrs = BTreeMap::new();
        for (name, decl) in &schema.entity_types[ty].attributes {
            if decl.required || c.flag() {
                attrs.insert(name.clone(), gen_value(c, &decl.ty, &by_type));
            }
        }
        store.insert(uid.clone(), EntityData { attrs, parents });
    }

    // Materialize the action hierarchy as entities so scope `in` constraints
    // can see it.
    for (uid, decl) in &schema.actions {
        store.insert(
            uid.clone(),
            EntityData {
                attrs: BTreeMap::new(),
                parents: decl.parents.clone(),
            },
        );
    }

    // A request conforming to the schema, aimed at entities in the store.
    let action = action_uid(c.choose(n_actions));
    let decl = &schema.actions[&action];
    let pick = |c: &mut ByteCursor, types: &BTreeSet<EntityType>| -> EntityUid {
        let types: Vec<_> = types.iter().cloned().collect();
        let ty = &types[c.choose(types.len())];
        let instances = &by_type[ty];
        instances[c.choose(instances.len())].clone()
    };
    let principal = pick(c, &decl.principal_types);
    let resource = pick(c, &decl.resource_types);
    let mut context = BTreeMap::new();
    for (name, attr) in &decl.context_shape {
        if attr.required || c.flag() {
            context.insert(name.clone(), gen_value(c, &attr.ty, &by_type));
        }
    }
    let request = Request::new(principal, action, resource, context)
        .expect("generated action uids always have the Action type");

    World {
        schema,
        store,
        request,
    }
}
