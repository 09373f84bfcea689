//! JSON formats for entity stores, schemas, and requests.
//!
//! Parsing is strict: unknown keys are rejected, and every error names the
//! JSON path it was found at.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::Value as Json;

use warden_core::{
    ActionDecl, AttrDecl, Entities, EntityData, EntityType, EntityTypeDecl, EntityUid, Request,
    Schema, Type, Value,
};

use crate::lexer::{ParseError, SourceSpan};

fn err(path: &str, message: impl std::fmt::Display) -> ParseError {
    ParseError::new(format!("{path}: {message}"), SourceSpan::default())
}

fn parse_json(text: &str) -> Result<Json, ParseError> {
    serde_json::from_str(text).map_err(|e| err("$", e))
}

fn as_object<'j>(
    v: &'j Json,
    path: &str,
) -> Result<&'j serde_json::Map<String, Json>, ParseError> {
    v.as_object().ok_or_else(|| err(path, "expected an object"))
}

fn as_string<'j>(v: &'j Json, path: &str) -> Result<&'j str, ParseError> {
    v.as_str().ok_or_else(|| err(path, "expected a string"))
}

fn reject_unknown_keys(
    obj: &serde_json::Map<String, Json>,
    allowed: &[&str],
    path: &str,
) -> Result<(), ParseError> {
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(err(&format!("{path}.{key}"), "unknown key"));
        }
    }
    Ok(())
}

fn parse_uid_object(v: &Json, path: &str) -> Result<EntityUid, ParseError> {
    let obj = as_object(v, path)?;
    reject_unknown_keys(obj, &["type", "id"], path)?;
    let ty_text = as_string(
        obj.get("type")
            .ok_or_else(|| err(&format!("{path}.type"), "missing key"))?,
        &format!("{path}.type"),
    )?;
    let ty = EntityType::parse(ty_text).map_err(|e| err(&format!("{path}.type"), e))?;
    let id = as_string(
        obj.get("id")
            .ok_or_else(|| err(&format!("{path}.id"), "missing key"))?,
        &format!("{path}.id"),
    )?;
    Ok(EntityUid::new(ty, id))
}

/// Decodes an attribute value: scalars map to themselves, arrays to sets,
/// objects to records, and `{"__entity": {"type":…, "id":…}}` to an entity
/// reference.
fn parse_value(v: &Json, path: &str) -> Result<Value, ParseError> {
    match v {
        Json::Bool(b) => Ok(Value::Bool(*b)),
        Json::Number(n) => n
            .as_i64()
            .map(Value::Long)
            .ok_or_else(|| err(path, "number is not a signed 64-bit integer")),
        Json::String(s) => Ok(Value::Str(s.clone())),
        Json::Array(items) => {
            let mut set = BTreeSet::new();
            for (i, item) in items.iter().enumerate() {
                set.insert(parse_value(item, &format!("{path}[{i}]"))?);
            }
            Ok(Value::Set(set))
        }
        Json::Object(obj) => {
            if obj.contains_key("__entity") {
                reject_unknown_keys(obj, &["__entity"], path)?;
                let uid = parse_uid_object(&obj["__entity"], &format!("{path}.__entity"))?;
                return Ok(Value::EntityRef(uid));
            }
            let mut record = BTreeMap::new();
            for (key, item) in obj {
                record.insert(key.clone(), parse_value(item, &format!("{path}.{key}"))?);
            }
            Ok(Value::Record(record))
        }
        Json::Null => Err(err(path, "null is not a value")),
    }
}

/// Parses an entities document: an array of `{"uid": …, "attrs": …,
/// "parents": […]}` objects.
pub fn parse_entities_json(text: &str) -> Result<Entities, ParseError> {
    let json = parse_json(text)?;
    let items = json
        .as_array()
        .ok_or_else(|| err("$", "expected an array of entities"))?;
    let mut entities = Entities::new();
    for (i, item) in items.iter().enumerate() {
        let path = format!("$[{i}]");
        let obj = as_object(item, &path)?;
        reject_unknown_keys(obj, &["uid", "attrs", "parents"], &path)?;
        let uid = parse_uid_object(
            obj.get("uid")
                .ok_or_else(|| err(&format!("{path}.uid"), "missing key"))?,
            &format!("{path}.uid"),
        )?;
        let mut attrs = BTreeMap::new();
        if let Some(raw) = obj.get("attrs") {
            let attrs_obj = as_object(raw, &format!("{path}.attrs"))?;
            for (key, value) in attrs_obj {
                attrs.insert(
                    key.clone(),
                    parse_value(value, &format!("{path}.attrs.{key}"))?,
                );
            }
        }
        let mut parents = BTreeSet::new();
        if let Some(raw) = obj.get("parents") {
            let list = raw
                .as_array()
                .ok_or_else(|| err(&format!("{path}.parents"), "expected an array"))?;
            for (j, parent) in list.iter().enumerate() {
                parents.insert(parse_uid_object(parent, &format!("{path}.parents[{j}]"))?);
            }
        }
        if entities.contains(&uid) {
            return Err(err(&path, format!("duplicate entity `{uid}`")));
        }
        entities.insert(uid, EntityData { attrs, parents });
    }
    Ok(entities)
}

/// Decodes a type expression: `{"type": "Bool"|"Long"|"String"}`,
/// `{"type": "Entity", "name": …}`, `{"type": "Set", "element": …}`, or
/// `{"type": "Record", "attributes": …}`.
fn parse_type(v: &Json, path: &str) -> Result<Type, ParseError> {
    let obj = as_object(v, path)?;
    let kind = as_string(
        obj.get("type")
            .ok_or_else(|| err(&format!("{path}.type"), "missing key"))?,
        &format!("{path}.type"),
    )?;
    match kind {
        "Bool" => {
            reject_unknown_keys(obj, &["type"], path)?;
            Ok(Type::Bool)
        }
        "Long" => {
            reject_unknown_keys(obj, &["type"], path)?;
            Ok(Type::Long)
        }
        "String" => {
            reject_unknown_keys(obj, &["type"], path)?;
            Ok(Type::String)
        }
        "Entity" => {
            reject_unknown_keys(obj, &["type", "name"], path)?;
            let name = as_string(
                obj.get("name")
                    .ok_or_else(|| err(&format!("{path}.name"), "missing key"))?,
                &format!("{path}.name"),
            )?;
            let ty = EntityType::parse(name).map_err(|e| err(&format!("{path}.name"), e))?;
            Ok(Type::Entity(ty))
        }
        "Set" => {
            reject_unknown_keys(obj, &["type", "element"], path)?;
            let elem = parse_type(
                obj.get("element")
                    .ok_or_else(|| err(&format!("{path}.element"), "missing key"))?,
                &format!("{path}.element"),
            )?;
            Ok(Type::Set(Box::new(elem)))
        }
        "Record" => {
            reject_unknown_keys(obj, &["type", "attributes"], path)?;
            let attrs = parse_attr_decls(
                obj.get("attributes")
                    .ok_or_else(|| err(&format!("{path}.attributes"), "missing key"))?,
                &format!("{path}.attributes"),
            )?;
            Ok(Type::Record(attrs))
        }
        other => Err(err(
            &format!("{path}.type"),
            format!("unknown type `{other}`"),
        )),
    }
}

/// An attribute map: name to type declaration plus optional `required`
/// (default true).
fn parse_attr_decls(
    v: &Json,
    path: &str,
) -> Result<BTreeMap<String, AttrDecl>, ParseError> {
    let obj = as_object(v, path)?;
    let mut out = BTreeMap::new();
    for (name, decl) in obj {
        let decl_path = format!("{path}.{name}");
        let decl_obj = as_object(decl, &decl_path)?;
        let required = match decl_obj.get("required") {
            None => true,
            Some(Json::Bool(b)) => *b,
            Some(_) => {
                return Err(err(&format!("{decl_path}.required"), "expected a boolean"))
            }
        };
        // The type fields live alongside `required`; validate them on a copy
        // with `required` removed.
        let mut type_obj = decl_obj.clone();
        type_obj.remove("required");
        let ty = parse_type(&Json::Object(type_obj), &decl_path)?;
        out.insert(name.clone(), AttrDecl { ty, required });
    }
    Ok(out)
}

/// Parses a schema document with `entityTypes` and `actions` sections.
pub fn parse_schema_json(text: &str) -> Result<Schema, ParseError> {
    let json = parse_json(text)?;
    let obj = as_object(&json, "$")?;
    reject_unknown_keys(obj, &["entityTypes", "actions"], "$")?;

    let mut schema = Schema::default();
    if let Some(raw) = obj.get("entityTypes") {
        let types = as_object(raw, "$.entityTypes")?;
        for (name, decl) in types {
            let path = format!("$.entityTypes.{name}");
            let ty = EntityType::parse(name).map_err(|e| err(&path, e))?;
            let decl_obj = as_object(decl, &path)?;
            reject_unknown_keys(decl_obj, &["attributes", "memberOfTypes"], &path)?;
            let attributes = match decl_obj.get("attributes") {
                Some(raw) => parse_attr_decls(raw, &format!("{path}.attributes"))?,
                None => BTreeMap::new(),
            };
            let mut allowed_parent_types = BTreeSet::new();
            if let Some(raw) = decl_obj.get("memberOfTypes") {
                let list = raw
                    .as_array()
                    .ok_or_else(|| err(&format!("{path}.memberOfTypes"), "expected an array"))?;
                for (i, item) in list.iter().enumerate() {
                    let item_path = format!("{path}.memberOfTypes[{i}]");
                    let name = as_string(item, &item_path)?;
                    allowed_parent_types
                        .insert(EntityType::parse(name).map_err(|e| err(&item_path, e))?);
                }
            }
            schema.entity_types.insert(
                ty,
                EntityTypeDecl {
                    attributes,
                    allowed_parent_types,
                },
            );
        }
    }

    if let Some(raw) = obj.get("actions") {
        let actions = as_object(raw, "$.actions")?;
        for (name, decl) in actions {
            let path = format!("$.actions.{name}");
            let uid = EntityUid::of("Action", name);
            let decl_obj = as_object(decl, &path)?;
            reject_unknown_keys(decl_obj, &["appliesTo", "memberOf"], &path)?;
            let applies = decl_obj
                .get("appliesTo")
                .ok_or_else(|| err(&format!("{path}.appliesTo"), "missing key"))?;
            let applies_path = format!("{path}.appliesTo");
            let applies_obj = as_object(applies, &applies_path)?;
            reject_unknown_keys(
                applies_obj,
                &["principalTypes", "resourceTypes", "context"],
                &applies_path,
            )?;
            let mut action = ActionDecl::default();
            for (key, target) in [
                ("principalTypes", &mut action.principal_types),
                ("resourceTypes", &mut action.resource_types),
            ] {
                let list_path = format!("{applies_path}.{key}");
                let list = applies_obj
                    .get(key)
                    .ok_or_else(|| err(&list_path, "missing key"))?
                    .as_array()
                    .ok_or_else(|| err(&list_path, "expected an array"))?;
                for (i, item) in list.iter().enumerate() {
                    let item_path = format!("{list_path}[{i}]");
                    let name = as_string(item, &item_path)?;
                    target.insert(EntityType::parse(name).map_err(|e| err(&item_path, e))?);
                }
            }
            if let Some(raw) = applies_obj.get("context") {
                action.context_shape =
                    parse_attr_decls(raw, &format!("{applies_path}.context"))?;
            }
            if let Some(raw) = decl_obj.get("memberOf") {
                let list = raw
                    .as_array()
                    .ok_or_else(|| err(&format!("{path}.memberOf"), "expected an array"))?;
                for (i, item) in list.iter().enumerate() {
                    let group = as_string(item, &format!("{path}.memberOf[{i}]"))?;
                    action.parents.insert(EntityUid::of("Action", group));
                }
            }
            schema.actions.insert(uid, action);
        }
    }

    if let Err(errors) = schema.well_formed() {
        return Err(err("$", errors[0].to_string()));
    }
    Ok(schema)
}

/// Parses a request document: principal, action, resource uids plus an
/// optional context record.
pub fn parse_request_json(text: &str) -> Result<Request, ParseError> {
    let json = parse_json(text)?;
    let obj = as_object(&json, "$")?;
    reject_unknown_keys(obj, &["principal", "action", "resource", "context"], "$")?;
    let fetch = |key: &str| -> Result<EntityUid, ParseError> {
        parse_uid_object(
            obj.get(key)
                .ok_or_else(|| err(&format!("$.{key}"), "missing key"))?,
            &format!("$.{key}"),
        )
    };
    let principal = fetch("principal")?;
    let action = fetch("action")?;
    let resource = fetch("resource")?;
    let mut context = BTreeMap::new();
    if let Some(raw) = obj.get("context") {
        let ctx = as_object(raw, "$.context")?;
        for (key, value) in ctx {
            context.insert(key.clone(), parse_value(value, &format!("$.context.{key}"))?);
        }
    }
    Request::new(principal, action, resource, context).map_err(|e| err("$.action", e))
}
