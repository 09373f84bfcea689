//! Runtime values. Sets are duplicate-free and order-insensitive; records map
//! attribute names to values.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::uid::EntityUid;

/// A policy-language runtime value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Bool(bool),
    Long(i64),
    Str(String),
    EntityRef(EntityUid),
    Set(BTreeSet<Value>),
    Record(BTreeMap<String, Value>),
}

/// The coarse kind of a value, used in dynamic type errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ValueKind {
    Bool,
    Long,
    Str,
    Entity,
    Set,
    Record,
}

impl Value {
    pub fn kind(&self) -> ValueKind {
        match self {
            Value::Bool(_) => ValueKind::Bool,
            Value::Long(_) => ValueKind::Long,
            Value::Str(_) => ValueKind::Str,
            Value::EntityRef(_) => ValueKind::Entity,
            Value::Set(_) => ValueKind::Set,
            Value::Record(_) => ValueKind::Record,
        }
    }

    pub fn set<I: IntoIterator<Item = Value>>(items: I) -> Value {
        Value::Set(items.into_iter().collect())
    }

    pub fn record<K: Into<String>, I: IntoIterator<Item = (K, Value)>>(items: I) -> Value {
        Value::Record(items.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ValueKind::Bool => "bool",
            ValueKind::Long => "long",
            ValueKind::Str => "string",
            ValueKind::Entity => "entity",
            ValueKind::Set => "set",
            ValueKind::Record => "record",
        };
        write!(f, "{name}")
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Value {
        Value::Bool(b)
    }
}

impl From<i64> for Value {
    fn from(n: i64) -> Value {
        Value::Long(n)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Value {
        Value::Str(s.to_string())
    }
}

impl From<EntityUid> for Value {
    fn from(uid: EntityUid) -> Value {
        Value::EntityRef(uid)
    }
}
