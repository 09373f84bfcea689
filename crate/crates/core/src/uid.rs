//! Entity identifiers: a typed name (`Team::Sub`) plus an arbitrary string id.

use std::fmt;

use thiserror::Error;

/// Error produced when constructing an [`EntityType`] from invalid segments.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvalidEntityType {
    #[error("entity type must have at least one segment")]
    Empty,
    #[error("invalid entity type segment `{0}`")]
    BadSegment(String),
}

/// Returns true when `s` is a valid identifier segment: `[A-Za-z_][A-Za-z0-9_]*`.
pub fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// An entity type name: one or more identifier segments joined by `::`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityType(Vec<String>);

impl EntityType {
    pub fn new<I, S>(segments: I) -> Result<Self, InvalidEntityType>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let segments: Vec<String> = segments.into_iter().map(Into::into).collect();
        if segments.is_empty() {
            return Err(InvalidEntityType::Empty);
        }
        for seg in &segments {
            if !is_ident(seg) {
                return Err(InvalidEntityType::BadSegment(seg.clone()));
            }
        }
        Ok(EntityType(segments))
    }

    /// Parses a `::`-joined type name such as `"Sub::Team"`.
    pub fn parse(name: &str) -> Result<Self, InvalidEntityType> {
        EntityType::new(name.split("::"))
    }

    pub fn segments(&self) -> &[String] {
        &self.0
    }

    /// The last segment; `Action` for action entity types.
    pub fn basename(&self) -> &str {
        self.0.last().expect("entity type is non-empty")
    }

    /// True when this is an action entity type (final segment `Action`).
    pub fn is_action(&self) -> bool {
        self.basename() == "Action"
    }
}

impl fmt::Display for EntityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.join("::"))
    }
}

/// A unique entity identifier: entity type plus entity id.
///
/// Equality is exact on both components; the ordering is lexicographic on
/// (type segments, id), which keeps derived `BTreeSet`s deterministic.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityUid {
    ty: EntityType,
    id: String,
}

impl EntityUid {
    pub fn new(ty: EntityType, id: impl Into<String>) -> Self {
        EntityUid { ty, id: id.into() }
    }

    /// Convenience constructor from a `::`-joined type name; panics on an
    /// invalid type name, so only use with literals.
    pub fn of(type_name: &str, id: impl Into<String>) -> Self {
        EntityUid::new(
            EntityType::parse(type_name).expect("invalid entity type literal"),
            id,
        )
    }

    pub fn entity_type(&self) -> &EntityType {
        &self.ty
    }

    pub fn id(&self) -> &str {
        &self.id
    }
}

impl fmt::Display for EntityUid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}::\"{}\"", self.ty, self.id.escape_debug())
    }
}
