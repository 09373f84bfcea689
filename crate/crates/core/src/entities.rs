//! The entity store: attributes and the parent hierarchy, with ancestor and
//! membership queries over the (expected-to-be-acyclic) parent graph.

use std::collections::{BTreeMap, BTreeSet};

use crate::uid::EntityUid;
use crate::value::Value;

/// Attributes and direct parents of a single entity.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EntityData {
    pub attrs: BTreeMap<String, Value>,
    pub parents: BTreeSet<EntityUid>,
}

/// A store mapping entity uids to their data.
///
/// Uids absent from the store behave as attribute-less, parent-less entities;
/// lookups never fail. Conformance checking (including hierarchy acyclicity)
/// is a separate, explicit operation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Entities {
    map: BTreeMap<EntityUid, EntityData>,
}

impl Entities {
    pub fn new() -> Self {
        Entities::default()
    }

    pub fn from_map(map: BTreeMap<EntityUid, EntityData>) -> Self {
        Entities { map }
    }

    pub fn insert(&mut self, uid: EntityUid, data: EntityData) {
        self.map.insert(uid, data);
    }

    pub fn get(&self, uid: &EntityUid) -> Option<&EntityData> {
        self.map.get(uid)
    }

    pub fn contains(&self, uid: &EntityUid) -> bool {
        self.map.contains_key(uid)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&EntityUid, &EntityData)> {
        self.map.iter()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    fn parents(&self, uid: &EntityUid) -> Option<&BTreeSet<EntityUid>> {
        self.map.get(uid).map(|d| &d.parents)
    }

    /// All transitive parents of `uid`, excluding `uid` itself.
    ///
    /// Computed by an iterative worklist walk with a visited set, so the query
    /// terminates even if the raw edges contain a cycle.
    pub fn ancestors(&self, uid: &EntityUid) -> BTreeSet<EntityUid> {
        let mut seen: BTreeSet<EntityUid> = BTreeSet::new();
        let mut work: Vec<&EntityUid> = match self.parents(uid) {
            Some(ps) => ps.iter().collect(),
            None => return seen,
        };
        while let Some(next) = work.pop() {
            if seen.insert(next.clone()) {
                if let Some(ps) = self.parents(next) {
                    work.extend(ps.iter());
                }
            }
        }
        seen.remove(uid);
        seen
    }

    /// Reflexive-transitive membership: `a in b` holds iff `a == b` or `b` is
    /// a transitive parent of `a`.
    pub fn in_relation(&self, a: &EntityUid, b: &EntityUid) -> bool {
        a == b || self.ancestors(a).contains(b)
    }
}

impl FromIterator<(EntityUid, EntityData)> for Entities {
    fn from_iter<T: IntoIterator<Item = (EntityUid, EntityData)>>(iter: T) -> Self {
        Entities {
            map: iter.into_iter().collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uid(name: &str) -> EntityUid {
        EntityUid::of("T", name)
    }

    fn store(edges: &[(&str, &[&str])]) -> Entities {
        edges
            .iter()
            .map(|(child, parents)| {
                (
                    uid(child),
                    EntityData {
                        attrs: BTreeMap::new(),
                        parents: parents.iter().map(|p| uid(p)).collect(),
                    },
                )
            })
            .collect()
    }

    #[test]
    fn two_step_chain() {
        let s = store(&[("A", &["B"]), ("B", &["C"])]);
        let anc = s.ancestors(&uid("A"));
        assert_eq!(anc, [uid("B"), uid("C")].into_iter().collect());
    }

    #[test]
    fn unknown_entity_has_no_parents() {
        let s = Entities::new();
        assert!(s.ancestors(&uid("A")).is_empty());
    }

    #[test]
    fn ancestors_excludes_self_and_terminates_on_cycles() {
        // Invalid input (a cycle); the query must still terminate.
        let s = store(&[("A", &["B"]), ("B", &["A"])]);
        let anc = s.ancestors(&uid("A"));
        assert!(!anc.contains(&uid("A")));
        assert!(anc.contains(&uid("B")));
    }

    #[test]
    fn in_relation_is_reflexive_and_transitive() {
        let s = store(&[("A", &["B"]), ("B", &["C"])]);
        assert!(s.in_relation(&uid("A"), &uid("A")));
        assert!(s.in_relation(&uid("A"), &uid("C")));
        assert!(!s.in_relation(&uid("C"), &uid("A")));
        assert!(!Entities::new().in_relation(&uid("X"), &uid("Y")));
    }

    #[test]
    fn ancestors_is_a_fixed_point() {
        let s = store(&[("A", &["B", "C"]), ("B", &["D"]), ("C", &["D"]), ("D", &[])]);
        let a = uid("A");
        let direct = s.get(&a).unwrap().parents.clone();
        let mut expected = direct.clone();
        for p in &direct {
            expected.extend(s.ancestors(p));
        }
        assert_eq!(s.ancestors(&a), expected);
    }
}
