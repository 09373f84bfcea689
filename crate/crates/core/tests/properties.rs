//! Property tests for the data model: value equality laws, set construction
//! invariance, and hierarchy query laws on generated DAG stores.

use std::collections::BTreeMap;

use proptest::prelude::*;
use warden_core::{Entities, EntityData, EntityUid, Value};

fn value_strategy() -> impl Strategy<Value = Value> {
    let leaf = prop_oneof![
        any::<bool>().prop_map(Value::Bool),
        any::<i64>().prop_map(Value::Long),
        "[a-z*\\\\\"\\n]{0,6}".prop_map(Value::Str),
        (0u8..4, "[a-z]{1,4}")
            .prop_map(|(t, id)| Value::EntityRef(EntityUid::of(&format!("T{t}"), id))),
    ];
    leaf.prop_recursive(3, 24, 4, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..4).prop_map(Value::set),
            prop::collection::btree_map("[a-c]", inner, 0..4).prop_map(Value::Record),
        ]
    })
}

/// A store whose parent edges always point to later indices, hence a DAG.
fn dag_store_strategy() -> impl Strategy<Value = Entities> {
    prop::collection::vec(prop::collection::vec(0usize..8, 0..3), 1..8).prop_map(|rows| {
        let n = rows.len();
        rows.into_iter()
            .enumerate()
            .map(|(i, parents)| {
                let uid = EntityUid::of("T", format!("e{i}"));
                let parents = parents
                    .into_iter()
                    .map(|p| i + 1 + p % n.max(1))
                    .filter(|&p| p < n)
                    .map(|p| EntityUid::of("T", format!("e{p}")))
                    .collect();
                (
                    uid,
                    EntityData {
                        attrs: BTreeMap::new(),
                        parents,
                    },
                )
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn value_equality_is_symmetric_and_transitive(
        a in value_strategy(),
        b in value_strategy(),
        c in value_strategy(),
    ) {
        prop_assert_eq!(a == b, b == a);
        if a == b && b == c {
            prop_assert_eq!(&a, &c);
        }
        prop_assert_eq!(&a, &a.clone());
    }

    #[test]
    fn set_equality_ignores_construction_order_and_duplicates(
        items in prop::collection::vec(value_strategy(), 0..6),
        seed in any::<u64>(),
    ) {
        let mut shuffled = items.clone();
        // Cheap deterministic shuffle plus a duplicated element.
        shuffled.sort_by_key(|v| {
            let mut h = std::collections::hash_map::DefaultHasher::new();
            std::hash::Hash::hash(&(v, seed), &mut h);
            std::hash::Hasher::finish(&h)
        });
        if let Some(first) = shuffled.first().cloned() {
            shuffled.push(first);
        }
        prop_assert_eq!(Value::set(items), Value::set(shuffled));
    }

    #[test]
    fn ancestors_is_fixed_point_and_in_relation_transitive(store in dag_store_strategy()) {
        let uids: Vec<EntityUid> = store.iter().map(|(u, _)| u.clone()).collect();
        for uid in &uids {
            let direct = store.get(uid).unwrap().parents.clone();
            let mut expected = direct.clone();
            for p in &direct {
                expected.extend(store.ancestors(p));
            }
            prop_assert_eq!(store.ancestors(uid), expected);
            prop_assert!(store.in_relation(uid, uid));
        }
        for a in &uids {
            for b in &uids {
                for c in &uids {
                    if store.in_relation(a, b) && store.in_relation(b, c) {
                        prop_assert!(store.in_relation(a, c));
                    }
                }
            }
        }
    }
}
