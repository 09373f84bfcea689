//! Production engine and reference model agree on the checked-in task-list
//! fixtures, not just on generated inputs.

use std::path::PathBuf;

use warden_core::{request_conforms, store_conforms};
use warden_engine::{is_authorized, validate_policy, validate_policy_set};
use warden_parser::{
    parse_entities_json, parse_policy_set, parse_request_json, parse_schema_json,
};
use warden_refmodel::{ref_is_authorized, ref_validate_policy};

fn testdata(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../testdata/tinytodo")
        .join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

#[test]
fn fixtures_conform_to_their_schema() {
    let schema = parse_schema_json(&testdata("schema.json")).unwrap();
    let store = parse_entities_json(&testdata("entities.json")).unwrap();
    assert!(store_conforms(&store, &schema).is_empty());
    for file in [
        "request-alice-getlist.json",
        "request-bob-getlist.json",
        "request-bob-createlist.json",
    ] {
        let request = parse_request_json(&testdata(file)).unwrap();
        assert!(request_conforms(&request, &schema).is_ok(), "{file}");
    }
}

#[test]
fn both_validators_accept_the_fixture_policies() {
    let schema = parse_schema_json(&testdata("schema.json")).unwrap();
    let policies = parse_policy_set(&testdata("policies.cedar")).unwrap();
    assert!(validate_policy_set(&policies, &schema).is_ok());
    for policy in policies.iter() {
        assert!(ref_validate_policy(policy, &schema), "{}", policy.id);
    }
}

#[test]
fn both_validators_reject_the_undeclared_attribute() {
    let schema = parse_schema_json(&testdata("schema.json")).unwrap();
    let bad = parse_policy_set(
        "permit(principal, action, resource) when { resource.pwner == principal };",
    )
    .unwrap();
    for policy in bad.iter() {
        assert!(validate_policy(policy, &schema).is_err());
        assert!(!ref_validate_policy(policy, &schema));
    }
}

#[test]
fn authorizers_agree_on_the_fixture_scenarios() {
    let policies = parse_policy_set(&testdata("policies.cedar")).unwrap();
    let store = parse_entities_json(&testdata("entities.json")).unwrap();
    for file in [
        "request-alice-getlist.json",
        "request-bob-getlist.json",
        "request-bob-createlist.json",
    ] {
        let request = parse_request_json(&testdata(file)).unwrap();
        let production = is_authorized(&request, &store, &policies);
        let reference = ref_is_authorized(&request, &store, &policies);
        assert_eq!(production.decision, reference.decision, "{file}");
        assert_eq!(production.determining, reference.determining, "{file}");
        assert_eq!(production.error_ids(), reference.error_ids(), "{file}");
    }
}
