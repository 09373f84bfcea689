//! The random-testing targets: differential parity against the reference
//! model, parser and formatter roundtrips, parser safety, validation
//! soundness, and slicing soundness. Each target decodes a raw byte string
//! into a structured case and checks it; decoding is deterministic, so
//! corpus files replay bit-exactly.

use warden_core::{Entities, EvalError, PolicySet, Request, Response};
use warden_engine::{is_authorized, slice, validate_policy, validate_policy_set};
use warden_gen::{gen_policies, gen_world, ByteCursor, Limits, PolicyGenMode, World};
use warden_parser::{comment_texts, format_text, parse_policy_set, parse_policy_set_bytes, pretty_print};
use warden_refmodel::{ref_is_authorized, ref_validate_policy};

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail(String),
}

impl Verdict {
    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fail(_))
    }
}

/// A named check over raw bytes.
#[derive(Clone, Copy)]
pub struct Target {
    pub name: &'static str,
    pub check: fn(&[u8]) -> Verdict,
}

/// All registered targets, in a stable order.
pub fn all_targets() -> Vec<Target> {
    vec![
        Target {
            name: "authorizer-parity-abac-typed",
            check: check_parity_abac_typed,
        },
        Target {
            name: "authorizer-parity-abac",
            check: check_parity_abac,
        },
        Target {
            name: "authorizer-parity-rbac",
            check: check_parity_rbac,
        },
        Target {
            name: "validator-parity",
            check: check_validator_parity,
        },
        Target {
            name: "parser-roundtrip",
            check: check_parser_roundtrip,
        },
        Target {
            name: "formatter-roundtrip",
            check: check_formatter_roundtrip,
        },
        Target {
            name: "parser-safety",
            check: check_parser_safety,
        },
        Target {
            name: "validation-soundness",
            check: check_validation_soundness,
        },
        Target {
            name: "slicing-soundness",
            check: check_slicing_soundness,
        },
    ]
}

pub fn find_target(name: &str) -> Option<Target> {
    all_targets().into_iter().find(|t| t.name == name)
}

pub(crate) fn decode_world(c: &mut ByteCursor) -> World {
    gen_world(c, &Limits::default())
}

/// Mode used by the mixed-generator targets (roundtrips, slicing), chosen by
/// the first cursor byte: arbitrary-condition ABAC twice as often as the
/// others.
fn mixed_mode(c: &mut ByteCursor) -> PolicyGenMode {
    match c.choose(4) {
        0 | 1 => PolicyGenMode::ArbitraryAbac,
        2 => PolicyGenMode::TypeDirectedAbac { perturb: true },
        _ => PolicyGenMode::Rbac,
    }
}

fn response_summary(r: &Response) -> String {
    format!(
        "{:?} determining={:?} errors={:?}",
        r.decision,
        r.determining,
        r.error_ids()
    )
}

/// Decision, determining set, and error-bearing policy-id set must agree.
fn parity(bytes: &[u8], mode: PolicyGenMode) -> Verdict {
    let mut c = ByteCursor::new(bytes);
    let world = decode_world(&mut c);
    let policies = gen_policies(mode, &mut c, &world);
    compare_against_reference(&world.request, &world.store, &policies)
}

pub(crate) fn compare_against_reference(
    request: &Request,
    store: &Entities,
    policies: &PolicySet,
) -> Verdict {
    let production = is_authorized(request, store, policies);
    let reference = ref_is_authorized(request, store, policies);
    if production.decision != reference.decision
        || production.determining != reference.determining
        || production.error_ids() != reference.error_ids()
    {
        return Verdict::Fail(format!(
            "authorizer divergence: production [{}] vs reference [{}]",
            response_summary(&production),
            response_summary(&reference)
        ));
    }
    Verdict::Pass
}

fn check_parity_abac_typed(bytes: &[u8]) -> Verdict {
    parity(bytes, PolicyGenMode::TypeDirectedAbac { perturb: true })
}

fn check_parity_abac(bytes: &[u8]) -> Verdict {
    parity(bytes, PolicyGenMode::ArbitraryAbac)
}

fn check_parity_rbac(bytes: &[u8]) -> Verdict {
    parity(bytes, PolicyGenMode::Rbac)
}

fn check_validator_parity(bytes: &[u8]) -> Verdict {
    let mut c = ByteCursor::new(bytes);
    let world = decode_world(&mut c);
    let policies = gen_policies(PolicyGenMode::TypeDirectedAbac { perturb: true }, &mut c, &world);
    for policy in policies.iter() {
        let production_ok = validate_policy(policy, &world.schema).is_ok();
        let reference_ok = ref_validate_policy(policy, &world.schema);
        if production_ok != reference_ok {
            return Verdict::Fail(format!(
                "validator divergence on {}: production={production_ok} reference={reference_ok}",
                policy.id
            ));
        }
    }
    Verdict::Pass
}

fn check_parser_roundtrip(bytes: &[u8]) -> Verdict {
    let mut c = ByteCursor::new(bytes);
    let mode = mixed_mode(&mut c);
    let world = decode_world(&mut c);
    let policies = gen_policies(mode, &mut c, &world);
    let text = pretty_print(&policies);
    match parse_policy_set(&text) {
        Ok(reparsed) if reparsed == policies => Verdict::Pass,
        Ok(_) => Verdict::Fail(format!("reparse produced a different AST for:\n{text}")),
        Err(e) => Verdict::Fail(format!("pretty output failed to parse: {e}\n{text}")),
    }
}

const COMMENT_POOL: [&str; 5] = ["", " note", " policy boundary", " ** emphasised **", "//nested"];

fn check_formatter_roundtrip(bytes: &[u8]) -> Verdict {
    let mut c = ByteCursor::new(bytes);
    let mode = mixed_mode(&mut c);
    let world = decode_world(&mut c);
    let policies = gen_policies(mode, &mut c, &world);
    let width = [40usize, 80, 120][c.choose(3)];

    // Inject comments before arbitrary tokens of the canonical text (plus
    // end of input), so every attachment point is exercised, closing braces
    // included. A comment runs to end of line, so inserting `//…\n` at a
    // token start leaves the token stream itself unchanged.
    let pretty = pretty_print(&policies);
    let mut positions: Vec<usize> = match warden_parser::lexer::lex(&pretty) {
        Ok((tokens, _)) => tokens.iter().map(|t| t.span.start).collect(),
        Err(e) => return Verdict::Fail(format!("pretty output failed to lex: {e}\n{pretty}")),
    };
    positions.push(pretty.len());
    let mut inserts: Vec<(usize, &str)> = Vec::new();
    for _ in 0..c.choose(4) {
        let at = positions[c.choose(positions.len())];
        let text = COMMENT_POOL[c.choose(COMMENT_POOL.len())];
        inserts.push((at, text));
    }
    inserts.sort_by(|a, b| b.0.cmp(&a.0));
    let mut commented = pretty.clone();
    for (at, text) in inserts {
        commented.insert_str(at, &format!("//{text}\n"));
    }

    let formatted = match format_text(&commented, width) {
        Ok(f) => f,
        Err(e) => return Verdict::Fail(format!("format failed: {e}\n{commented}")),
    };
    match parse_policy_set(&formatted) {
        Ok(reparsed) if reparsed == policies => {}
        Ok(_) => {
            return Verdict::Fail(format!(
                "formatting changed the AST:\n--- input ---\n{commented}\n--- output ---\n{formatted}"
            ))
        }
        Err(e) => return Verdict::Fail(format!("formatted output failed to parse: {e}\n{formatted}")),
    }

    let mut expected = comment_texts(&commented).unwrap_or_default();
    let mut actual = comment_texts(&formatted).unwrap_or_default();
    expected.sort();
    actual.sort();
    if expected != actual {
        return Verdict::Fail(format!(
            "comments changed: expected {expected:?}, got {actual:?}\n{formatted}"
        ));
    }

    match format_text(&formatted, width) {
        Ok(second) if second == formatted => Verdict::Pass,
        Ok(second) => Verdict::Fail(format!(
            "formatting is not idempotent:\n--- first ---\n{formatted}\n--- second ---\n{second}"
        )),
        Err(e) => Verdict::Fail(format!("second format failed: {e}")),
    }
}

/// The raw bytes are the parser input; any outcome but a crash passes.
fn check_parser_safety(bytes: &[u8]) -> Verdict {
    match std::panic::catch_unwind(|| {
        let _ = parse_policy_set_bytes(bytes);
    }) {
        Ok(()) => Verdict::Pass,
        Err(_) => Verdict::Fail("parser panicked".to_string()),
    }
}

fn check_validation_soundness(bytes: &[u8]) -> Verdict {
    let mut c = ByteCursor::new(bytes);
    let world = decode_world(&mut c);
    let policies = gen_policies(PolicyGenMode::TypeDirectedAbac { perturb: true }, &mut c, &world);
    if validate_policy_set(&policies, &world.schema).is_err() {
        // Rejected sets carry no soundness obligation.
        return Verdict::Pass;
    }
    let response = is_authorized(&world.request, &world.store, &policies);
    for (id, error) in &response.errors {
        match error {
            EvalError::TypeError { .. } | EvalError::MissingAttr(_) => {
                return Verdict::Fail(format!(
                    "validated policy {id} raised a static-class error: {error}"
                ));
            }
            EvalError::Overflow | EvalError::ArityOrDomain(_) => {}
        }
    }
    Verdict::Pass
}

fn check_slicing_soundness(bytes: &[u8]) -> Verdict {
    let mut c = ByteCursor::new(bytes);
    let mode = mixed_mode(&mut c);
    let world = decode_world(&mut c);
    let policies = gen_policies(mode, &mut c, &world);
    let sliced = slice(&policies, &world.request, &world.store);
    let full = is_authorized(&world.request, &world.store, &policies);
    let from_slice = is_authorized(&world.request, &world.store, &sliced);
    if full.decision != from_slice.decision || full.determining != from_slice.determining {
        return Verdict::Fail(format!(
            "slicing changed the outcome: full [{}] vs slice [{}] ({} of {} policies kept)",
            response_summary(&full),
            response_summary(&from_slice),
            sliced.len(),
            policies.len()
        ));
    }
    Verdict::Pass
}
