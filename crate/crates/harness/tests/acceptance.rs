//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (run with `--nocapture` to see them).
//!
//! Budgets and tolerances are pinned in the constants below; every check is
//! deterministic given the fixed seeds.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, RngCore, SeedableRng};

use warden_core::{
    Decision, Effect, Entities, EntityData, EntityUid, EvalError, Expr, Policy, PolicySet,
    Request, Value,
};
use warden_engine::{is_authorized, satisfied_policies, slice, validate_policy_set};
use warden_gen::{gen_policies, gen_world, ByteCursor, Limits, PolicyGenMode};
use warden_harness::{compute_stats, find_target, replay_all, Verdict, TYPED_EXPR_TARGET};
use warden_parser::{parse_entities_json, parse_policy_set, parse_request_json};
use warden_refmodel::{ref_evaluate, ref_is_authorized, ref_slice};

const SEED: u64 = 0x5eed_ace5;
const PROPERTY_SAMPLES: u64 = 10_000; // criteria 2-4
const PARITY_SAMPLES_PER_TARGET: u64 = 25_000; // criterion 5: 4 x 25k = 1e5
const PARSER_ROUNDTRIP_SAMPLES: u64 = 100_000; // criterion 6
const FORMATTER_ROUNDTRIP_SAMPLES: u64 = 10_000; // criterion 6
const PARSER_SAFETY_SAMPLES: u64 = 1_000_000; // criterion 7

fn testdata(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../testdata/tinytodo")
        .join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

fn random_bytes(rng: &mut StdRng, max_len: usize) -> Vec<u8> {
    let len = rng.gen_range(0..=max_len);
    let mut bytes = vec![0u8; len];
    rng.fill_bytes(&mut bytes);
    bytes
}

fn sample_world_and_policies(
    rng: &mut StdRng,
    mode: PolicyGenMode,
) -> (warden_gen::World, PolicySet) {
    let bytes = random_bytes(rng, 224);
    let mut c = ByteCursor::new(&bytes);
    let world = gen_world(&mut c, &Limits::default());
    let policies = gen_policies(mode, &mut c, &world);
    (world, policies)
}

fn ids(set: &BTreeSet<String>) -> Vec<&str> {
    set.iter().map(String::as_str).collect()
}

/// Criterion 1: the three task-list scenarios produce exactly the stated
/// decisions and determining sets.
#[test]
fn c01_tinytodo_golden_decisions() {
    let started = Instant::now();
    let policies = parse_policy_set(&testdata("policies.cedar")).unwrap();
    let store = parse_entities_json(&testdata("entities.json")).unwrap();

    let scenarios: [(&str, Decision, &[&str]); 3] = [
        ("request-alice-getlist.json", Decision::Allow, &["policy0"]),
        ("request-bob-getlist.json", Decision::Allow, &["policy1"]),
        ("request-bob-createlist.json", Decision::Deny, &["policy2"]),
    ];
    for (file, decision, determining) in scenarios {
        let request = parse_request_json(&testdata(file)).unwrap();
        let response = is_authorized(&request, &store, &policies);
        assert_eq!(response.decision, decision, "{file}");
        assert_eq!(ids(&response.determining), determining, "{file}");
        assert!(response.errors.is_empty(), "{file}");
    }
    // The deny scenario must override a satisfied permit.
    let deny_req = parse_request_json(&testdata("request-bob-createlist.json")).unwrap();
    let permits = satisfied_policies(Effect::Permit, &policies, &deny_req, &store);
    assert!(
        !permits.is_empty(),
        "the forbid scenario is meant to have a satisfied permit"
    );
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "budget exceeded: {elapsed:?}");
    println!("acceptance c01 (tinytodo golden decisions): PASS in {elapsed:?}");
}

/// Criterion 2: authorization properties P1-P4 over generated inputs, zero
/// violations, for production and reference model alike.
#[test]
fn c02_authorization_properties() {
    let mut rng = StdRng::seed_from_u64(SEED ^ 2);
    let modes = [
        PolicyGenMode::Rbac,
        PolicyGenMode::TypeDirectedAbac { perturb: true },
        PolicyGenMode::ArbitraryAbac,
    ];
    for i in 0..PROPERTY_SAMPLES {
        let mode = modes[(i % 3) as usize];
        let (world, policies) = sample_world_and_policies(&mut rng, mode);
        let (req, store) = (&world.request, &world.store);

        for response in [
            is_authorized(req, store, &policies),
            ref_is_authorized(req, store, &policies),
        ] {
            let permits = satisfied_policies(Effect::Permit, &policies, req, store);
            let forbids = satisfied_policies(Effect::Forbid, &policies, req, store);
            // P1 forbid trumps permit; P2 default deny; P3 explicit allow.
            if !forbids.is_empty() {
                assert_eq!(response.decision, Decision::Deny, "P1 violated at {i}");
                assert_eq!(response.determining, forbids, "P1 violated at {i}");
            }
            if permits.is_empty() {
                assert_eq!(response.decision, Decision::Deny, "P2 violated at {i}");
            }
            if response.decision == Decision::Allow {
                assert!(!permits.is_empty(), "P3 violated at {i}");
                assert_eq!(response.determining, permits, "P3 violated at {i}");
            }
        }

        // P4: permutation and duplication invariance.
        let baseline = is_authorized(req, store, &policies);
        let mut reversed: Vec<Policy> = policies.iter().cloned().collect();
        reversed.reverse();
        let permuted = PolicySet::new(reversed).unwrap();
        let permuted_response = is_authorized(req, store, &permuted);
        assert_eq!(baseline.decision, permuted_response.decision, "P4 at {i}");
        assert_eq!(
            baseline.determining, permuted_response.determining,
            "P4 at {i}"
        );

        let original = policies
            .iter()
            .nth((i as usize) % policies.len().max(1))
            .cloned();
        if let Some(original) = original {
            let mut dup = original.clone();
            dup.id = "dup".to_string();
            let mut extended: Vec<Policy> = policies.iter().cloned().collect();
            extended.push(dup);
            let dup_response = is_authorized(req, store, &PolicySet::new(extended).unwrap());
            assert_eq!(baseline.decision, dup_response.decision, "P4 dup at {i}");
            let mut expected = baseline.determining.clone();
            if expected.contains(&original.id) {
                expected.insert("dup".to_string());
            }
            assert_eq!(dup_response.determining, expected, "P4 dup at {i}");
        }
    }
    println!(
        "acceptance c02 (authorization properties P1-P4): PASS over {PROPERTY_SAMPLES} inputs per property"
    );
}

/// Criterion 3: sound slicing; the slice always yields the full decision.
#[test]
fn c03_sound_slicing() {
    let mut rng = StdRng::seed_from_u64(SEED ^ 3);
    let modes = [
        PolicyGenMode::Rbac,
        PolicyGenMode::Rbac,
        PolicyGenMode::TypeDirectedAbac { perturb: true },
        PolicyGenMode::ArbitraryAbac,
    ];
    for i in 0..PROPERTY_SAMPLES {
        let mode = modes[(i % 4) as usize];
        let (world, policies) = sample_world_and_policies(&mut rng, mode);
        let (req, store) = (&world.request, &world.store);
        let full = is_authorized(req, store, &policies);
        let cut = is_authorized(req, store, &slice(&policies, req, store));
        assert_eq!(full.decision, cut.decision, "P5 violated at {i}");
        assert_eq!(full.determining, cut.determining, "P5 violated at {i}");
        // The reference model's slice agrees too.
        let ref_cut = ref_is_authorized(req, store, &ref_slice(&policies, req, store));
        assert_eq!(full.decision, ref_cut.decision, "P5 (ref) violated at {i}");
    }
    println!("acceptance c03 (sound slicing P5): PASS over {PROPERTY_SAMPLES} inputs");
}

/// Criterion 4: validation soundness; validated policy sets never raise
/// type or missing-attribute errors on conformant worlds (overflow exempt,
/// counted separately).
#[test]
fn c04_validation_soundness() {
    let mut rng = StdRng::seed_from_u64(SEED ^ 4);
    let mut overflows = 0u64;
    let mut validated = 0u64;
    let mut i = 0u64;
    while validated < PROPERTY_SAMPLES {
        i += 1;
        // Unperturbed sets validate by construction, so every run evaluates;
        // a perturbed slice keeps the validator's reject path exercised.
        let perturb = i % 5 == 4;
        let (world, policies) =
            sample_world_and_policies(&mut rng, PolicyGenMode::TypeDirectedAbac { perturb });
        if validate_policy_set(&policies, &world.schema).is_err() {
            assert!(perturb, "unperturbed set failed validation at {i}");
            continue;
        }
        validated += 1;
        for response in [
            is_authorized(&world.request, &world.store, &policies),
            ref_is_authorized(&world.request, &world.store, &policies),
        ] {
            for (id, error) in &response.errors {
                match error {
                    EvalError::TypeError { .. } | EvalError::MissingAttr(_) => {
                        panic!("P6 violated at {i}: validated policy {id} raised {error}");
                    }
                    EvalError::Overflow => overflows += 1,
                    EvalError::ArityOrDomain(d) => {
                        panic!("unexpected dynamic error at {i}: {d}");
                    }
                }
            }
        }
    }
    assert!(validated >= PROPERTY_SAMPLES);
    println!(
        "acceptance c04 (validation soundness P6): PASS over {validated} validated runs \
         (overflow errors, exempt: {overflows})"
    );
}

/// Criterion 5: production and reference model agree on decisions,
/// determining sets, error sets, and validator verdicts.
#[test]
fn c05_drt_parity() {
    let names = [
        "authorizer-parity-abac-typed",
        "authorizer-parity-abac",
        "authorizer-parity-rbac",
        "validator-parity",
    ];
    for (t, name) in names.iter().enumerate() {
        let target = find_target(name).unwrap();
        let mut rng = StdRng::seed_from_u64(SEED ^ (5 + t as u64));
        for i in 0..PARITY_SAMPLES_PER_TARGET {
            let bytes = random_bytes(&mut rng, 256);
            if let Verdict::Fail(report) = (target.check)(&bytes) {
                panic!("{name} diverged at iteration {i}: {report}");
            }
        }
    }
    println!(
        "acceptance c05 (drt parity, 4 targets): PASS over {} inputs",
        PARITY_SAMPLES_PER_TARGET * 4
    );
}

/// Criterion 6: parser and formatter roundtrips at 100%.
#[test]
fn c06_roundtrips() {
    let parser_target = find_target("parser-roundtrip").unwrap();
    let mut rng = StdRng::seed_from_u64(SEED ^ 6);
    for i in 0..PARSER_ROUNDTRIP_SAMPLES {
        let bytes = random_bytes(&mut rng, 256);
        if let Verdict::Fail(report) = (parser_target.check)(&bytes) {
            panic!("parser roundtrip failed at iteration {i}: {report}");
        }
    }
    let formatter_target = find_target("formatter-roundtrip").unwrap();
    for i in 0..FORMATTER_ROUNDTRIP_SAMPLES {
        let bytes = random_bytes(&mut rng, 256);
        if let Verdict::Fail(report) = (formatter_target.check)(&bytes) {
            panic!("formatter roundtrip failed at iteration {i}: {report}");
        }
    }
    println!(
        "acceptance c06 (roundtrips): PASS over {PARSER_ROUNDTRIP_SAMPLES} parse-pretty and \
         {FORMATTER_ROUNDTRIP_SAMPLES} format inputs"
    );
}

/// Criterion 7: the parser is total on arbitrary bytes; no crash, every
/// input yields a value or error.
#[test]
fn c07_parser_safety() {
    let target = find_target("parser-safety").unwrap();
    let mut rng = StdRng::seed_from_u64(SEED ^ 7);
    // Mostly raw bytes, with a slice of mutated near-policy text for depth.
    let template = b"permit(principal == User::\"alice\", action in [Action::\"a\"], resource)\n  when { context.x like \"a*b\" && principal has owner };";
    for i in 0..PARSER_SAFETY_SAMPLES {
        let bytes = if i % 5 == 4 {
            let mut text = template.to_vec();
            for _ in 0..rng.gen_range(1..6) {
                let at = rng.gen_range(0..text.len());
                text[at] = rng.gen();
            }
            text
        } else {
            random_bytes(&mut rng, 48)
        };
        if let Verdict::Fail(report) = (target.check)(&bytes) {
            panic!("parser safety failed at iteration {i}: {report}");
        }
    }
    println!("acceptance c07 (parser safety): PASS over {PARSER_SAFETY_SAMPLES} byte strings");
}

mod small_exprs {
    //! Exhaustive enumeration of expressions by AST size over fixed seed
    //! pools, for the small-scale oracle-equivalence criterion.

    use warden_core::{BinOp, EntityUid, Expr, PatElem, Pattern, Var};

    pub fn leaves() -> Vec<Expr> {
        let mut out = vec![
            Expr::lit_bool(false),
            Expr::lit_bool(true),
            Expr::lit_long(0),
            Expr::lit_long(1),
            Expr::lit_str("a"),
            Expr::SetLit(vec![]),
            Expr::RecordLit(vec![]),
        ];
        for id in ["A", "B", "C"] {
            out.push(Expr::EntityLit(EntityUid::of("T", id)));
        }
        for v in [Var::Principal, Var::Action, Var::Resource, Var::Context] {
            out.push(Expr::Var(v));
        }
        out
    }

    fn unary_forms(e: &Expr, f: &mut impl FnMut(Expr)) {
        f(Expr::not(e.clone()));
        f(Expr::neg(e.clone()));
        for attr in ["a", "b"] {
            f(Expr::has_attr(e.clone(), attr));
            f(Expr::get_attr(e.clone(), attr));
        }
        f(Expr::like(e.clone(), Pattern(vec![PatElem::Literal('a')])));
        f(Expr::like(e.clone(), Pattern(vec![PatElem::Wildcard])));
    }

    const BINOPS: [BinOp; 10] = [
        BinOp::Eq,
        BinOp::Neq,
        BinOp::Lt,
        BinOp::Le,
        BinOp::Gt,
        BinOp::Ge,
        BinOp::Add,
        BinOp::Sub,
        BinOp::In,
        BinOp::Contains,
    ];

    /// Emits every expression of exactly `size` nodes, given tables of all
    /// smaller sizes (`tables[k-1]` holds size `k`).
    pub fn emit_of_size(size: usize, tables: &[Vec<Expr>], f: &mut impl FnMut(Expr)) {
        assert!(size >= 2);
        for e in &tables[size - 2] {
            unary_forms(e, f);
        }
        for left in 1..=size.saturating_sub(2) {
            let right = size - 1 - left;
            for a in &tables[left - 1] {
                for b in &tables[right - 1] {
                    f(Expr::and(a.clone(), b.clone()));
                    f(Expr::or(a.clone(), b.clone()));
                    for op in BINOPS {
                        f(Expr::binop(op, a.clone(), b.clone()));
                    }
                }
            }
        }
        // if-then-else: three children.
        for i in 1..=size.saturating_sub(3) {
            for j in 1..=(size - 1 - i).saturating_sub(1) {
                let k = size - 1 - i - j;
                if k == 0 {
                    continue;
                }
                for g in &tables[i - 1] {
                    for t in &tables[j - 1] {
                        for e in &tables[k - 1] {
                            f(Expr::ite(g.clone(), t.clone(), e.clone()));
                        }
                    }
                }
            }
        }
        // Non-empty set literals over every composition of the remaining
        // size; the empty set is a leaf.
        each_composition(size - 1, &mut |parts| {
            emit_lists(parts, tables, &mut Vec::new(), &mut |elems| {
                f(Expr::SetLit(elems.to_vec()));
            });
        });
        // Record literals over the canonical field-name subsets.
        for names in [&["a"][..], &["b"][..], &["a", "b"][..]] {
            each_fixed_composition(size - 1, names.len(), &mut |parts| {
                emit_lists(parts, tables, &mut Vec::new(), &mut |elems| {
                    f(Expr::RecordLit(
                        names
                            .iter()
                            .map(|n| n.to_string())
                            .zip(elems.iter().cloned())
                            .collect(),
                    ));
                });
            });
        }
    }

    /// All ordered compositions of `total` into parts of size >= 1.
    fn each_composition(total: usize, f: &mut impl FnMut(&[usize])) {
        fn go(rest: usize, acc: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
            if rest == 0 {
                f(acc);
                return;
            }
            for first in 1..=rest {
                acc.push(first);
                go(rest - first, acc, f);
                acc.pop();
            }
        }
        go(total, &mut Vec::new(), f);
    }

    /// All ordered compositions of `total` into exactly `parts` parts.
    fn each_fixed_composition(total: usize, parts: usize, f: &mut impl FnMut(&[usize])) {
        fn go(rest: usize, left: usize, acc: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
            if left == 0 {
                if rest == 0 {
                    f(acc);
                }
                return;
            }
            if rest < left {
                return;
            }
            for first in 1..=(rest - (left - 1)) {
                acc.push(first);
                go(rest - first, left - 1, acc, f);
                acc.pop();
            }
        }
        go(total, parts, &mut Vec::new(), f);
    }

    fn emit_lists(
        parts: &[usize],
        tables: &[Vec<Expr>],
        acc: &mut Vec<Expr>,
        f: &mut impl FnMut(&[Expr]),
    ) {
        match parts.split_first() {
            None => f(acc),
            Some((&first, rest)) => {
                for e in &tables[first - 1] {
                    acc.push(e.clone());
                    emit_lists(rest, tables, acc, f);
                    acc.pop();
                }
            }
        }
    }
}

/// Criterion 8: production and reference evaluators agree on every
/// expression of AST size <= 5 over a fixed three-entity store.
#[test]
fn c08_small_scale_oracle_equivalence() {
    use std::collections::BTreeMap;

    let uid = |id: &str| EntityUid::of("T", id);
    let mut store = Entities::new();
    store.insert(
        uid("A"),
        EntityData {
            attrs: [("a".to_string(), Value::Long(1))].into_iter().collect(),
            parents: [uid("B")].into_iter().collect(),
        },
    );
    store.insert(
        uid("B"),
        EntityData {
            attrs: [
                ("a".to_string(), Value::Bool(true)),
                ("b".to_string(), Value::Str("a".to_string())),
            ]
            .into_iter()
            .collect(),
            parents: [uid("C")].into_iter().collect(),
        },
    );
    store.insert(uid("C"), EntityData::default());
    let request = Request::new(
        uid("A"),
        EntityUid::of("Action", "act"),
        uid("B"),
        BTreeMap::from([("a".to_string(), Value::Long(0))]),
    )
    .unwrap();

    let mut total = 0u64;
    let mut check = |e: &Expr| {
        total += 1;
        let production = warden_engine::evaluate(e, &request, &store);
        let reference = ref_evaluate(e, &request, &store);
        assert_eq!(production, reference, "divergence on {e:?}");
    };

    let mut tables: Vec<Vec<Expr>> = vec![small_exprs::leaves()];
    for size in 2..=4usize {
        let mut next = Vec::new();
        small_exprs::emit_of_size(size, &tables, &mut |e| next.push(e));
        tables.push(next);
    }
    for table in &tables {
        for e in table {
            check(e);
        }
    }
    // Size 5 is streamed rather than materialized.
    small_exprs::emit_of_size(5, &tables, &mut |e| check(&e));

    assert!(total > 1_000_000, "enumeration unexpectedly small: {total}");
    println!("acceptance c08 (small-scale oracle equivalence): PASS over {total} expressions");
}

/// Criterion 9: the dedicated expression generator produces boolean-literal
/// roots strictly less often than the policy-condition generator.
#[test]
fn c09_generator_diagnostics() {
    let expr_stats = compute_stats(TYPED_EXPR_TARGET, 4_000, SEED ^ 9);
    let policy_stats = compute_stats("authorizer-parity-abac-typed", 4_000, SEED ^ 9);
    assert!(expr_stats.conditions > 0 && policy_stats.conditions > 0);
    assert!(
        expr_stats.bool_literal_fraction < policy_stats.bool_literal_fraction,
        "expected expression generator fraction {} < policy condition fraction {}",
        expr_stats.bool_literal_fraction,
        policy_stats.bool_literal_fraction
    );
    println!(
        "acceptance c09 (generator diagnostics): PASS — bool-literal fraction {:.3} (expressions) \
         vs {:.3} (policy conditions)",
        expr_stats.bool_literal_fraction, policy_stats.bool_literal_fraction
    );
}

/// Criterion 10: performance sanity, reported but not gating.
#[test]
fn c10_performance_sanity() {
    let mut rng = StdRng::seed_from_u64(SEED ^ 10);
    let cases: Vec<(warden_gen::World, PolicySet)> = (0..1_000)
        .map(|_| {
            sample_world_and_policies(&mut rng, PolicyGenMode::TypeDirectedAbac { perturb: true })
        })
        .collect();

    let median = |mut xs: Vec<f64>| -> f64 {
        xs.sort_by(f64::total_cmp);
        xs[xs.len() / 2]
    };
    let time = |f: &dyn Fn(&warden_gen::World, &PolicySet)| -> f64 {
        let mut samples = Vec::with_capacity(cases.len());
        for (world, policies) in &cases {
            let start = Instant::now();
            f(world, policies);
            samples.push(start.elapsed().as_secs_f64() * 1e6);
        }
        median(samples)
    };
    let production = time(&|w, ps| {
        std::hint::black_box(is_authorized(&w.request, &w.store, ps));
    });
    let reference = time(&|w, ps| {
        std::hint::black_box(ref_is_authorized(&w.request, &w.store, ps));
    });
    let verdict = if production <= 100.0 { "PASS" } else { "WARN (soft bound)" };
    println!(
        "acceptance c10 (performance sanity): {verdict} — median isAuthorized {production:.2} µs \
         (production) vs {reference:.2} µs (reference, {:.1}x)",
        reference / production
    );
}

/// Criterion 11: the checked-in corpus replays clean within the budget.
#[test]
fn c11_corpus_replay() {
    let corpus = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let started = Instant::now();
    let reports = replay_all(&corpus).expect("corpus replays");
    let elapsed = started.elapsed();
    assert!(!reports.is_empty(), "corpus is missing");
    let mut entries = 0;
    for report in &reports {
        assert!(
            report.failures.is_empty(),
            "corpus failures in {}: {:?}",
            report.target,
            report.failures
        );
        entries += report.iterations;
    }
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "corpus replay exceeded budget: {elapsed:?}"
    );
    println!(
        "acceptance c11 (corpus replay): PASS — {entries} entries across {} targets in {elapsed:?}",
        reports.len()
    );
}
