//! Generator diagnostics: condition shapes, operator mix, and evaluation
//! outcome fractions per target, plus the dedicated typed-expression
//! generator as the stats-only pseudo-target `typed-expr`.

use std::collections::BTreeMap;

use rand::rngs::StdRng;
use rand::{Rng, RngCore, SeedableRng};
use serde::Serialize;

use warden_core::{Expr, Lit, Type};
use warden_engine::evaluate;
use warden_gen::{
    gen_expr_nontrivial, gen_policies, gen_world, request_env, ByteCursor, Limits, PolicyGenMode,
};

use crate::targets::decode_world;

/// Name of the stats-only typed-expression generator.
pub const TYPED_EXPR_TARGET: &str = "typed-expr";

#[derive(Debug, Clone, Serialize)]
pub struct StatsReport {
    pub target: String,
    pub samples: u64,
    /// Condition bodies inspected (for `typed-expr`: bool-typed samples).
    pub conditions: u64,
    /// Fraction of those that are bare boolean literals.
    pub bool_literal_fraction: f64,
    pub op_histogram: BTreeMap<String, u64>,
    pub ast_size_mean: f64,
    pub ast_size_p50: u64,
    pub ast_size_p90: u64,
    /// Fractions of evaluation outcomes (`ok` plus error classes); sums to
    /// 1.0 when any evaluation ran.
    pub outcome_fractions: BTreeMap<String, f64>,
}

#[derive(Default)]
struct Accumulator {
    conditions: u64,
    bool_literals: u64,
    ops: BTreeMap<String, u64>,
    sizes: Vec<u64>,
    outcomes: BTreeMap<&'static str, u64>,
}

impl Accumulator {
    fn expr(&mut self, e: &Expr, count_literal: bool) {
        if count_literal {
            self.conditions += 1;
            if matches!(e, Expr::Lit(Lit::Bool(_))) {
                self.bool_literals += 1;
            }
        }
        self.sizes.push(e.size() as u64);
        e.walk(&mut |node| {
            *self.ops.entry(node.node_tag().to_string()).or_default() += 1;
        });
    }

    fn outcome(&mut self, result: &Result<warden_core::Value, warden_core::EvalError>) {
        let class = match result {
            Ok(_) => "ok",
            Err(e) => e.class(),
        };
        *self.outcomes.entry(class).or_default() += 1;
    }

    fn finish(mut self, target: &str, samples: u64) -> StatsReport {
        self.sizes.sort_unstable();
        let total: u64 = self.sizes.iter().sum();
        let pct = |q: f64| -> u64 {
            if self.sizes.is_empty() {
                0
            } else {
                let idx = ((self.sizes.len() - 1) as f64 * q).round() as usize;
                self.sizes[idx]
            }
        };
        let evals: u64 = self.outcomes.values().sum();
        let outcome_fractions = self
            .outcomes
            .iter()
            .map(|(k, v)| (k.to_string(), *v as f64 / evals as f64))
            .collect();
        StatsReport {
            target: target.to_string(),
            samples,
            conditions: self.conditions,
            bool_literal_fraction: if self.conditions == 0 {
                0.0
            } else {
                self.bool_literals as f64 / self.conditions as f64
            },
            op_histogram: self.ops,
            ast_size_mean: if self.sizes.is_empty() {
                0.0
            } else {
                total as f64 / self.sizes.len() as f64
            },
            ast_size_p50: pct(0.5),
            ast_size_p90: pct(0.9),
            outcome_fractions,
        }
    }
}

fn policy_mode_for(target: &str, c: &mut ByteCursor) -> Option<PolicyGenMode> {
    match target {
        "authorizer-parity-abac-typed" | "validator-parity" | "validation-soundness" => {
            Some(PolicyGenMode::TypeDirectedAbac { perturb: true })
        }
        "authorizer-parity-abac" => Some(PolicyGenMode::ArbitraryAbac),
        "authorizer-parity-rbac" => Some(PolicyGenMode::Rbac),
        "parser-roundtrip" | "formatter-roundtrip" | "slicing-soundness" => Some(match c.choose(4) {
            0 | 1 => PolicyGenMode::ArbitraryAbac,
            2 => PolicyGenMode::TypeDirectedAbac { perturb: true },
            _ => PolicyGenMode::Rbac,
        }),
        _ => None,
    }
}

/// Computes generator statistics for a target (or the `typed-expr`
/// pseudo-target) over `samples` generated cases. Deterministic in `seed`.
pub fn compute_stats(target: &str, samples: u64, seed: u64) -> StatsReport {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut acc = Accumulator::default();

    for _ in 0..samples {
        let len = rng.gen_range(32..256);
        let mut bytes = vec![0u8; len];
        rng.fill_bytes(&mut bytes);
        let mut c = ByteCursor::new(&bytes);

        if target == TYPED_EXPR_TARGET {
            let world = gen_world(&mut c, &Limits::default());
            let env = request_env(&world);
            let target_ty = match c.choose(5) {
                0 => Type::Bool,
                1 => Type::Long,
                2 => Type::String,
                3 => Type::Entity(world.request.principal.entity_type().clone()),
                _ => Type::Set(Box::new(Type::Long)),
            };
            let depth = c.range(1, 4);
            let expr = gen_expr_nontrivial(&mut c, &env, &target_ty, &world, depth);
            acc.expr(&expr, target_ty == Type::Bool);
            acc.outcome(&evaluate(&expr, &world.request, &world.store));
            continue;
        }

        let Some(mode) = policy_mode_for(target, &mut c) else {
            // Raw-byte targets have no generated conditions.
            continue;
        };
        let world = decode_world(&mut c);
        let policies = gen_policies(mode, &mut c, &world);
        for policy in policies.iter() {
            for condition in &policy.conditions {
                acc.expr(&condition.body, true);
                acc.outcome(&evaluate(&condition.body, &world.request, &world.store));
            }
        }
    }
    acc.finish(target, samples)
}
