//! Differential and property-based random-testing harness.
//!
//! Registers the test targets (authorizer/validator parity with the
//! reference model, parser and formatter roundtrips, parser safety,
//! validation and slicing soundness), runs them under iteration or wall
//! clock budgets, minimizes failures with ddmin, and manages a replayable
//! byte-string corpus.

pub mod corpus;
pub mod minimize;
pub mod runner;
pub mod stats;
pub mod targets;

pub use corpus::{hash_hex, load_cases, save_case, stored_targets};
pub use minimize::minimize_case;
pub use runner::{replay_all, replay_target, run_target, Budget, RunConfig, RunReport};
pub use stats::{compute_stats, StatsReport, TYPED_EXPR_TARGET};
pub use targets::{all_targets, find_target, Target, Verdict};
