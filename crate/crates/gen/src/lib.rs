//! Deterministic byte-stream-driven generators for schemas, entity stores,
//! requests, and policies. Corpus files are the test cases themselves: the
//! same bytes always decode to the same generated input, and an exhausted
//! cursor degrades to minimal choices so every byte string terminates.

pub mod cursor;
pub mod expr;
pub mod policies;
pub mod world;

pub use cursor::ByteCursor;
pub use expr::{gen_expr, gen_expr_nontrivial, gen_untyped_expr, perturb_expr};
pub use policies::{gen_policies, request_env, PolicyGenMode};
pub use world::{gen_world, Limits, World};
