//! Shared data model for the warden authorization engine: entity uids and
//! stores, runtime values, the policy and expression AST, schemas, requests
//! and responses, and schema-conformance checks.
//!
//! Everything here is immutable after construction and every operation is a
//! pure function of its inputs, so all types are safe to share across
//! threads.

pub mod conformance;
pub mod entities;
pub mod error;
pub mod expr;
pub mod policy;
pub mod request;
pub mod schema;
pub mod uid;
pub mod value;

pub use conformance::{request_conforms, store_conforms, Violation};
pub use entities::{Entities, EntityData};
pub use error::EvalError;
pub use expr::{BinOp, Expr, Lit, PatElem, Pattern, Var, MAX_EVAL_DEPTH};
pub use policy::{
    ActionScopeConstraint, Condition, ConditionKind, DuplicatePolicyId, Effect, Policy, PolicySet,
    ScopeConstraint,
};
pub use request::{Decision, Request, Response};
pub use schema::{ActionDecl, AttrDecl, EntityTypeDecl, Schema, Type};
pub use uid::{EntityType, EntityUid};
pub use value::{Value, ValueKind};
