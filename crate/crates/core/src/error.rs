//! The dynamic error taxonomy shared by the production and reference
//! evaluators. Lives here because [`crate::request::Response`] embeds it.

use thiserror::Error;

use crate::value::ValueKind;

/// A dynamic evaluation error.
///
/// `TypeError` and `MissingAttr` are the classes validation soundness rules
/// out; `Overflow` is exempt (64-bit arithmetic is checked at runtime, not
/// statically).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Error)]
pub enum EvalError {
    #[error("type error: expected {}, got {got}", fmt_kinds(.expected))]
    TypeError {
        expected: Vec<ValueKind>,
        got: ValueKind,
    },
    #[error("missing attribute `{0}`")]
    MissingAttr(String),
    #[error("integer overflow")]
    Overflow,
    #[error("{0}")]
    ArityOrDomain(String),
}

impl EvalError {
    pub fn type_error(expected: impl Into<Vec<ValueKind>>, got: ValueKind) -> Self {
        EvalError::TypeError {
            expected: expected.into(),
            got,
        }
    }

    /// A short class tag, used when bucketing outcomes in statistics.
    pub fn class(&self) -> &'static str {
        match self {
            EvalError::TypeError { .. } => "type_error",
            EvalError::MissingAttr(_) => "missing_attr",
            EvalError::Overflow => "overflow",
            EvalError::ArityOrDomain(_) => "arity_or_domain",
        }
    }
}

fn fmt_kinds(kinds: &[ValueKind]) -> String {
    kinds
        .iter()
        .map(|k| k.to_string())
        .collect::<Vec<_>>()
        .join(" or ")
}
