//! Concrete syntax for the policy language: text parsing, canonical
//! pretty-printing, comment-preserving formatting, and the JSON data formats
//! for entities, schemas, and requests.

pub mod format;
pub mod json;
pub mod lexer;
pub mod parse;
pub mod pretty;

pub use format::{comment_texts, format_text};
pub use json::{parse_entities_json, parse_request_json, parse_schema_json};
pub use lexer::{escape_string, unescape_string, ParseError, SourceSpan};
pub use parse::{parse_expr, parse_policy_set, parse_policy_set_bytes};
pub use pretty::pretty_print;
