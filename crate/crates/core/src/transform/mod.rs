//! Deterministic rule-based obfuscators used as baselines.

mod builtins;
mod rename;
mod wrap;

use thiserror::Error;

use crate::pysurface::LexError;

pub use builtins::{is_builtin, BUILTINS};
pub use rename::{baseline_rename, rename_map, CONFUSABLE_ALPHABET};
pub use wrap::baseline_wrap;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error("unsupported shape: {0}")]
    UnsupportedShape(&'static str),
    #[error("unsupported construct: {0}")]
    Unsupported(&'static str),
}
