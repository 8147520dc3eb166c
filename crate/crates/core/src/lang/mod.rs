//! The guarded-command language: syntax tree, labelling, counter
//! instrumentation, action extraction and well-formedness checks.

mod actions;
mod ast;
mod label;
mod validate;

pub use actions::{extract_actions, instrument_counters, ActionKind, AtomicAction, Effect, Outcome};
pub use ast::*;
pub use label::{annotation, auto_label, LabelError};
pub use validate::{validate_wellformed, DiagKind, Diagnostic};
