//! OCL expressions, types and typechecking.

mod ast;
mod typecheck;
mod types;

pub use ast::*;
pub use typecheck::{typecheck, TypeError};
pub use types::{CollectionKind, OclType, TypeAnnotation};
