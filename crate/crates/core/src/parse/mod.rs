//! Parsers for the textual model language, OCL expressions, configuration
//! files and partial-state command files.

mod config;
mod lexer;
mod model;
mod ocl;
mod print;
mod state_cmd;

use std::fmt;

pub use config::parse_config_file;
pub use model::parse_model;
pub use ocl::{parse_expression, parse_ocl};
pub use print::print_model;
pub use state_cmd::{parse_state_commands, StateCommandError, StateCommandErrorKind};

use crate::location::{SourceLocation, Span};
use crate::model::ModelError;

/// A syntax error at a byte range of the input.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{message}")]
pub struct ParseError {
    pub message: String,
    pub span: Span,
}

impl ParseError {
    pub fn at(span: Span, message: impl Into<String>) -> Self {
        ParseError {
            message: message.into(),
            span,
        }
    }
}

/// A located problem found while loading a model or an OCL expression.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Diagnostic {
    Syntax {
        message: String,
        location: SourceLocation,
    },
    Model {
        error: ModelError,
        location: SourceLocation,
    },
    Type {
        message: String,
        location: SourceLocation,
    },
}

impl Diagnostic {
    pub fn location(&self) -> &SourceLocation {
        match self {
            Diagnostic::Syntax { location, .. }
            | Diagnostic::Model { location, .. }
            | Diagnostic::Type { location, .. } => location,
        }
    }

    pub fn message(&self) -> String {
        match self {
            Diagnostic::Syntax { message, .. } | Diagnostic::Type { message, .. } => message.clone(),
            Diagnostic::Model { error, .. } => error.to_string(),
        }
    }

    pub(crate) fn syntax(file: &str, text: &str, err: ParseError) -> Self {
        Diagnostic::Syntax {
            message: err.message,
            location: SourceLocation::at_offset(file, text, err.span.start as usize),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self {
            Diagnostic::Syntax { .. } => "syntax error",
            Diagnostic::Model { .. } => "model error",
            Diagnostic::Type { .. } => "type error",
        };
        write!(f, "{}: {kind}: {}", self.location(), self.message())
    }
}

impl std::error::Error for Diagnostic {}

/// Wraps a list of diagnostics into an error value.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n"))]
pub struct Diagnostics(pub Vec<Diagnostic>);
