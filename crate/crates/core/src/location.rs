use std::fmt;

use serde::{Deserialize, Serialize};

/// A position inside a named input, 1-based in both coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SourceLocation {
    pub file: String,
    pub line: u32,
    pub column: u32,
}

impl SourceLocation {
    pub fn new(file: impl Into<String>, line: u32, column: u32) -> Self {
        debug_assert!(line >= 1 && column >= 1);
        SourceLocation {
            file: file.into(),
            line,
            column,
        }
    }

    /// Location of byte `offset` inside `text`, counting columns in characters.
    pub fn at_offset(file: &str, text: &str, offset: usize) -> Self {
        let offset = offset.min(text.len());
        let mut line = 1;
        let mut column = 1;
        for (i, ch) in text.char_indices() {
            if i >= offset {
                break;
            }
            if ch == '\n' {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
        }
        SourceLocation::new(file, line, column)
    }

    /// The location `offset` bytes further into `text`, where `text` starts at `self`.
    pub fn advance(&self, text: &str, offset: usize) -> Self {
        let inner = SourceLocation::at_offset(&self.file, text, offset);
        if inner.line == 1 {
            SourceLocation::new(self.file.clone(), self.line, self.column + inner.column - 1)
        } else {
            SourceLocation::new(self.file.clone(), self.line + inner.line - 1, inner.column)
        }
    }
}

impl fmt::Display for SourceLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

/// Byte range into an expression's source text.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub start: u32,
    pub end: u32,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span {
            start: start as u32,
            end: end as u32,
        }
    }

    pub fn to(self, other: Span) -> Span {
        Span {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
        }
    }

    pub fn slice(self, text: &str) -> &str {
        text.get(self.start as usize..self.end as usize).unwrap_or("")
    }
}

/// Source position metadata that does not take part in structural equality.
///
/// Two models parsed from differently formatted text compare equal as long as
/// their content does.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Origin(pub Option<SourceLocation>);

impl PartialEq for Origin {
    fn eq(&self, _other: &Self) -> bool {
        true
    }
}

impl Eq for Origin {}

impl Origin {
    pub fn none() -> Self {
        Origin(None)
    }

    pub fn at(loc: SourceLocation) -> Self {
        Origin(Some(loc))
    }

    pub fn location(&self) -> Option<&SourceLocation> {
        self.0.as_ref()
    }
}
