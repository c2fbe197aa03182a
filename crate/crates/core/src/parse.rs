//! Shared error type for the line-oriented text formats.

use std::fmt;

/// A parse failure with a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

/// Column (1-based) of `token` within `line`, searching from byte offset `from`.
pub(crate) fn column_of(line: &str, token: &str, from: usize) -> usize {
    line.get(from..)
        .and_then(|rest| rest.find(token))
        .map(|o| from + o + 1)
        .unwrap_or(from + 1)
}
