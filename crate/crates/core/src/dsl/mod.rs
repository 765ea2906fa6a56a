//! The `.tm` text format.
//!
//! ```text
//! model Letter {
//!   thimac Letter {
//!     thimac Word { create word; process write; }
//!     create letter;
//!   }
//!   flow Letter.Word.word -> Letter.Word.write;
//!   trigger Letter.Word.write -> Letter.letter;
//! }
//! events {
//!   event E1 { region: Letter.Word.word; }
//!   event E2 { region: Letter.Word.write; }
//!   event E3 { region: Letter.letter; }
//! }
//! behavior {
//!   E1 -> E2;
//!   E2 -> E1 [repeat];
//!   E2 -> E3;
//! }
//! ```

mod lexer;
mod parser;
mod printer;

use std::fmt;

use thiserror::Error;

pub use parser::{parse, parse_named};
pub use printer::print;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SourceSpan {
    pub file: String,
    /// 1-based.
    pub line: usize,
    /// 1-based, counted in characters.
    pub column: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DslError {
    #[error("{span}: PARSE: {message}; expected {expected}")]
    Parse {
        span: SourceSpan,
        message: String,
        expected: String,
    },
    #[error("{second}: DUPID: `{name}` already declared at {first}")]
    DupId {
        name: String,
        first: SourceSpan,
        second: SourceSpan,
    },
    #[error("{span}: UNDEF: `{name}` {what}")]
    Undef {
        name: String,
        what: &'static str,
        span: SourceSpan,
    },
    #[error("{span}: REGION_DISCONNECTED: region of `{event}` contains no actions")]
    EmptyRegion { event: String, span: SourceSpan },
}

impl DslError {
    pub fn code(&self) -> &'static str {
        match self {
            DslError::Parse { .. } => "PARSE",
            DslError::DupId { .. } => "DUPID",
            DslError::Undef { .. } => "UNDEF",
            DslError::EmptyRegion { .. } => "REGION_DISCONNECTED",
        }
    }

    /// Primary location of the problem.
    pub fn span(&self) -> &SourceSpan {
        match self {
            DslError::Parse { span, .. }
            | DslError::Undef { span, .. }
            | DslError::EmptyRegion { span, .. } => span,
            DslError::DupId { second, .. } => second,
        }
    }
}
