//! Concrete syntax for diagrams, snapshots and proof scripts.
//!
//! ```text
//! diagram D {
//!   class Student
//!   abstract class Person { attributes name }
//!   generalization Person <| Student
//!   association knows {
//!     end knower : Person [0..*]
//!     end known : Person [0..*]
//!   }
//! }
//! ```
//!
//! Comments run from `//` to the end of the line. Identifiers are ASCII and
//! may not be keywords.

mod lexer;
mod parser;
mod printer;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::wellformed::ValidationReport;

pub use parser::{parse_diagram, parse_diagram_with_spans, parse_script, parse_snapshot};
pub use printer::{print_diagram, print_multiplicity, print_script, print_snapshot, print_step};

/// 1-based position in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: expected {expected}, found {found}")]
pub struct ParseError {
    pub span: SourceSpan,
    pub expected: String,
    pub found: String,
}

/// Declaration sites of the names in a parsed diagram.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DiagramSpans {
    pub names: BTreeMap<String, SourceSpan>,
}

impl DiagramSpans {
    /// Gives each finding the position of its first located subject.
    pub fn annotate(&self, report: &mut ValidationReport) {
        for f in &mut report.findings {
            if f.span.is_none() {
                f.span = f.subject.iter().find_map(|s| self.names.get(s)).copied();
            }
        }
    }
}

pub(crate) const KEYWORDS: &[&str] = &[
    "diagram",
    "abstract",
    "class",
    "attributes",
    "generalization",
    "association",
    "end",
    "snapshot",
    "object",
    "attr",
    "prove",
    "to",
    "weaken",
    "erase-association",
    "erase-class",
    "erase-attribute",
    "erase-generalization",
    "move-end-up",
    "keep-multiplicity",
    "unchecked",
];
