//! Textual syntax for static models, events and chronologies.
//!
//! ```text
//! thimac Stack { store; transfer; receive; create; }
//! flow Stack.transfer -> Stack.receive;
//! trigger Stack.receive --> Stack.create;
//! ```

use std::fmt;

use crate::eventing::{eventize, BehavioralModel, EventRegion};
use crate::model::{canonicalize, StaticModel};

mod lexer;
mod lower;
mod parser;
mod printer;

pub use lexer::Pos;
pub use printer::print;

/// True for words the DSL reserves, which cannot name a thimac.
pub fn is_reserved(word: &str) -> bool {
    parser::is_keyword(word)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    /// The text does not match the grammar.
    Syntax,
    /// A path or event id does not name anything.
    Unresolved,
    /// Something is declared twice.
    Redeclared,
    /// Well-formed but semantically rejected, e.g. an update on a release.
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub column: usize,
    pub message: String,
    /// Token classes that would have been accepted, for syntax errors.
    pub expected: Vec<String>,
}

impl ParseError {
    pub(crate) fn new(pos: Pos, message: impl Into<String>, expected: &[&str]) -> Self {
        ParseError {
            kind: ParseErrorKind::Syntax,
            line: pos.line,
            column: pos.column,
            message: message.into(),
            expected: expected.iter().map(|s| (*s).to_owned()).collect(),
        }
    }

    pub(crate) fn at(kind: ParseErrorKind, pos: Pos, message: impl Into<String>) -> Self {
        ParseError {
            kind,
            line: pos.line,
            column: pos.column,
            message: message.into(),
            expected: Vec::new(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceUnit {
    pub text: String,
    /// File path, or `<memory>`.
    pub origin: String,
}

impl SourceUnit {
    pub fn new(text: impl Into<String>, origin: impl Into<String>) -> Self {
        SourceUnit {
            text: text.into(),
            origin: origin.into(),
        }
    }

    pub fn memory(text: impl Into<String>) -> Self {
        SourceUnit::new(text, "<memory>")
    }
}

/// Everything a `.tm` file declares.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub model: StaticModel,
    pub events: Vec<EventRegion>,
    /// Present when the file has a `behavior` block.
    pub behavior: Option<BehavioralModel>,
}

impl Document {
    /// Canonical model, with regions recomputed so their induced edge lists
    /// follow the canonical edge order.
    pub fn canonical(&self) -> Document {
        let model = canonicalize(&self.model);
        let reorder = |r: &EventRegion| {
            let mut e = eventize(&model, r.id.as_str(), &r.label, r.covers.iter().cloned())
                .expect("regions of a well-formed document stay valid")
                .region;
            e.input = r.input.clone();
            e
        };
        let events = self.events.iter().map(reorder).collect();
        let behavior = self.behavior.as_ref().map(|b| BehavioralModel {
            events: b.events.iter().map(reorder).collect(),
            edges: b.edges.clone(),
            terminals: b.terminals.clone(),
            repeatable: b.repeatable.clone(),
        });
        Document {
            model,
            events,
            behavior,
        }
    }

    /// The declared chronology, or an edgeless one over the declared events.
    pub fn behavior_or_default(&self) -> BehavioralModel {
        self.behavior.clone().unwrap_or_else(|| BehavioralModel {
            events: self.events.clone(),
            edges: Vec::new(),
            terminals: Default::default(),
            repeatable: Default::default(),
        })
    }
}

pub fn parse(src: &SourceUnit) -> Result<Document, ParseError> {
    parse_str(&src.text)
}

pub fn parse_str(text: &str) -> Result<Document, ParseError> {
    let items = parser::parse_items(text)?;
    lower::lower(items)
}

/// Parses a guard expression whose store paths are absolute.
pub fn parse_guard(model: &StaticModel, text: &str) -> Result<crate::expr::Guard, ParseError> {
    let ast = parser::parse_expr_text(text)?;
    lower::lower_guard(model, &ast).map(crate::expr::Guard::new)
}
