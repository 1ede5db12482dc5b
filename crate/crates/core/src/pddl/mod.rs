//! Parsing and serialization for the STRIPS subset of PDDL
//! (`:strips`, `:typing`, `:negative-preconditions`). This is the only
//! ingestion path for ground-truth agent models and vocabulary input.
//!
//! Every input either yields a model or a diagnostic with a `line:column`
//! position; constructs outside the subset are rejected by name. The grammar
//! is documented in `docs/pddl-subset.md`.

mod reader;
mod sexpr;
mod writer;

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::strips::{GroundLiteral, LiftedModel, ModelError, State, TypedObjects};

pub use sexpr::Position;

/// Raw PDDL text together with where it came from, for diagnostics.
#[derive(Debug, Clone)]
pub struct DomainSource {
    pub text: String,
    pub origin: String,
}

impl DomainSource {
    pub fn inline(text: &str) -> Self {
        DomainSource {
            text: text.to_string(),
            origin: "<inline>".to_string(),
        }
    }

    pub fn from_file(path: &Path) -> std::io::Result<Self> {
        Ok(DomainSource {
            text: std::fs::read_to_string(path)?,
            origin: path.display().to_string(),
        })
    }
}

/// A parsed problem: typed objects, initial state, goal literals. A missing
/// or empty goal is valid; interrogation runs are goal-free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemInstance {
    pub name: String,
    pub domain: String,
    pub objects: TypedObjects,
    pub init: State,
    pub goal: BTreeSet<GroundLiteral>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("expected {expected}, found {found}")]
    Syntax { expected: String, found: String },
    #[error("unsupported construct: {construct}")]
    Unsupported { construct: String },
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("`{name}` expects {expected} arguments, got {got}")]
    Arity {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("`{name}` has type `{actual}` but the slot requires `{expected}`")]
    TypeMismatch {
        name: String,
        actual: String,
        expected: String,
    },
    #[error("duplicate {what} `{name}`")]
    Duplicate { what: String, name: String },
    #[error("problem declares domain `{declared}` but the model is `{parsed}`")]
    DomainMismatch { declared: String, parsed: String },
    #[error("{0}")]
    Model(ModelError),
}

/// A diagnostic tied to a source position, rendered as `line:column: message`.
#[derive(Debug, PartialEq, Eq)]
pub struct ParseError {
    pub pos: Position,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.pos, self.kind)
    }
}

impl std::error::Error for ParseError {}

/// Parses a domain in the supported subset into a well-formed model.
pub fn parse_domain(source: &DomainSource) -> Result<LiftedModel, ParseError> {
    reader::read_domain(&source.text)
}

/// Parses a problem and validates it against an already-parsed domain model.
pub fn parse_problem(
    source: &DomainSource,
    model: &LiftedModel,
) -> Result<ProblemInstance, ParseError> {
    reader::read_problem(&source.text, model)
}

/// Canonical serialization; see [`writer::write_domain`].
pub fn serialize_domain(model: &LiftedModel) -> String {
    writer::write_domain(model)
}
