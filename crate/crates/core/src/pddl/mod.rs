//! PDDL input (STRIPS + typing + constant action costs), grounding, and the
//! line-oriented native fixture format.

mod ast;
mod fixture;
mod ground;
pub mod sexpr;

use std::fmt;

use thiserror::Error;

use crate::model::ModelError;

pub use ast::{
    parse_domain, parse_problem, write_domain, write_problem, ActionSchema, Atom, DomainAst,
    PredicateDecl, ProblemAst, TypedName, SUPPORTED_REQUIREMENTS,
};
pub use fixture::{
    parse_fixture, split_conditional_costs, CheapVariant, ConditionalAction, ConditionalModel,
    Fixture, FixtureError,
};
pub(crate) use ground::check_task;
pub use ground::{ground, ground_with, GroundError, GroundOptions};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Lexical(char),
    Unbalanced,
    UnexpectedEof,
    Expected(String),
    UnsupportedRequirement(String),
    Unsupported(String),
    UnknownVariable { variable: String, action: String },
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Lexical(c) => write!(f, "unexpected character {c:?}"),
            ParseErrorKind::Unbalanced => f.write_str("unbalanced parentheses"),
            ParseErrorKind::UnexpectedEof => f.write_str("unexpected end of input"),
            ParseErrorKind::Expected(what) => write!(f, "expected {what}"),
            ParseErrorKind::UnsupportedRequirement(r) => write!(f, "unsupported requirement `{r}`"),
            ParseErrorKind::Unsupported(what) => write!(f, "unsupported construct: {what}"),
            ParseErrorKind::UnknownVariable { variable, action } => {
                write!(f, "variable `{variable}` is not a parameter of `{action}`")
            }
        }
    }
}

/// Parse failure with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    pub(crate) fn at(pos: sexpr::Pos, kind: ParseErrorKind) -> Self {
        ParseError {
            line: pos.line,
            col: pos.col,
            kind,
        }
    }
}

/// Any failure while turning input text into a model.
#[derive(Debug, Error)]
pub enum InputError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Ground(#[from] GroundError),
    #[error(transparent)]
    Fixture(#[from] FixtureError),
    #[error(transparent)]
    Model(#[from] ModelError),
}
