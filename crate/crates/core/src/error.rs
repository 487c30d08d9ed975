use thiserror::Error;

use crate::syntax::{ParseError, PredKey, Span};

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("call to unknown predicate {pred}: no clauses and no trust or check assertion")]
    UnknownPredicate { pred: PredKey },
    #[error("fixpoint not reached within {limit} iterations")]
    IterationBudgetExceeded { limit: usize },
    #[error("{span}: assertion for {pred} does not match the arity of the defined `{}` predicate(s)", pred.name)]
    ConflictingArity { pred: PredKey, span: Span },
    #[error("pre-table was computed with domain `{found}` but the checker runs `{expected}`")]
    DomainMismatch { expected: String, found: String },
    #[error("no entry points: add `:- entry` declarations or pass an entry explicitly")]
    NoEntries,
    #[error("program is not in analyzable form: {0}")]
    NotPrepared(String),
    #[error("{0}")]
    InvalidConfig(String),
}
