//! Goal-dependent, multivariant abstract interpretation of constrained Horn
//! clause programs over integers, guided by user assertions.
//!
//! The usual flow is [`pipeline::run_source`]: parse a program, normalize it,
//! lower program-point assertions, run the fixpoint from the entry
//! declarations and check every assertion against the values inferred
//! before guidance.

pub mod analyzer;
pub mod assertions;
pub mod checker;
pub mod domain;
mod error;
pub mod oracle;
pub mod pipeline;
pub mod report;
pub mod syntax;

pub use error::Error;
