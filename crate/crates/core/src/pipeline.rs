//! End-to-end driver: parse, normalize, lower, analyze, check, report.

use crate::analyzer::{analyze, EngineConfig, Mode, Query};
use crate::assertions::{conditions_of, ts_over, AssertionCondition};
use crate::checker::{check_conditions, lemma_violations};
use crate::domain::{Domain, DomainKind, IntervalDomain, SignDomain};
use crate::oracle::{entry_instances, explore, OracleConfig};
use crate::report::{Report, Validation};
use crate::syntax::{lower_pp_assertions, normalize, parse_entry, parse_program, EntryDecl, Program, PropertyFormula};
use crate::Error;

/// Values tried for each argument when replaying entries concretely.
pub const ORACLE_BOX: std::ops::RangeInclusive<i64> = -4..=4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Options {
    pub domain: DomainKind,
    pub config: EngineConfig,
    /// `head : props` strings replacing the program's entry declarations.
    pub entries: Vec<String>,
    /// Replay the entries on the concrete interpreter and check coverage.
    pub validate: Option<OracleConfig>,
}

impl Default for Options {
    fn default() -> Self {
        Options { domain: DomainKind::Sign, config: EngineConfig::default(), entries: Vec::new(), validate: None }
    }
}

/// Parses and brings a program into analyzable form.
pub fn prepare(src: &str) -> Result<Program, Error> {
    Ok(lower_pp_assertions(&normalize(&parse_program(src)?)))
}

/// Initial queries from entry declarations: each precondition is taken as
/// the call description.
pub fn entry_queries<D: Domain>(d: &D, entries: &[EntryDecl]) -> Vec<Query<D::Elem>> {
    entries
        .iter()
        .map(|e| Query { atom: e.head.clone(), call: ts_over(d, &PropertyFormula::conj(e.pre.clone()), &e.head.arg_vars()) })
        .collect()
}

pub fn run_source(src: &str, opts: &Options) -> Result<Report, Error> {
    let program = prepare(src)?;
    match opts.domain {
        DomainKind::Sign => run_with(&SignDomain, &program, opts),
        DomainKind::Intervals => run_with(&IntervalDomain, &program, opts),
    }
}

pub fn run_with<D: Domain>(d: &D, program: &Program, opts: &Options) -> Result<Report, Error> {
    let entries = if opts.entries.is_empty() {
        program.entries.clone()
    } else {
        opts.entries.iter().map(|s| parse_entry(s)).collect::<Result<Vec<_>, _>>()?
    };
    if entries.is_empty() {
        return Err(Error::NoEntries);
    }
    let queries = entry_queries(d, &entries);
    let conds = conditions_of(program)?;
    let analysis = analyze(d, program, &queries, &conds, &opts.config)?;
    let (verdicts, obligations) = check_conditions(d, &analysis.pre, &conds)?;
    let mut report = Report::empty(d.name(), opts.config.mode.as_str(), opts.config.speed_up)
        .with_analysis(&analysis)
        .with_checks(&conds, verdicts, obligations);
    if let Some(cfg) = &opts.validate {
        report.validation = Some(validate(d, program, &entries, &conds, &analysis.table, opts.config.mode, cfg));
    }
    Ok(report)
}

fn validate<D: Domain>(
    d: &D,
    program: &Program,
    entries: &[EntryDecl],
    conds: &[AssertionCondition],
    table: &crate::analyzer::AnalysisTable<D::Elem>,
    mode: Mode,
    cfg: &OracleConfig,
) -> Validation {
    let concrete_queries = entries.iter().map(|e| entry_instances(d, e, ORACLE_BOX).len()).sum();
    let run = explore(d, program, entries, ORACLE_BOX, cfg);
    let guidance_violations = if mode == Mode::Guided { lemma_violations(d, table, conds) } else { Vec::new() };
    Validation {
        depth: cfg.depth,
        concrete_queries,
        events: run.trace.len(),
        coverage_violations: crate::oracle::validate_coverage(d, table, &run.trace),
        guidance_violations,
        depth_exhausted: run.depth_exhausted,
        insufficiently_instantiated: run.insufficiently_instantiated,
        unsupported: run.unsupported,
        step_limit_hit: run.step_limit_hit,
    }
}
