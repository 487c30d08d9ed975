//! Offline assertion checking against the pre-guidance table.

use std::fmt;

use serde::Serialize;

use crate::analyzer::{AnalysisTable, PreTable};
use crate::assertions::{ts_over, ts_under, AssertionCondition, ConditionKind};
use crate::domain::{Domain, Value};
use crate::syntax::{Atom, PropertyFormula, Status};
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Checked,
    False,
    Unknown,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Checked => "checked",
            Level::False => "false",
            Level::Unknown => "unknown",
        })
    }
}

/// One pre-table entry compared against a condition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Evidence {
    pub atom: String,
    pub call: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub success: Option<String>,
    /// The assertion bound the entry was compared with.
    pub bound: String,
    pub level: Level,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub condition: usize,
    pub assertion: String,
    pub status: Status,
    pub level: Level,
    pub evidence: Vec<Evidence>,
    pub message: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    RuntimeCheckRequired,
    OptionalSampling,
    None,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Action::RuntimeCheckRequired => "runtime_check_required",
            Action::OptionalSampling => "optional_sampling",
            Action::None => "none",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Obligation {
    pub condition: usize,
    pub assertion: String,
    pub action: Action,
}

pub fn obligation_for(status: Status, level: Level) -> Action {
    match status {
        Status::Trust => Action::None,
        Status::Check if level == Level::Checked => Action::None,
        Status::Check => Action::RuntimeCheckRequired,
        Status::SampleCheck => Action::OptionalSampling,
    }
}

/// Compares every condition with the pre-guidance snapshots of its predicate.
///
/// A calls condition is `checked` for a snapshot whose call lies below the
/// under-approximation of one of the preconditions, `false` when the call
/// has an empty meet with their over-approximation. A success condition is
/// compared on every snapshot whose call may satisfy the precondition:
/// `checked` when the success lies below the under-approximation of the
/// postcondition, `false` when the call surely satisfies the precondition and
/// the (non-empty) success has an empty meet with the postcondition.
pub fn check_conditions<D: Domain>(
    d: &D,
    pre: &PreTable<D::Elem>,
    conditions: &[AssertionCondition],
) -> Result<(Vec<Verdict>, Vec<Obligation>), Error> {
    if pre.domain != d.name() {
        return Err(Error::DomainMismatch { expected: d.name().to_string(), found: pre.domain.clone() });
    }
    let mut verdicts = Vec::new();
    let mut obligations = Vec::new();
    for (i, cond) in conditions.iter().enumerate() {
        let evidence = match &cond.kind {
            ConditionKind::Calls { .. } => check_calls(d, pre, cond),
            ConditionKind::Success { .. } => check_success(d, pre, cond),
        };
        let level = if evidence.iter().any(|e| e.level == Level::False) {
            Level::False
        } else if evidence.iter().all(|e| e.level == Level::Checked) {
            Level::Checked
        } else {
            Level::Unknown
        };
        let relevant = evidence.len();
        let message = match (level, &cond.kind) {
            (Level::Checked, _) if relevant == 0 => "no inferred call pattern reaches this condition".to_string(),
            (Level::Checked, ConditionKind::Calls { .. }) => format!("all {relevant} inferred call pattern(s) satisfy the precondition"),
            (Level::Checked, ConditionKind::Success { .. }) => format!("all {relevant} relevant success pattern(s) satisfy the postcondition"),
            (Level::False, ConditionKind::Calls { .. }) => "an inferred call pattern is incompatible with the precondition".to_string(),
            (Level::False, ConditionKind::Success { .. }) => "an inferred success pattern is incompatible with the postcondition".to_string(),
            (Level::Unknown, _) => "the inferred information neither proves nor refutes the condition".to_string(),
        };
        let assertion = format!("{} {}", cond.status, cond);
        obligations.push(Obligation { condition: i, assertion: assertion.clone(), action: obligation_for(cond.status, level) });
        verdicts.push(Verdict { condition: i, assertion, status: cond.status, level, evidence, message });
    }
    Ok((verdicts, obligations))
}

fn check_calls<D: Domain>(d: &D, pre: &PreTable<D::Elem>, cond: &AssertionCondition) -> Vec<Evidence> {
    let mut out = Vec::new();
    for (atom, call) in &pre.call_snaps {
        let Some(c) = matching(cond, atom) else { continue };
        let ConditionKind::Calls { pre: f } = &c.kind else { unreachable!() };
        let scope = atom.arg_vars();
        let over = ts_over(d, f, &scope);
        let level = if f.dnf.iter().any(|conj| d.leq(call, &ts_under(d, conj, &scope))) {
            Level::Checked
        } else if d.meet(call, &over).is_bottom() {
            Level::False
        } else {
            Level::Unknown
        };
        out.push(Evidence {
            atom: atom.to_string(),
            call: call.display_ordered(&scope),
            success: None,
            bound: over.display_ordered(&scope),
            level,
        });
    }
    out
}

fn check_success<D: Domain>(d: &D, pre: &PreTable<D::Elem>, cond: &AssertionCondition) -> Vec<Evidence> {
    let mut out = Vec::new();
    for t in &pre.succ_snaps {
        let Some(c) = matching(cond, &t.atom) else { continue };
        let ConditionKind::Success { pre: p, post } = &c.kind else { unreachable!() };
        let scope = t.atom.arg_vars();
        let pre_over = ts_over(d, &PropertyFormula::conj(p.clone()), &scope);
        if d.meet(&t.call, &pre_over).is_bottom() {
            continue;
        }
        let post_over = ts_over(d, &PropertyFormula::conj(post.clone()), &scope);
        let level = if d.leq(&t.success, &ts_under(d, post, &scope)) {
            Level::Checked
        } else if !t.success.is_bottom()
            && d.leq(&t.call, &ts_under(d, p, &scope))
            && d.meet(&t.success, &post_over).is_bottom()
        {
            Level::False
        } else {
            Level::Unknown
        };
        out.push(Evidence {
            atom: t.atom.to_string(),
            call: t.call.display_ordered(&scope),
            success: Some(t.success.display_ordered(&scope)),
            bound: post_over.display_ordered(&scope),
            level,
        });
    }
    out
}

fn matching(cond: &AssertionCondition, atom: &Atom) -> Option<AssertionCondition> {
    if cond.key() != atom.key() {
        return None;
    }
    cond.renamed_to(atom)
}

/// Checks the two guidance invariants on a final table: calls of guided
/// predicates lie below the over-approximated precondition, and successes
/// of entries whose call entails a precondition lie below the
/// over-approximated postcondition. Returns a description per violation.
pub fn lemma_violations<D: Domain>(d: &D, table: &AnalysisTable<D::Elem>, conditions: &[AssertionCondition]) -> Vec<String> {
    let mut out = Vec::new();
    for t in table.triples() {
        let scope = t.atom.arg_vars();
        for cond in conditions.iter().filter(|c| c.applicable()) {
            let Some(c) = matching(cond, &t.atom) else { continue };
            match &c.kind {
                ConditionKind::Calls { pre } => {
                    let over: Value<D> = ts_over(d, pre, &scope);
                    if !d.leq(&t.call, &over) {
                        out.push(format!(
                            "call {} of {} is not below {}",
                            t.call.display_ordered(&scope),
                            t.atom,
                            over.display_ordered(&scope)
                        ));
                    }
                }
                ConditionKind::Success { pre, post } => {
                    let over = ts_over(d, &PropertyFormula::conj(post.clone()), &scope);
                    if d.leq(&t.call, &ts_under(d, pre, &scope)) && !d.leq(&t.success, &over) {
                        out.push(format!(
                            "success {} of {} for call {} is not below {}",
                            t.success.display_ordered(&scope),
                            t.atom,
                            t.call.display_ordered(&scope),
                            over.display_ordered(&scope)
                        ));
                    }
                }
            }
        }
    }
    out
}
