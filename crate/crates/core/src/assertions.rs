//! Assertion conditions and trivial-success bounds.
//!
//! Every asserted predicate gets one `calls` condition whose precondition is
//! the disjunction of all the assertions' preconditions, plus one `success`
//! condition per assertion.

use std::fmt;

use indexmap::IndexMap;

use crate::domain::{AbstractValue, Domain, Value};
use crate::syntax::{Atom, Conjunction, PredKey, Program, PropertyFormula, Rename, Renaming, Span, Status, Var};
use crate::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConditionKind {
    Calls { pre: PropertyFormula },
    Success { pre: Conjunction, post: Conjunction },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssertionCondition {
    pub head: Atom,
    pub kind: ConditionKind,
    pub status: Status,
    /// Source locations of the assertions the condition was built from.
    pub origin: Vec<Span>,
}

impl AssertionCondition {
    pub fn key(&self) -> PredKey {
        self.head.key()
    }

    /// Whether the analyzer may use the condition as guidance.
    pub fn applicable(&self) -> bool {
        self.status.usable_in_analysis()
    }

    pub fn is_calls(&self) -> bool {
        matches!(self.kind, ConditionKind::Calls { .. })
    }

    /// The same condition stated over `atom`'s variables.
    pub fn renamed_to(&self, atom: &Atom) -> Option<AssertionCondition> {
        let r = Renaming::between(&self.head, atom)?;
        let kind = match &self.kind {
            ConditionKind::Calls { pre } => ConditionKind::Calls { pre: pre.rename(&r) },
            ConditionKind::Success { pre, post } => ConditionKind::Success { pre: pre.rename(&r), post: post.rename(&r) },
        };
        Some(AssertionCondition { head: atom.clone(), kind, status: self.status, origin: self.origin.clone() })
    }
}

impl fmt::Display for AssertionCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ConditionKind::Calls { pre } => write!(f, "calls({}, {})", self.head, pre),
            ConditionKind::Success { pre, post } => write!(f, "success({}, {}, {})", self.head, pre, post),
        }
    }
}

/// Compiles the program's assertions into conditions. Predicates appear in
/// order of their first assertion; each contributes its calls condition
/// followed by its success conditions in source order.
pub fn conditions_of(p: &Program) -> Result<Vec<AssertionCondition>, Error> {
    let mut groups: IndexMap<PredKey, Vec<usize>> = IndexMap::new();
    for (i, a) in p.assertions.iter().enumerate() {
        let key = a.head.key();
        let name_defined = p.clauses.iter().any(|c| c.head.pred == key.name);
        if name_defined && !p.is_defined(&key) {
            return Err(Error::ConflictingArity { pred: key, span: a.span });
        }
        groups.entry(key).or_default().push(i);
    }

    let mut out = Vec::new();
    for idxs in groups.values() {
        let first = &p.assertions[idxs[0]];
        let head = first.head.clone();
        let mut pre = PropertyFormula { dnf: Vec::new() };
        let mut successes = Vec::new();
        let statuses: Vec<Status> = idxs.iter().map(|&i| p.assertions[i].status).collect();
        for &i in idxs {
            let a = &p.assertions[i];
            let r = Renaming::between(&a.head, &head).expect("assertion heads are normalized");
            let (apre, apost) = (a.pre.rename(&r), a.post.rename(&r));
            if !pre.dnf.contains(&apre) {
                pre.dnf.push(apre.clone());
            }
            successes.push(AssertionCondition {
                head: head.clone(),
                kind: ConditionKind::Success { pre: apre, post: apost },
                status: a.status,
                origin: vec![a.span],
            });
        }
        let calls_status = if statuses.contains(&Status::Check) {
            Status::Check
        } else if statuses.contains(&Status::Trust) {
            Status::Trust
        } else {
            Status::SampleCheck
        };
        out.push(AssertionCondition {
            head,
            kind: ConditionKind::Calls { pre },
            status: calls_status,
            origin: idxs.iter().map(|&i| p.assertions[i].span).collect(),
        });
        out.extend(successes);
    }
    Ok(out)
}

/// Abstract trivial-success bounds of a conjunction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TsBounds<E> {
    pub under: AbstractValue<E>,
    pub over: AbstractValue<E>,
    pub formula: Conjunction,
}

pub fn ts_bounds<D: Domain>(d: &D, c: &Conjunction, scope: &[Var]) -> TsBounds<D::Elem> {
    TsBounds {
        under: ts_under(d, c, scope),
        over: ts_over(d, &PropertyFormula::conj(c.clone()), scope),
        formula: c.clone(),
    }
}

/// Superset of the trivial success set: meet over each conjunction, join
/// over the disjunction.
pub fn ts_over<D: Domain>(d: &D, f: &PropertyFormula, scope: &[Var]) -> Value<D> {
    f.dnf.iter().fold(AbstractValue::Bottom, |acc, conj| {
        let c = conj.0.iter().fold(d.top_value(scope), |v, lit| d.meet(&v, &d.prop_over(lit, scope)));
        d.join(&acc, &c)
    })
}

/// Subset of the trivial success set of a conjunction.
pub fn ts_under<D: Domain>(d: &D, c: &Conjunction, scope: &[Var]) -> Value<D> {
    c.0.iter().fold(d.top_value(scope), |v, lit| d.meet(&v, &d.prop_under(lit, scope)))
}
