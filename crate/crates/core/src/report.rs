//! Analysis reports: JSON document and plain-text rendering.

use std::fmt::Write as _;

use serde::ser::{Serialize, SerializeMap, Serializer};
use serde::Serialize as DeriveSerialize;

use crate::analyzer::{Analysis, AnalysisTable, PreTable, Triple};
use crate::assertions::AssertionCondition;
use crate::checker::{Level, Obligation, Verdict};
use crate::domain::AbstractValue;
use crate::syntax::Atom;

/// An abstract value as an ordered `variable -> element` map, or `"⊥"`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueRecord(pub Option<Vec<(String, String)>>);

impl ValueRecord {
    pub fn of<E: std::fmt::Display>(atom: &Atom, v: &AbstractValue<E>) -> Self {
        ValueRecord(v.entries_ordered(&atom.arg_vars()))
    }
}

impl std::fmt::Display for ValueRecord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.0 {
            None => f.write_str("⊥"),
            Some(es) => {
                let parts: Vec<String> = es.iter().map(|(k, v)| format!("{k}/{v}")).collect();
                write!(f, "({})", parts.join(", "))
            }
        }
    }
}

impl Serialize for ValueRecord {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match &self.0 {
            None => s.serialize_str("⊥"),
            Some(es) => {
                let mut m = s.serialize_map(Some(es.len()))?;
                for (k, v) in es {
                    m.serialize_entry(k, v)?;
                }
                m.end()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, DeriveSerialize)]
pub struct TripleRecord {
    pub pred: String,
    pub call: ValueRecord,
    pub success: ValueRecord,
}

impl TripleRecord {
    pub fn of<E: std::fmt::Display>(t: &Triple<E>) -> Self {
        TripleRecord { pred: t.atom.to_string(), call: ValueRecord::of(&t.atom, &t.call), success: ValueRecord::of(&t.atom, &t.success) }
    }
}

impl std::fmt::Display for TripleRecord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "⟨{}, {}, {}⟩", self.pred, self.call, self.success)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, DeriveSerialize)]
pub struct CallSnapshot {
    pub pred: String,
    pub call: ValueRecord,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, DeriveSerialize)]
pub struct PreTableRecord {
    pub calls: Vec<CallSnapshot>,
    pub successes: Vec<TripleRecord>,
}

impl PreTableRecord {
    pub fn of<E: std::fmt::Display + std::hash::Hash + Eq>(pre: &PreTable<E>) -> Self {
        PreTableRecord {
            calls: pre
                .call_snaps
                .iter()
                .map(|(a, c)| CallSnapshot { pred: a.to_string(), call: ValueRecord::of(a, c) })
                .collect(),
            successes: pre.succ_snaps.iter().map(TripleRecord::of).collect(),
        }
    }
}

/// Outcome of replaying the entries on the concrete interpreter.
#[derive(Clone, Debug, Default, PartialEq, Eq, DeriveSerialize)]
pub struct Validation {
    pub depth: usize,
    pub concrete_queries: usize,
    pub events: usize,
    pub coverage_violations: Vec<String>,
    pub guidance_violations: Vec<String>,
    pub depth_exhausted: bool,
    pub insufficiently_instantiated: bool,
    pub unsupported: bool,
    pub step_limit_hit: bool,
}

impl Validation {
    pub fn is_clean(&self) -> bool {
        self.coverage_violations.is_empty() && self.guidance_violations.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, DeriveSerialize)]
pub struct Report {
    pub triples: Vec<TripleRecord>,
    pub pre_table: PreTableRecord,
    pub conditions: Vec<String>,
    pub verdicts: Vec<Verdict>,
    pub obligations: Vec<Obligation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validation: Option<Validation>,
    pub warnings: Vec<String>,
    pub domain: String,
    pub mode: String,
    pub speed_up: bool,
    pub iterations: usize,
}

impl Report {
    pub fn empty(domain: &str, mode: &str, speed_up: bool) -> Self {
        Report {
            triples: Vec::new(),
            pre_table: PreTableRecord::default(),
            conditions: Vec::new(),
            verdicts: Vec::new(),
            obligations: Vec::new(),
            validation: None,
            warnings: Vec::new(),
            domain: domain.to_string(),
            mode: mode.to_string(),
            speed_up,
            iterations: 0,
        }
    }

    pub fn with_analysis<E: std::fmt::Display + Clone + PartialEq + std::hash::Hash + Eq>(mut self, a: &Analysis<E>) -> Self {
        self.triples = table_records(&a.table);
        self.pre_table = PreTableRecord::of(&a.pre);
        self.iterations = a.iterations;
        self.warnings = a.warnings.clone();
        self
    }

    pub fn with_checks(mut self, conds: &[AssertionCondition], verdicts: Vec<Verdict>, obligations: Vec<Obligation>) -> Self {
        self.conditions = conds.iter().map(|c| format!("{} {}", c.status, c)).collect();
        self.verdicts = verdicts;
        self.obligations = obligations;
        self
    }

    pub fn has_false(&self) -> bool {
        self.verdicts.iter().any(|v| v.level == Level::False)
    }

    /// 0 when nothing is refuted, 1 when a verdict is false or validation
    /// found violations.
    pub fn exit_code(&self) -> i32 {
        if self.has_false() || self.validation.as_ref().is_some_and(|v| !v.is_clean()) {
            1
        } else {
            0
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "domain: {}  mode: {}{}  iterations: {}",
            self.domain,
            self.mode,
            if self.speed_up { " (speed-up)" } else { "" },
            self.iterations
        );
        let _ = writeln!(out, "\ntriples:");
        for t in &self.triples {
            let _ = writeln!(out, "  {t}");
        }
        if !self.verdicts.is_empty() {
            let _ = writeln!(out, "\nverdicts:");
            for (v, o) in self.verdicts.iter().zip(&self.obligations) {
                let _ = writeln!(out, "  [{}] {}", v.level, v.assertion);
                let _ = writeln!(out, "      {}; action: {}", v.message, o.action);
                for e in &v.evidence {
                    match &e.success {
                        Some(s) => {
                            let _ = writeln!(out, "      {} {} -> {} vs {}: {}", e.atom, e.call, s, e.bound, e.level);
                        }
                        None => {
                            let _ = writeln!(out, "      {} {} vs {}: {}", e.atom, e.call, e.bound, e.level);
                        }
                    }
                }
            }
        }
        if let Some(val) = &self.validation {
            let _ = writeln!(
                out,
                "\nvalidation (depth {}, {} concrete queries, {} events): {}",
                val.depth,
                val.concrete_queries,
                val.events,
                if val.is_clean() { "ok" } else { "VIOLATIONS" }
            );
            for v in val.coverage_violations.iter().chain(&val.guidance_violations) {
                let _ = writeln!(out, "  {v}");
            }
            let flags: Vec<&str> = [
                (val.depth_exhausted, "depth exhausted"),
                (val.insufficiently_instantiated, "insufficiently instantiated branches"),
                (val.unsupported, "unsupported constructs"),
                (val.step_limit_hit, "step limit hit"),
            ]
            .iter()
            .filter(|(b, _)| *b)
            .map(|(_, s)| *s)
            .collect();
            if !flags.is_empty() {
                let _ = writeln!(out, "  note: {}", flags.join(", "));
            }
        }
        if !self.warnings.is_empty() {
            let _ = writeln!(out, "\nwarnings:");
            for w in &self.warnings {
                let _ = writeln!(out, "  {w}");
            }
        }
        out
    }
}

pub fn table_records<E: std::fmt::Display + Clone + PartialEq>(t: &AnalysisTable<E>) -> Vec<TripleRecord> {
    t.triples().iter().map(TripleRecord::of).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_json() {
        let r = Report::empty("sign", "baseline", false);
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["triples"], serde_json::json!([]));
        assert!(v.get("validation").is_none());
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn value_record_keeps_order() {
        let rec = ValueRecord(Some(vec![("X".into(), "⊤".into()), ("R".into(), "+".into())]));
        assert_eq!(serde_json::to_string(&rec).unwrap(), r#"{"X":"⊤","R":"+"}"#);
        assert_eq!(rec.to_string(), "(X/⊤, R/+)");
        assert_eq!(serde_json::to_string(&ValueRecord(None)).unwrap(), r#""⊥""#);
    }
}
