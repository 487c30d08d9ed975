mod common;

use hornguide::analyzer::{EngineConfig, Mode};
use hornguide::domain::DomainKind;
use hornguide::oracle::OracleConfig;
use hornguide::pipeline::{run_source, Options};
use hornguide::report::Report;
use hornguide::Error;
use serde_json::Value;

use common::*;

fn opts(domain: DomainKind, mode: Mode) -> Options {
    Options { domain, config: EngineConfig { mode, ..Default::default() }, ..Default::default() }
}

#[test]
fn json_is_stable_and_parses() {
    for name in ANALYZABLE {
        for domain in [DomainKind::Sign, DomainKind::Intervals] {
            let src = corpus_src(name);
            let a = run_source(&src, &opts(domain, Mode::Guided)).unwrap().to_json();
            let b = run_source(&src, &opts(domain, Mode::Guided)).unwrap().to_json();
            assert_eq!(a, b, "{name}");
            let v: Value = serde_json::from_str(&a).unwrap();
            let back: Value = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
            assert_eq!(back, v, "{name}");
            for key in ["triples", "pre_table", "conditions", "verdicts", "obligations", "warnings", "domain", "mode", "iterations"] {
                assert!(v.get(key).is_some(), "{name}: missing {key}");
            }
        }
    }
}

#[test]
fn json_shape() {
    let r = run_source(&corpus_src("factorial"), &opts(DomainKind::Sign, Mode::Baseline)).unwrap();
    let v: Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(v["domain"], "sign");
    assert_eq!(v["mode"], "baseline");
    let t = &v["triples"][0];
    assert_eq!(t["pred"], "fact(X,R)");
    assert_eq!(t["call"]["X"], "⊤");
    assert!(v.get("validation").is_none());
}

#[test]
fn empty_report() {
    let v: Value = serde_json::from_str(&Report::empty("sign", "guided", false).to_json()).unwrap();
    assert_eq!(v["triples"], Value::Array(vec![]));
    assert_eq!(v["verdicts"], Value::Array(vec![]));
}

#[test]
fn missing_entries() {
    let err = run_source("p(0).", &Options::default()).unwrap_err();
    assert!(matches!(err, Error::NoEntries));
}

#[test]
fn entry_override() {
    let mut o = opts(DomainKind::Intervals, Mode::Baseline);
    o.entries = vec!["fact(X,R) : X = 3".into()];
    let r = run_source(&corpus_src("factorial"), &o).unwrap();
    assert_eq!(r.triples[0].to_string(), "⟨fact(X,R), (X/[3,3], R/(-inf,+inf)), (X/[3,3], R/[6,+inf))⟩");

    o.entries = vec!["fact(X,R) : X >".into()];
    assert!(matches!(run_source(&corpus_src("factorial"), &o), Err(Error::Parse { .. })));
}

#[test]
fn parse_errors_carry_position() {
    let err = run_source("p(X) :- X is .", &Options::default()).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("1:"), "{msg}");
}

#[test]
fn false_verdict_sets_exit_code() {
    let r = run_source(&corpus_src("bad"), &opts(DomainKind::Sign, Mode::Guided)).unwrap();
    assert!(r.has_false());
    assert_eq!(r.exit_code(), 1);
    let r = run_source(&corpus_src("factorial"), &opts(DomainKind::Sign, Mode::Guided)).unwrap();
    assert_eq!(r.exit_code(), 0);
}

#[test]
fn validation_runs_clean_on_corpus() {
    for name in SELF_CONTAINED {
        let mut o = opts(DomainKind::Intervals, Mode::Baseline);
        o.validate = Some(OracleConfig::default());
        let r = run_source(&corpus_src(name), &o).unwrap();
        let v = r.validation.as_ref().unwrap();
        assert!(v.is_clean(), "{name}: {v:?}");
        assert!(v.concrete_queries > 0, "{name}");
    }
}

#[test]
fn text_report_lists_sections() {
    let r = run_source(&corpus_src("statuses"), &opts(DomainKind::Sign, Mode::Guided)).unwrap();
    let text = r.to_text();
    for section in ["triples:", "verdicts:"] {
        assert!(text.contains(section), "{text}");
    }
    assert!(text.contains("optional_sampling"), "{text}");
}
