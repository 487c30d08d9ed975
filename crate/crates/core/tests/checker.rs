mod common;

use hornguide::analyzer::{analyze, EngineConfig};
use hornguide::assertions::conditions_of;
use hornguide::checker::{check_conditions, obligation_for, Action, Level};
use hornguide::domain::{DomainKind, IntervalDomain, SignDomain};
use hornguide::pipeline::{run_source, Options};
use hornguide::syntax::Status;
use hornguide::Error;

use common::*;

/// One level per condition; a `pred` assertion yields a calls and a success condition.
fn levels(src: &str, domain: DomainKind) -> Vec<Level> {
    let opts = Options { domain, config: EngineConfig::guided(false), ..Default::default() };
    run_source(src, &opts).unwrap().verdicts.iter().map(|v| v.level).collect()
}

#[test]
fn negative_call_is_false() {
    let src = ":- entry main.\n:- check pred p(X) : X > 0.\nmain :- X = -3, p(X).\np(_).";
    assert_eq!(levels(src, DomainKind::Intervals), vec![Level::False, Level::Checked]);
    assert_eq!(levels(src, DomainKind::Sign), vec![Level::False, Level::Checked]);
}

#[test]
fn entailed_call_is_checked() {
    let src = ":- entry main.\n:- check pred p(X) : X >= 0.\nmain :- X = 3, p(X).\np(_).";
    assert_eq!(levels(src, DomainKind::Intervals), vec![Level::Checked, Level::Checked]);
    assert_eq!(levels(src, DomainKind::Sign), vec![Level::Checked, Level::Checked]);
}

#[test]
fn straddling_call_is_unknown() {
    let src = ":- entry main(X) : int(X).\n:- check pred p(X) : X >= 0.\nmain(X) :- p(X).\np(_).";
    assert_eq!(levels(src, DomainKind::Intervals), vec![Level::Unknown, Level::Checked]);
}

#[test]
fn success_conditions() {
    let ok = ":- entry p(X,Y) : X >= 0.\n:- check pred p(X,Y) : X >= 0 => Y >= 1.\np(X,Y) :- Y is X + 1.";
    assert_eq!(levels(ok, DomainKind::Intervals), vec![Level::Checked, Level::Checked]);
    let bad = ":- entry p(X,Y) : X >= 0.\n:- check pred p(X,Y) : X >= 0 => Y < 0.\np(X,Y) :- Y is X + 1.";
    assert_eq!(levels(bad, DomainKind::Intervals), vec![Level::Checked, Level::False]);
    assert_eq!(levels(&corpus_src("absval"), DomainKind::Sign), vec![Level::Checked, Level::Unknown]);
}

#[test]
fn unreached_condition_is_checked() {
    let src = ":- entry main.\n:- check pred p(X) : X > 0.\nmain.\np(_).";
    let r = run_source(src, &Options::default()).unwrap();
    assert_eq!(r.verdicts[0].level, Level::Checked);
    assert!(r.verdicts[0].evidence.is_empty());
}

#[test]
fn obligations_follow_status_and_level() {
    for level in [Level::Checked, Level::False, Level::Unknown] {
        assert_eq!(obligation_for(Status::Trust, level), Action::None);
        assert_eq!(obligation_for(Status::SampleCheck, level), Action::OptionalSampling);
    }
    assert_eq!(obligation_for(Status::Check, Level::Checked), Action::None);
    assert_eq!(obligation_for(Status::Check, Level::False), Action::RuntimeCheckRequired);
    assert_eq!(obligation_for(Status::Check, Level::Unknown), Action::RuntimeCheckRequired);

    let src = ":- entry main.\n:- sample-check pred p(X) : X > 0.\nmain :- X = 3, p(X).\np(_).";
    let r = run_source(src, &Options { config: EngineConfig::guided(false), ..Default::default() }).unwrap();
    assert_eq!(r.verdicts[0].level, Level::Checked);
    assert_eq!(r.obligations[0].action, Action::OptionalSampling);
}

#[test]
fn domain_mismatch_is_rejected() {
    let p = corpus("bad");
    let conds = conditions_of(&p).unwrap();
    let mut a = analyze(&SignDomain, &p, &queries(&SignDomain, &p), &conds, &EngineConfig::default()).unwrap();
    a.pre.domain = "intervals".into();
    let err = check_conditions(&SignDomain, &a.pre, &conds).unwrap_err();
    assert!(matches!(err, Error::DomainMismatch { ref expected, ref found } if expected == "sign" && found == "intervals"), "{err}");
}

#[test]
fn checking_is_pure() {
    for name in ANALYZABLE {
        let p = corpus(name);
        let d = IntervalDomain;
        let conds = conditions_of(&p).unwrap();
        let a = analyze(&d, &p, &queries(&d, &p), &conds, &EngineConfig::guided(false)).unwrap();
        let first = check_conditions(&d, &a.pre, &conds).unwrap();
        let second = check_conditions(&d, &a.pre, &conds).unwrap();
        assert_eq!(first, second, "{name}");
        assert_eq!(first.0.len(), conds.len());
        assert_eq!(first.1.len(), conds.len());
    }
}
