mod common;

use hornguide::analyzer::{analyze_baseline, guided_analyze, EngineConfig};
use hornguide::assertions::conditions_of;
use hornguide::domain::{IntervalDomain, SignDomain};
use hornguide::pipeline::prepare;
use hornguide::syntax::parse_program;
use proptest::prelude::*;

use common::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn sign_lattice(a in values(sign_elem()), b in values(sign_elem()), c in values(sign_elem())) {
        let d = SignDomain;
        lattice_laws(&d, &value_of(&d, a), &value_of(&d, b), &value_of(&d, c))?;
    }

    #[test]
    fn interval_lattice(a in values(itv_elem()), b in values(itv_elem()), c in values(itv_elem())) {
        let d = IntervalDomain;
        lattice_laws(&d, &value_of(&d, a), &value_of(&d, b), &value_of(&d, c))?;
    }

    #[test]
    fn sign_transfer(b in builtin(), x in values(sign_elem()), y in values(sign_elem())) {
        let d = SignDomain;
        let (x, y) = (value_of(&d, x), value_of(&d, y));
        transfer_monotone(&d, &b, &x, &y)?;
        transfer_sound(&d, &b, &x)?;
    }

    #[test]
    fn interval_transfer(b in builtin(), x in values(itv_elem()), y in values(itv_elem())) {
        let d = IntervalDomain;
        let (x, y) = (value_of(&d, x), value_of(&d, y));
        transfer_monotone(&d, &b, &x, &y)?;
        transfer_sound(&d, &b, &x)?;
    }

    #[test]
    fn property_bounds(c in conjunction()) {
        ts_bracket(&SignDomain, &c)?;
        ts_bracket(&IntervalDomain, &c)?;
    }

    #[test]
    fn widening_stabilizes(chain in ascending_chain()) {
        prop_assert!(widening_steps(&chain) <= 4);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn printed_programs_reparse(seed in any::<u64>(), assertions in any::<bool>()) {
        let first = parse_program(&random_program(seed, assertions)).unwrap();
        let again = parse_program(&first.to_string()).unwrap();
        prop_assert_eq!(first.to_string(), again.to_string());
    }

    #[test]
    fn random_programs_analyze_deterministically(seed in any::<u64>()) {
        let p = prepare(&random_program(seed, true)).unwrap();
        let d = IntervalDomain;
        let conds = conditions_of(&p).unwrap();
        let cfg = EngineConfig::guided(false);
        let a = guided_analyze(&d, &p, &queries(&d, &p), &conds, &cfg);
        let b = guided_analyze(&d, &p, &queries(&d, &p), &conds, &cfg);
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a.table, b.table),
            (a, b) => prop_assert_eq!(a.err().map(|e| e.to_string()), b.err().map(|e| e.to_string())),
        }
    }

    #[test]
    fn assertion_free_programs_agree(seed in any::<u64>()) {
        let p = prepare(&random_program(seed, false)).unwrap();
        let d = SignDomain;
        let qs = queries(&d, &p);
        let b = analyze_baseline(&d, &p, &qs, &EngineConfig::default()).map(|a| a.table).map_err(|e| e.to_string());
        let g = guided_analyze(&d, &p, &qs, &[], &EngineConfig::guided(true)).map(|a| a.table).map_err(|e| e.to_string());
        prop_assert_eq!(b, g);
    }
}

#[test]
fn corpus_reparses() {
    for name in ANALYZABLE {
        let p = parse_program(&corpus_src(name)).unwrap();
        assert_eq!(parse_program(&p.to_string()).unwrap().to_string(), p.to_string(), "{name}");
    }
}
