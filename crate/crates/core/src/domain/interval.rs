use super::itv::Itv;
use super::Domain;

/// Non-relational integer intervals with standard widening.
#[derive(Clone, Copy, Debug, Default)]
pub struct IntervalDomain;

impl Domain for IntervalDomain {
    type Elem = Itv;

    fn name(&self) -> &'static str {
        "intervals"
    }

    fn top(&self) -> Itv {
        Itv::FULL
    }

    fn bottom(&self) -> Itv {
        Itv::EMPTY
    }

    fn leq_elem(&self, a: &Itv, b: &Itv) -> bool {
        a.is_subset(b)
    }

    fn meet_elem(&self, a: &Itv, b: &Itv) -> Itv {
        a.meet(b)
    }

    fn join_elem(&self, a: &Itv, b: &Itv) -> Itv {
        a.join(b)
    }

    fn widen_elem(&self, old: &Itv, new: &Itv) -> Itv {
        old.widen(new)
    }

    fn hull(&self, e: &Itv) -> Itv {
        *e
    }

    fn abstract_over(&self, i: &Itv) -> Itv {
        *i
    }

    fn abstract_under(&self, i: &Itv) -> Itv {
        *i
    }
}
