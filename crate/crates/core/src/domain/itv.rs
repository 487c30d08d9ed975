use std::cmp::{max, min};
use std::fmt;

use crate::syntax::CmpOp;

/// Interval bound over the extended integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bound {
    NegInf,
    Fin(i64),
    PosInf,
}

/// Bound arithmetic is done over `i128` and clamped back with a side
/// (lower or upper) so that results stay over-approximations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Ext {
    NegInf,
    Fin(i128),
    PosInf,
}

impl Ext {
    fn of(b: Bound) -> Ext {
        match b {
            Bound::NegInf => Ext::NegInf,
            Bound::Fin(n) => Ext::Fin(n as i128),
            Bound::PosInf => Ext::PosInf,
        }
    }

    fn lower(self) -> Bound {
        match self {
            Ext::Fin(n) if n < i64::MIN as i128 => Bound::NegInf,
            Ext::Fin(n) => Bound::Fin(n.min(i64::MAX as i128) as i64),
            Ext::NegInf => Bound::NegInf,
            Ext::PosInf => Bound::PosInf,
        }
    }

    fn upper(self) -> Bound {
        match self {
            Ext::Fin(n) if n > i64::MAX as i128 => Bound::PosInf,
            Ext::Fin(n) => Bound::Fin(n.max(i64::MIN as i128) as i64),
            Ext::NegInf => Bound::NegInf,
            Ext::PosInf => Bound::PosInf,
        }
    }

    fn neg(self) -> Ext {
        match self {
            Ext::NegInf => Ext::PosInf,
            Ext::PosInf => Ext::NegInf,
            Ext::Fin(n) => Ext::Fin(-n),
        }
    }

    /// Only called on bounds of the same side, so `-inf + +inf` never occurs.
    fn add(self, other: Ext) -> Ext {
        match (self, other) {
            (Ext::Fin(a), Ext::Fin(b)) => Ext::Fin(a + b),
            (Ext::NegInf, _) | (_, Ext::NegInf) => Ext::NegInf,
            _ => Ext::PosInf,
        }
    }

    fn mul(self, other: Ext) -> Ext {
        match (self, other) {
            (Ext::Fin(0), _) | (_, Ext::Fin(0)) => Ext::Fin(0),
            (Ext::Fin(a), Ext::Fin(b)) => Ext::Fin(a.saturating_mul(b)),
            (a, b) => {
                if (a < Ext::Fin(0)) == (b < Ext::Fin(0)) {
                    Ext::PosInf
                } else {
                    Ext::NegInf
                }
            }
        }
    }

    fn plus(self, k: i128) -> Ext {
        match self {
            Ext::Fin(n) => Ext::Fin(n + k),
            e => e,
        }
    }
}

/// A possibly empty integer interval with infinite bounds. The empty interval
/// has a single representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Itv {
    lo: Bound,
    hi: Bound,
}

impl Itv {
    pub const EMPTY: Itv = Itv { lo: Bound::PosInf, hi: Bound::NegInf };
    pub const FULL: Itv = Itv { lo: Bound::NegInf, hi: Bound::PosInf };

    pub fn new(lo: Bound, hi: Bound) -> Itv {
        if lo > hi || lo == Bound::PosInf || hi == Bound::NegInf {
            Itv::EMPTY
        } else {
            Itv { lo, hi }
        }
    }

    pub fn range(lo: i64, hi: i64) -> Itv {
        Itv::new(Bound::Fin(lo), Bound::Fin(hi))
    }

    pub fn point(n: i64) -> Itv {
        Itv::range(n, n)
    }

    pub fn at_least(lo: i64) -> Itv {
        Itv::new(Bound::Fin(lo), Bound::PosInf)
    }

    pub fn at_most(hi: i64) -> Itv {
        Itv::new(Bound::NegInf, Bound::Fin(hi))
    }

    pub fn lo(&self) -> Bound {
        self.lo
    }

    pub fn hi(&self) -> Bound {
        self.hi
    }

    pub fn is_empty(&self) -> bool {
        *self == Itv::EMPTY
    }

    pub fn is_full(&self) -> bool {
        *self == Itv::FULL
    }

    pub fn contains(&self, n: i64) -> bool {
        !self.is_empty() && self.lo <= Bound::Fin(n) && Bound::Fin(n) <= self.hi
    }

    pub fn is_subset(&self, other: &Itv) -> bool {
        self.is_empty() || (!other.is_empty() && other.lo <= self.lo && self.hi <= other.hi)
    }

    pub fn meet(&self, other: &Itv) -> Itv {
        if self.is_empty() || other.is_empty() {
            return Itv::EMPTY;
        }
        Itv::new(max(self.lo, other.lo), min(self.hi, other.hi))
    }

    pub fn join(&self, other: &Itv) -> Itv {
        if self.is_empty() {
            return *other;
        }
        if other.is_empty() {
            return *self;
        }
        Itv::new(min(self.lo, other.lo), max(self.hi, other.hi))
    }

    /// Standard widening: bounds that grew jump to infinity.
    pub fn widen(&self, new: &Itv) -> Itv {
        if self.is_empty() {
            return *new;
        }
        if new.is_empty() {
            return *self;
        }
        let lo = if new.lo < self.lo { Bound::NegInf } else { self.lo };
        let hi = if new.hi > self.hi { Bound::PosInf } else { self.hi };
        Itv::new(lo, hi)
    }

    pub fn neg(&self) -> Itv {
        if self.is_empty() {
            return Itv::EMPTY;
        }
        Itv::new(Ext::of(self.hi).neg().lower(), Ext::of(self.lo).neg().upper())
    }

    pub fn add(&self, other: &Itv) -> Itv {
        if self.is_empty() || other.is_empty() {
            return Itv::EMPTY;
        }
        let lo = Ext::of(self.lo).add(Ext::of(other.lo));
        let hi = Ext::of(self.hi).add(Ext::of(other.hi));
        Itv::new(lo.lower(), hi.upper())
    }

    pub fn sub(&self, other: &Itv) -> Itv {
        if self.is_empty() || other.is_empty() {
            return Itv::EMPTY;
        }
        let lo = Ext::of(self.lo).add(Ext::of(other.hi).neg());
        let hi = Ext::of(self.hi).add(Ext::of(other.lo).neg());
        Itv::new(lo.lower(), hi.upper())
    }

    pub fn mul(&self, other: &Itv) -> Itv {
        if self.is_empty() || other.is_empty() {
            return Itv::EMPTY;
        }
        let (a, b, c, d) = (Ext::of(self.lo), Ext::of(self.hi), Ext::of(other.lo), Ext::of(other.hi));
        let corners = [a.mul(c), a.mul(d), b.mul(c), b.mul(d)];
        let lo = *corners.iter().min().unwrap();
        let hi = *corners.iter().max().unwrap();
        Itv::new(lo.lower(), hi.upper())
    }

    /// Narrows `l` and `r` to the values that can satisfy `l op r`.
    pub fn refine_cmp(op: CmpOp, l: &Itv, r: &Itv) -> (Itv, Itv) {
        if l.is_empty() || r.is_empty() {
            return (Itv::EMPTY, Itv::EMPTY);
        }
        let (l2, r2) = match op {
            CmpOp::Lt => (
                l.meet(&Itv::new(Bound::NegInf, Ext::of(r.hi).plus(-1).upper())),
                r.meet(&Itv::new(Ext::of(l.lo).plus(1).lower(), Bound::PosInf)),
            ),
            CmpOp::Le => (l.meet(&Itv::new(Bound::NegInf, r.hi)), r.meet(&Itv::new(l.lo, Bound::PosInf))),
            CmpOp::Gt | CmpOp::Ge => {
                let (r2, l2) = Itv::refine_cmp(op.flip(), r, l);
                (l2, r2)
            }
            CmpOp::Eq => {
                let m = l.meet(r);
                (m, m)
            }
        };
        if l2.is_empty() || r2.is_empty() {
            (Itv::EMPTY, Itv::EMPTY)
        } else {
            (l2, r2)
        }
    }

    /// Interval of values `x` with `x op c`.
    pub fn satisfying(op: CmpOp, c: i64) -> Itv {
        match op {
            CmpOp::Gt => Itv::new(Ext::Fin(c as i128 + 1).lower(), Bound::PosInf),
            CmpOp::Ge => Itv::at_least(c),
            CmpOp::Lt => Itv::new(Bound::NegInf, Ext::Fin(c as i128 - 1).upper()),
            CmpOp::Le => Itv::at_most(c),
            CmpOp::Eq => Itv::point(c),
        }
    }
}

impl fmt::Display for Itv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "⊥");
        }
        match self.lo {
            Bound::Fin(n) => write!(f, "[{n},")?,
            _ => write!(f, "(-inf,")?,
        }
        match self.hi {
            Bound::Fin(n) => write!(f, "{n}]"),
            _ => write!(f, "+inf)"),
        }
    }
}
