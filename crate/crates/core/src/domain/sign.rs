use std::fmt;

use super::itv::{Bound, Itv};
use super::Domain;

/// Sign lattice: `⊥ < -, 0, + < int < ⊤`. `+` is strictly positive and `-`
/// strictly negative. `int` and `⊤` describe the same integers but `⊤` also
/// admits unbound variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Bot,
    Neg,
    Zero,
    Pos,
    Int,
    Top,
}

impl Sign {
    pub const ALL: [Sign; 6] = [Sign::Bot, Sign::Neg, Sign::Zero, Sign::Pos, Sign::Int, Sign::Top];

    fn is_atom(self) -> bool {
        matches!(self, Sign::Neg | Sign::Zero | Sign::Pos)
    }

    pub fn leq(self, other: Sign) -> bool {
        self == other
            || self == Sign::Bot
            || other == Sign::Top
            || (other == Sign::Int && self.is_atom())
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Bot => "⊥",
            Sign::Neg => "-",
            Sign::Zero => "0",
            Sign::Pos => "+",
            Sign::Int => "int",
            Sign::Top => "⊤",
        })
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SignDomain;

impl Domain for SignDomain {
    type Elem = Sign;

    fn name(&self) -> &'static str {
        "sign"
    }

    fn top(&self) -> Sign {
        Sign::Top
    }

    fn bottom(&self) -> Sign {
        Sign::Bot
    }

    fn leq_elem(&self, a: &Sign, b: &Sign) -> bool {
        a.leq(*b)
    }

    fn meet_elem(&self, a: &Sign, b: &Sign) -> Sign {
        if a.leq(*b) {
            *a
        } else if b.leq(*a) {
            *b
        } else {
            Sign::Bot
        }
    }

    fn join_elem(&self, a: &Sign, b: &Sign) -> Sign {
        if a.leq(*b) {
            *b
        } else if b.leq(*a) {
            *a
        } else {
            Sign::Int
        }
    }

    fn widen_elem(&self, old: &Sign, new: &Sign) -> Sign {
        self.join_elem(old, new)
    }

    fn hull(&self, e: &Sign) -> Itv {
        match e {
            Sign::Bot => Itv::EMPTY,
            Sign::Neg => Itv::at_most(-1),
            Sign::Zero => Itv::point(0),
            Sign::Pos => Itv::at_least(1),
            Sign::Int | Sign::Top => Itv::FULL,
        }
    }

    fn abstract_over(&self, i: &Itv) -> Sign {
        if i.is_empty() {
            Sign::Bot
        } else if *i == Itv::point(0) {
            Sign::Zero
        } else if i.lo() >= Bound::Fin(1) {
            Sign::Pos
        } else if i.hi() <= Bound::Fin(-1) {
            Sign::Neg
        } else {
            Sign::Int
        }
    }

    fn abstract_under(&self, i: &Itv) -> Sign {
        if i.is_full() {
            Sign::Int
        } else if Itv::at_least(1).is_subset(i) {
            Sign::Pos
        } else if Itv::at_most(-1).is_subset(i) {
            Sign::Neg
        } else if i.contains(0) {
            Sign::Zero
        } else {
            Sign::Bot
        }
    }
}
