//! Abstract domains.
//!
//! A domain only has to describe its element lattice and how elements relate
//! to integer intervals ([`Domain::hull`], [`Domain::abstract_over`],
//! [`Domain::abstract_under`]). Store-level operations, the analysis
//! primitives and the builtin/property tables are derived from those.

mod interval;
mod itv;
mod sign;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

pub use interval::IntervalDomain;
pub use itv::{Bound, Itv};
pub use sign::{Sign, SignDomain};

use crate::syntax::{ArithOp, Atom, Builtin, Expr, Operand, PropLit, PropRel, Rename, Renaming, Term, Var};

/// Map from variables to element descriptions, or the distinguished bottom.
/// A map never contains a bottom element: such values collapse to `Bottom`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AbstractValue<E> {
    Bottom,
    Env(BTreeMap<Var, E>),
}

impl<E> AbstractValue<E> {
    pub fn is_bottom(&self) -> bool {
        matches!(self, AbstractValue::Bottom)
    }

    pub fn get(&self, v: &Var) -> Option<&E> {
        match self {
            AbstractValue::Bottom => None,
            AbstractValue::Env(m) => m.get(v),
        }
    }

    pub fn vars(&self) -> Vec<Var> {
        match self {
            AbstractValue::Bottom => Vec::new(),
            AbstractValue::Env(m) => m.keys().cloned().collect(),
        }
    }
}

impl<E: fmt::Display> AbstractValue<E> {
    /// Renders `(X/a, Y/b)` listing variables in the given order first.
    pub fn display_ordered(&self, order: &[Var]) -> String {
        match self {
            AbstractValue::Bottom => "⊥".to_string(),
            AbstractValue::Env(m) => {
                let mut keys: Vec<&Var> = order.iter().filter(|v| m.contains_key(v)).collect();
                keys.extend(m.keys().filter(|k| !order.contains(k)));
                let parts: Vec<String> = keys.iter().map(|k| format!("{k}/{}", m[*k])).collect();
                format!("({})", parts.join(", "))
            }
        }
    }

    /// `(variable, element)` pairs in the given order, or `None` for bottom.
    pub fn entries_ordered(&self, order: &[Var]) -> Option<Vec<(String, String)>> {
        match self {
            AbstractValue::Bottom => None,
            AbstractValue::Env(m) => {
                let mut keys: Vec<&Var> = order.iter().filter(|v| m.contains_key(v)).collect();
                keys.extend(m.keys().filter(|k| !order.contains(k)));
                Some(keys.iter().map(|k| (k.to_string(), m[*k].to_string())).collect())
            }
        }
    }
}

impl<E: fmt::Display> fmt::Display for AbstractValue<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_ordered(&[]))
    }
}

impl<E: Clone> Rename for AbstractValue<E> {
    fn rename(&self, r: &Renaming) -> Self {
        match self {
            AbstractValue::Bottom => AbstractValue::Bottom,
            AbstractValue::Env(m) => AbstractValue::Env(m.iter().map(|(k, v)| (r.apply_var(k), v.clone())).collect()),
        }
    }
}

/// Name of a shipped domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DomainKind {
    Sign,
    Intervals,
}

impl DomainKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DomainKind::Sign => "sign",
            DomainKind::Intervals => "intervals",
        }
    }
}

impl FromStr for DomainKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sign" | "signs" => Ok(DomainKind::Sign),
            "intervals" | "interval" => Ok(DomainKind::Intervals),
            other => Err(format!("unknown domain `{other}` (expected `sign` or `intervals`)")),
        }
    }
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub type Value<D> = AbstractValue<<D as Domain>::Elem>;

pub trait Domain {
    type Elem: Clone + Eq + std::hash::Hash + fmt::Debug + fmt::Display;

    fn name(&self) -> &'static str;
    fn top(&self) -> Self::Elem;
    fn bottom(&self) -> Self::Elem;
    fn leq_elem(&self, a: &Self::Elem, b: &Self::Elem) -> bool;
    fn meet_elem(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn join_elem(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    /// `old ∇ new`, called with `old ⊑ new`.
    fn widen_elem(&self, old: &Self::Elem, new: &Self::Elem) -> Self::Elem;

    /// Smallest interval containing the integers described by `e`.
    fn hull(&self, e: &Self::Elem) -> Itv;
    /// Smallest element whose concretization contains `i`.
    fn abstract_over(&self, i: &Itv) -> Self::Elem;
    /// An element whose concretization is contained in `i`.
    fn abstract_under(&self, i: &Itv) -> Self::Elem;

    fn is_bottom_elem(&self, e: &Self::Elem) -> bool {
        *e == self.bottom()
    }

    /// Abstraction of a single concrete value; `None` is an unbound variable.
    fn singleton(&self, v: Option<i64>) -> Self::Elem {
        match v {
            None => self.top(),
            Some(n) => self.abstract_over(&Itv::point(n)),
        }
    }

    /// Membership of a concrete value in the concretization of `e`.
    fn contains(&self, e: &Self::Elem, v: Option<i64>) -> bool {
        self.leq_elem(&self.singleton(v), e)
    }

    // -- stores ------------------------------------------------------------

    /// Builds a value from a map, collapsing to bottom if any entry is bottom.
    fn value(&self, m: BTreeMap<Var, Self::Elem>) -> Value<Self> {
        if m.values().any(|e| self.is_bottom_elem(e)) {
            AbstractValue::Bottom
        } else {
            AbstractValue::Env(m)
        }
    }

    fn top_value(&self, vars: &[Var]) -> Value<Self> {
        AbstractValue::Env(vars.iter().map(|v| (v.clone(), self.top())).collect())
    }

    fn leq(&self, a: &Value<Self>, b: &Value<Self>) -> bool {
        match (a, b) {
            (AbstractValue::Bottom, _) => true,
            (_, AbstractValue::Bottom) => false,
            (AbstractValue::Env(x), AbstractValue::Env(y)) => {
                assert_same_vars(x, y);
                x.iter().all(|(k, e)| self.leq_elem(e, &y[k]))
            }
        }
    }

    fn meet(&self, a: &Value<Self>, b: &Value<Self>) -> Value<Self> {
        match (a, b) {
            (AbstractValue::Env(x), AbstractValue::Env(y)) => {
                assert_same_vars(x, y);
                self.value(x.iter().map(|(k, e)| (k.clone(), self.meet_elem(e, &y[k]))).collect())
            }
            _ => AbstractValue::Bottom,
        }
    }

    fn join(&self, a: &Value<Self>, b: &Value<Self>) -> Value<Self> {
        match (a, b) {
            (AbstractValue::Bottom, v) | (v, AbstractValue::Bottom) => v.clone(),
            (AbstractValue::Env(x), AbstractValue::Env(y)) => {
                assert_same_vars(x, y);
                AbstractValue::Env(x.iter().map(|(k, e)| (k.clone(), self.join_elem(e, &y[k]))).collect())
            }
        }
    }

    fn widen(&self, old: &Value<Self>, new: &Value<Self>) -> Value<Self> {
        match (old, new) {
            (AbstractValue::Bottom, v) | (v, AbstractValue::Bottom) => v.clone(),
            (AbstractValue::Env(x), AbstractValue::Env(y)) => {
                assert_same_vars(x, y);
                AbstractValue::Env(x.iter().map(|(k, e)| (k.clone(), self.widen_elem(e, &y[k]))).collect())
            }
        }
    }

    // -- analysis primitives -------------------------------------------------

    /// Abstract parameter passing from `goal` (described by `call`) into a
    /// clause with head `head`. Variables not in the head start at top.
    fn abs_call(&self, goal: &Atom, call: &Value<Self>, head: &Atom, clause_vars: &[Var]) -> Value<Self> {
        let AbstractValue::Env(c) = call else {
            return AbstractValue::Bottom;
        };
        let r = Renaming::between(goal, head).expect("abs_call: goal and head must be normalized atoms of one predicate");
        let mut env: BTreeMap<Var, Self::Elem> = clause_vars.iter().map(|v| (v.clone(), self.top())).collect();
        for (g, h) in r.iter() {
            env.insert(h.clone(), c.get(g).cloned().unwrap_or_else(|| self.top()));
        }
        self.value(env)
    }

    /// Abstract return: projects `lt` onto the head and renames it to `goal`.
    fn abs_proceed(&self, goal: &Atom, head: &Atom, lt: &Value<Self>) -> Value<Self> {
        let AbstractValue::Env(t) = lt else {
            return AbstractValue::Bottom;
        };
        let r = Renaming::between(head, goal).expect("abs_proceed: goal and head must be normalized atoms of one predicate");
        AbstractValue::Env(r.iter().map(|(h, g)| (g.clone(), t[h].clone())).collect())
    }

    fn abs_project(&self, vars: &[Var], lt: &Value<Self>) -> Value<Self> {
        match lt {
            AbstractValue::Bottom => AbstractValue::Bottom,
            AbstractValue::Env(t) => AbstractValue::Env(
                vars.iter()
                    .map(|v| (v.clone(), t.get(v).cloned().unwrap_or_else(|| panic!("abs_project: {v} not in store"))))
                    .collect(),
            ),
        }
    }

    /// Propagates the success `ls` of a literal (over its variables) into the
    /// clause store `lt`.
    fn abs_extend(&self, ls: &Value<Self>, lt: &Value<Self>) -> Value<Self> {
        match (ls, lt) {
            (AbstractValue::Env(s), AbstractValue::Env(t)) => {
                let mut out = t.clone();
                for (k, e) in s {
                    let cur = out.get(k).unwrap_or_else(|| panic!("abs_extend: {k} not in store"));
                    let m = self.meet_elem(cur, e);
                    out.insert(k.clone(), m);
                }
                self.value(out)
            }
            _ => AbstractValue::Bottom,
        }
    }

    /// Reuses an old value that already covers `new`; otherwise joins, and
    /// widens the join when `widen` is set.
    fn abs_generalize(&self, new: &Value<Self>, olds: &[Value<Self>], widen: bool) -> Value<Self> {
        if olds.is_empty() {
            return new.clone();
        }
        if let Some(o) = olds.iter().find(|o| self.leq(new, o)) {
            return o.clone();
        }
        let j = olds.iter().fold(AbstractValue::Bottom, |acc, o| self.join(&acc, o));
        let jn = self.join(&j, new);
        if widen {
            self.widen(&j, &jn)
        } else {
            jn
        }
    }

    /// Interval evaluation of an arithmetic expression in a store.
    fn eval(&self, e: &Expr, env: &BTreeMap<Var, Self::Elem>) -> Itv {
        match e {
            Expr::Var(v) => env.get(v).map(|x| self.hull(x)).unwrap_or(Itv::FULL),
            Expr::Int(n) => Itv::point(*n),
            Expr::Neg(a) => self.eval(a, env).neg(),
            Expr::Bin(op, a, b) => {
                let (x, y) = (self.eval(a, env), self.eval(b, env));
                match op {
                    ArithOp::Add => x.add(&y),
                    ArithOp::Sub => x.sub(&y),
                    ArithOp::Mul => x.mul(&y),
                }
            }
            Expr::Opaque(_) => Itv::FULL,
        }
    }

    /// Transfer function of a builtin, meet-refined into `lt`.
    fn transfer_builtin(&self, b: &Builtin, lt: &Value<Self>) -> Value<Self> {
        let AbstractValue::Env(t) = lt else {
            return AbstractValue::Bottom;
        };
        let mut env = t.clone();
        let refine = |env: &mut BTreeMap<Var, Self::Elem>, v: &Var, i: &Itv| {
            let cur = env.get(v).cloned().unwrap_or_else(|| self.top());
            env.insert(v.clone(), self.meet_elem(&cur, &self.abstract_over(i)));
        };
        match b {
            Builtin::Is(lhs, e) => {
                let val = self.eval(e, &env);
                match lhs {
                    Term::Var(x) => refine(&mut env, x, &val),
                    Term::Int(c) if !val.contains(*c) => return AbstractValue::Bottom,
                    _ => {}
                }
            }
            Builtin::Unify(a, c) => match (a, c) {
                (Term::Var(x), Term::Var(y)) => {
                    let top = self.top();
                    let m = self.meet_elem(env.get(x).unwrap_or(&top), env.get(y).unwrap_or(&top));
                    env.insert(x.clone(), m.clone());
                    env.insert(y.clone(), m);
                }
                (Term::Var(x), Term::Int(n)) | (Term::Int(n), Term::Var(x)) => refine(&mut env, x, &Itv::point(*n)),
                (Term::Int(m), Term::Int(n)) if m != n => return AbstractValue::Bottom,
                _ => {}
            },
            Builtin::Compare(op, l, r) => {
                let (li, ri) = Itv::refine_cmp(*op, &self.eval(l, &env), &self.eval(r, &env));
                if li.is_empty() {
                    return AbstractValue::Bottom;
                }
                if let Expr::Var(x) = l {
                    refine(&mut env, x, &li);
                }
                if let Expr::Var(y) = r {
                    refine(&mut env, y, &ri);
                }
            }
            Builtin::Cut | Builtin::True => {}
        }
        self.value(env)
    }

    /// Over-approximation of the trivial success set of a property literal,
    /// as a value over `scope`.
    fn prop_over(&self, lit: &PropLit, scope: &[Var]) -> Value<Self> {
        prop_bound(self, lit, scope, false)
    }

    /// Under-approximation of the trivial success set of a property literal.
    fn prop_under(&self, lit: &PropLit, scope: &[Var]) -> Value<Self> {
        prop_bound(self, lit, scope, true)
    }
}

fn assert_same_vars<E>(x: &BTreeMap<Var, E>, y: &BTreeMap<Var, E>) {
    assert!(
        x.len() == y.len() && x.keys().zip(y.keys()).all(|(a, b)| a == b),
        "abstract values over different variable sets: {:?} vs {:?}",
        x.keys().collect::<Vec<_>>(),
        y.keys().collect::<Vec<_>>()
    );
}

fn prop_bound<D: Domain + ?Sized>(d: &D, lit: &PropLit, scope: &[Var], under: bool) -> Value<D> {
    // Under-approximations never admit unbound variables.
    let abs = |i: &Itv| {
        if !under {
            return d.abstract_over(i);
        }
        let e = d.abstract_under(i);
        if d.contains(&e, None) {
            d.bottom()
        } else {
            e
        }
    };
    let mut env: BTreeMap<Var, D::Elem> = scope.iter().map(|v| (v.clone(), d.top())).collect();
    let mut missing = false;
    let mut set = |env: &mut BTreeMap<Var, D::Elem>, v: &Var, e: D::Elem| match env.get(v) {
        Some(cur) => {
            let m = d.meet_elem(cur, &e);
            env.insert(v.clone(), m);
        }
        None => missing = true,
    };
    match lit {
        PropLit::Int(v) => set(&mut env, v, abs(&Itv::FULL)),
        PropLit::Nat(v) => set(&mut env, v, abs(&Itv::at_least(0))),
        PropLit::Even(v) => {
            let e = if under { d.bottom() } else { d.abstract_over(&Itv::FULL) };
            set(&mut env, v, e)
        }
        PropLit::Rel(rel, a, b) => {
            let itv = |rel: PropRel, c: i64| match rel {
                PropRel::Cmp(op) => Itv::satisfying(op, c),
                PropRel::Unify => Itv::point(c),
            };
            let flip = |rel: PropRel| match rel {
                PropRel::Cmp(op) => PropRel::Cmp(op.flip()),
                PropRel::Unify => PropRel::Unify,
            };
            match (a, b) {
                (Operand::Var(x), Operand::Int(c)) => set(&mut env, x, abs(&itv(*rel, *c))),
                (Operand::Int(c), Operand::Var(x)) => set(&mut env, x, abs(&itv(flip(*rel), *c))),
                (Operand::Var(x), Operand::Var(y)) => {
                    if under {
                        return AbstractValue::Bottom;
                    }
                    set(&mut env, x, d.abstract_over(&Itv::FULL));
                    set(&mut env, y, d.abstract_over(&Itv::FULL));
                }
                (Operand::Int(_), Operand::Int(_)) => {
                    if !lit.holds(|_| None) {
                        return AbstractValue::Bottom;
                    }
                }
            }
        }
    }
    if missing && under {
        return AbstractValue::Bottom;
    }
    d.value(env)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Var {
        Var::new(s)
    }

    fn sv(pairs: &[(&str, Sign)]) -> AbstractValue<Sign> {
        AbstractValue::Env(pairs.iter().map(|(k, e)| (v(k), *e)).collect())
    }

    #[test]
    fn abs_call_binds_head_and_tops_locals() {
        let d = SignDomain;
        let goal = Atom::from_vars("p", &[v("X")]);
        let head = Atom::from_vars("p", &[v("A")]);
        let out = d.abs_call(&goal, &sv(&[("X", Sign::Pos)]), &head, &[v("A"), v("B")]);
        assert_eq!(out, sv(&[("A", Sign::Pos), ("B", Sign::Top)]));
        assert!(d.abs_call(&goal, &AbstractValue::Bottom, &head, &[v("A")]).is_bottom());
    }

    #[test]
    fn abs_proceed_renames_back() {
        let d = SignDomain;
        let goal = Atom::from_vars("fact", &[v("X"), v("R")]);
        let head = Atom::from_vars("fact", &[v("N"), v("R1")]);
        let lt = sv(&[("N", Sign::Zero), ("R1", Sign::Pos), ("T", Sign::Int)]);
        assert_eq!(d.abs_proceed(&goal, &head, &lt), sv(&[("X", Sign::Zero), ("R", Sign::Pos)]));
    }

    #[test]
    fn project_and_extend() {
        let d = SignDomain;
        let lt = sv(&[("N", Sign::Pos), ("N1", Sign::Int), ("R1", Sign::Top)]);
        let lc = d.abs_project(&[v("N1"), v("R1")], &lt);
        assert_eq!(lc, sv(&[("N1", Sign::Int), ("R1", Sign::Top)]));
        assert_eq!(d.abs_extend(&lc, &lt), lt);
        assert!(d.abs_extend(&AbstractValue::Bottom, &lt).is_bottom());
    }

    #[test]
    fn fig3_builtins() {
        let d = SignDomain;
        let lt = sv(&[("N", Sign::Top), ("N1", Sign::Top)]);
        let gt = crate::syntax::parse_program("t(N,N1) :- N > 0, N1 is N - 1.").unwrap();
        let body: Vec<Builtin> = gt.clauses[0]
            .body
            .iter()
            .map(|l| match l {
                crate::syntax::Literal::Builtin(b) => b.clone(),
                _ => unreachable!(),
            })
            .collect();
        let after_gt = d.transfer_builtin(&body[0], &lt);
        assert_eq!(after_gt, sv(&[("N", Sign::Pos), ("N1", Sign::Top)]));
        let after_is = d.transfer_builtin(&body[1], &after_gt);
        assert_eq!(after_is, sv(&[("N", Sign::Pos), ("N1", Sign::Int)]));
    }

    #[test]
    fn generalize_reuses_and_joins() {
        let d = SignDomain;
        let old = sv(&[("X", Sign::Zero), ("R", Sign::Pos)]);
        let new = sv(&[("X", Sign::Pos), ("R", Sign::Pos)]);
        assert_eq!(d.abs_generalize(&new, &[], true), new);
        assert_eq!(d.abs_generalize(&old, &[new.clone()], true), sv(&[("X", Sign::Int), ("R", Sign::Pos)]));
        assert_eq!(d.abs_generalize(&new, &[old], false), sv(&[("X", Sign::Int), ("R", Sign::Pos)]));
        let top = sv(&[("X", Sign::Top), ("R", Sign::Top)]);
        assert_eq!(d.abs_generalize(&new, &[top.clone()], false), top);
    }

    #[test]
    fn property_tables() {
        let sd = SignDomain;
        let id = IntervalDomain;
        let p = v("P");
        let ge0 = PropLit::Rel(PropRel::Cmp(crate::syntax::CmpOp::Ge), Operand::Var(p.clone()), Operand::Int(0));
        let scope = [p.clone()];
        assert_eq!(id.prop_over(&ge0, &scope).get(&p), Some(&Itv::at_least(0)));
        assert_eq!(id.prop_under(&ge0, &scope).get(&p), Some(&Itv::at_least(0)));
        assert_eq!(sd.prop_over(&ge0, &scope).get(&p), Some(&Sign::Int));
        assert_eq!(sd.prop_under(&ge0, &scope).get(&p), Some(&Sign::Pos));
        let even = PropLit::Even(p.clone());
        assert!(id.prop_under(&even, &scope).is_bottom());
        assert_eq!(id.prop_over(&even, &scope).get(&p), Some(&Itv::FULL));
        let eq0 = PropLit::Rel(PropRel::Unify, Operand::Var(p.clone()), Operand::Int(0));
        let eq3 = PropLit::Rel(PropRel::Unify, Operand::Var(p.clone()), Operand::Int(3));
        assert_eq!(sd.prop_under(&eq0, &scope).get(&p), Some(&Sign::Zero));
        assert!(sd.prop_under(&eq3, &scope).is_bottom());
        assert_eq!(id.prop_under(&eq3, &scope).get(&p), Some(&Itv::point(3)));
    }

    #[test]
    fn membership_matches_singleton_order() {
        let d = SignDomain;
        assert!(d.contains(&Sign::Top, None));
        assert!(!d.contains(&Sign::Int, None));
        assert!(d.contains(&Sign::Int, Some(-3)));
        assert!(d.contains(&Sign::Pos, Some(3)));
        assert!(!d.contains(&Sign::Pos, Some(0)));
    }

    #[test]
    fn display_in_atom_order() {
        let val = sv(&[("X", Sign::Top), ("R", Sign::Top)]);
        assert_eq!(val.display_ordered(&[v("X"), v("R")]), "(X/⊤, R/⊤)");
        assert_eq!(AbstractValue::<Sign>::Bottom.display_ordered(&[]), "⊥");
    }
}
