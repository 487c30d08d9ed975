use std::collections::{BTreeMap, BTreeSet};

use super::{Atom, Builtin, Conjunction, Expr, Literal, Operand, PropLit, PropertyFormula, Term, Var};

/// An injective variable-to-variable substitution.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Renaming {
    map: BTreeMap<Var, Var>,
}

impl Renaming {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn identity(vars: &[Var]) -> Self {
        let mut r = Renaming::new();
        for v in vars {
            r.map.insert(v.clone(), v.clone());
        }
        r
    }

    /// Positional renaming between two normalized atoms of the same
    /// predicate, mapping `from`'s arguments onto `to`'s.
    pub fn between(from: &Atom, to: &Atom) -> Option<Renaming> {
        if from.key() != to.key() || !from.is_normalized() || !to.is_normalized() {
            return None;
        }
        let mut r = Renaming::new();
        for (a, b) in from.args.iter().zip(&to.args) {
            r.insert(a.as_var()?.clone(), b.as_var()?.clone())?;
        }
        Some(r)
    }

    /// Adds `from -> to`. Returns `None` (leaving the map untouched) if the
    /// pair would break functionality or injectivity.
    pub fn insert(&mut self, from: Var, to: Var) -> Option<()> {
        match self.map.get(&from) {
            Some(existing) if *existing == to => return Some(()),
            Some(_) => return None,
            None => {}
        }
        if self.map.values().any(|t| *t == to) {
            return None;
        }
        self.map.insert(from, to);
        Some(())
    }

    pub fn get(&self, v: &Var) -> Option<&Var> {
        self.map.get(v)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Var)> {
        self.map.iter()
    }

    pub fn is_injective(&self) -> bool {
        let image: BTreeSet<&Var> = self.map.values().collect();
        image.len() == self.map.len()
    }

    pub fn inverse(&self) -> Renaming {
        Renaming { map: self.map.iter().map(|(a, b)| (b.clone(), a.clone())).collect() }
    }

    /// Extends the renaming to every variable in `vars`. Unmapped variables
    /// keep their name unless it is already taken in the image, in which case
    /// they get a fresh one.
    pub fn extended_for(&self, vars: &[Var]) -> Renaming {
        let mut out = self.clone();
        let mut taken: BTreeSet<Var> = out.map.values().cloned().collect();
        taken.extend(vars.iter().cloned());
        taken.extend(out.map.keys().cloned());
        let mut fresh = 0usize;
        for v in vars {
            if out.map.contains_key(v) {
                continue;
            }
            let target = if out.map.values().any(|t| t == v) {
                loop {
                    fresh += 1;
                    let cand = Var(format!("_R{fresh}"));
                    if !taken.contains(&cand) {
                        break cand;
                    }
                }
            } else {
                v.clone()
            };
            taken.insert(target.clone());
            out.map.insert(v.clone(), target);
        }
        out
    }

    /// Applies the renaming to a single variable; unmapped variables are kept.
    pub fn apply_var(&self, v: &Var) -> Var {
        self.map.get(v).cloned().unwrap_or_else(|| v.clone())
    }
}

/// Structures whose variables can be renamed.
pub trait Rename {
    fn rename(&self, r: &Renaming) -> Self;
}

impl Rename for Var {
    fn rename(&self, r: &Renaming) -> Self {
        r.apply_var(self)
    }
}

impl Rename for Term {
    fn rename(&self, r: &Renaming) -> Self {
        match self {
            Term::Var(v) => Term::Var(r.apply_var(v)),
            Term::Int(n) => Term::Int(*n),
            Term::Compound(f, args) => Term::Compound(f.clone(), args.iter().map(|a| a.rename(r)).collect()),
        }
    }
}

impl Rename for Atom {
    fn rename(&self, r: &Renaming) -> Self {
        Atom { pred: self.pred.clone(), args: self.args.iter().map(|a| a.rename(r)).collect() }
    }
}

impl Rename for Expr {
    fn rename(&self, r: &Renaming) -> Self {
        match self {
            Expr::Var(v) => Expr::Var(r.apply_var(v)),
            Expr::Int(n) => Expr::Int(*n),
            Expr::Neg(e) => Expr::Neg(Box::new(e.rename(r))),
            Expr::Bin(op, a, b) => Expr::Bin(*op, Box::new(a.rename(r)), Box::new(b.rename(r))),
            Expr::Opaque(t) => Expr::Opaque(t.rename(r)),
        }
    }
}

impl Rename for Builtin {
    fn rename(&self, r: &Renaming) -> Self {
        match self {
            Builtin::Is(t, e) => Builtin::Is(t.rename(r), e.rename(r)),
            Builtin::Unify(a, b) => Builtin::Unify(a.rename(r), b.rename(r)),
            Builtin::Compare(op, a, b) => Builtin::Compare(*op, a.rename(r), b.rename(r)),
            Builtin::Cut => Builtin::Cut,
            Builtin::True => Builtin::True,
        }
    }
}

impl Rename for Operand {
    fn rename(&self, r: &Renaming) -> Self {
        match self {
            Operand::Var(v) => Operand::Var(r.apply_var(v)),
            Operand::Int(n) => Operand::Int(*n),
        }
    }
}

impl Rename for PropLit {
    fn rename(&self, r: &Renaming) -> Self {
        match self {
            PropLit::Int(v) => PropLit::Int(r.apply_var(v)),
            PropLit::Nat(v) => PropLit::Nat(r.apply_var(v)),
            PropLit::Even(v) => PropLit::Even(r.apply_var(v)),
            PropLit::Rel(rel, a, b) => PropLit::Rel(*rel, a.rename(r), b.rename(r)),
        }
    }
}

impl Rename for Conjunction {
    fn rename(&self, r: &Renaming) -> Self {
        Conjunction(self.0.iter().map(|l| l.rename(r)).collect())
    }
}

impl Rename for PropertyFormula {
    fn rename(&self, r: &Renaming) -> Self {
        PropertyFormula { dnf: self.dnf.iter().map(|c| c.rename(r)).collect() }
    }
}

impl Rename for Literal {
    fn rename(&self, r: &Renaming) -> Self {
        match self {
            Literal::Call(a) => Literal::Call(a.rename(r)),
            Literal::Builtin(b) => Literal::Builtin(b.rename(r)),
            Literal::PpAssert(s, c) => Literal::PpAssert(*s, c.rename(r)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Var {
        Var::new(s)
    }

    fn pow() -> Atom {
        Atom::from_vars("pow", &[v("X"), v("N"), v("P")])
    }

    #[test]
    fn partial_renaming_is_extended() {
        let mut r = Renaming::new();
        r.insert(v("X"), v("A")).unwrap();
        let r = r.extended_for(&pow().vars());
        assert_eq!(pow().rename(&r).to_string(), "pow(A,N,P)");
    }

    #[test]
    fn extension_avoids_captured_names() {
        let mut r = Renaming::new();
        r.insert(v("X"), v("N")).unwrap();
        let r = r.extended_for(&pow().vars());
        assert!(r.is_injective());
        let renamed = pow().rename(&r);
        assert!(renamed.is_normalized());
        assert_eq!(renamed.args[0], Term::Var(v("N")));
    }

    #[test]
    fn identity_leaves_atoms_alone() {
        let r = Renaming::identity(&pow().vars());
        assert_eq!(pow().rename(&r), pow());
    }

    #[test]
    fn insert_rejects_non_injective_pairs() {
        let mut r = Renaming::new();
        r.insert(v("X"), v("A")).unwrap();
        assert!(r.insert(v("Y"), v("A")).is_none());
        assert!(r.insert(v("X"), v("B")).is_none());
        assert_eq!(r.len(), 1);
    }

    #[test]
    fn between_maps_positionally() {
        let r = Renaming::between(&pow(), &Atom::from_vars("pow", &[v("A"), v("B"), v("C")])).unwrap();
        assert_eq!(r.apply_var(&v("N")), v("B"));
        assert!(Renaming::between(&pow(), &Atom::from_vars("pow", &[v("A"), v("B")])).is_none());
    }
}
