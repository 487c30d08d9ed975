use std::collections::BTreeSet;

use super::{Atom, Builtin, Clause, Conjunction, Literal, Program, SourceAssertion, Term, Var};

struct Fresh {
    used: BTreeSet<Var>,
    next: usize,
}

impl Fresh {
    fn new(used: impl IntoIterator<Item = Var>) -> Self {
        Fresh { used: used.into_iter().collect(), next: 0 }
    }

    fn var(&mut self) -> Var {
        loop {
            let v = Var(format!("_{}", self.next));
            self.next += 1;
            if self.used.insert(v.clone()) {
                return v;
            }
        }
    }
}

/// Replaces repeated variables and non-variable arguments by fresh
/// variables, emitting `Fresh = Arg` equalities in their place.
fn normalize_atom(atom: &Atom, fresh: &mut Fresh, eqs: &mut Vec<Literal>) -> Atom {
    let mut seen: Vec<&Var> = Vec::new();
    let args = atom
        .args
        .iter()
        .map(|arg| match arg {
            Term::Var(v) if !seen.contains(&v) => {
                seen.push(v);
                arg.clone()
            }
            other => {
                let f = fresh.var();
                eqs.push(Literal::Builtin(Builtin::Unify(Term::Var(f.clone()), other.clone())));
                Term::Var(f)
            }
        })
        .collect();
    Atom { pred: atom.pred.clone(), args }
}

fn normalize_clause(c: &Clause) -> Clause {
    let mut fresh = Fresh::new(c.vars());
    let mut body = Vec::with_capacity(c.body.len());
    let head = normalize_atom(&c.head, &mut fresh, &mut body);
    for lit in &c.body {
        match lit {
            Literal::Call(a) if !a.is_normalized() => {
                let a = normalize_atom(a, &mut fresh, &mut body);
                body.push(Literal::Call(a));
            }
            other => body.push(other.clone()),
        }
    }
    Clause { head, body, span: c.span }
}

/// Puts every clause head and call atom in normal form (distinct variables
/// as arguments). Idempotent.
pub fn normalize(p: &Program) -> Program {
    let mut out = p.clone();
    out.clauses = p.clauses.iter().map(normalize_clause).collect();
    out.refresh_warnings();
    out
}

/// Replaces every program-point assertion `status(Cond)` by a call to a
/// fresh auxiliary predicate defined by a single fact and carrying the
/// assertion `:- status pred aux(Vars) : Cond.`
pub fn lower_pp_assertions(p: &Program) -> Program {
    let mut names: BTreeSet<String> = p.predicates().into_iter().map(|k| k.name).collect();
    let mut counter = 0usize;
    let mut out = p.clone();
    let mut aux_clauses = Vec::new();
    for clause in &mut out.clauses {
        let mut body = Vec::with_capacity(clause.body.len());
        for lit in clause.body.drain(..) {
            let Literal::PpAssert(status, cond) = lit else {
                body.push(lit);
                continue;
            };
            let name = loop {
                counter += 1;
                let cand = format!("assrt_aux_{counter}");
                if names.insert(cand.clone()) {
                    break cand;
                }
            };
            let head = Atom::from_vars(name, &cond.vars());
            body.push(Literal::Call(head.clone()));
            aux_clauses.push(Clause { head: head.clone(), body: Vec::new(), span: clause.span });
            out.assertions.push(SourceAssertion {
                status,
                head,
                pre: cond,
                post: Conjunction::default(),
                span: clause.span,
            });
        }
        clause.body = body;
    }
    out.clauses.extend(aux_clauses);
    out.refresh_warnings();
    out
}
