//! Depth-bounded concrete interpreter over the integer fragment.
//!
//! Goals are solved left to right with full backtracking. Builtins evaluate
//! only on bound inputs; a branch that needs an unbound value, a compound
//! term or an undefined predicate is abandoned and flagged. The trace lists
//! every call and every success with the argument values at that point.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::RangeInclusive;
use std::rc::Rc;

use crate::analyzer::{AnalysisTable, Query};
use crate::assertions::{ts_over, AssertionCondition, ConditionKind};
use crate::domain::{AbstractValue, Domain};
use crate::syntax::{ArithOp, Atom, Builtin, Clause, EntryDecl, Expr, Literal, PredKey, Program, PropertyFormula, Term, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleConfig {
    /// Maximum nesting of clause expansions; the initial goal is at depth 1.
    pub depth: usize,
    /// Resolution steps per run before giving up.
    pub max_steps: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { depth: 8, max_steps: 200_000 }
    }
}

/// Argument values: `None` for an unbound variable.
pub type Args = Vec<Option<i64>>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TraceEvent {
    Call { pred: PredKey, args: Args, depth: usize },
    Success { pred: PredKey, call_args: Args, answer_args: Args, depth: usize },
}

impl TraceEvent {
    pub fn pred(&self) -> &PredKey {
        match self {
            TraceEvent::Call { pred, .. } | TraceEvent::Success { pred, .. } => pred,
        }
    }
}

fn show_args(pred: &PredKey, args: &Args) -> String {
    let parts: Vec<String> = args.iter().map(|a| a.map_or("_".to_string(), |n| n.to_string())).collect();
    format!("{}({})", pred.name, parts.join(","))
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceEvent::Call { pred, args, depth } => write!(f, "{depth:>2} call {}", show_args(pred, args)),
            TraceEvent::Success { pred, call_args, answer_args, depth } => {
                write!(f, "{depth:>2} exit {} -> {}", show_args(pred, call_args), show_args(pred, answer_args))
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OracleRun {
    pub answers: Vec<Args>,
    pub trace: Vec<TraceEvent>,
    pub depth_exhausted: bool,
    /// Some builtin met an unbound input.
    pub insufficiently_instantiated: bool,
    /// Compound terms, overflow or calls to predicates without clauses.
    pub unsupported: bool,
    pub step_limit_hit: bool,
}

#[derive(Clone, Copy, Debug)]
enum Cell {
    Unbound,
    Int(i64),
    Ref(usize),
}

/// Variables of a clause instance live in consecutive cells from `base`.
#[derive(Clone)]
struct Env {
    vars: Rc<Vec<Var>>,
    base: usize,
}

impl Env {
    fn cell(&self, v: &Var) -> usize {
        self.base + self.vars.iter().position(|x| x == v).expect("clause variable")
    }
}

enum Goal<'p> {
    Lit(&'p Literal, Env),
    Exit { pred: PredKey, call_args: Args, cells: Vec<usize> },
}

struct Cont<'p> {
    goal: Goal<'p>,
    depth: usize,
    next: Option<Rc<Cont<'p>>>,
}

enum Abort {
    Unbound,
    Unsupported,
}

struct Machine<'p> {
    clauses: HashMap<PredKey, Rc<Vec<(&'p Clause, Rc<Vec<Var>>)>>>,
    cfg: OracleConfig,
    cells: Vec<Cell>,
    trail: Vec<(usize, Cell)>,
    steps: usize,
    halted: bool,
    top: Vec<usize>,
    run: OracleRun,
}

impl<'p> Machine<'p> {
    fn deref(&self, mut i: usize) -> usize {
        while let Cell::Ref(j) = self.cells[i] {
            i = j;
        }
        i
    }

    fn read(&self, i: usize) -> Option<i64> {
        match self.cells[self.deref(i)] {
            Cell::Int(n) => Some(n),
            _ => None,
        }
    }

    fn bind(&mut self, i: usize, c: Cell) {
        self.trail.push((i, self.cells[i]));
        self.cells[i] = c;
    }

    fn undo(&mut self, trail_mark: usize, cell_mark: usize) {
        while self.trail.len() > trail_mark {
            let (i, c) = self.trail.pop().unwrap();
            self.cells[i] = c;
        }
        self.cells.truncate(cell_mark);
    }

    fn fresh(&mut self, c: Cell) -> usize {
        self.cells.push(c);
        self.cells.len() - 1
    }

    fn unify_cells(&mut self, a: usize, b: usize) -> bool {
        let (a, b) = (self.deref(a), self.deref(b));
        if a == b {
            return true;
        }
        match (self.cells[a], self.cells[b]) {
            (Cell::Unbound, _) => {
                self.bind(a, Cell::Ref(b));
                true
            }
            (_, Cell::Unbound) => {
                self.bind(b, Cell::Ref(a));
                true
            }
            (Cell::Int(x), Cell::Int(y)) => x == y,
            _ => unreachable!("dereferenced cells are never references"),
        }
    }

    fn term_cell(&mut self, t: &Term, env: &Env) -> Result<usize, Abort> {
        match t {
            Term::Var(v) => Ok(env.cell(v)),
            Term::Int(n) => Ok(self.fresh(Cell::Int(*n))),
            Term::Compound(..) => Err(Abort::Unsupported),
        }
    }

    fn eval(&self, e: &Expr, env: &Env) -> Result<i64, Abort> {
        match e {
            Expr::Var(v) => self.read(env.cell(v)).ok_or(Abort::Unbound),
            Expr::Int(n) => Ok(*n),
            Expr::Neg(a) => self.eval(a, env)?.checked_neg().ok_or(Abort::Unsupported),
            Expr::Bin(op, a, b) => {
                let (x, y) = (self.eval(a, env)?, self.eval(b, env)?);
                match op {
                    ArithOp::Add => x.checked_add(y),
                    ArithOp::Sub => x.checked_sub(y),
                    ArithOp::Mul => x.checked_mul(y),
                }
                .ok_or(Abort::Unsupported)
            }
            Expr::Opaque(_) => Err(Abort::Unsupported),
        }
    }

    fn builtin(&mut self, b: &Builtin, env: &Env) -> Result<bool, Abort> {
        match b {
            Builtin::Is(lhs, e) => {
                let n = self.eval(e, env)?;
                let l = self.term_cell(lhs, env)?;
                let r = self.fresh(Cell::Int(n));
                Ok(self.unify_cells(l, r))
            }
            Builtin::Unify(a, c) => {
                let (x, y) = (self.term_cell(a, env)?, self.term_cell(c, env)?);
                Ok(self.unify_cells(x, y))
            }
            Builtin::Compare(op, l, r) => Ok(op.holds(self.eval(l, env)?, self.eval(r, env)?)),
            Builtin::Cut | Builtin::True => Ok(true),
        }
    }

    fn note(&mut self, a: Abort) {
        match a {
            Abort::Unbound => self.run.insufficiently_instantiated = true,
            Abort::Unsupported => self.run.unsupported = true,
        }
    }

    fn solve(&mut self, k: Option<Rc<Cont<'p>>>) {
        if self.halted {
            return;
        }
        self.steps += 1;
        if self.steps > self.cfg.max_steps {
            self.halted = true;
            self.run.step_limit_hit = true;
            return;
        }
        let Some(c) = k else {
            let answer = self.top.iter().map(|&i| self.read(i)).collect();
            self.run.answers.push(answer);
            return;
        };
        let rest = c.next.clone();
        match &c.goal {
            Goal::Exit { pred, call_args, cells } => {
                let answer_args = cells.iter().map(|&i| self.read(i)).collect();
                self.run.trace.push(TraceEvent::Success {
                    pred: pred.clone(),
                    call_args: call_args.clone(),
                    answer_args,
                    depth: c.depth,
                });
                self.solve(rest);
            }
            Goal::Lit(lit, env) => match lit {
                Literal::Builtin(b) => {
                    let (tm, cm) = (self.trail.len(), self.cells.len());
                    match self.builtin(b, env) {
                        Ok(true) => self.solve(rest),
                        Ok(false) => {}
                        Err(a) => self.note(a),
                    }
                    self.undo(tm, cm);
                }
                Literal::PpAssert(..) => self.solve(rest),
                Literal::Call(atom) => self.call(atom, env, c.depth, rest),
            },
        }
    }

    fn call(&mut self, atom: &'p Atom, env: &Env, depth: usize, rest: Option<Rc<Cont<'p>>>) {
        let (tm, cm) = (self.trail.len(), self.cells.len());
        let mut arg_cells = Vec::with_capacity(atom.args.len());
        for t in &atom.args {
            match self.term_cell(t, env) {
                Ok(i) => arg_cells.push(i),
                Err(a) => {
                    self.note(a);
                    self.undo(tm, cm);
                    return;
                }
            }
        }
        self.enter(atom.key(), arg_cells, depth, rest);
        self.undo(tm, cm);
    }

    fn enter(&mut self, key: PredKey, arg_cells: Vec<usize>, depth: usize, rest: Option<Rc<Cont<'p>>>) {
        let call_args: Args = arg_cells.iter().map(|&i| self.read(i)).collect();
        self.run.trace.push(TraceEvent::Call { pred: key.clone(), args: call_args.clone(), depth });
        if depth > self.cfg.depth {
            self.run.depth_exhausted = true;
            return;
        }
        let Some(clauses) = self.clauses.get(&key).cloned() else {
            self.run.unsupported = true;
            return;
        };
        for (cl, vars) in clauses.iter() {
            if self.halted {
                return;
            }
            let (tm, cm) = (self.trail.len(), self.cells.len());
            let env = Env { vars: vars.clone(), base: self.cells.len() };
            self.cells.extend(std::iter::repeat(Cell::Unbound).take(vars.len()));
            let mut ok = true;
            for (t, &a) in cl.head.args.iter().zip(&arg_cells) {
                match self.term_cell(t, &env) {
                    Ok(h) => {
                        if !self.unify_cells(h, a) {
                            ok = false;
                            break;
                        }
                    }
                    Err(e) => {
                        self.note(e);
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                let exit = Cont {
                    goal: Goal::Exit { pred: key.clone(), call_args: call_args.clone(), cells: arg_cells.clone() },
                    depth,
                    next: rest.clone(),
                };
                let mut k = Rc::new(exit);
                for lit in cl.body.iter().rev() {
                    k = Rc::new(Cont { goal: Goal::Lit(lit, env.clone()), depth: depth + 1, next: Some(k) });
                }
                self.solve(Some(k));
            }
            self.undo(tm, cm);
        }
    }
}

/// Solves `goal` with the given variable bindings.
pub fn run(program: &Program, goal: &Atom, bindings: &BTreeMap<Var, i64>, cfg: &OracleConfig) -> OracleRun {
    let mut grouped: HashMap<PredKey, Vec<(&Clause, Rc<Vec<Var>>)>> = HashMap::new();
    for c in &program.clauses {
        grouped.entry(c.head.key()).or_default().push((c, Rc::new(c.vars())));
    }
    let clauses = grouped.into_iter().map(|(k, v)| (k, Rc::new(v))).collect();
    let mut m = Machine {
        clauses,
        cfg: cfg.clone(),
        cells: Vec::new(),
        trail: Vec::new(),
        steps: 0,
        halted: false,
        top: Vec::new(),
        run: OracleRun::default(),
    };
    let vars = goal.vars();
    let env = Env { vars: Rc::new(vars.clone()), base: 0 };
    for v in &vars {
        m.fresh(bindings.get(v).map_or(Cell::Unbound, |n| Cell::Int(*n)));
    }
    let mut top = Vec::new();
    for t in &goal.args {
        match m.term_cell(t, &env) {
            Ok(i) => top.push(i),
            Err(a) => {
                m.note(a);
                return m.run;
            }
        }
    }
    m.top = top.clone();
    m.enter(goal.key(), top, 1, None);
    m.run
}

/// Solves a normalized goal with positional argument values.
pub fn run_args(program: &Program, goal: &Atom, args: &[Option<i64>], cfg: &OracleConfig) -> OracleRun {
    let bindings = goal
        .arg_vars()
        .into_iter()
        .zip(args)
        .filter_map(|(v, a)| a.map(|n| (v, n)))
        .collect();
    run(program, goal, &bindings, cfg)
}

/// Every argument tuple over `{unbound} ∪ range` that lies in the
/// concretization of the query's call description.
pub fn concrete_queries<D: Domain>(d: &D, q: &Query<D::Elem>, range: RangeInclusive<i64>) -> Vec<Args> {
    let AbstractValue::Env(env) = &q.call else {
        return Vec::new();
    };
    let mut out: Vec<Args> = vec![Vec::new()];
    for v in q.atom.arg_vars() {
        let e = env.get(&v).cloned().unwrap_or_else(|| d.top());
        let cands: Vec<Option<i64>> =
            std::iter::once(None).chain(range.clone().map(Some)).filter(|c| d.contains(&e, *c)).collect();
        out = out
            .into_iter()
            .flat_map(|prefix| {
                cands.iter().map(move |c| {
                    let mut p = prefix.clone();
                    p.push(*c);
                    p
                })
            })
            .collect();
    }
    out
}

/// Concrete instances of an entry: argument tuples over `{unbound} ∪ range`
/// that satisfy its precondition.
pub fn entry_instances<D: Domain>(d: &D, entry: &EntryDecl, range: RangeInclusive<i64>) -> Vec<Args> {
    let scope = entry.head.arg_vars();
    let q = Query { atom: entry.head.clone(), call: ts_over(d, &PropertyFormula::conj(entry.pre.clone()), &scope) };
    concrete_queries(d, &q, range)
        .into_iter()
        .filter(|args| entry.pre.0.iter().all(|lit| lit.holds(lookup(&entry.head, args))))
        .collect()
}

/// Runs the oracle on every concrete instance of each entry and merges the
/// traces.
pub fn explore<D: Domain>(
    d: &D,
    program: &Program,
    entries: &[EntryDecl],
    range: RangeInclusive<i64>,
    cfg: &OracleConfig,
) -> OracleRun {
    let mut all = OracleRun::default();
    for e in entries {
        for args in entry_instances(d, e, range.clone()) {
            let r = run_args(program, &e.head, &args, cfg);
            all.answers.extend(r.answers);
            all.trace.extend(r.trace);
            all.depth_exhausted |= r.depth_exhausted;
            all.insufficiently_instantiated |= r.insufficiently_instantiated;
            all.unsupported |= r.unsupported;
            all.step_limit_hit |= r.step_limit_hit;
        }
    }
    all
}

fn covers<D: Domain>(d: &D, atom: &Atom, v: &AbstractValue<D::Elem>, args: &Args) -> bool {
    match v {
        AbstractValue::Bottom => false,
        AbstractValue::Env(m) => {
            atom.arg_vars().iter().zip(args).all(|(var, a)| m.get(var).is_some_and(|e| d.contains(e, *a)))
        }
    }
}

/// Checks that every concrete call is covered by some triple's call and
/// that every answer to a covered call lies in that triple's success.
/// Returns one message per distinct violation.
pub fn validate_coverage<D: Domain>(d: &D, table: &AnalysisTable<D::Elem>, trace: &[TraceEvent]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut push = |s: String| {
        if !out.contains(&s) {
            out.push(s);
        }
    };
    for ev in trace {
        let triples = table.triples_of(ev.pred());
        match ev {
            TraceEvent::Call { pred, args, .. } => {
                if !triples.iter().any(|t| covers(d, &t.atom, &t.call, args)) {
                    push(format!("call {} is not covered by any triple", show_args(pred, args)));
                }
            }
            TraceEvent::Success { pred, call_args, answer_args, .. } => {
                for t in triples.iter().filter(|t| covers(d, &t.atom, &t.call, call_args)) {
                    if !covers(d, &t.atom, &t.success, answer_args) {
                        push(format!(
                            "answer {} to call {} is outside success {} of call {}",
                            show_args(pred, answer_args),
                            show_args(pred, call_args),
                            t.success.display_ordered(&t.atom.arg_vars()),
                            t.call.display_ordered(&t.atom.arg_vars())
                        ));
                    }
                }
            }
        }
    }
    out
}

fn lookup<'a>(head: &'a Atom, args: &'a Args) -> impl Fn(&Var) -> Option<i64> + 'a {
    move |v| head.arg_vars().iter().position(|x| x == v).and_then(|i| args[i])
}

/// Checks a condition against concrete behaviour: calls must satisfy the
/// precondition; answers to calls satisfying the precondition must satisfy
/// the postcondition. Returns one message per violating event.
pub fn verify_condition(cond: &AssertionCondition, trace: &[TraceEvent]) -> Vec<String> {
    let key = cond.key();
    let mut out = Vec::new();
    for ev in trace.iter().filter(|e| *e.pred() == key) {
        match (&cond.kind, ev) {
            (ConditionKind::Calls { pre }, TraceEvent::Call { args, .. }) => {
                let l = lookup(&cond.head, args);
                if !pre.dnf.iter().any(|c| c.0.iter().all(|lit| lit.holds(&l))) {
                    out.push(format!("call {} violates {}", show_args(&key, args), cond));
                }
            }
            (ConditionKind::Success { pre, post }, TraceEvent::Success { call_args, answer_args, .. }) => {
                let lc = lookup(&cond.head, call_args);
                let la = lookup(&cond.head, answer_args);
                if pre.0.iter().all(|lit| lit.holds(&lc)) && !post.0.iter().all(|lit| lit.holds(&la)) {
                    out.push(format!(
                        "answer {} to call {} violates {}",
                        show_args(&key, answer_args),
                        show_args(&key, call_args),
                        cond
                    ));
                }
            }
            _ => {}
        }
    }
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_atom, parse_program};

    const FACT: &str = "fact(0,1).\nfact(N,R) :- N > 0, N1 is N - 1, fact(N1,R1), R is N * R1.";

    #[test]
    fn factorial_of_three() {
        let p = parse_program(FACT).unwrap();
        let r = run_args(&p, &parse_atom("fact(X,R)").unwrap(), &[Some(3), None], &OracleConfig::default());
        assert_eq!(r.answers, vec![vec![Some(3), Some(6)]]);
        let calls: Vec<Args> = r
            .trace
            .iter()
            .filter_map(|e| match e {
                TraceEvent::Call { args, .. } => Some(args.clone()),
                _ => None,
            })
            .collect();
        for n in 0..=2 {
            assert!(calls.contains(&vec![Some(n), None]));
        }
        assert!(!r.depth_exhausted);
    }

    #[test]
    fn base_case_at_depth_one() {
        let p = parse_program(FACT).unwrap();
        let cfg = OracleConfig { depth: 1, ..Default::default() };
        let r = run_args(&p, &parse_atom("fact(X,R)").unwrap(), &[Some(0), None], &cfg);
        assert_eq!(r.answers, vec![vec![Some(0), Some(1)]]);
    }

    #[test]
    fn unbound_arithmetic_is_flagged() {
        let p = parse_program(FACT).unwrap();
        let r = run_args(&p, &parse_atom("fact(X,R)").unwrap(), &[None, None], &OracleConfig::default());
        assert_eq!(r.answers, vec![vec![Some(0), Some(1)]]);
        assert!(r.insufficiently_instantiated);
    }

    #[test]
    fn pow_two_squared() {
        let p = parse_program("pow(_, 0, 1).\npow(X, N, P) :- N > 0, N1 is N - 1, pow(X, N1, P0), P is X * P0.").unwrap();
        let r = run_args(&p, &parse_atom("pow(X,N,P)").unwrap(), &[Some(2), Some(2), None], &OracleConfig::default());
        assert_eq!(r.answers, vec![vec![Some(2), Some(2), Some(4)]]);
    }

    #[test]
    fn deterministic() {
        let p = parse_program(FACT).unwrap();
        let g = parse_atom("fact(X,R)").unwrap();
        let a = run_args(&p, &g, &[Some(4), None], &OracleConfig::default());
        let b = run_args(&p, &g, &[Some(4), None], &OracleConfig::default());
        assert_eq!(a, b);
    }
}
