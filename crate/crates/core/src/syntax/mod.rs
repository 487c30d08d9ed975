//! Program representation: terms, atoms, literals, clauses and the
//! assertion language attached to them.
//!
//! Programs are parsed from a Prolog-like surface syntax (see [`parse_program`]),
//! then put in normal form ([`normalize`]) and stripped of program-point
//! assertions ([`lower_pp_assertions`]) before analysis.

mod lexer;
mod normalize;
mod parser;
mod rename;

use std::collections::BTreeSet;
use std::fmt;

pub use normalize::{lower_pp_assertions, normalize};
pub use parser::{parse_atom, parse_entry, parse_program, ParseError};
pub use rename::{Rename, Renaming};

/// A logic variable, identified by name.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub String);

impl Var {
    pub fn new(name: impl Into<String>) -> Self {
        Var(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Predicate identifier `name/arity`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredKey {
    pub name: String,
    pub arity: usize,
}

impl fmt::Display for PredKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", fmt_name(&self.name), self.arity)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Var),
    Int(i64),
    Compound(String, Vec<Term>),
}

impl Term {
    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Term::Var(v) => push_unique(out, v),
            Term::Int(_) => {}
            Term::Compound(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

/// Arithmetic expression as it appears on the right of `is` or in a comparison.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Var(Var),
    Int(i64),
    Neg(Box<Expr>),
    Bin(ArithOp, Box<Expr>, Box<Expr>),
    /// A non-arithmetic term (compound or symbolic constant); evaluates to top.
    Opaque(Term),
}

impl Expr {
    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Expr::Var(v) => Some(v),
            _ => None,
        }
    }

    /// Term view used when an expression ends up as an argument of `=` or a call.
    pub fn to_term(&self) -> Term {
        match self {
            Expr::Var(v) => Term::Var(v.clone()),
            Expr::Int(n) => Term::Int(*n),
            Expr::Opaque(t) => t.clone(),
            Expr::Neg(e) => Term::Compound("-".into(), vec![e.to_term()]),
            Expr::Bin(op, l, r) => {
                let name = match op {
                    ArithOp::Add => "+",
                    ArithOp::Sub => "-",
                    ArithOp::Mul => "*",
                };
                Term::Compound(name.into(), vec![l.to_term(), r.to_term()])
            }
        }
    }

    fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Expr::Var(v) => push_unique(out, v),
            Expr::Int(_) => {}
            Expr::Neg(e) => e.collect_vars(out),
            Expr::Bin(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            Expr::Opaque(t) => t.collect_vars(out),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: impl Into<String>, args: Vec<Term>) -> Self {
        Atom { pred: pred.into(), args }
    }

    /// Atom whose arguments are the given variables.
    pub fn from_vars(pred: impl Into<String>, vars: &[Var]) -> Self {
        Atom::new(pred, vars.iter().cloned().map(Term::Var).collect())
    }

    pub fn key(&self) -> PredKey {
        PredKey { name: self.pred.clone(), arity: self.args.len() }
    }

    /// A normalized atom has pairwise distinct variables as arguments.
    pub fn is_normalized(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.args.iter().all(|a| matches!(a, Term::Var(v) if seen.insert(v)))
    }

    /// Argument variables of a normalized atom, in order.
    ///
    /// Panics if the atom is not normalized.
    pub fn arg_vars(&self) -> Vec<Var> {
        self.args
            .iter()
            .map(|a| a.as_var().cloned().unwrap_or_else(|| panic!("atom {self} is not normalized")))
            .collect()
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.args.iter().for_each(|a| a.collect_vars(&mut out));
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Gt,
    Ge,
    Lt,
    Le,
    /// `=:=`
    Eq,
}

impl CmpOp {
    /// The operator obtained by swapping the operands.
    pub fn flip(self) -> CmpOp {
        match self {
            CmpOp::Gt => CmpOp::Lt,
            CmpOp::Ge => CmpOp::Le,
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Eq => CmpOp::Eq,
        }
    }

    pub fn holds(self, l: i64, r: i64) -> bool {
        match self {
            CmpOp::Gt => l > r,
            CmpOp::Ge => l >= r,
            CmpOp::Lt => l < r,
            CmpOp::Le => l <= r,
            CmpOp::Eq => l == r,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Lt => "<",
            CmpOp::Le => "=<",
            CmpOp::Eq => "=:=",
        }
    }
}

/// Built-in constraints understood natively by every domain.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Builtin {
    /// `X is Expr`
    Is(Term, Expr),
    /// `T1 = T2`
    Unify(Term, Term),
    Compare(CmpOp, Expr, Expr),
    /// `!`, analyzed as a no-op.
    Cut,
    True,
}

impl Builtin {
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        match self {
            Builtin::Is(t, e) => {
                t.collect_vars(&mut out);
                e.collect_vars(&mut out);
            }
            Builtin::Unify(a, b) => {
                a.collect_vars(&mut out);
                b.collect_vars(&mut out);
            }
            Builtin::Compare(_, l, r) => {
                l.collect_vars(&mut out);
                r.collect_vars(&mut out);
            }
            Builtin::Cut | Builtin::True => {}
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    Trust,
    Check,
    SampleCheck,
}

impl Status {
    pub fn parse(s: &str) -> Option<Status> {
        match s {
            "trust" => Some(Status::Trust),
            "check" => Some(Status::Check),
            "sample_check" | "sample-check" => Some(Status::SampleCheck),
            _ => None,
        }
    }

    /// Whether the analyzer may use assertions of this status as guidance.
    pub fn usable_in_analysis(self) -> bool {
        !matches!(self, Status::SampleCheck)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Trust => "trust",
            Status::Check => "check",
            Status::SampleCheck => "sample_check",
        }
    }
}

impl serde::Serialize for Status {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Operand of a comparison property: a variable or an integer constant.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Operand {
    Var(Var),
    Int(i64),
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Var(v) => write!(f, "{v}"),
            Operand::Int(n) => write!(f, "{n}"),
        }
    }
}

/// Relation used by a comparison property.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PropRel {
    Cmp(CmpOp),
    /// `X = c`
    Unify,
}

/// A built-in property literal usable in assertions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PropLit {
    Int(Var),
    Nat(Var),
    Even(Var),
    Rel(PropRel, Operand, Operand),
}

impl PropLit {
    pub fn vars(&self) -> Vec<Var> {
        match self {
            PropLit::Int(v) | PropLit::Nat(v) | PropLit::Even(v) => vec![v.clone()],
            PropLit::Rel(_, l, r) => {
                let mut out = Vec::new();
                for o in [l, r] {
                    if let Operand::Var(v) = o {
                        push_unique(&mut out, v);
                    }
                }
                out
            }
        }
    }

    /// Ground truth of the property on integer values, used by the
    /// concrete oracle. `lookup` returns `None` for unbound variables,
    /// in which case the literal is not a trivially succeeding test.
    pub fn holds(&self, lookup: impl Fn(&Var) -> Option<i64>) -> bool {
        let val = |o: &Operand| match o {
            Operand::Var(v) => lookup(v),
            Operand::Int(n) => Some(*n),
        };
        match self {
            PropLit::Int(v) => lookup(v).is_some(),
            PropLit::Nat(v) => lookup(v).is_some_and(|n| n >= 0),
            PropLit::Even(v) => lookup(v).is_some_and(|n| n % 2 == 0),
            PropLit::Rel(rel, l, r) => match (val(l), val(r)) {
                (Some(a), Some(b)) => match rel {
                    PropRel::Cmp(op) => op.holds(a, b),
                    PropRel::Unify => a == b,
                },
                _ => false,
            },
        }
    }
}

/// A conjunction of property literals; empty means `true`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Conjunction(pub Vec<PropLit>);

impl Conjunction {
    pub fn is_true(&self) -> bool {
        self.0.is_empty()
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        for lit in &self.0 {
            for v in lit.vars() {
                push_unique(&mut out, &v);
            }
        }
        out
    }
}

/// Property formula in disjunctive normal form. `true` is a single empty
/// conjunction; the disjunction is never empty.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PropertyFormula {
    pub dnf: Vec<Conjunction>,
}

impl PropertyFormula {
    pub fn truth() -> Self {
        PropertyFormula { dnf: vec![Conjunction::default()] }
    }

    pub fn conj(c: Conjunction) -> Self {
        PropertyFormula { dnf: vec![c] }
    }

    pub fn is_true(&self) -> bool {
        self.dnf.iter().any(Conjunction::is_true)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Literal {
    Call(Atom),
    Builtin(Builtin),
    /// Program-point assertion `status(Cond)`; removed by lowering.
    PpAssert(Status, Conjunction),
}

impl Literal {
    pub fn vars(&self) -> Vec<Var> {
        match self {
            Literal::Call(a) => a.vars(),
            Literal::Builtin(b) => b.vars(),
            Literal::PpAssert(_, c) => c.vars(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub head: Atom,
    pub body: Vec<Literal>,
    pub span: Span,
}

impl Clause {
    /// All variables of the clause, head first, in order of appearance.
    pub fn vars(&self) -> Vec<Var> {
        let mut out = self.head.vars();
        for lit in &self.body {
            for v in lit.vars() {
                push_unique(&mut out, &v);
            }
        }
        out
    }
}

/// `:- STATUS pred Head : Pre => Post.`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceAssertion {
    pub status: Status,
    pub head: Atom,
    pub pre: Conjunction,
    pub post: Conjunction,
    pub span: Span,
}

/// `:- entry Head : Pre.`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntryDecl {
    pub head: Atom,
    pub pre: Conjunction,
    pub span: Span,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    /// Clauses, grouped by predicate in order of first appearance.
    pub clauses: Vec<Clause>,
    pub assertions: Vec<SourceAssertion>,
    pub entries: Vec<EntryDecl>,
    pub warnings: Vec<String>,
}

impl Program {
    pub fn clauses_of<'a>(&'a self, key: &'a PredKey) -> impl Iterator<Item = &'a Clause> + 'a {
        self.clauses.iter().filter(move |c| c.head.pred == key.name && c.head.args.len() == key.arity)
    }

    pub fn is_defined(&self, key: &PredKey) -> bool {
        self.clauses_of(key).next().is_some()
    }

    pub fn assertions_of<'a>(&'a self, key: &'a PredKey) -> impl Iterator<Item = &'a SourceAssertion> + 'a {
        self.assertions.iter().filter(move |a| a.head.key() == *key)
    }

    /// Predicates in order of first appearance (heads, calls, assertions, entries).
    pub fn predicates(&self) -> Vec<PredKey> {
        let mut out: Vec<PredKey> = Vec::new();
        let mut add = |k: PredKey| {
            if !out.contains(&k) {
                out.push(k);
            }
        };
        for e in &self.entries {
            add(e.head.key());
        }
        for c in &self.clauses {
            add(c.head.key());
            for lit in &c.body {
                if let Literal::Call(a) = lit {
                    add(a.key());
                }
            }
        }
        for a in &self.assertions {
            add(a.head.key());
        }
        out
    }

    /// Sorts clauses so that each predicate's clauses are contiguous,
    /// keeping the relative order within a predicate.
    pub(crate) fn group_clauses(&mut self) {
        let mut order: Vec<PredKey> = Vec::new();
        for c in &self.clauses {
            let k = c.head.key();
            if !order.contains(&k) {
                order.push(k);
            }
        }
        let mut grouped = Vec::with_capacity(self.clauses.len());
        for k in &order {
            grouped.extend(self.clauses.iter().filter(|c| c.head.key() == *k).cloned());
        }
        self.clauses = grouped;
    }

    /// Records a warning for every called predicate that has no clauses and
    /// no analyzer-usable assertion.
    pub(crate) fn refresh_warnings(&mut self) {
        self.warnings.clear();
        for k in self.predicates() {
            let asserted = self.assertions_of(&k).any(|a| a.status.usable_in_analysis());
            if !self.is_defined(&k) && !asserted {
                self.warnings.push(format!("predicate {k} has no clauses and no trust/check assertion"));
            }
        }
    }
}

pub(crate) fn push_unique(out: &mut Vec<Var>, v: &Var) {
    if !out.contains(v) {
        out.push(v.clone());
    }
}

// ---------------------------------------------------------------------------
// Printing. The output is accepted back by the parser.

fn is_plain_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub(crate) fn fmt_name(s: &str) -> String {
    if is_plain_name(s) {
        s.to_string()
    } else {
        format!("'{}'", s.replace('\\', "\\\\").replace('\'', "\\'"))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Int(n) => write!(f, "{n}"),
            Term::Compound(name, args) => {
                write!(f, "{}", fmt_name(name))?;
                if !args.is_empty() {
                    write!(f, "(")?;
                    write_sep(f, args, ",")?;
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", fmt_name(&self.pred))?;
        if !self.args.is_empty() {
            write!(f, "(")?;
            write_sep(f, &self.args, ",")?;
            write!(f, ")")?;
        }
        Ok(())
    }
}

fn expr_prec(e: &Expr) -> u8 {
    match e {
        Expr::Bin(ArithOp::Add | ArithOp::Sub, ..) => 1,
        Expr::Bin(ArithOp::Mul, ..) => 2,
        _ => 3,
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    if expr_prec(e) < min_prec {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Int(n) => write!(f, "{n}"),
            Expr::Opaque(t) => write!(f, "{t}"),
            Expr::Neg(e) => {
                write!(f, "-")?;
                write_operand(f, e, 3)
            }
            Expr::Bin(op, l, r) => {
                let (sym, prec) = match op {
                    ArithOp::Add => ("+", 1),
                    ArithOp::Sub => ("-", 1),
                    ArithOp::Mul => ("*", 2),
                };
                write_operand(f, l, prec)?;
                write!(f, " {sym} ")?;
                write_operand(f, r, prec + 1)
            }
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::Is(t, e) => write!(f, "{t} is {e}"),
            Builtin::Unify(a, b) => write!(f, "{a} = {b}"),
            Builtin::Compare(op, l, r) => write!(f, "{l} {} {r}", op.symbol()),
            Builtin::Cut => write!(f, "!"),
            Builtin::True => write!(f, "true"),
        }
    }
}

impl fmt::Display for PropLit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropLit::Int(v) => write!(f, "int({v})"),
            PropLit::Nat(v) => write!(f, "nat({v})"),
            PropLit::Even(v) => write!(f, "even({v})"),
            PropLit::Rel(PropRel::Unify, l, r) => write!(f, "{l} = {r}"),
            PropLit::Rel(PropRel::Cmp(op), l, r) => write!(f, "{l} {} {r}", op.symbol()),
        }
    }
}

impl fmt::Display for Conjunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.len() {
            0 => write!(f, "true"),
            1 => write!(f, "{}", self.0[0]),
            _ => {
                write!(f, "(")?;
                write_sep(f, &self.0, ", ")?;
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for PropertyFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dnf.len() == 1 {
            return write!(f, "{}", self.dnf[0]);
        }
        write!(f, "(")?;
        write_sep(f, &self.dnf, " ; ")?;
        write!(f, ")")
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Call(a) => write!(f, "{a}"),
            Literal::Builtin(b) => write!(f, "{b}"),
            Literal::PpAssert(s, c) => {
                // Always parenthesize so the conjunction stays one argument.
                write!(f, "{s}(")?;
                write_sep(f, &c.0, ", ")?;
                if c.0.is_empty() {
                    write!(f, "true")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            write!(f, " :- ")?;
            write_sep(f, &self.body, ", ")?;
        }
        write!(f, ".")
    }
}

impl fmt::Display for SourceAssertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, ":- {} pred {}", self.status, self.head)?;
        if !self.pre.is_true() {
            write!(f, " : {}", self.pre)?;
        }
        if !self.post.is_true() {
            write!(f, " => {}", self.post)?;
        }
        write!(f, ".")
    }
}

impl fmt::Display for EntryDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, ":- entry {}", self.head)?;
        if !self.pre.is_true() {
            write!(f, " : {}", self.pre)?;
        }
        write!(f, ".")
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.assertions {
            writeln!(f, "{a}")?;
        }
        for e in &self.entries {
            writeln!(f, "{e}")?;
        }
        for c in &self.clauses {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

fn write_sep<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T], sep: &str) -> fmt::Result {
    for (i, it) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        write!(f, "{it}")?;
    }
    Ok(())
}
