#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use hornguide::analyzer::Query;
use hornguide::domain::{AbstractValue, Bound, Domain, Itv, Sign, Value};
use hornguide::pipeline::{entry_queries, prepare};
use hornguide::syntax::{ArithOp, Builtin, CmpOp, Conjunction, Expr, Operand, PropLit, PropRel, Program, Term, Var};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const BOX: std::ops::RangeInclusive<i64> = -4..=4;

pub fn corpus_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/corpus").join(format!("{name}.pl"))
}

pub fn corpus_src(name: &str) -> String {
    std::fs::read_to_string(corpus_path(name)).unwrap_or_else(|e| panic!("reading {name}: {e}"))
}

pub fn corpus(name: &str) -> Program {
    prepare(&corpus_src(name)).unwrap_or_else(|e| panic!("preparing {name}: {e}"))
}

/// Programs whose concrete behaviour the interpreter can reproduce from the
/// same source.
pub const SELF_CONTAINED: &[&str] = &["factorial", "pow", "countup", "ex2", "loop", "absval", "bad", "statuses"];

/// Every analyzable corpus program.
pub const ANALYZABLE: &[&str] = &["factorial", "pow", "countup", "external", "ex2", "loop", "absval", "bad", "statuses"];

/// Source used for concrete runs of a corpus program.
pub fn reference_of(name: &str) -> Program {
    match name {
        "external" => corpus("external_ref"),
        other => corpus(other),
    }
}

pub fn queries<D: Domain>(d: &D, p: &Program) -> Vec<Query<D::Elem>> {
    entry_queries(d, &p.entries)
}

pub fn v(s: &str) -> Var {
    Var(s.to_string())
}

// -- random programs ------------------------------------------------------

const VARS: [&str; 6] = ["A", "B", "C", "D", "E", "F"];

fn rand_lit_text(rng: &mut ChaCha8Rng, var: &str) -> String {
    let c = rng.gen_range(-3..=3);
    match rng.gen_range(0..8) {
        0 => format!("int({var})"),
        1 => format!("nat({var})"),
        2 => format!("even({var})"),
        3 => format!("{var} >= {c}"),
        4 => format!("{var} > {c}"),
        5 => format!("{var} =< {c}"),
        6 => format!("{var} < {c}"),
        _ => format!("{var} = {c}"),
    }
}

fn rand_props(rng: &mut ChaCha8Rng, vars: &[&str], max: usize) -> String {
    let n = rng.gen_range(1..=max);
    let lits: Vec<String> = (0..n)
        .map(|_| {
            let var = vars[rng.gen_range(0..vars.len())];
            rand_lit_text(rng, var)
        })
        .collect();
    if lits.len() == 1 {
        lits[0].clone()
    } else {
        format!("({})", lits.join(", "))
    }
}

/// A small random program with integer builtins, recursion and an entry on
/// `p0`. With `assertions`, also random `check` and `trust` assertions.
pub fn random_program(seed: u64, assertions: bool) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let npreds = rng.gen_range(2..=3);
    let arities: Vec<usize> = (0..npreds).map(|_| rng.gen_range(1..=2)).collect();
    let mut out = String::new();
    let head_vars = |k: usize| -> Vec<&'static str> { VARS[..arities[k]].to_vec() };

    out.push_str(&format!("% seed {seed}\n"));
    let hv0 = head_vars(0);
    if rng.gen_bool(0.5) {
        out.push_str(&format!(":- entry p0({}) : {}.\n", hv0.join(","), rand_props(&mut rng, &hv0, 2)));
    } else {
        out.push_str(&format!(":- entry p0({}).\n", hv0.join(",")));
    }
    if assertions {
        for _ in 0..rng.gen_range(1..=3) {
            let k = rng.gen_range(0..npreds);
            let hv = head_vars(k);
            let status = if rng.gen_bool(0.5) { "check" } else { "trust" };
            let pre = if rng.gen_bool(0.7) { format!(" : {}", rand_props(&mut rng, &hv, 2)) } else { String::new() };
            let post = if rng.gen_bool(0.7) { format!(" => {}", rand_props(&mut rng, &hv, 2)) } else { String::new() };
            out.push_str(&format!(":- {status} pred p{k}({}){pre}{post}.\n", hv.join(",")));
        }
    }
    for k in 0..npreds {
        for ci in 0..rng.gen_range(1..=3) {
            let mut bound: Vec<String> = Vec::new();
            let mut head = Vec::new();
            for (i, hv) in head_vars(k).iter().enumerate() {
                if ci == 0 && i == 0 && rng.gen_bool(0.4) {
                    head.push(rng.gen_range(-1..=2).to_string());
                } else {
                    head.push(hv.to_string());
                    bound.push(hv.to_string());
                }
            }
            let mut body = Vec::new();
            let mut next = 0;
            for _ in 0..rng.gen_range(0..=3) {
                let pick = |rng: &mut ChaCha8Rng, bound: &[String]| -> String {
                    if bound.is_empty() || rng.gen_bool(0.2) {
                        rng.gen_range(-2..=3).to_string()
                    } else {
                        bound[rng.gen_range(0..bound.len())].clone()
                    }
                };
                match rng.gen_range(0..5) {
                    0 => {
                        let ops = [">", ">=", "<", "=<", "=:="];
                        let a = pick(&mut rng, &bound);
                        let b = rng.gen_range(-2..=3).to_string();
                        body.push(format!("{a} {} {b}", ops[rng.gen_range(0..ops.len())]));
                    }
                    1 | 2 => {
                        let ops = ["+", "-", "*"];
                        let t = format!("T{next}");
                        next += 1;
                        let a = pick(&mut rng, &bound);
                        let b = pick(&mut rng, &bound);
                        body.push(format!("{t} is {a} {} {b}", ops[rng.gen_range(0..ops.len())]));
                        bound.push(t);
                    }
                    3 => {
                        let t = format!("T{next}");
                        next += 1;
                        body.push(format!("{t} = {}", rng.gen_range(-2..=3)));
                        bound.push(t);
                    }
                    _ => {
                        let j = rng.gen_range(0..npreds);
                        let args: Vec<String> = (0..arities[j])
                            .map(|_| {
                                if rng.gen_bool(0.3) {
                                    let t = format!("T{next}");
                                    next += 1;
                                    t
                                } else {
                                    pick(&mut rng, &bound)
                                }
                            })
                            .collect();
                        for a in &args {
                            if a.starts_with('T') && !bound.contains(a) {
                                bound.push(a.clone());
                            }
                        }
                        body.push(format!("p{j}({})", args.join(", ")));
                    }
                }
            }
            let head = format!("p{k}({})", head.join(", "));
            if body.is_empty() {
                out.push_str(&format!("{head}.\n"));
            } else {
                out.push_str(&format!("{head} :- {}.\n", body.join(", ")));
            }
        }
    }
    out
}

// -- strategies -------------------------------------------------------------

pub fn sign_elem() -> impl Strategy<Value = Sign> {
    prop::sample::select(Sign::ALL.to_vec())
}

fn bound_strategy(lower: bool) -> impl Strategy<Value = Bound> {
    let inf = if lower { Bound::NegInf } else { Bound::PosInf };
    prop_oneof![1 => Just(inf), 4 => (-6i64..=6).prop_map(Bound::Fin)]
}

pub fn itv_elem() -> impl Strategy<Value = Itv> {
    prop_oneof![
        1 => Just(Itv::EMPTY),
        8 => (bound_strategy(true), bound_strategy(false)).prop_map(|(a, b)| {
            if a <= b { Itv::new(a, b) } else { Itv::new(b.min(a), a.max(b)) }
        }),
    ]
}

pub fn scope3() -> Vec<Var> {
    vec![v("X"), v("Y"), v("Z")]
}

pub fn value_of<D: Domain>(d: &D, elems: Vec<D::Elem>) -> Value<D> {
    d.value(scope3().into_iter().zip(elems).collect())
}

pub fn values<E: std::fmt::Debug>(elem: impl Strategy<Value = E>) -> impl Strategy<Value = Vec<E>> {
    prop::collection::vec(elem, 3)
}

fn var_or_int() -> impl Strategy<Value = Operand> {
    prop_oneof![
        prop::sample::select(vec!["X", "Y", "Z"]).prop_map(|s| Operand::Var(v(s))),
        (-4i64..=4).prop_map(Operand::Int),
    ]
}

fn cmp_op() -> impl Strategy<Value = CmpOp> {
    prop::sample::select(vec![CmpOp::Gt, CmpOp::Ge, CmpOp::Lt, CmpOp::Le, CmpOp::Eq])
}

fn operand_expr(o: Operand) -> Expr {
    match o {
        Operand::Var(x) => Expr::Var(x),
        Operand::Int(n) => Expr::Int(n),
    }
}

fn operand_term(o: Operand) -> Term {
    match o {
        Operand::Var(x) => Term::Var(x),
        Operand::Int(n) => Term::Int(n),
    }
}

pub fn builtin() -> impl Strategy<Value = Builtin> {
    let xyz = prop::sample::select(vec!["X", "Y", "Z"]).prop_map(v);
    let arith = prop::sample::select(vec![ArithOp::Add, ArithOp::Sub, ArithOp::Mul]);
    prop_oneof![
        (prop_oneof![xyz.clone().prop_map(Term::Var), (-4i64..=4).prop_map(Term::Int)], arith, var_or_int(), var_or_int())
            .prop_map(|(lhs, op, a, b)| Builtin::Is(lhs, Expr::Bin(op, Box::new(operand_expr(a)), Box::new(operand_expr(b))))),
        (xyz.clone(), var_or_int()).prop_map(|(x, o)| Builtin::Is(Term::Var(x), Expr::Neg(Box::new(operand_expr(o))))),
        (var_or_int(), var_or_int()).prop_map(|(a, b)| Builtin::Unify(operand_term(a), operand_term(b))),
        (cmp_op(), var_or_int(), var_or_int()).prop_map(|(op, a, b)| Builtin::Compare(op, operand_expr(a), operand_expr(b))),
    ]
}

pub fn prop_lit() -> impl Strategy<Value = PropLit> {
    let xy = prop::sample::select(vec!["X", "Y"]).prop_map(v);
    let operand = prop_oneof![
        prop::sample::select(vec!["X", "Y"]).prop_map(|s| Operand::Var(v(s))),
        (-4i64..=4).prop_map(Operand::Int),
    ];
    prop_oneof![
        xy.clone().prop_map(PropLit::Int),
        xy.clone().prop_map(PropLit::Nat),
        xy.prop_map(PropLit::Even),
        (cmp_op(), operand.clone(), operand.clone()).prop_map(|(op, a, b)| PropLit::Rel(PropRel::Cmp(op), a, b)),
        (operand.clone(), operand).prop_map(|(a, b)| PropLit::Rel(PropRel::Unify, a, b)),
    ]
}

pub fn conjunction() -> impl Strategy<Value = Conjunction> {
    prop::collection::vec(prop_lit(), 1..=3).prop_map(Conjunction)
}

// -- concrete helpers -----------------------------------------------------

pub type Store = BTreeMap<Var, Option<i64>>;

/// All stores over `vars` with values in `{unbound} ∪ BOX`.
pub fn stores(vars: &[Var]) -> Vec<Store> {
    let mut out = vec![Store::new()];
    for x in vars {
        out = out
            .into_iter()
            .flat_map(|s| {
                std::iter::once(None).chain(BOX.map(Some)).map(move |val| {
                    let mut s = s.clone();
                    s.insert(x.clone(), val);
                    s
                })
            })
            .collect();
    }
    out
}

pub fn in_gamma<D: Domain>(d: &D, val: &Value<D>, s: &Store) -> bool {
    match val {
        AbstractValue::Bottom => false,
        AbstractValue::Env(m) => s.iter().all(|(x, c)| m.get(x).map_or(true, |e| d.contains(e, *c))),
    }
}

fn eval_concrete(e: &Expr, s: &Store) -> Option<i64> {
    match e {
        Expr::Var(x) => s.get(x).copied().flatten(),
        Expr::Int(n) => Some(*n),
        Expr::Neg(a) => eval_concrete(a, s)?.checked_neg(),
        Expr::Bin(op, a, b) => {
            let (x, y) = (eval_concrete(a, s)?, eval_concrete(b, s)?);
            match op {
                ArithOp::Add => x.checked_add(y),
                ArithOp::Sub => x.checked_sub(y),
                ArithOp::Mul => x.checked_mul(y),
            }
        }
        Expr::Opaque(_) => None,
    }
}

fn term_value(t: &Term, s: &Store) -> Option<i64> {
    match t {
        Term::Var(x) => s.get(x).copied().flatten(),
        Term::Int(n) => Some(*n),
        Term::Compound(..) => None,
    }
}

/// Concrete execution of a builtin on a store. `None` when the builtin
/// fails or needs an unbound input; aliasing of two unbound variables keeps
/// both unbound.
pub fn exec_builtin(b: &Builtin, s: &Store) -> Option<Store> {
    let mut out = s.clone();
    let assign = |t: &Term, n: i64, out: &mut Store| -> bool {
        match t {
            Term::Var(x) => match out.get(x).copied().flatten() {
                Some(m) => m == n,
                None => {
                    out.insert(x.clone(), Some(n));
                    true
                }
            },
            Term::Int(m) => *m == n,
            Term::Compound(..) => false,
        }
    };
    match b {
        Builtin::Is(lhs, e) => {
            let n = eval_concrete(e, s)?;
            assign(lhs, n, &mut out).then_some(out)
        }
        Builtin::Unify(a, c) => match (term_value(a, s), term_value(c, s)) {
            (Some(x), Some(y)) => (x == y).then_some(out),
            (Some(x), None) => assign(c, x, &mut out).then_some(out),
            (None, Some(y)) => assign(a, y, &mut out).then_some(out),
            (None, None) => Some(out),
        },
        Builtin::Compare(op, l, r) => op.holds(eval_concrete(l, s)?, eval_concrete(r, s)?).then_some(out),
        Builtin::Cut | Builtin::True => Some(out),
    }
}

// -- laws -----------------------------------------------------------------

pub fn lattice_laws<D: Domain>(d: &D, a: &Value<D>, b: &Value<D>, c: &Value<D>) -> Result<(), TestCaseError> {
    prop_assert!(d.leq(a, a));
    if d.leq(a, b) && d.leq(b, a) {
        prop_assert_eq!(a, b);
    }
    if d.leq(a, b) && d.leq(b, c) {
        prop_assert!(d.leq(a, c));
    }
    let j = d.join(a, b);
    let m = d.meet(a, b);
    prop_assert!(d.leq(a, &j) && d.leq(b, &j));
    prop_assert!(d.leq(&m, a) && d.leq(&m, b));
    prop_assert_eq!(&j, &d.join(b, a));
    prop_assert_eq!(&m, &d.meet(b, a));
    prop_assert_eq!(&d.join(a, a), a);
    prop_assert_eq!(&d.meet(a, a), a);
    prop_assert_eq!(&d.join(a, &d.meet(a, b)), a);
    prop_assert_eq!(&d.meet(a, &d.join(a, b)), a);
    if d.leq(a, c) && d.leq(b, c) {
        prop_assert!(d.leq(&j, c));
    }
    if d.leq(c, a) && d.leq(c, b) {
        prop_assert!(d.leq(c, &m));
    }
    prop_assert_eq!(&d.join(&j, c), &d.join(a, &d.join(b, c)));
    let w = d.widen(a, &j);
    prop_assert!(d.leq(&j, &w));
    Ok(())
}

pub fn transfer_monotone<D: Domain>(d: &D, b: &Builtin, big: &Value<D>, other: &Value<D>) -> Result<(), TestCaseError> {
    let small = d.meet(big, other);
    let (fs, fb) = (d.transfer_builtin(b, &small), d.transfer_builtin(b, big));
    prop_assert!(d.leq(&fs, &fb), "{b}: {small} -> {fs} not below {big} -> {fb}");
    prop_assert!(d.leq(&fb, big), "{b}: transfer must refine its input");
    Ok(())
}

pub fn transfer_sound<D: Domain>(d: &D, b: &Builtin, val: &Value<D>) -> Result<(), TestCaseError> {
    let post = d.transfer_builtin(b, val);
    for s in stores(&scope3()) {
        if !in_gamma(d, val, &s) {
            continue;
        }
        if let Some(s2) = exec_builtin(b, &s) {
            prop_assert!(in_gamma(d, &post, &s2), "{b} on {val}: {s:?} -> {s2:?} not in {post}");
        }
    }
    Ok(())
}

pub fn ts_bracket<D: Domain>(d: &D, c: &Conjunction) -> Result<(), TestCaseError> {
    use hornguide::assertions::{ts_over, ts_under};
    use hornguide::syntax::PropertyFormula;
    let scope = vec![v("X"), v("Y")];
    let over = ts_over(d, &PropertyFormula::conj(c.clone()), &scope);
    let under = ts_under(d, c, &scope);
    prop_assert!(d.leq(&under, &over));
    for s in stores(&scope) {
        let holds = c.0.iter().all(|l| l.holds(|x| s.get(x).copied().flatten()));
        if holds {
            prop_assert!(in_gamma(d, &over, &s), "{c}: {s:?} satisfies but is outside {over}");
        }
        if in_gamma(d, &under, &s) {
            prop_assert!(holds, "{c}: {s:?} is in {under} but does not satisfy");
        }
    }
    Ok(())
}

/// Iterates `w := w ∇ (w ⊔ x_i)` along an ascending chain and returns the
/// number of strict increases of `w`.
pub fn widening_steps(chain: &[Itv]) -> usize {
    let mut w = Itv::EMPTY;
    let mut acc = Itv::EMPTY;
    let mut steps = 0;
    for x in chain {
        acc = acc.join(x);
        let next = w.widen(&w.join(&acc));
        if next != w {
            steps += 1;
        }
        w = next;
    }
    steps
}

pub fn ascending_chain() -> impl Strategy<Value = Vec<Itv>> {
    (-1000i64..1000, prop::collection::vec((0i64..50, 0i64..50), 1..200)).prop_map(|(start, grows)| {
        let (mut lo, mut hi) = (start, start);
        grows
            .into_iter()
            .map(|(dl, dh)| {
                lo -= dl;
                hi += dh;
                Itv::range(lo, hi)
            })
            .collect()
    })
}
