//! Goal-dependent multivariant fixpoint engine.
//!
//! The engine keeps an answer table of `(atom, call, success)` triples and
//! recomputes every entry against every matching clause until nothing
//! changes. In guided mode, call patterns pass through the calls conditions
//! before being stored and successes through the success conditions; the
//! values seen just before guidance are recorded in a [`PreTable`].

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use indexmap::{IndexMap, IndexSet};

use crate::assertions::{ts_over, ts_under, AssertionCondition, ConditionKind};
use crate::domain::{AbstractValue, Domain, Value};
use crate::syntax::{Atom, Clause, Conjunction, Literal, PredKey, Program, PropertyFormula, Rename, Renaming, Var};
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Baseline,
    Guided,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Baseline => "baseline",
            Mode::Guided => "guided",
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(Mode::Baseline),
            "guided" => Ok(Mode::Guided),
            other => Err(format!("unknown mode `{other}` (expected `baseline` or `guided`)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EngineConfig {
    pub mode: Mode,
    /// Replace inferred values by assertion bounds instead of refining them.
    pub speed_up: bool,
    pub max_iterations: usize,
    /// Distinct call patterns kept per predicate before calls get widened.
    pub multivariance_budget: usize,
    /// Success updates per entry before joins turn into widenings.
    pub widening_delay: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig { mode: Mode::Baseline, speed_up: false, max_iterations: 1000, multivariance_budget: 3, widening_delay: 2 }
    }
}

impl EngineConfig {
    pub fn guided(speed_up: bool) -> Self {
        EngineConfig { mode: Mode::Guided, speed_up, ..Default::default() }
    }
}

/// Initial abstract query `atom : call`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query<E> {
    pub atom: Atom,
    pub call: AbstractValue<E>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Triple<E> {
    pub atom: Atom,
    pub call: AbstractValue<E>,
    pub success: AbstractValue<E>,
}

#[derive(Clone, Debug)]
struct Entry<E> {
    call: AbstractValue<E>,
    success: AbstractValue<E>,
    updates: usize,
    history: Vec<AbstractValue<E>>,
}

#[derive(Clone, Debug)]
struct PredEntries<E> {
    atom: Atom,
    entries: Vec<Entry<E>>,
}

/// The answer table: per predicate, a canonical atom and its call/success
/// pairs in discovery order.
#[derive(Clone, Debug)]
pub struct AnalysisTable<E> {
    preds: IndexMap<PredKey, PredEntries<E>>,
}

impl<E: Clone + PartialEq> AnalysisTable<E> {
    fn new() -> Self {
        AnalysisTable { preds: IndexMap::new() }
    }

    pub fn triples(&self) -> Vec<Triple<E>> {
        self.preds
            .values()
            .flat_map(|p| {
                p.entries
                    .iter()
                    .map(|e| Triple { atom: p.atom.clone(), call: e.call.clone(), success: e.success.clone() })
            })
            .collect()
    }

    pub fn triples_of(&self, key: &PredKey) -> Vec<Triple<E>> {
        self.preds
            .get(key)
            .map(|p| {
                p.entries
                    .iter()
                    .map(|e| Triple { atom: p.atom.clone(), call: e.call.clone(), success: e.success.clone() })
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.preds.values().map(|p| p.entries.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Success for an exact call pattern over the canonical atom's variables.
    pub fn lookup(&self, key: &PredKey, call: &AbstractValue<E>) -> Option<&AbstractValue<E>> {
        self.preds.get(key)?.entries.iter().find(|e| e.call == *call).map(|e| &e.success)
    }

    /// Successive stored success values of an entry, oldest first, ending with
    /// the current one.
    pub fn success_history(&self, key: &PredKey, call: &AbstractValue<E>) -> Vec<AbstractValue<E>> {
        let Some(e) = self.preds.get(key).and_then(|p| p.entries.iter().find(|e| e.call == *call)) else {
            return Vec::new();
        };
        let mut h = e.history.clone();
        h.push(e.success.clone());
        h
    }

    /// Overwrites the success of an existing entry (test support).
    pub fn set_success(&mut self, key: &PredKey, call: &AbstractValue<E>, success: AbstractValue<E>) -> bool {
        match self.preds.get_mut(key).and_then(|p| p.entries.iter_mut().find(|e| e.call == *call)) {
            Some(e) => {
                e.success = success;
                true
            }
            None => false,
        }
    }
}

impl<E: Clone + PartialEq> PartialEq for AnalysisTable<E> {
    fn eq(&self, other: &Self) -> bool {
        self.triples() == other.triples()
    }
}

/// Values observed before guidance was applied.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreTable<E: std::hash::Hash + Eq> {
    pub domain: String,
    pub call_snaps: IndexSet<(Atom, AbstractValue<E>)>,
    pub succ_snaps: IndexSet<Triple<E>>,
}

impl<E: std::hash::Hash + Eq> PreTable<E> {
    pub fn new(domain: impl Into<String>) -> Self {
        PreTable { domain: domain.into(), call_snaps: IndexSet::new(), succ_snaps: IndexSet::new() }
    }
}

#[derive(Clone, Debug)]
pub struct Analysis<E: std::hash::Hash + Eq> {
    pub table: AnalysisTable<E>,
    pub pre: PreTable<E>,
    pub iterations: usize,
    pub warnings: Vec<String>,
}

/// Runs the analysis to a fixpoint.
pub fn analyze<D: Domain>(
    d: &D,
    program: &Program,
    queries: &[Query<D::Elem>],
    conditions: &[AssertionCondition],
    cfg: &EngineConfig,
) -> Result<Analysis<D::Elem>, Error> {
    Engine::new(d, program, queries, conditions, cfg.clone())?.run()
}

pub fn analyze_baseline<D: Domain>(
    d: &D,
    program: &Program,
    queries: &[Query<D::Elem>],
    cfg: &EngineConfig,
) -> Result<Analysis<D::Elem>, Error> {
    let cfg = EngineConfig { mode: Mode::Baseline, ..cfg.clone() };
    analyze(d, program, queries, &[], &cfg)
}

pub fn guided_analyze<D: Domain>(
    d: &D,
    program: &Program,
    queries: &[Query<D::Elem>],
    conditions: &[AssertionCondition],
    cfg: &EngineConfig,
) -> Result<Analysis<D::Elem>, Error> {
    let cfg = EngineConfig { mode: Mode::Guided, ..cfg.clone() };
    analyze(d, program, queries, conditions, &cfg)
}

struct Guidance {
    calls: Option<PropertyFormula>,
    successes: Vec<(Conjunction, Conjunction)>,
}

pub struct Engine<'a, D: Domain> {
    d: &'a D,
    cfg: EngineConfig,
    canon: HashMap<PredKey, Atom>,
    clauses: HashMap<PredKey, Vec<(&'a Clause, Vec<Var>)>>,
    externals: IndexSet<PredKey>,
    guidance: HashMap<PredKey, Guidance>,
    table: AnalysisTable<D::Elem>,
    pre: PreTable<D::Elem>,
    iterations: usize,
    warnings: IndexSet<String>,
    changes: bool,
}

fn default_atom(key: &PredKey) -> Atom {
    let vars: Vec<Var> = (1..=key.arity).map(|i| Var(format!("A{i}"))).collect();
    Atom::from_vars(key.name.clone(), &vars)
}

impl<'a, D: Domain> Engine<'a, D> {
    pub fn new(
        d: &'a D,
        program: &'a Program,
        queries: &[Query<D::Elem>],
        conditions: &[AssertionCondition],
        cfg: EngineConfig,
    ) -> Result<Self, Error> {
        if cfg.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1".into()));
        }
        if cfg.multivariance_budget == 0 {
            return Err(Error::InvalidConfig("multivariance budget must be at least 1".into()));
        }
        for c in &program.clauses {
            if !c.head.is_normalized() {
                return Err(Error::NotPrepared(format!("clause head {} is not normalized", c.head)));
            }
            for lit in &c.body {
                match lit {
                    Literal::Call(a) if !a.is_normalized() => {
                        return Err(Error::NotPrepared(format!("call {a} is not normalized")));
                    }
                    Literal::PpAssert(..) => {
                        return Err(Error::NotPrepared(format!("program-point assertion `{lit}` was not lowered")));
                    }
                    _ => {}
                }
            }
        }

        let mut canon: HashMap<PredKey, Atom> = HashMap::new();
        for q in queries {
            if !q.atom.is_normalized() {
                return Err(Error::NotPrepared(format!("query atom {} is not normalized", q.atom)));
            }
            canon.entry(q.atom.key()).or_insert_with(|| q.atom.clone());
        }
        for a in &program.assertions {
            canon.entry(a.head.key()).or_insert_with(|| a.head.clone());
        }
        for c in &program.clauses {
            canon.entry(c.head.key()).or_insert_with(|| {
                if c.head.arg_vars().iter().any(|v| v.name().starts_with('_')) {
                    default_atom(&c.head.key())
                } else {
                    c.head.clone()
                }
            });
        }
        for k in program.predicates() {
            canon.entry(k.clone()).or_insert_with(|| default_atom(&k));
        }

        let mut clauses: HashMap<PredKey, Vec<(&Clause, Vec<Var>)>> = HashMap::new();
        for c in &program.clauses {
            clauses.entry(c.head.key()).or_default().push((c, c.vars()));
        }
        let mut externals = IndexSet::new();
        for k in program.predicates() {
            let asserted = program.assertions_of(&k).any(|a| a.status.usable_in_analysis());
            if !clauses.contains_key(&k) && asserted {
                externals.insert(k);
            }
        }

        let mut guidance: HashMap<PredKey, Guidance> = HashMap::new();
        if cfg.mode == Mode::Guided {
            for cond in conditions.iter().filter(|c| c.applicable()) {
                let key = cond.key();
                let atom = canon.entry(key.clone()).or_insert_with(|| cond.head.clone()).clone();
                let cond = cond.renamed_to(&atom).ok_or_else(|| Error::ConflictingArity { pred: key.clone(), span: cond.origin.first().copied().unwrap_or_default() })?;
                let g = guidance.entry(key).or_insert(Guidance { calls: None, successes: Vec::new() });
                match cond.kind {
                    ConditionKind::Calls { pre } => g.calls = Some(pre),
                    ConditionKind::Success { pre, post } => g.successes.push((pre, post)),
                }
            }
        }

        let mut engine = Engine {
            d,
            cfg,
            canon,
            clauses,
            externals,
            guidance,
            table: AnalysisTable::new(),
            pre: PreTable::new(d.name()),
            iterations: 0,
            warnings: program.warnings.iter().cloned().collect(),
            changes: true,
        };

        for q in queries {
            let key = q.atom.key();
            engine.ensure_known(&key)?;
            let atom = engine.canon[&key].clone();
            let r = Renaming::between(&q.atom, &atom).expect("query and canonical atom share a predicate");
            let mut call = q.call.rename(&r);
            if !call.is_bottom() {
                engine.pre.call_snaps.insert((atom.clone(), call.clone()));
            }
            if engine.cfg.mode == Mode::Guided {
                call = engine.apply_call(&key, &call);
            }
            if call.is_bottom() {
                engine.warnings.insert(format!("query {} has an empty call description and was skipped", q.atom));
                continue;
            }
            engine.insert_entry(&key, call);
        }
        Ok(engine)
    }

    fn ensure_known(&self, key: &PredKey) -> Result<(), Error> {
        if self.clauses.contains_key(key) || self.externals.contains(key) {
            Ok(())
        } else {
            Err(Error::UnknownPredicate { pred: key.clone() })
        }
    }

    fn insert_entry(&mut self, key: &PredKey, call: Value<D>) {
        let atom = self.canon[key].clone();
        let p = self.table.preds.entry(key.clone()).or_insert_with(|| PredEntries { atom, entries: Vec::new() });
        if !p.entries.iter().any(|e| e.call == call) {
            p.entries.push(Entry { call, success: AbstractValue::Bottom, updates: 0, history: Vec::new() });
            self.changes = true;
        }
    }

    fn scope(&self, key: &PredKey) -> Vec<Var> {
        self.canon[key].arg_vars()
    }

    /// Applies the calls condition of `key`, if any, to a call over the
    /// canonical atom's variables.
    pub fn apply_call(&self, key: &PredKey, call: &Value<D>) -> Value<D> {
        let Some(pre) = self.guidance.get(key).and_then(|g| g.calls.as_ref()) else {
            return call.clone();
        };
        let over = ts_over(self.d, pre, &self.scope(key));
        if self.cfg.speed_up {
            over
        } else {
            self.d.meet(call, &over)
        }
    }

    /// Applies every success condition whose precondition is entailed by
    /// `call` to the success value `s1`.
    pub fn apply_succ(&self, key: &PredKey, call: &Value<D>, s1: &Value<D>) -> Value<D> {
        self.apply_succ_checked(key, call, s1).unwrap_or_else(|| s1.clone())
    }

    fn apply_succ_checked(&self, key: &PredKey, call: &Value<D>, s1: &Value<D>) -> Option<Value<D>> {
        let g = self.guidance.get(key)?;
        let scope = self.scope(key);
        let app: Vec<Value<D>> = g
            .successes
            .iter()
            .filter(|(pre, _)| self.d.leq(call, &ts_under(self.d, pre, &scope)))
            .map(|(_, post)| ts_over(self.d, &PropertyFormula::conj(post.clone()), &scope))
            .collect();
        let m = app.iter().skip(1).fold(app.first()?.clone(), |acc, v| self.d.meet(&acc, v));
        Some(if self.cfg.speed_up { m } else { self.d.meet(&m, s1) })
    }

    fn generalize_call(&self, key: &PredKey, new: &Value<D>) -> Value<D> {
        let olds: Vec<Value<D>> = self
            .table
            .preds
            .get(key)
            .map(|p| p.entries.iter().map(|e| e.call.clone()).collect())
            .unwrap_or_default();
        if new.is_bottom() || olds.contains(new) || olds.len() < self.cfg.multivariance_budget {
            return new.clone();
        }
        self.d.abs_generalize(new, &olds, true)
    }

    fn solve_body(&mut self, body: &[Literal], lt: Value<D>) -> Result<Value<D>, Error> {
        let mut lt = lt;
        for lit in body {
            if lt.is_bottom() {
                break;
            }
            lt = match lit {
                Literal::Builtin(b) => self.d.transfer_builtin(b, &lt),
                Literal::Call(l) => {
                    let lc = self.d.abs_project(&l.arg_vars(), &lt);
                    let ls = self.solve_call(l, &lc)?;
                    self.d.abs_extend(&ls, &lt)
                }
                Literal::PpAssert(..) => return Err(Error::NotPrepared(format!("unlowered assertion `{lit}`"))),
            };
        }
        Ok(lt)
    }

    fn solve_call(&mut self, l: &Atom, lc: &Value<D>) -> Result<Value<D>, Error> {
        let key = l.key();
        self.ensure_known(&key)?;
        let atom = self.canon[&key].clone();
        let r = Renaming::between(l, &atom).expect("call and canonical atom share a predicate");
        let g = self.generalize_call(&key, &lc.rename(&r));
        if g.is_bottom() {
            return Ok(AbstractValue::Bottom);
        }
        self.pre.call_snaps.insert((atom, g.clone()));
        let g = if self.cfg.mode == Mode::Guided { self.apply_call(&key, &g) } else { g };
        if g.is_bottom() {
            return Ok(AbstractValue::Bottom);
        }
        let s = match self.table.lookup(&key, &g) {
            Some(s) => s.clone(),
            None => {
                self.insert_entry(&key, g);
                AbstractValue::Bottom
            }
        };
        Ok(s.rename(&r.inverse()))
    }

    fn update_success(&mut self, key: &PredKey, idx: usize, s0: Value<D>) {
        let atom = self.canon[key].clone();
        let (call, old, updates) = {
            let e = &self.table.preds[key].entries[idx];
            (e.call.clone(), e.success.clone(), e.updates)
        };
        let widen = updates >= self.cfg.widening_delay;
        let s1 = self.d.abs_generalize(&s0, std::slice::from_ref(&old), widen);
        self.pre.succ_snaps.insert(Triple { atom: atom.clone(), call: call.clone(), success: s1.clone() });
        let s = if self.cfg.mode == Mode::Guided {
            match self.apply_succ_checked(key, &call, &s1) {
                Some(s) => s,
                None => {
                    if self.externals.contains(key) {
                        self.warnings.insert(format!(
                            "no success condition of {key} applies to call {}; its success is taken to be the call",
                            call.display_ordered(&atom.arg_vars())
                        ));
                    }
                    s1
                }
            }
        } else {
            s1
        };
        if s != old {
            let e = &mut self.table.preds.get_mut(key).unwrap().entries[idx];
            e.history.push(std::mem::replace(&mut e.success, s));
            e.updates += 1;
            self.changes = true;
        }
    }

    /// One pass over every (entry, clause) pair. Returns whether anything changed.
    pub fn sweep(&mut self) -> Result<bool, Error> {
        self.changes = false;
        let work: Vec<(PredKey, usize)> = self
            .table
            .preds
            .iter()
            .flat_map(|(k, p)| (0..p.entries.len()).map(move |i| (k.clone(), i)))
            .collect();
        for (key, idx) in work {
            let atom = self.canon[&key].clone();
            if self.externals.contains(&key) {
                let call = self.table.preds[&key].entries[idx].call.clone();
                self.update_success(&key, idx, call);
                continue;
            }
            let clauses = self.clauses[&key].clone();
            for (cl, vars) in clauses {
                let call = self.table.preds[&key].entries[idx].call.clone();
                let lt = self.d.abs_call(&atom, &call, &cl.head, &vars);
                let lt = self.solve_body(&cl.body, lt)?;
                let s0 = self.d.abs_proceed(&atom, &cl.head, &lt);
                self.update_success(&key, idx, s0);
            }
        }
        self.iterations += 1;
        Ok(self.changes)
    }

    pub fn table(&self) -> &AnalysisTable<D::Elem> {
        &self.table
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Sweeps until a fixpoint is reached.
    pub fn run(mut self) -> Result<Analysis<D::Elem>, Error> {
        loop {
            if self.iterations >= self.cfg.max_iterations {
                return Err(Error::IterationBudgetExceeded { limit: self.cfg.max_iterations });
            }
            if !self.sweep()? {
                break;
            }
        }
        Ok(self.into_analysis())
    }

    pub fn into_analysis(self) -> Analysis<D::Elem> {
        Analysis { table: self.table, pre: self.pre, iterations: self.iterations, warnings: self.warnings.into_iter().collect() }
    }
}
