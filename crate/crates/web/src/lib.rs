//! Browser bindings. Every export takes program text and returns a JSON
//! document; errors come back as a JS string.

use std::collections::BTreeMap;

use serde::Serialize;
use wasm_bindgen::prelude::*;

use hornguide::analyzer::{EngineConfig, Mode};
use hornguide::domain::DomainKind;
use hornguide::oracle::{self, OracleConfig, TraceEvent};
use hornguide::pipeline::{self, Options};
use hornguide::report::{Report, TripleRecord};
use hornguide::syntax::{parse_entry, parse_program, Operand, PropLit, PropRel};

fn options(domain: &str, mode: &str, speed_up: bool) -> Result<Options, String> {
    let domain: DomainKind = domain.parse()?;
    let mode: Mode = mode.parse()?;
    Ok(Options { domain, config: EngineConfig { mode, speed_up, ..Default::default() }, ..Default::default() })
}

pub fn analyze_json(src: &str, domain: &str, mode: &str, speed_up: bool) -> Result<String, String> {
    let opts = options(domain, mode, speed_up)?;
    let report = pipeline::run_source(src, &opts).map_err(|e| e.to_string())?;
    Ok(report.to_json())
}

#[derive(Serialize)]
struct OracleOutput {
    answers: Vec<Vec<Option<i64>>>,
    trace: Vec<String>,
    depth_exhausted: bool,
    insufficiently_instantiated: bool,
    unsupported: bool,
}

/// `goal` is `head : X = 1, Y = 2`.
pub fn oracle_json(src: &str, goal: &str, depth: usize) -> Result<String, String> {
    let program = parse_program(src).map_err(|e| e.to_string())?;
    let goal = parse_entry(goal).map_err(|e| e.to_string())?;
    let mut bindings = BTreeMap::new();
    for lit in &goal.pre.0 {
        match lit {
            PropLit::Rel(PropRel::Unify, Operand::Var(v), Operand::Int(n))
            | PropLit::Rel(PropRel::Unify, Operand::Int(n), Operand::Var(v)) => {
                bindings.insert(v.clone(), *n);
            }
            other => return Err(format!("goal bindings must have the form `X = n`, found `{other}`")),
        }
    }
    let run = oracle::run(&program, &goal.head, &bindings, &OracleConfig { depth, ..Default::default() });
    let out = OracleOutput {
        answers: run.answers,
        trace: run.trace.iter().map(TraceEvent::to_string).collect(),
        depth_exhausted: run.depth_exhausted,
        insufficiently_instantiated: run.insufficiently_instantiated,
        unsupported: run.unsupported,
    };
    Ok(serde_json::to_string_pretty(&out).expect("oracle output serializes"))
}

#[derive(Serialize)]
struct ModeRun {
    mode: String,
    speed_up: bool,
    iterations: usize,
    triples: Vec<TripleRecord>,
}

impl ModeRun {
    fn of(r: Report) -> Self {
        ModeRun { mode: r.mode, speed_up: r.speed_up, iterations: r.iterations, triples: r.triples }
    }
}

/// Baseline, guided and guided speed-up runs side by side.
pub fn compare_json(src: &str, domain: &str) -> Result<String, String> {
    let mut runs = Vec::new();
    for (mode, speed_up) in [("baseline", false), ("guided", false), ("guided", true)] {
        let opts = options(domain, mode, speed_up)?;
        runs.push(ModeRun::of(pipeline::run_source(src, &opts).map_err(|e| e.to_string())?));
    }
    Ok(serde_json::to_string_pretty(&runs).expect("mode runs serialize"))
}

#[wasm_bindgen]
pub fn analyze(src: &str, domain: &str, mode: &str, speed_up: bool) -> Result<String, JsValue> {
    analyze_json(src, domain, mode, speed_up).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn run_oracle(src: &str, goal: &str, depth: usize) -> Result<String, JsValue> {
    oracle_json(src, goal, depth).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn compare_modes(src: &str, domain: &str) -> Result<String, JsValue> {
    compare_json(src, domain).map_err(|e| JsValue::from_str(&e))
}
