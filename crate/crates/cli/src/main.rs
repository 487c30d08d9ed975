use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use hornguide::analyzer::{EngineConfig, Mode};
use hornguide::domain::DomainKind;
use hornguide::oracle::{self, OracleConfig};
use hornguide::pipeline::{self, Options};
use hornguide::syntax::parse_entry;

#[derive(Parser)]
#[command(name = "hornguide", version, about = "Assertion-guided abstract interpretation of Horn clause programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a program from its entry points and check its assertions.
    Analyze(AnalyzeArgs),
    /// Run a goal on the concrete interpreter and print the trace.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum DomainArg {
    Sign,
    Intervals,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Baseline,
    Guided,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct AnalyzeArgs {
    input: PathBuf,
    #[arg(long, value_enum, default_value = "sign")]
    domain: DomainArg,
    #[arg(long, value_enum, default_value = "guided")]
    mode: ModeArg,
    /// Replace inferred values by assertion bounds instead of refining them.
    #[arg(long)]
    speedup: bool,
    /// Entry point `head : props`, replacing the program's declarations.
    #[arg(long = "entry", value_name = "ENTRY")]
    entries: Vec<String>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Replay the entries on the concrete interpreter and check the table.
    #[arg(long)]
    validate: bool,
    #[arg(long, default_value_t = 8)]
    oracle_depth: usize,
    #[arg(long, default_value_t = 1000)]
    max_iterations: usize,
    #[arg(long, default_value_t = 3)]
    budget: usize,
    #[arg(long, default_value_t = 2)]
    widening_delay: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    input: PathBuf,
    /// Goal with its bindings, e.g. `fact(X,R) : X = 3`.
    goal: String,
    #[arg(long, default_value_t = 8)]
    depth: usize,
}

fn analyze(a: &AnalyzeArgs) -> Result<i32> {
    let src = fs::read_to_string(&a.input).with_context(|| format!("cannot read {}", a.input.display()))?;
    let opts = Options {
        domain: match a.domain {
            DomainArg::Sign => DomainKind::Sign,
            DomainArg::Intervals => DomainKind::Intervals,
        },
        config: EngineConfig {
            mode: match a.mode {
                ModeArg::Baseline => Mode::Baseline,
                ModeArg::Guided => Mode::Guided,
            },
            speed_up: a.speedup,
            max_iterations: a.max_iterations,
            multivariance_budget: a.budget,
            widening_delay: a.widening_delay,
        },
        entries: a.entries.clone(),
        validate: a.validate.then(|| OracleConfig { depth: a.oracle_depth, ..Default::default() }),
    };
    let report = pipeline::run_source(&src, &opts).with_context(|| format!("analysis of {} failed", a.input.display()))?;
    let mut text = match a.format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json(),
    };
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match &a.out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(report.exit_code())
}

fn run_oracle(a: &OracleArgs) -> Result<i32> {
    let src = fs::read_to_string(&a.input).with_context(|| format!("cannot read {}", a.input.display()))?;
    let program = hornguide::syntax::parse_program(&src)?;
    let goal = parse_entry(&a.goal)?;
    let mut bindings = std::collections::BTreeMap::new();
    for lit in &goal.pre.0 {
        use hornguide::syntax::{Operand, PropLit, PropRel};
        match lit {
            PropLit::Rel(PropRel::Unify, Operand::Var(v), Operand::Int(n))
            | PropLit::Rel(PropRel::Unify, Operand::Int(n), Operand::Var(v)) => {
                bindings.insert(v.clone(), *n);
            }
            other => anyhow::bail!("goal bindings must have the form `X = n`, found `{other}`"),
        }
    }
    let run = oracle::run(&program, &goal.head, &bindings, &OracleConfig { depth: a.depth, ..Default::default() });
    for ev in &run.trace {
        println!("{ev}");
    }
    for ans in &run.answers {
        let vals: Vec<String> = ans.iter().map(|v| v.map_or("_".into(), |n| n.to_string())).collect();
        println!("answer: {}({})", goal.head.pred, vals.join(","));
    }
    if run.depth_exhausted {
        println!("note: depth bound reached");
    }
    if run.insufficiently_instantiated {
        println!("note: some branches needed unbound values");
    }
    if run.unsupported {
        println!("note: some branches used unsupported constructs");
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Oracle(a) => run_oracle(a),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
