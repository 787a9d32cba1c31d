//! Runs an external SMT-LIB2 solver on emitted scripts and turns its models
//! back into configurations.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{Read, Write as _};
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;
use wait_timeout::ChildExt;

use crate::expr::{Rational, Value};
use crate::model::{Configuration, Ident, Network, State};
use crate::smt::{emit_script, omega, step_name, UnfoldingFormula};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("cannot run solver `{program}`: {source}")]
    Spawn {
        program: String,
        source: std::io::Error,
    },
    #[error("solver i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("solver failed: {0}")]
    Failed(String),
    #[error("solver gave up (unknown or timeout)")]
    Unknown,
    #[error("model has no value for `{0}`")]
    Missing(String),
    #[error("model assigns `{name}` the code {code}, which names no location")]
    BadLocationCode { name: String, code: i64 },
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub program: String,
    pub args: Vec<String>,
    pub timeout: Duration,
    /// Every script is also copied here as `NNNN.smt2`, numbered by call.
    pub keep_scripts: Option<PathBuf>,
    counter: Arc<AtomicUsize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            program: "z3".into(),
            args: Vec::new(),
            timeout: Duration::from_secs(60),
            keep_scripts: None,
            counter: Arc::new(AtomicUsize::new(0)),
        }
    }
}

impl SolverConfig {
    pub fn new(program: impl Into<String>) -> Self {
        SolverConfig {
            program: program.into(),
            ..SolverConfig::default()
        }
    }

    pub fn with_args(mut self, args: impl IntoIterator<Item = String>) -> Self {
        self.args.extend(args);
        self
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn keeping_scripts(mut self, dir: impl Into<PathBuf>) -> Self {
        self.keep_scripts = Some(dir.into());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverStatus {
    Sat,
    Unsat,
    Unknown,
    Error,
}

/// Values of the step variables, by mangled name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolverModel {
    pub values: BTreeMap<String, Value>,
}

impl SolverModel {
    pub fn get(&self, name: &str) -> Option<Value> {
        self.values.get(name).copied()
    }

    pub fn at(&self, base: &Ident, step: usize) -> Option<Value> {
        self.get(&step_name(base, step))
    }
}

#[derive(Debug, Clone)]
pub struct SolverVerdict {
    pub status: SolverStatus,
    pub model: Option<SolverModel>,
    /// Standard error plus any `(error ...)` responses.
    pub stderr: String,
    pub wall: Duration,
}

/// Runs the solver on `script` through a temporary file.
pub fn solve(script: &str, cfg: &SolverConfig) -> Result<SolverVerdict, SolverError> {
    let n = cfg.counter.fetch_add(1, Ordering::SeqCst);
    if let Some(dir) = &cfg.keep_scripts {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(format!("{n:04}.smt2")), script)?;
    }
    let mut file = tempfile::Builder::new()
        .prefix("guardsynth-")
        .suffix(".smt2")
        .tempfile()?;
    file.write_all(script.as_bytes())?;
    file.flush()?;

    let start = Instant::now();
    let mut child = Command::new(&cfg.program)
        .args(&cfg.args)
        .arg(file.path())
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|source| SolverError::Spawn {
            program: cfg.program.clone(),
            source,
        })?;
    let mut stdout_pipe = child.stdout.take().expect("piped stdout");
    let mut stderr_pipe = child.stderr.take().expect("piped stderr");
    let out_reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stdout_pipe.read_to_string(&mut s);
        s
    });
    let err_reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stderr_pipe.read_to_string(&mut s);
        s
    });
    let timed_out = match child.wait_timeout(cfg.timeout)? {
        Some(_) => false,
        None => {
            let _ = child.kill();
            let _ = child.wait();
            true
        }
    };
    let stdout = out_reader.join().unwrap_or_default();
    let mut stderr = err_reader.join().unwrap_or_default();
    let wall = start.elapsed();

    if timed_out {
        return Ok(SolverVerdict {
            status: SolverStatus::Unknown,
            model: None,
            stderr,
            wall,
        });
    }
    let mut lines = stdout.lines().map(str::trim).filter(|l| !l.is_empty());
    let first = lines.next().unwrap_or("");
    let status = match first {
        "sat" => SolverStatus::Sat,
        "unsat" => SolverStatus::Unsat,
        "unknown" => SolverStatus::Unknown,
        _ => SolverStatus::Error,
    };
    let rest: String = stdout
        .split_once(first)
        .map_or("", |(_, r)| r)
        .to_string();
    if status == SolverStatus::Error {
        stderr.push_str(&stdout);
    }
    let model = if status == SolverStatus::Sat {
        Some(parse_model(&rest).map_err(SolverError::Failed)?)
    } else {
        None
    };
    Ok(SolverVerdict {
        status,
        model,
        stderr,
        wall,
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn parse_sexps(text: &str) -> Result<Vec<Sexp>, String> {
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            '(' => {
                chars.next();
                stack.push(Vec::new());
            }
            ')' => {
                chars.next();
                let done = stack.pop().ok_or("unbalanced `)`")?;
                stack
                    .last_mut()
                    .ok_or("unbalanced `)`")?
                    .push(Sexp::List(done));
            }
            '"' => {
                chars.next();
                let mut s = String::from("\"");
                for ch in chars.by_ref() {
                    s.push(ch);
                    if ch == '"' {
                        break;
                    }
                }
                stack.last_mut().expect("root").push(Sexp::Atom(s));
            }
            ';' => {
                for ch in chars.by_ref() {
                    if ch == '\n' {
                        break;
                    }
                }
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            _ => {
                let mut s = String::new();
                while let Some(&ch) = chars.peek() {
                    if ch.is_whitespace() || ch == '(' || ch == ')' {
                        break;
                    }
                    s.push(ch);
                    chars.next();
                }
                stack.last_mut().expect("root").push(Sexp::Atom(s));
            }
        }
    }
    if stack.len() != 1 {
        return Err("unbalanced `(`".into());
    }
    Ok(stack.pop().expect("root"))
}

fn parse_number(s: &str) -> Option<Rational> {
    if let Some((i, f)) = s.split_once('.') {
        let denom = 10i64.checked_pow(f.len() as u32)?;
        let numer: i64 = format!("{i}{f}").parse().ok()?;
        Some(Rational::new(numer, denom))
    } else {
        s.parse::<i64>().ok().map(Rational::from_integer)
    }
}

fn numeric(e: &Sexp) -> Option<Rational> {
    match e {
        Sexp::Atom(a) => parse_number(a),
        Sexp::List(items) => match items.as_slice() {
            [Sexp::Atom(op), x] if op == "-" => numeric(x).map(|v| -v),
            [Sexp::Atom(op), x, y] if op == "/" => {
                let d = numeric(y)?;
                if d == Rational::from_integer(0) {
                    None
                } else {
                    Some(numeric(x)? / d)
                }
            }
            _ => None,
        },
    }
}

fn value_of(sort: &str, e: &Sexp) -> Option<Value> {
    match sort {
        "Bool" => match e {
            Sexp::Atom(a) if a == "true" => Some(Value::Bool(true)),
            Sexp::Atom(a) if a == "false" => Some(Value::Bool(false)),
            _ => None,
        },
        "Int" => {
            let r = numeric(e)?;
            r.is_integer().then(|| Value::Int(*r.numer()))
        }
        "Real" => numeric(e).map(Value::Real),
        _ => None,
    }
}

/// Reads `(define-fun name () Sort value)` entries, with or without an
/// enclosing `(model ...)`.
pub fn parse_model(text: &str) -> Result<SolverModel, String> {
    let mut model = SolverModel::default();
    let mut todo: Vec<Sexp> = parse_sexps(text)?;
    while let Some(e) = todo.pop() {
        let Sexp::List(items) = e else { continue };
        match items.as_slice() {
            [Sexp::Atom(kw), Sexp::Atom(name), Sexp::List(params), Sexp::Atom(sort), value]
                if kw == "define-fun" && params.is_empty() =>
            {
                let v = value_of(sort, value)
                    .ok_or_else(|| format!("cannot read the value of `{name}`"))?;
                model.values.insert(name.clone(), v);
            }
            [Sexp::Atom(kw), ..] if kw == "error" => {
                // the answer line was fine; later responses do not matter
            }
            _ => todo.extend(items),
        }
    }
    Ok(model)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extract {
    /// Locations, variables and actions at the step.
    Full,
    /// Actions only.
    Actions,
}

/// A configuration read from a model, with the names that were missing
/// from the model and filled with defaults.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extracted {
    pub config: Configuration,
    pub defaulted: BTreeSet<String>,
}

/// The configuration of `net` at `step` of `m`. Missing booleans default to
/// false, numbers to 0 and location codes to their step-0 value.
pub fn create_config(
    m: &SolverModel,
    step: usize,
    net: &Network,
    mode: Extract,
    allow_defaults: bool,
) -> Result<Extracted, SolverError> {
    let mut config = Configuration {
        stp: step,
        ..Configuration::default()
    };
    let mut defaulted = BTreeSet::new();
    let mut fetch = |base: &Ident, fallback: Value| -> Result<Value, SolverError> {
        let name = step_name(base, step);
        match m.get(&name) {
            Some(v) => Ok(v),
            None if allow_defaults => {
                defaulted.insert(name);
                Ok(fallback)
            }
            None => Err(SolverError::Missing(name)),
        }
    };
    for a in net.actions() {
        let v = fetch(&a, Value::Bool(false))?;
        config.act.insert(a, v.as_bool().unwrap_or(false));
    }
    if mode == Extract::Full {
        for a in &net.automata {
            let fallback = m
                .at(&a.name, 0)
                .unwrap_or(Value::Int(a.code_of_index(a.initial_index())));
            let code = fetch(&a.name, fallback)?.as_int().unwrap_or_default();
            let idx = a.index_of_code(code).ok_or_else(|| SolverError::BadLocationCode {
                name: step_name(&a.name, step),
                code,
            })?;
            config.loc.insert(a.name.clone(), a.locations[idx].clone());
        }
        for v in &net.variables {
            let val = fetch(&v.name, Value::default_of(v.ty))?;
            config.var.insert(v.name.clone(), val);
        }
    }
    Ok(Extracted { config, defaulted })
}

/// The state at `step` of a model.
pub fn state_at(m: &SolverModel, net: &Network, step: usize) -> Result<State, SolverError> {
    let c = create_config(m, step, net, Extract::Full, true)?.config;
    Ok(c.to_state(net).expect("full extraction is total"))
}

/// The path `0..=upto` of a model as `(action, state)` steps, with idle
/// steps dropped.
pub fn witness(
    m: &SolverModel,
    net: &Network,
    upto: usize,
) -> Result<(State, Vec<(Ident, State)>), SolverError> {
    let init = state_at(m, net, 0)?;
    let mut steps = Vec::new();
    for i in 0..upto {
        let acts = create_config(m, i, net, Extract::Actions, true)?.config;
        if let Some(a) = acts.true_action() {
            steps.push((a.clone(), state_at(m, net, i + 1)?));
        }
    }
    Ok((init, steps))
}

/// Checks two properties every model of an unfolding must have: at most one
/// true action per step, and an automaton whose actions are all false keeps
/// its location and the variables only it writes. Returns the violations.
pub fn model_violations(m: &SolverModel, net: &Network, k: usize) -> Vec<String> {
    let mut out = Vec::new();
    let owners = omega(net);
    let truthy = |name: &Ident, i: usize| m.at(name, i) == Some(Value::Bool(true));
    for i in 0..=k {
        let trues: Vec<_> = net.actions().into_iter().filter(|a| truthy(a, i)).collect();
        if trues.len() > 1 {
            out.push(format!("step {i}: several actions true: {trues:?}"));
        }
        if i == k {
            continue;
        }
        for (ai, a) in net.automata.iter().enumerate() {
            if a.actions().iter().any(|b| truthy(b, i)) {
                continue;
            }
            if m.at(&a.name, i) != m.at(&a.name, i + 1) {
                out.push(format!("step {i}: idle automaton {} moved", a.name));
            }
            for (vi, v) in net.variables.iter().enumerate() {
                if owners[vi] == Some(ai) && m.at(&v.name, i) != m.at(&v.name, i + 1) {
                    out.push(format!("step {i}: idle automaton {} changed {}", a.name, v.name));
                }
            }
        }
    }
    out
}

/// Counters over a sequence of solver calls.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverStats {
    pub calls: usize,
    pub sat: usize,
    pub unsat: usize,
    pub millis: u64,
}

/// A solver configuration plus call statistics and an optional log of every
/// model returned.
#[derive(Debug, Clone)]
pub struct Session {
    pub config: SolverConfig,
    pub stats: SolverStats,
    pub models: Option<Vec<(usize, SolverModel)>>,
}

impl Session {
    pub fn new(config: SolverConfig) -> Self {
        Session {
            config,
            stats: SolverStats::default(),
            models: None,
        }
    }

    pub fn logging_models(mut self) -> Self {
        self.models = Some(Vec::new());
        self
    }

    /// Solves `f`: `Some(model)` when satisfiable, `None` when not.
    pub fn check(&mut self, f: &UnfoldingFormula) -> Result<Option<SolverModel>, SolverError> {
        let verdict = solve(&emit_script(f), &self.config)?;
        self.stats.calls += 1;
        self.stats.millis += verdict.wall.as_millis() as u64;
        match verdict.status {
            SolverStatus::Sat => {
                self.stats.sat += 1;
                let model = verdict.model.expect("sat verdicts carry a model");
                if let Some(log) = &mut self.models {
                    log.push((f.k, model.clone()));
                }
                Ok(Some(model))
            }
            SolverStatus::Unsat => {
                self.stats.unsat += 1;
                Ok(None)
            }
            SolverStatus::Unknown => Err(SolverError::Unknown),
            SolverStatus::Error => Err(SolverError::Failed(verdict.stderr.trim().to_string())),
        }
    }
}
