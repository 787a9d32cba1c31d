//! The `guardsynth` command-line front end.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::rngs::StdRng;
use rand::SeedableRng;

use crate::export::{to_dot, to_smt2};
use crate::model::{Configuration, Network, StateFormula};
use crate::parser::{parse_network, parse_query_for, print_network};
use crate::report::{text_report, PrioritiesFile, ReportFile};
use crate::semantics::{
    bfs_reach, format_trace, initial_state, is_deadlock, random_trace, DomainBounds,
};
use crate::solver::{witness, Session, SolverConfig};
use crate::synthesis::{bmc_reach, Synthesizer};
use crate::transform::transform_network;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "guardsynth", version, about = "Stateful priority synthesis for networks of automata")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Network file.
    #[arg(long, global = true)]
    pub model: Option<PathBuf>,
    /// Query file holding `EF (...)`.
    #[arg(long, global = true)]
    pub query: Option<PathBuf>,
    /// Unfolding bound.
    #[arg(long, global = true, default_value_t = 15, value_parser = clap::value_parser!(u64).range(1..))]
    pub max: u64,
    /// SMT solver executable.
    #[arg(long, global = true, default_value = "z3")]
    pub solver: String,
    /// Extra solver argument, placed before the script path (repeatable).
    #[arg(long = "solver-arg", global = true, allow_hyphen_values = true)]
    pub solver_args: Vec<String>,
    /// Per-call solver timeout in seconds.
    #[arg(long, global = true, default_value_t = 60.0)]
    pub timeout: f64,
    /// Variable domain `lo:hi` for explicit exploration (and for `check`).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub bounds: Option<DomainBounds>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for randomized commands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Keep every solver script under `<out>/scripts`.
    #[arg(long = "keep-scripts", global = true)]
    pub keep_scripts: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize stateful priorities and write the transformed network.
    Synth,
    /// Bounded reachability of the query, step by step.
    Check,
    /// Apply a priorities file to a network.
    Transform {
        /// Priorities file (or full JSON report) from `synth`.
        #[arg(long)]
        priorities: PathBuf,
    },
    /// Explore the explicit semantics.
    Simulate {
        #[arg(long, default_value_t = 10)]
        depth: usize,
        /// Number of random traces; exhaustive exploration when absent.
        #[arg(long)]
        random: Option<usize>,
    },
    /// Export the network.
    Export {
        #[arg(long, value_enum)]
        format: Format,
        /// Unfolding depth for `smt2`.
        #[arg(short, default_value_t = 1)]
        k: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Dot,
    Smt2,
}

/// A failure that maps to exit code 2.
#[derive(Debug)]
pub struct Failure(pub String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Res<T> = Result<T, Failure>;

fn read(path: &Path) -> Res<String> {
    fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Res<()> {
    fs::write(path, text).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

impl Global {
    fn network(&self) -> Res<Network> {
        let path = self
            .model
            .as_ref()
            .ok_or_else(|| Failure("--model is required".into()))?;
        let text = read(path)?;
        parse_network(&text).map_err(|e| Failure(format!("{}:\n{e}", path.display())))
    }

    fn formula(&self, net: &Network) -> Res<StateFormula> {
        let path = self
            .query
            .as_ref()
            .ok_or_else(|| Failure("--query is required".into()))?;
        let text = read(path)?;
        parse_query_for(&text, net).map_err(|e| Failure(format!("{}:\n{e}", path.display())))
    }

    fn optional_formula(&self, net: &Network) -> Res<Option<StateFormula>> {
        match self.query {
            Some(_) => self.formula(net).map(Some),
            None => Ok(None),
        }
    }

    fn out_dir(&self) -> Res<PathBuf> {
        let dir = self.out.clone().unwrap_or_else(|| PathBuf::from("."));
        fs::create_dir_all(&dir).map_err(|e| Failure(format!("{}: {e}", dir.display())))?;
        Ok(dir)
    }

    fn solver_config(&self) -> Res<SolverConfig> {
        if !(self.timeout.is_finite() && self.timeout > 0.0) {
            return Err(Failure("--timeout must be positive".into()));
        }
        let mut cfg = SolverConfig::new(self.solver.clone())
            .with_args(self.solver_args.clone())
            .with_timeout(Duration::from_secs_f64(self.timeout));
        if self.keep_scripts {
            let dir = self.out_dir()?.join("scripts");
            fs::create_dir_all(&dir)?;
            cfg = cfg.keeping_scripts(dir);
        }
        Ok(cfg)
    }

    fn max(&self) -> usize {
        self.max as usize
    }
}

/// Parses `args` and runs the command, writing to the given streams.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let g = &cli.global;
    let result = match &cli.command {
        Command::Synth => cmd_synth(g, out),
        Command::Check => cmd_check(g, out),
        Command::Transform { priorities } => cmd_transform(g, priorities, out),
        Command::Simulate { depth, random } => cmd_simulate(g, *depth, *random, out),
        Command::Export { format, k } => cmd_export(g, *format, *k, out),
    };
    match result {
        Ok(code) => code,
        Err(Failure(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_ERROR
        }
    }
}

pub fn cmd_synth(g: &Global, out: &mut dyn Write) -> Res<i32> {
    let net = g.network()?;
    let f = g.formula(&net)?;
    let cfg = g.solver_config()?;
    let dir = g.out_dir()?;
    let (report, _) = Synthesizer::new(&net, g.max(), cfg)?.run(&f)?;

    let text = text_report(&net, &f, &report);
    out.write_all(text.as_bytes())?;
    write(&dir.join("report.txt"), &text)?;
    write(&dir.join("report.json"), &ReportFile::new(&net, &f, &report).to_json())?;
    write(
        &dir.join("priorities.json"),
        &PrioritiesFile::new(&net, &report.stateful).to_json(),
    )?;
    if report.outcome.is_success() {
        let t = transform_network(&net, &report.stateful)?;
        write(&dir.join("transformed.net"), &print_network(&t.transformed))?;
        write(&dir.join("guard_edits.txt"), &t.edit_log())?;
        writeln!(out, "wrote {}", dir.join("transformed.net").display())?;
    }
    Ok(if report.outcome.is_success() {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    })
}

/// Exit 0 when the query is unreachable up to `--max`, 1 when reachable.
pub fn cmd_check(g: &Global, out: &mut dyn Write) -> Res<i32> {
    let net = g.network()?;
    let f = g.formula(&net)?;
    let target = Configuration::from_formula(&f);
    let mut session = Session::new(g.solver_config()?);
    for depth in 0..=g.max() {
        match bmc_reach(&net, &target, depth, g.bounds.as_ref(), &mut session)? {
            None => writeln!(out, "depth {depth}: unsat")?,
            Some(m) => {
                writeln!(out, "depth {depth}: sat")?;
                writeln!(out, "reachable at depth {depth}")?;
                let (init, steps) = witness(&m, &net, depth)?;
                out.write_all(format_trace(&net, &init, &steps).as_bytes())?;
                return Ok(EXIT_NEGATIVE);
            }
        }
    }
    writeln!(out, "unreachable up to depth {}", g.max())?;
    Ok(EXIT_OK)
}

pub fn cmd_transform(g: &Global, priorities: &Path, out: &mut dyn Write) -> Res<i32> {
    let net = g.network()?;
    let file = PrioritiesFile::from_json(&read(priorities)?)
        .map_err(|e| Failure(format!("{}: {e}", priorities.display())))?;
    if file.network != net.name.as_str() {
        return Err(Failure(format!(
            "priorities were synthesized for network `{}`, not `{}`",
            file.network, net.name
        )));
    }
    let t = transform_network(&net, &file.stateful()?)?;
    let dir = g.out_dir()?;
    write(&dir.join("transformed.net"), &print_network(&t.transformed))?;
    write(&dir.join("guard_edits.txt"), &t.edit_log())?;
    writeln!(out, "{} guard edit(s)", t.edits.len())?;
    out.write_all(t.edit_log().as_bytes())?;
    writeln!(out, "wrote {}", dir.join("transformed.net").display())?;
    Ok(EXIT_OK)
}

pub fn cmd_simulate(
    g: &Global,
    depth: usize,
    random: Option<usize>,
    out: &mut dyn Write,
) -> Res<i32> {
    let net = g.network()?;
    let target = g.optional_formula(&net)?.map(|f| Configuration::from_formula(&f));
    let is_error = |s: &crate::model::State| target.as_ref().is_some_and(|c| c.matches(&net, s));
    let bounds = g.bounds.clone().unwrap_or_default();
    let (mut hits, mut deadlocks) = (0usize, 0usize);

    if let Some(n) = random {
        let seed = g.seed.unwrap_or_else(rand::random);
        writeln!(out, "seed {seed}")?;
        let mut rng = StdRng::seed_from_u64(seed);
        let init = initial_state(&net);
        for t in 0..n {
            let steps = random_trace(&net, depth, &mut rng)?;
            writeln!(out, "trace {t}:")?;
            out.write_all(format_trace(&net, &init, &steps).as_bytes())?;
            let mut states = std::iter::once(&init).chain(steps.iter().map(|(_, s)| s));
            if let Some(i) = states.position(is_error) {
                hits += 1;
                writeln!(out, "  error hit at step {i}")?;
            }
            let last = steps.last().map(|(_, s)| s).unwrap_or(&init);
            if is_deadlock(&net, last)? {
                deadlocks += 1;
                writeln!(out, "  deadlock at step {}", steps.len())?;
            }
        }
        writeln!(out, "summary: {n} traces, {hits} error hits, {deadlocks} deadlocks")?;
        return Ok(EXIT_OK);
    }

    let reach = bfs_reach(&net, depth, &bounds)?;
    writeln!(
        out,
        "explored {} states up to depth {depth} (bounds {bounds}{})",
        reach.len(),
        if reach.pruned > 0 {
            format!(", {} successors pruned", reach.pruned)
        } else {
            String::new()
        }
    )?;
    let init = initial_state(&net);
    for s in reach.states() {
        let d = reach.depth_of(s).expect("reached");
        let err = is_error(s);
        let dead = is_deadlock(&net, s)?;
        if !(err || dead) {
            continue;
        }
        let what = match (err, dead) {
            (true, true) => "error hit (deadlock)",
            (true, false) => "error hit",
            _ => "deadlock",
        };
        hits += err as usize;
        deadlocks += dead as usize;
        writeln!(out, "{what} at depth {d}: {}", s.display(&net))?;
        let path = reach.path_to(s).expect("reached");
        for line in format_trace(&net, &init, &path).lines() {
            writeln!(out, "  {line}")?;
        }
    }
    writeln!(
        out,
        "summary: {} states, {hits} error hits, {deadlocks} deadlocks",
        reach.len()
    )?;
    Ok(EXIT_OK)
}

pub fn cmd_export(g: &Global, format: Format, k: usize, out: &mut dyn Write) -> Res<i32> {
    let net = g.network()?;
    let (text, ext) = match format {
        Format::Dot => (to_dot(&net), "dot"),
        Format::Smt2 => (to_smt2(&net, k)?, "smt2"),
    };
    match &g.out {
        Some(_) => {
            let path = g.out_dir()?.join(format!("{}.{ext}", net.name));
            write(&path, &text)?;
            writeln!(out, "wrote {}", path.display())?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(EXIT_OK)
}
