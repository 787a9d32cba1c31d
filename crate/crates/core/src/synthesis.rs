//! Collects reachable preErrors of an error formula and derives stateful
//! priorities that steer each of them away from the error.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Configuration, Ident, Network, Priority, StateFormula, StatefulPriority};
use crate::semantics::{action_reaches_error, bfs_reach, initial_state, DomainBounds, SemanticsError};
use crate::smt::{EncodeError, Encoder, Term, UnfoldingFormula};
use crate::solver::{create_config, Extract, Session, SolverConfig, SolverError, SolverModel, SolverStats};

#[derive(Debug, Error)]
pub enum SynthesisError {
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error("the error formula is invalid: {0}")]
    Formula(String),
    #[error("no action leads from {0} into an error")]
    NoBlockee(Configuration),
    #[error("the only error-reaching action `{0}` is also the avoiding one")]
    Reflexive(Ident),
    #[error("solver model has no single true action at step {0}")]
    NoBlocker(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    PrioritiesFound,
    ErrorUnreachable,
    InitialIsError,
    CircularityAbort,
    BoundExhausted,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::PrioritiesFound => "priorities-found",
            Outcome::ErrorUnreachable => "error-unreachable",
            Outcome::InitialIsError => "initial-is-error",
            Outcome::CircularityAbort => "circularity-abort",
            Outcome::BoundExhausted => "bound-exhausted",
        }
    }

    pub fn is_success(self) -> bool {
        matches!(self, Outcome::PrioritiesFound | Outcome::ErrorUnreachable)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesisStats {
    pub solver: SolverStats,
    pub explore_calls: usize,
    pub max_recursion_depth: usize,
    pub preerrors_found: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisReport {
    pub outcome: Outcome,
    pub max: usize,
    /// Sorted by preError snapshot, then priority.
    pub stateful: Vec<StatefulPriority>,
    /// Insertion order; the error formula comes first.
    pub errors: Vec<Configuration>,
    /// Candidates rejected because they would close a cycle.
    pub circular: Vec<StatefulPriority>,
    pub stats: SynthesisStats,
}

impl SynthesisReport {
    /// The set of `(snapshot, priority)` pairs, for order-free comparison.
    pub fn priority_set(&self) -> BTreeSet<(Configuration, Priority)> {
        self.stateful.iter().map(StatefulPriority::key).collect()
    }
}

/// Whether `cand` swaps roles with a priority already kept for the same
/// preError.
pub fn check_circular(stateful: &[StatefulPriority], cand: &StatefulPriority) -> bool {
    stateful.iter().any(|s| {
        s.pre.same_snapshot(&cand.pre)
            && (cand.prio.blockee == s.prio.blocker || cand.prio.blocker == s.prio.blockee)
    })
}

/// Pairs every action that leads from `pre` into `errors` with the single
/// true action of `avoid`. Reflexive pairs are dropped.
pub fn create_prio(
    pre: &Configuration,
    avoid: &Configuration,
    errors: &[Configuration],
    net: &Network,
) -> Result<Vec<Priority>, SynthesisError> {
    let blocker = avoid
        .true_action()
        .ok_or(SynthesisError::NoBlocker(avoid.stp))?
        .clone();
    let state = pre
        .to_state(net)
        .ok_or_else(|| SynthesisError::NoBlockee(pre.clone()))?;
    let mut blockees = Vec::new();
    for a in net.actions() {
        if action_reaches_error(net, &state, &a, errors)? {
            blockees.push(a);
        }
    }
    if blockees.is_empty() {
        return Err(SynthesisError::NoBlockee(pre.clone()));
    }
    let prios: Vec<Priority> = blockees
        .into_iter()
        .filter(|b| *b != blocker)
        .map(|blockee| Priority {
            blockee,
            blocker: blocker.clone(),
        })
        .collect();
    if prios.is_empty() {
        return Err(SynthesisError::Reflexive(blocker));
    }
    Ok(prios)
}

/// One synthesis run over a fixed network, error and bound.
pub struct Synthesizer<'a> {
    net: &'a Network,
    enc: Encoder<'a>,
    base: UnfoldingFormula,
    session: Session,
    max: usize,
    init: Configuration,
    errors: Vec<Configuration>,
    stateful: Vec<StatefulPriority>,
    circular: Vec<StatefulPriority>,
    initial_is_error: bool,
    depth: usize,
    stats: SynthesisStats,
    extra: Vec<Term>,
}

impl<'a> Synthesizer<'a> {
    pub fn new(net: &'a Network, max: usize, solver: SolverConfig) -> Result<Self, SynthesisError> {
        let enc = Encoder::new(net, max)?;
        let base = enc.unfolding();
        Ok(Synthesizer {
            net,
            enc,
            base,
            session: Session::new(solver),
            max,
            init: Configuration::from_state(net, &initial_state(net), 0),
            errors: Vec::new(),
            stateful: Vec::new(),
            circular: Vec::new(),
            initial_is_error: false,
            depth: 0,
            stats: SynthesisStats::default(),
            extra: Vec::new(),
        })
    }

    /// Keeps every model the solver returns.
    pub fn logging_models(mut self) -> Self {
        self.session = self.session.logging_models();
        self
    }

    /// Conjoins `t` to every query, e.g. domain bounds.
    pub fn constrain(mut self, t: Term) -> Self {
        self.extra.push(t);
        self
    }

    pub fn models(&self) -> &[(usize, SolverModel)] {
        self.session.models.as_deref().unwrap_or(&[])
    }

    pub fn errors(&self) -> &[Configuration] {
        &self.errors
    }

    pub fn stateful(&self) -> &[StatefulPriority] {
        &self.stateful
    }

    pub fn encoder(&self) -> &Encoder<'a> {
        &self.enc
    }

    fn solve(&mut self, parts: Vec<Term>) -> Result<Option<SolverModel>, SynthesisError> {
        let f = self
            .base
            .with_extras(self.extra.iter().cloned().chain(parts));
        Ok(self.session.check(&f)?)
    }

    /// Runs the whole procedure for `f`.
    pub fn run(mut self, f: &StateFormula) -> Result<(SynthesisReport, Self), SynthesisError> {
        f.check(self.net)
            .map_err(|e| SynthesisError::Formula(e.to_string()))?;
        let err = Configuration::from_formula(f);
        self.errors.push(err.clone());
        let outcome = if err.matches(self.net, &initial_state(self.net)) {
            self.initial_is_error = true;
            Outcome::InitialIsError
        } else {
            let found = self.explore(&err)?;
            if !self.circular.is_empty() {
                Outcome::CircularityAbort
            } else if self.initial_is_error {
                Outcome::InitialIsError
            } else if !self.stateful.is_empty() {
                Outcome::PrioritiesFound
            } else if found == 0 {
                Outcome::ErrorUnreachable
            } else {
                Outcome::BoundExhausted
            }
        };
        self.stats.solver = self.session.stats;
        let mut stateful = self.stateful.clone();
        stateful.sort_by_key(StatefulPriority::key);
        let report = SynthesisReport {
            outcome,
            max: self.max,
            stateful,
            errors: self.errors.clone(),
            circular: self.circular.clone(),
            stats: self.stats,
        };
        Ok((report, self))
    }

    /// Collects preErrors of `err` until `max` consecutive steps find none,
    /// then synthesizes from each; preErrors without priorities become
    /// errors themselves. Returns the number of preErrors found.
    pub fn explore(&mut self, err: &Configuration) -> Result<usize, SynthesisError> {
        self.stats.explore_calls += 1;
        self.depth += 1;
        self.stats.max_recursion_depth = self.stats.max_recursion_depth.max(self.depth);
        let mut pre_errors: Vec<Configuration> = Vec::new();
        let mut cnt = 0;
        while cnt < self.max {
            let pes = self.check_reach(&pre_errors, err, cnt)?;
            if pes.is_empty() {
                cnt += 1;
            } else {
                pre_errors.extend(pes);
                cnt = 0;
            }
        }
        self.stats.preerrors_found += pre_errors.len();
        for c in &pre_errors {
            if !self.check_prios(c)? {
                if c.same_snapshot(&self.init) {
                    self.initial_is_error = true;
                } else {
                    let mut e = c.snapshot();
                    e.stp = c.stp;
                    self.errors.push(e);
                    self.explore(c)?;
                }
            }
        }
        self.depth -= 1;
        Ok(pre_errors.len())
    }

    /// A preError of `err` at `step` that avoids every known preError and
    /// error, or nothing.
    pub fn check_reach(
        &mut self,
        pre_errors: &[Configuration],
        err: &Configuration,
        step: usize,
    ) -> Result<Vec<Configuration>, SynthesisError> {
        let mut parts = vec![self.enc.progress(step)?];
        for c in pre_errors.iter().chain(&self.errors) {
            parts.push(self.enc.avoid(step, c)?);
        }
        parts.push(self.enc.query(step, err)?);
        match self.solve(parts)? {
            Some(m) => Ok(vec![create_config(&m, step, self.net, Extract::Full, true)?.config]),
            None => Ok(Vec::new()),
        }
    }

    /// Enumerates the actions that leave `pre` without entering an error and
    /// keeps a priority for each. Returns whether any was kept.
    pub fn check_prios(&mut self, pre: &Configuration) -> Result<bool, SynthesisError> {
        let step = pre.stp;
        let mut parts = vec![self.enc.progress(step)?, self.enc.preerror(step, pre)?];
        for e in &self.errors {
            parts.push(self.enc.error(step, e)?);
        }
        let mut found = false;
        while let Some(m) = self.solve(parts.clone())? {
            let avoid = create_config(&m, step, self.net, Extract::Actions, true)?.config;
            let blocker = avoid
                .true_action()
                .ok_or(SynthesisError::NoBlocker(step))?
                .clone();
            match create_prio(pre, &avoid, &self.errors, self.net) {
                Ok(prios) => {
                    let mut circular = false;
                    for prio in prios {
                        let cand = StatefulPriority {
                            pre: pre.clone(),
                            prio,
                        };
                        if check_circular(&self.stateful, &cand) {
                            self.circular.push(cand);
                            circular = true;
                            break;
                        }
                        if !self.stateful.iter().any(|s| s.key() == cand.key()) {
                            self.stateful.push(cand);
                        }
                        found = true;
                    }
                    if circular {
                        return Ok(false);
                    }
                }
                Err(SynthesisError::Reflexive(_)) => {}
                Err(e) => return Err(e),
            }
            parts.push(self.enc.forbid_action(&blocker, step));
        }
        Ok(found)
    }
}

/// Runs synthesis for `f` with bound `max`.
pub fn synthesize(
    net: &Network,
    f: &StateFormula,
    max: usize,
    solver: SolverConfig,
) -> Result<SynthesisReport, SynthesisError> {
    Ok(Synthesizer::new(net, max, solver)?.run(f)?.0)
}

/// Bounded reachability of `target` within `depth` steps, through `session`.
/// Returns the satisfying model, whose path `0..=depth` ends in `target`
/// (idle steps included). `bounds` restricts variables at every step.
pub fn bmc_reach(
    net: &Network,
    target: &Configuration,
    depth: usize,
    bounds: Option<&DomainBounds>,
    session: &mut Session,
) -> Result<Option<SolverModel>, SynthesisError> {
    let enc = Encoder::new(net, depth.max(1))?;
    let mut f = enc.unfolding().with_extra(enc.preerror(depth, target)?);
    if let Some(b) = bounds {
        f = f.with_extra(enc.bounds(b));
    }
    Ok(session.check(&f)?)
}

/// Upper bound on the reachable states of the transformed network: the
/// reachable states of `net` minus those matched by an error. `None` when
/// the exploration within `bounds` is not exhaustive.
pub fn reachability_bound(
    net: &Network,
    report: &SynthesisReport,
    depth: usize,
    bounds: &DomainBounds,
) -> Result<Option<usize>, SynthesisError> {
    let reach = bfs_reach(net, depth, bounds)?;
    if !reach.is_exact() {
        return Ok(None);
    }
    let hit = reach
        .states()
        .iter()
        .filter(|s| report.errors.iter().any(|c| c.matches(net, s)))
        .count();
    Ok(Some(reach.len() - hit))
}
