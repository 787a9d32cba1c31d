//! Rewrites a network so synthesized stateful priorities hold: every
//! automaton gets a positional variable `p_<A>` mirroring its location,
//! and blockee edges get guards that fail at the matching preErrors.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::expr::{Expr, Value};
use crate::model::{
    validate_network, Assignment, Configuration, Edge, Ident, Network, State, StatefulPriority,
    VarDecl,
};
use crate::semantics::{bfs_reach, is_deadlock, successors, DomainBounds, SemanticsError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("the network already carries positional variables")]
    AlreadyTransformed,
    #[error("positional variable `{0}` clashes with an existing name")]
    NameClash(Ident),
    #[error("stale priority {0}: {1}")]
    Stale(String, String),
    #[error("transformed network is invalid: {0}")]
    Invalid(String),
}

/// Which rewriting rule applied to an edge for one stateful priority.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GammaCase {
    /// Blocked at the preError only.
    AtPreError,
    /// The blocker also leaves the same source elsewhere, so the edge is
    /// disabled from its source location outright.
    FromSource,
}

impl GammaCase {
    pub fn number(self) -> u8 {
        match self {
            GammaCase::AtPreError => 1,
            GammaCase::FromSource => 2,
        }
    }
}

impl fmt::Display for GammaCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "case {}", self.number())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuardEdit {
    pub automaton: usize,
    pub edge: usize,
    pub old_guard: Expr,
    pub new_guard: Expr,
    pub triggers: Vec<(StatefulPriority, GammaCase)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformOutcome {
    pub transformed: Network,
    pub edits: Vec<GuardEdit>,
}

impl TransformOutcome {
    /// One line per edit.
    pub fn edit_log(&self) -> String {
        let net = &self.transformed;
        let mut out = String::new();
        for e in &self.edits {
            let a = &net.automata[e.automaton];
            let edge = &a.edges[e.edge];
            out.push_str(&format!(
                "{}: {} -> {} on {}: [{}] => [{}]",
                a.name, edge.source, edge.target, edge.action, e.old_guard, e.new_guard
            ));
            for (sp, case) in &e.triggers {
                out.push_str(&format!("; {case} from {sp}"));
                if *case == GammaCase::FromSource {
                    out.push_str(" (edge disabled at its source)");
                }
            }
            out.push('\n');
        }
        out
    }
}

fn code(net: &Network, ai: usize, loc: &Ident) -> i64 {
    net.automata[ai].location_code(loc).expect("checked location")
}

/// `⋁_A p_A ≠ loc_c(A)` over the automata `c` maps, in network order.
fn away_from(net: &Network, c: &Configuration) -> Expr {
    Expr::disjunction(net.automata.iter().enumerate().filter_map(|(ai, a)| {
        c.loc.get(&a.name).map(|l| {
            Expr::ne(
                Expr::Var(Network::positional_name(&a.name)),
                Expr::Int(code(net, ai, l)),
            )
        })
    }))
}

/// Extends guard `g` of edge `e` of automaton `ai` for every stateful
/// priority whose blockee is `e`'s action and whose preError sits at `e`'s
/// source and not at its target. Returns the guard and the rules applied.
pub fn gamma(
    g: &Expr,
    ai: usize,
    e: &Edge,
    sp: &[StatefulPriority],
    net: &Network,
) -> (Expr, Vec<(StatefulPriority, GammaCase)>) {
    let a = &net.automata[ai];
    let mut sorted: Vec<&StatefulPriority> = sp.iter().collect();
    sorted.sort_by_key(|s| s.key());
    let mut clauses: Vec<Expr> = Vec::new();
    let mut hits = Vec::new();
    for s in sorted {
        let Some(here) = s.pre.loc.get(&a.name) else { continue };
        if e.action != s.prio.blockee || &e.source != here || &e.target == here {
            continue;
        }
        let blocker_elsewhere = a.edges.iter().any(|other| {
            other.source == e.source && other.target != e.target && other.action == s.prio.blocker
        });
        let mut clause = away_from(net, &s.pre);
        let case = if blocker_elsewhere {
            clause = Expr::and(
                clause,
                Expr::ne(
                    Expr::Var(Network::positional_name(&a.name)),
                    Expr::Int(code(net, ai, &e.source)),
                ),
            );
            GammaCase::FromSource
        } else {
            GammaCase::AtPreError
        };
        if !clauses.contains(&clause) {
            clauses.push(clause);
        }
        hits.push((s.clone(), case));
    }
    let guard = clauses.into_iter().fold(g.clone(), Expr::and);
    (guard, hits)
}

fn check_priorities(net: &Network, sp: &[StatefulPriority]) -> Result<(), TransformError> {
    let actions: BTreeSet<Ident> = net.actions().into_iter().collect();
    for s in sp {
        let stale = |why: String| TransformError::Stale(s.to_string(), why);
        for (a, l) in &s.pre.loc {
            let ai = net
                .automaton_index(a)
                .ok_or_else(|| stale(format!("unknown automaton `{a}`")))?;
            if net.automata[ai].location_index(l).is_none() {
                return Err(stale(format!("`{a}` has no location `{l}`")));
            }
        }
        for v in s.pre.var.keys() {
            if net.var_index(v).is_none() {
                return Err(stale(format!("unknown variable `{v}`")));
            }
        }
        for act in [&s.prio.blockee, &s.prio.blocker] {
            if !actions.contains(act) {
                return Err(stale(format!("unknown action `{act}`")));
            }
        }
    }
    Ok(())
}

/// Adds positional variables and rewrites guards for `sp`. An empty `sp`
/// leaves the network as it is.
pub fn transform_network(
    net: &Network,
    sp: &[StatefulPriority],
) -> Result<TransformOutcome, TransformError> {
    if net.positional {
        return Err(TransformError::AlreadyTransformed);
    }
    check_priorities(net, sp)?;
    if sp.is_empty() {
        return Ok(TransformOutcome {
            transformed: net.clone(),
            edits: Vec::new(),
        });
    }
    let taken: BTreeSet<Ident> = net
        .variables
        .iter()
        .map(|v| v.name.clone())
        .chain(net.automata.iter().map(|a| a.name.clone()))
        .chain(net.actions())
        .collect();
    let mut out = net.clone();
    for a in &net.automata {
        let p = Network::positional_name(&a.name);
        if taken.contains(&p) {
            return Err(TransformError::NameClash(p));
        }
        out.variables.push(VarDecl {
            name: p,
            ty: crate::expr::Type::Int,
            init: Value::Int(a.code_of_index(a.initial_index())),
        });
    }
    let mut edits = Vec::new();
    for (ai, a) in net.automata.iter().enumerate() {
        let p = Network::positional_name(&a.name);
        for (ei, e) in a.edges.iter().enumerate() {
            let (guard, triggers) = gamma(&e.guard, ai, e, sp, net);
            let new_edge = &mut out.automata[ai].edges[ei];
            if !triggers.is_empty() {
                edits.push(GuardEdit {
                    automaton: ai,
                    edge: ei,
                    old_guard: e.guard.clone(),
                    new_guard: guard.clone(),
                    triggers,
                });
            }
            new_edge.guard = guard;
            new_edge.updates.push(Assignment {
                target: p.clone(),
                expr: Expr::Int(code(net, ai, &e.target)),
            });
        }
    }
    out.positional = true;
    let diags = validate_network(&out);
    if let Some(d) = diags.first() {
        return Err(TransformError::Invalid(d.to_string()));
    }
    Ok(TransformOutcome {
        transformed: out,
        edits,
    })
}

/// Drops the positional variables of a state of a transformed network.
pub fn project(transformed: &Network, s: &State) -> State {
    State {
        locs: s.locs.clone(),
        vals: s.vals[..transformed.base_var_count()].to_vec(),
    }
}

/// Whether every positional variable holds its automaton's location code.
pub fn positions_agree(transformed: &Network, s: &State) -> bool {
    let base = transformed.base_var_count();
    transformed.automata.iter().enumerate().all(|(ai, a)| {
        s.vals.get(base + ai) == Some(&Value::Int(a.code_of_index(s.locs[ai])))
    })
}

/// Reachable deadlocks of `transformed` whose projection is neither a
/// deadlock of `original` nor a state whose every successor is an error.
pub fn new_deadlocks(
    original: &Network,
    transformed: &Network,
    errors: &[Configuration],
    depth: usize,
    bounds: &DomainBounds,
) -> Result<Vec<State>, SemanticsError> {
    let reach = bfs_reach(transformed, depth, bounds)?;
    let mut out = Vec::new();
    for s in reach.states() {
        if !is_deadlock(transformed, s)? {
            continue;
        }
        let p = project(transformed, s);
        let succ = successors(original, &p)?;
        let justified = succ.is_empty()
            || succ
                .iter()
                .all(|t| errors.iter().any(|c| c.matches(original, &t.target)));
        if !justified {
            out.push(s.clone());
        }
    }
    Ok(out)
}
