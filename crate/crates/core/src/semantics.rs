//! Explicit-state semantics: successors, bounded breadth-first reachability
//! and brute-force oracles used to cross-check the symbolic pipeline.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::expr::{eval_expr, EvalError, Rational, Value};
use crate::model::{
    apply_updates, state_satisfies, Configuration, FormulaError, Ident, Network, State,
    StateFormula,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error("unknown action `{0}`")]
    UnknownAction(Ident),
    #[error("initial value of `{0}` lies outside the domain bounds")]
    InitialOutOfBounds(Ident),
}

/// One step of the network. `edges[i]` is the edge index taken by
/// automaton `participants[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub action: Ident,
    pub participants: Vec<usize>,
    pub edges: Vec<usize>,
    pub target: State,
}

impl Transition {
    pub fn is_broadcast(&self) -> bool {
        self.participants.len() > 1
    }
}

pub fn initial_state(net: &Network) -> State {
    State {
        locs: net.automata.iter().map(|a| a.initial_index()).collect(),
        vals: net.variables.iter().map(|v| v.init).collect(),
    }
}

/// All transitions enabled at `s`. A shared action fires only when every
/// automaton that has it in its alphabet has an enabled edge on it; each
/// combination of edges is a separate transition, and participants apply
/// their updates in ascending automaton order.
pub fn successors(net: &Network, s: &State) -> Result<Vec<Transition>, SemanticsError> {
    let env = s.env(net);
    let mut enabled: Vec<BTreeMap<&Ident, Vec<usize>>> = Vec::with_capacity(net.automata.len());
    for (ai, a) in net.automata.iter().enumerate() {
        let here = &a.locations[s.locs[ai]];
        let mut by_action: BTreeMap<&Ident, Vec<usize>> = BTreeMap::new();
        for (ei, e) in a.edges.iter().enumerate() {
            if &e.source != here {
                continue;
            }
            if eval_expr(&e.guard, &env)?.as_bool() == Some(true) {
                by_action.entry(&e.action).or_default().push(ei);
            }
        }
        enabled.push(by_action);
    }

    let mut out = Vec::new();
    for action in net.actions() {
        let holders = net.holders(&action);
        let choices: Vec<&Vec<usize>> = match holders
            .iter()
            .map(|&ai| enabled[ai].get(&action))
            .collect::<Option<Vec<_>>>()
        {
            Some(c) => c,
            None => continue,
        };
        let mut pick = vec![0usize; holders.len()];
        'combos: loop {
            let mut locs = s.locs.clone();
            let mut vals = s.vals.clone();
            let mut edges = Vec::with_capacity(holders.len());
            for (slot, &ai) in holders.iter().enumerate() {
                let ei = choices[slot][pick[slot]];
                let e = &net.automata[ai].edges[ei];
                vals = apply_updates(&e.updates, net, &vals)?;
                locs[ai] = net.automata[ai]
                    .location_index(&e.target)
                    .expect("validated edge target");
                edges.push(ei);
            }
            out.push(Transition {
                action: action.clone(),
                participants: holders.clone(),
                edges,
                target: State { locs, vals },
            });
            for slot in (0..holders.len()).rev() {
                pick[slot] += 1;
                if pick[slot] < choices[slot].len() {
                    continue 'combos;
                }
                pick[slot] = 0;
            }
            break;
        }
    }
    Ok(out)
}

pub fn is_deadlock(net: &Network, s: &State) -> Result<bool, SemanticsError> {
    Ok(successors(net, s)?.is_empty())
}

/// Closed intervals for numeric variables. Exploration drops states that
/// leave them so it always terminates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainBounds {
    pub lo: i64,
    pub hi: i64,
    pub per_var: BTreeMap<Ident, (i64, i64)>,
}

impl Default for DomainBounds {
    fn default() -> Self {
        DomainBounds::new(-64, 64)
    }
}

impl DomainBounds {
    pub fn new(lo: i64, hi: i64) -> Self {
        assert!(lo <= hi, "empty domain");
        DomainBounds {
            lo,
            hi,
            per_var: BTreeMap::new(),
        }
    }

    pub fn with_var(mut self, name: Ident, lo: i64, hi: i64) -> Self {
        assert!(lo <= hi, "empty domain");
        self.per_var.insert(name, (lo, hi));
        self
    }

    pub fn interval(&self, name: &Ident) -> (i64, i64) {
        self.per_var.get(name).copied().unwrap_or((self.lo, self.hi))
    }

    pub fn admits(&self, name: &Ident, v: &Value) -> bool {
        let (lo, hi) = self.interval(name);
        match v {
            Value::Int(i) => lo <= *i && *i <= hi,
            Value::Real(r) => Rational::from_integer(lo) <= *r && *r <= Rational::from_integer(hi),
            Value::Bool(_) => true,
        }
    }

    pub fn contains(&self, net: &Network, s: &State) -> bool {
        net.variables
            .iter()
            .zip(&s.vals)
            .all(|(d, v)| self.admits(&d.name, v))
    }
}

impl FromStr for DomainBounds {
    type Err = String;

    /// `lo:hi`
    fn from_str(s: &str) -> Result<Self, String> {
        let (lo, hi) = s
            .split_once(':')
            .ok_or_else(|| format!("expected `lo:hi`, got `{s}`"))?;
        let lo: i64 = lo.trim().parse().map_err(|e| format!("bad lower bound: {e}"))?;
        let hi: i64 = hi.trim().parse().map_err(|e| format!("bad upper bound: {e}"))?;
        if lo > hi {
            return Err(format!("empty interval {lo}:{hi}"));
        }
        Ok(DomainBounds::new(lo, hi))
    }
}

impl fmt::Display for DomainBounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lo, self.hi)
    }
}

#[derive(Debug, Clone)]
struct Node {
    depth: usize,
    pred: Option<(usize, Ident)>,
}

/// Result of a bounded exploration.
#[derive(Debug, Clone)]
pub struct Reach {
    order: Vec<State>,
    index: HashMap<State, usize>,
    nodes: Vec<Node>,
    /// Successor states dropped for leaving the domain bounds.
    pub pruned: usize,
    /// The search ran out of new states before hitting the depth limit.
    pub saturated: bool,
}

impl Reach {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn contains(&self, s: &State) -> bool {
        self.index.contains_key(s)
    }

    /// States in discovery order.
    pub fn states(&self) -> &[State] {
        &self.order
    }

    pub fn depth_of(&self, s: &State) -> Option<usize> {
        self.index.get(s).map(|&i| self.nodes[i].depth)
    }

    /// Whether the set equals the full reachable set of the network.
    pub fn is_exact(&self) -> bool {
        self.saturated && self.pruned == 0
    }

    /// The witness path to `s` as `(action, state)` steps, initial state excluded.
    pub fn path_to(&self, s: &State) -> Option<Vec<(Ident, State)>> {
        let mut i = *self.index.get(s)?;
        let mut rev = Vec::new();
        while let Some((p, a)) = &self.nodes[i].pred {
            rev.push((a.clone(), self.order[i].clone()));
            i = *p;
        }
        rev.reverse();
        Some(rev)
    }

    pub fn to_set(&self) -> BTreeSet<State> {
        self.order.iter().cloned().collect()
    }
}

/// Every state reachable in at most `depth` steps whose variables stay
/// within `bounds`, each with one shortest witness path.
pub fn bfs_reach(net: &Network, depth: usize, bounds: &DomainBounds) -> Result<Reach, SemanticsError> {
    let init = initial_state(net);
    if let Some(d) = net
        .variables
        .iter()
        .zip(&init.vals)
        .find(|(d, v)| !bounds.admits(&d.name, v))
    {
        return Err(SemanticsError::InitialOutOfBounds(d.0.name.clone()));
    }
    let mut reach = Reach {
        order: vec![init.clone()],
        index: HashMap::from([(init, 0)]),
        nodes: vec![Node { depth: 0, pred: None }],
        pruned: 0,
        saturated: false,
    };
    let mut frontier = vec![0usize];
    for d in 1..=depth {
        let mut next = Vec::new();
        for &i in &frontier {
            let s = reach.order[i].clone();
            for t in successors(net, &s)? {
                if !bounds.contains(net, &t.target) {
                    reach.pruned += 1;
                    continue;
                }
                if reach.index.contains_key(&t.target) {
                    continue;
                }
                let j = reach.order.len();
                reach.index.insert(t.target.clone(), j);
                reach.order.push(t.target);
                reach.nodes.push(Node {
                    depth: d,
                    pred: Some((i, t.action)),
                });
                next.push(j);
            }
        }
        if next.is_empty() {
            reach.saturated = true;
            return Ok(reach);
        }
        frontier = next;
    }
    // one more look to tell whether the limit cut anything off
    let mut more = false;
    for &i in &frontier {
        let s = reach.order[i].clone();
        for t in successors(net, &s)? {
            if bounds.contains(net, &t.target) && !reach.index.contains_key(&t.target) {
                more = true;
            }
        }
    }
    reach.saturated = !more;
    Ok(reach)
}

/// Reachable states (within the bound) with a transition into a state
/// satisfying `f`.
pub fn preerrors_oracle(
    net: &Network,
    f: &StateFormula,
    depth: usize,
    bounds: &DomainBounds,
) -> Result<BTreeSet<State>, SemanticsError> {
    f.check(net)?;
    let reach = bfs_reach(net, depth, bounds)?;
    let mut out = BTreeSet::new();
    for s in reach.states() {
        for t in successors(net, s)? {
            if state_satisfies(net, &t.target, f)? {
                out.insert(s.clone());
                break;
            }
        }
    }
    Ok(out)
}

/// Whether some transition on `action` from `pre` lands in a state matched
/// by one of `errors`.
pub fn action_reaches_error(
    net: &Network,
    pre: &State,
    action: &Ident,
    errors: &[Configuration],
) -> Result<bool, SemanticsError> {
    if !net.actions().contains(action) {
        return Err(SemanticsError::UnknownAction(action.clone()));
    }
    Ok(successors(net, pre)?
        .iter()
        .filter(|t| &t.action == action)
        .any(|t| errors.iter().any(|c| c.matches(net, &t.target))))
}

/// Whether some transition on `action` from `pre` avoids every member of
/// `errors`.
pub fn action_avoids_errors(
    net: &Network,
    pre: &State,
    action: &Ident,
    errors: &[Configuration],
) -> Result<bool, SemanticsError> {
    Ok(successors(net, pre)?
        .iter()
        .filter(|t| &t.action == action)
        .any(|t| !errors.iter().any(|c| c.matches(net, &t.target))))
}

/// No preError (within the bound) has an action that can both reach and
/// avoid `f`. Holds only up to the bound.
pub fn check_semantical_restriction(
    net: &Network,
    f: &StateFormula,
    depth: usize,
    bounds: &DomainBounds,
) -> Result<bool, SemanticsError> {
    for pre in preerrors_oracle(net, f, depth, bounds)? {
        let mut seen: BTreeMap<Ident, (bool, bool)> = BTreeMap::new();
        for t in successors(net, &pre)? {
            let hit = state_satisfies(net, &t.target, f)?;
            let entry = seen.entry(t.action).or_default();
            if hit {
                entry.0 = true;
            } else {
                entry.1 = true;
            }
        }
        if seen.values().any(|&(hit, miss)| hit && miss) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Pairwise disjoint alphabets and no action on two distinct edges.
pub fn check_syntactical_restriction(net: &Network) -> bool {
    let mut count: BTreeMap<&Ident, usize> = BTreeMap::new();
    for a in &net.automata {
        for e in &a.edges {
            *count.entry(&e.action).or_default() += 1;
        }
    }
    count.values().all(|&n| n == 1)
}

/// Renders a path as `step k: <action> -> (loc vector) {var=val,...}` lines,
/// starting with the initial state as step 0.
pub fn format_trace(net: &Network, init: &State, steps: &[(Ident, State)]) -> String {
    let mut out = format!("step 0: init -> {}\n", init.display(net));
    for (k, (a, s)) in steps.iter().enumerate() {
        out.push_str(&format!("step {}: {} -> {}\n", k + 1, a, s.display(net)));
    }
    out
}

/// A uniformly random run of at most `depth` steps; stops early at a deadlock.
pub fn random_trace<R: Rng>(
    net: &Network,
    depth: usize,
    rng: &mut R,
) -> Result<Vec<(Ident, State)>, SemanticsError> {
    let mut s = initial_state(net);
    let mut out = Vec::new();
    for _ in 0..depth {
        let ts = successors(net, &s)?;
        let Some(t) = ts.choose(rng) else { break };
        s = t.target.clone();
        out.push((t.action.clone(), s.clone()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::fixtures::{self, n1_state};
    use crate::model::{id, Automaton, Edge};
    use crate::parser::parse_network;

    fn moves(net: &Network, s: &State) -> BTreeSet<(String, Vec<usize>, String)> {
        successors(net, s)
            .unwrap()
            .into_iter()
            .map(|t| (t.action.to_string(), t.participants, t.target.display(net).to_string()))
            .collect()
    }

    #[test]
    fn initial_states() {
        let n1 = fixtures::n1();
        assert_eq!(initial_state(&n1), n1_state(&n1, "1", "1", 1));
        let n2 = fixtures::n2();
        assert_eq!(initial_state(&n2).display(&n2).to_string(), "(A0.1, A1.1) {}");
    }

    #[test]
    fn n1_initial_successors() {
        let net = fixtures::n1();
        let got = moves(&net, &initial_state(&net));
        let want: BTreeSet<_> = [
            ("a", vec![0], "(A0.2, A1.1) {x=2}"),
            ("d", vec![1], "(A0.1, A1.2) {x=1}"),
            ("e", vec![0, 1], "(A0.4, A1.4) {x=1}"),
        ]
        .into_iter()
        .map(|(a, p, s)| (a.to_string(), p, s.to_string()))
        .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn n1_only_b_and_c_at_first_preerror() {
        let net = fixtures::n1();
        let s = n1_state(&net, "5", "4", 0);
        let acts: Vec<String> = successors(&net, &s)
            .unwrap()
            .into_iter()
            .map(|t| t.action.to_string())
            .collect();
        assert_eq!(acts, vec!["b", "c"]);
    }

    #[test]
    fn deadlocks() {
        let net = fixtures::n1();
        assert!(!is_deadlock(&net, &n1_state(&net, "3", "3", 4)).unwrap());
        assert!(!is_deadlock(&net, &n1_state(&net, "2", "5", 2)).unwrap());
        let stuck = parse_network("network S { automaton A { init s; locations s, t; edge t -> s on go; } }").unwrap();
        assert!(is_deadlock(&stuck, &initial_state(&stuck)).unwrap());
    }

    #[test]
    fn shared_action_needs_every_holder() {
        let net = Network::new("B")
            .automaton(Automaton::new("P", &["p0", "p1"], "p0").edge(Edge::new("p0", "sync", "p1")))
            .automaton(Automaton::new("Q", &["q0", "q1"], "q0").edge(Edge::new("q1", "sync", "q0")));
        assert!(successors(&net, &initial_state(&net)).unwrap().is_empty());
    }

    #[test]
    fn broadcast_updates_in_index_order() {
        let net = Network::new("B")
            .var("x", Value::Int(1))
            .automaton(
                Automaton::new("P", &["p0", "p1"], "p0")
                    .edge(Edge::new("p0", "sync", "p1").assign("x", Expr::bin(crate::expr::BinOp::Mul, Expr::var("x"), Expr::Int(3)))),
            )
            .automaton(
                Automaton::new("Q", &["q0", "q1"], "q0")
                    .edge(Edge::new("q0", "sync", "q1").assign("x", Expr::bin(crate::expr::BinOp::Add, Expr::var("x"), Expr::Int(1)))),
            );
        let ts = successors(&net, &initial_state(&net)).unwrap();
        assert_eq!(ts.len(), 1);
        assert_eq!(ts[0].target.vals, vec![Value::Int(4)]);
    }

    #[test]
    fn broadcast_combinations() {
        let net = parse_network(
            "network C { automaton P { init 0; locations 0, 1, 2; edge 0 -> 1 on s; edge 0 -> 2 on s; } \
             automaton Q { init q; locations q, r, t; edge q -> r on s; edge q -> t on s; } }",
        )
        .unwrap();
        assert_eq!(successors(&net, &initial_state(&net)).unwrap().len(), 4);
    }

    #[test]
    fn n2_reach() {
        let net = fixtures::n2();
        let r = bfs_reach(&net, 10, &DomainBounds::default()).unwrap();
        assert_eq!(r.len(), 4);
        assert!(r.is_exact());
        let r0 = bfs_reach(&net, 0, &DomainBounds::default()).unwrap();
        assert_eq!(r0.states(), &[initial_state(&net)]);
    }

    #[test]
    fn n1_depth3_contains_error_with_witness() {
        let net = fixtures::n1();
        let r = bfs_reach(&net, 3, &DomainBounds::default()).unwrap();
        let err = n1_state(&net, "5", "5", -1);
        assert!(r.contains(&err));
        let path = r.path_to(&err).unwrap();
        assert_eq!(path.len(), 3);
        assert_eq!(path[0].0, id("e"));
        let trace = format_trace(&net, &initial_state(&net), &path);
        assert!(trace.starts_with("step 0: init -> (A0.1, A1.1) {x=1}\nstep 1: e -> (A0.4, A1.4) {x=1}\n"));
        assert!(trace.ends_with("step 3: c -> (A0.5, A1.5) {x=-1}\n") || trace.ends_with("step 3: a -> (A0.5, A1.5) {x=-1}\n"));
    }

    #[test]
    fn bfs_is_monotone() {
        let net = fixtures::n1();
        let b = DomainBounds::new(-4, 4);
        let mut prev = bfs_reach(&net, 0, &b).unwrap().to_set();
        for d in 1..8 {
            let cur = bfs_reach(&net, d, &b).unwrap().to_set();
            assert!(prev.is_subset(&cur));
            prev = cur;
        }
    }

    #[test]
    fn pruning_is_reported() {
        let net = fixtures::n1();
        let r = bfs_reach(&net, 30, &DomainBounds::new(-2, 2)).unwrap();
        assert!(r.pruned > 0);
        assert!(!r.is_exact());
        assert!(r.states().iter().all(|s| DomainBounds::new(-2, 2).contains(&net, s)));
    }

    #[test]
    fn preerrors() {
        let net = fixtures::n1();
        let got = preerrors_oracle(&net, &fixtures::n1_error(), 20, &DomainBounds::default()).unwrap();
        let want: BTreeSet<_> = [n1_state(&net, "5", "4", 0), n1_state(&net, "4", "5", 0)].into();
        assert_eq!(got, want);

        let n2 = fixtures::n2();
        let got = preerrors_oracle(&n2, &fixtures::n2_error(), 10, &DomainBounds::default()).unwrap();
        let shown: BTreeSet<String> = got.iter().map(|s| s.display(&n2).to_string()).collect();
        assert_eq!(
            shown,
            ["(A0.1, A1.2) {}", "(A0.2, A1.1) {}"].iter().map(|s| s.to_string()).collect()
        );

        let safe = fixtures::safe();
        assert!(preerrors_oracle(&safe, &fixtures::safe_error(), 20, &DomainBounds::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn one_step_error_checks() {
        let net = fixtures::n1();
        let pre = n1_state(&net, "5", "4", 0);
        let errs = vec![Configuration::from_state(&net, &n1_state(&net, "5", "5", -1), 0)];
        assert!(action_reaches_error(&net, &pre, &id("c"), &errs).unwrap());
        assert!(!action_reaches_error(&net, &pre, &id("b"), &errs).unwrap());
        assert!(!action_reaches_error(&net, &pre, &id("a"), &errs).unwrap());
        assert!(action_reaches_error(&net, &pre, &id("zz"), &errs).is_err());
        let formula = vec![Configuration::from_formula(&fixtures::n1_error())];
        assert!(action_reaches_error(&net, &pre, &id("c"), &formula).unwrap());
        assert!(action_avoids_errors(&net, &pre, &id("b"), &formula).unwrap());
    }

    #[test]
    fn restrictions() {
        let b = DomainBounds::default();
        assert!(check_semantical_restriction(&fixtures::n1(), &fixtures::n1_error(), 20, &b).unwrap());
        assert!(check_semantical_restriction(&fixtures::n2(), &fixtures::n2_error(), 10, &b).unwrap());
        let split = parse_network(
            "network V { automaton A { init 0; locations 0, 1, 2; edge 0 -> 1 on go; edge 0 -> 2 on go; } }",
        )
        .unwrap();
        let f = crate::parser::parse_query("EF (A.1)").unwrap();
        assert!(!check_semantical_restriction(&split, &f, 5, &b).unwrap());

        assert!(!check_syntactical_restriction(&fixtures::n1()));
        assert!(!check_syntactical_restriction(&fixtures::n2()));
        assert!(check_syntactical_restriction(&fixtures::chain()));
    }

    #[test]
    fn bounds_parse() {
        let b: DomainBounds = "-4:4".parse().unwrap();
        assert_eq!((b.lo, b.hi), (-4, 4));
        assert!("4:-4".parse::<DomainBounds>().is_err());
        assert!("4".parse::<DomainBounds>().is_err());
    }

    #[test]
    fn random_trace_follows_successors() {
        use rand::SeedableRng;
        let net = fixtures::n1();
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let trace = random_trace(&net, 12, &mut rng).unwrap();
        let mut s = initial_state(&net);
        for (a, t) in &trace {
            assert!(successors(&net, &s).unwrap().iter().any(|x| &x.action == a && &x.target == t));
            s = t.clone();
        }
    }
}
