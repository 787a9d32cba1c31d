//! Syntactic model of a network of discrete automata and the value types
//! shared by the semantics, the encoder and the synthesis loop.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{eval_expr, Env, EvalError, Expr, Type, Value};

/// A name of an automaton, location, action or variable.
///
/// General identifiers match `[A-Za-z_][A-Za-z0-9_]*`. Location names may
/// also be decimal numerals (`A0.5`), which are scoped to their automaton.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Ident(String);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid identifier `{0}`")]
pub struct InvalidIdent(pub String);

impl Ident {
    pub fn new(name: impl Into<String>) -> Result<Self, InvalidIdent> {
        let name = name.into();
        if is_symbolic(&name) {
            Ok(Ident(name))
        } else {
            Err(InvalidIdent(name))
        }
    }

    /// Accepts symbolic names and decimal numerals.
    pub fn location(name: impl Into<String>) -> Result<Self, InvalidIdent> {
        let name = name.into();
        if is_symbolic(&name) || is_numeral(&name) {
            Ok(Ident(name))
        } else {
            Err(InvalidIdent(name))
        }
    }

    pub(crate) fn new_unchecked(name: impl Into<String>) -> Self {
        Ident(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_numeral(&self) -> bool {
        is_numeral(&self.0)
    }
}

fn is_symbolic(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn is_numeral(s: &str) -> bool {
    !s.is_empty() && s.len() <= 18 && s.bytes().all(|b| b.is_ascii_digit())
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::borrow::Borrow<str> for Ident {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// Convenience for tests and builders; panics on an invalid name.
pub fn id(name: &str) -> Ident {
    Ident::location(name).unwrap_or_else(|e| panic!("{e}"))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    pub target: Ident,
    pub expr: Expr,
}

impl Assignment {
    pub fn new(target: &str, expr: Expr) -> Self {
        Assignment {
            target: id(target),
            expr,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub source: Ident,
    pub action: Ident,
    pub guard: Expr,
    pub updates: Vec<Assignment>,
    pub target: Ident,
}

impl Edge {
    pub fn new(source: &str, action: &str, target: &str) -> Self {
        Edge {
            source: id(source),
            action: id(action),
            guard: Expr::tt(),
            updates: Vec::new(),
            target: id(target),
        }
    }

    pub fn when(mut self, guard: Expr) -> Self {
        self.guard = guard;
        self
    }

    pub fn assign(mut self, target: &str, expr: Expr) -> Self {
        self.updates.push(Assignment::new(target, expr));
        self
    }

    /// Variables this edge writes, in first-write order.
    pub fn written_vars(&self) -> Vec<&Ident> {
        let mut out: Vec<&Ident> = Vec::new();
        for a in &self.updates {
            if !out.contains(&&a.target) {
                out.push(&a.target);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Automaton {
    pub name: Ident,
    pub locations: Vec<Ident>,
    pub initial: Ident,
    pub edges: Vec<Edge>,
}

impl Automaton {
    pub fn new(name: &str, locations: &[&str], initial: &str) -> Self {
        Automaton {
            name: id(name),
            locations: locations.iter().map(|l| id(l)).collect(),
            initial: id(initial),
            edges: Vec::new(),
        }
    }

    pub fn edge(mut self, e: Edge) -> Self {
        self.edges.push(e);
        self
    }

    /// The alphabet: every action used on an edge, in first-use order.
    pub fn actions(&self) -> Vec<&Ident> {
        let mut out: Vec<&Ident> = Vec::new();
        for e in &self.edges {
            if !out.contains(&&e.action) {
                out.push(&e.action);
            }
        }
        out
    }

    pub fn has_action(&self, action: &Ident) -> bool {
        self.edges.iter().any(|e| &e.action == action)
    }

    pub fn location_index(&self, loc: &Ident) -> Option<usize> {
        self.locations.iter().position(|l| l == loc)
    }

    fn numeric_codes(&self) -> bool {
        self.locations.iter().all(Ident::is_numeral)
    }

    /// Integer code of a location in solver encodings and positional
    /// variables: the numeral itself when all locations are numerals,
    /// otherwise the 0-based declaration index.
    pub fn code_of_index(&self, idx: usize) -> i64 {
        if self.numeric_codes() {
            self.locations[idx].as_str().parse().expect("numeral")
        } else {
            idx as i64
        }
    }

    pub fn location_code(&self, loc: &Ident) -> Option<i64> {
        self.location_index(loc).map(|i| self.code_of_index(i))
    }

    pub fn index_of_code(&self, code: i64) -> Option<usize> {
        (0..self.locations.len()).find(|&i| self.code_of_index(i) == code)
    }

    pub fn initial_index(&self) -> usize {
        self.location_index(&self.initial)
            .expect("initial location is declared")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDecl {
    pub name: Ident,
    pub ty: Type,
    pub init: Value,
}

impl VarDecl {
    pub fn new(name: &str, init: Value) -> Self {
        VarDecl {
            name: id(name),
            ty: init.ty(),
            init,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    pub name: Ident,
    pub variables: Vec<VarDecl>,
    pub automata: Vec<Automaton>,
    /// Set when the last `automata.len()` integer variables are the
    /// positional variables `p_<automaton>` added by the transformation.
    pub positional: bool,
}

impl Network {
    pub fn new(name: &str) -> Self {
        Network {
            name: id(name),
            variables: Vec::new(),
            automata: Vec::new(),
            positional: false,
        }
    }

    pub fn var(mut self, name: &str, init: Value) -> Self {
        self.variables.push(VarDecl::new(name, init));
        self
    }

    pub fn automaton(mut self, a: Automaton) -> Self {
        self.automata.push(a);
        self
    }

    pub fn automaton_index(&self, name: &Ident) -> Option<usize> {
        self.automata.iter().position(|a| &a.name == name)
    }

    pub fn automaton_by_name(&self, name: &str) -> Option<&Automaton> {
        self.automata.iter().find(|a| a.name.as_str() == name)
    }

    pub fn var_index(&self, name: &Ident) -> Option<usize> {
        self.variables.iter().position(|v| &v.name == name)
    }

    pub fn var_type(&self, name: &Ident) -> Option<Type> {
        self.variables.iter().find(|v| &v.name == name).map(|v| v.ty)
    }

    /// All actions of the network, in first-use order over automata.
    pub fn actions(&self) -> Vec<Ident> {
        let mut out: Vec<Ident> = Vec::new();
        for a in &self.automata {
            for act in a.actions() {
                if !out.contains(act) {
                    out.push(act.clone());
                }
            }
        }
        out
    }

    /// Indices of the automata whose alphabet contains `action`.
    pub fn holders(&self, action: &Ident) -> Vec<usize> {
        (0..self.automata.len())
            .filter(|&i| self.automata[i].has_action(action))
            .collect()
    }

    pub fn is_shared(&self, action: &Ident) -> bool {
        self.holders(action).len() > 1
    }

    pub fn edge_count(&self) -> usize {
        self.automata.iter().map(|a| a.edges.len()).sum()
    }

    /// Number of variables declared before the positional ones.
    pub fn base_var_count(&self) -> usize {
        if self.positional {
            self.variables.len() - self.automata.len()
        } else {
            self.variables.len()
        }
    }

    pub fn positional_name(automaton: &Ident) -> Ident {
        Ident::new_unchecked(format!("p_{automaton}"))
    }
}

/// Where a diagnostic points inside a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Locus {
    Network,
    Variable(usize),
    Automaton(usize),
    /// Automaton index, location index.
    Location(usize, usize),
    /// Automaton index, edge index.
    Edge(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub locus: Locus,
    pub message: String,
    pub span: Option<SourceSpan>,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.span {
            Some(s) => write!(f, "{s}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Checks every well-formedness invariant of a network and returns one
/// diagnostic per violation; an empty result means the network is valid.
pub fn validate_network(net: &Network) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut push = |locus: Locus, message: String| {
        diags.push(Diagnostic {
            locus,
            message,
            span: None,
        })
    };

    if net.automata.is_empty() {
        push(Locus::Network, "a network needs at least one automaton".into());
    }

    let mut var_names: BTreeMap<&Ident, usize> = BTreeMap::new();
    for (i, v) in net.variables.iter().enumerate() {
        if v.name.is_numeral() {
            push(Locus::Variable(i), format!("`{}` is not a valid variable name", v.name));
        }
        if v.name.as_str().contains("__") {
            push(Locus::Variable(i), format!("identifier `{}` must not contain `__`", v.name));
        }
        if var_names.insert(&v.name, i).is_some() {
            push(Locus::Variable(i), format!("variable `{}` declared twice", v.name));
        }
        if v.init.ty() != v.ty {
            push(
                Locus::Variable(i),
                format!("initial value of `{}` is {}, expected {}", v.name, v.init.ty(), v.ty),
            );
        }
    }

    let mut automaton_names: BTreeMap<&Ident, usize> = BTreeMap::new();
    // symbolic location names are network-wide; numerals are automaton-scoped
    let mut symbolic_locations: BTreeMap<&Ident, usize> = BTreeMap::new();
    for (ai, a) in net.automata.iter().enumerate() {
        if a.name.is_numeral() || a.name.as_str().contains("__") {
            push(Locus::Automaton(ai), format!("`{}` is not a valid automaton name", a.name));
        }
        if automaton_names.insert(&a.name, ai).is_some() {
            push(Locus::Automaton(ai), format!("automaton `{}` declared twice", a.name));
        }
        if var_names.contains_key(&a.name) {
            push(
                Locus::Automaton(ai),
                format!("`{}` names both an automaton and a variable", a.name),
            );
        }
        if a.locations.is_empty() {
            push(Locus::Automaton(ai), format!("automaton `{}` has no locations", a.name));
        }
        let mut seen = BTreeSet::new();
        for (li, l) in a.locations.iter().enumerate() {
            if !seen.insert(l) {
                push(
                    Locus::Location(ai, li),
                    format!("location `{l}` declared twice in `{}`", a.name),
                );
                continue;
            }
            if l.as_str().contains("__") {
                push(Locus::Location(ai, li), format!("identifier `{l}` must not contain `__`"));
            }
            if !l.is_numeral() {
                if let Some(&other) = symbolic_locations.get(l) {
                    push(
                        Locus::Location(ai, li),
                        format!(
                            "location `{l}` of `{}` is also a location of `{}`",
                            a.name, net.automata[other].name
                        ),
                    );
                } else {
                    symbolic_locations.insert(l, ai);
                }
            }
        }
        if a.location_index(&a.initial).is_none() {
            push(
                Locus::Automaton(ai),
                format!("initial location `{}` of `{}` is not declared", a.initial, a.name),
            );
        }
        for (ei, e) in a.edges.iter().enumerate() {
            let locus = Locus::Edge(ai, ei);
            for end in [&e.source, &e.target] {
                if a.location_index(end).is_none() {
                    push(locus, format!("edge uses undeclared location `{end}` of `{}`", a.name));
                }
            }
            if e.action.is_numeral() || e.action.as_str().contains("__") {
                push(locus, format!("`{}` is not a valid action name", e.action));
            }
            if var_names.contains_key(&e.action) || net.automata.iter().any(|b| b.name == e.action) {
                push(
                    locus,
                    format!("action `{}` clashes with a variable or automaton name", e.action),
                );
            }
            let lookup = |v: &Ident| net.var_type(v);
            match e.guard.type_of(&lookup) {
                Ok(Type::Bool) => {}
                Ok(t) => push(locus, format!("guard has type {t}, expected bool")),
                Err(err) => push(locus, format!("guard: {err}")),
            }
            if !e.guard.is_linear() {
                push(locus, "guard is not linear".into());
            }
            for asg in &e.updates {
                match net.var_type(&asg.target) {
                    None => push(locus, format!("assignment to undeclared variable `{}`", asg.target)),
                    Some(target_ty) => match asg.expr.type_of(&lookup) {
                        Ok(t) if t == target_ty => {}
                        Ok(t) => push(
                            locus,
                            format!("`{}` has type {target_ty} but is assigned a {t}", asg.target),
                        ),
                        Err(err) => push(locus, format!("update of `{}`: {err}", asg.target)),
                    },
                }
                if !asg.expr.is_linear() {
                    push(locus, format!("update of `{}` is not linear", asg.target));
                }
            }
        }
    }

    if net.positional {
        let base = net.variables.len().checked_sub(net.automata.len());
        match base {
            None => push(Locus::Network, "positional flag set without positional variables".into()),
            Some(base) => {
                for (ai, a) in net.automata.iter().enumerate() {
                    let v = &net.variables[base + ai];
                    let expected = Network::positional_name(&a.name);
                    let init_ok = a
                        .location_code(&a.initial)
                        .map(|c| v.init == Value::Int(c))
                        .unwrap_or(false);
                    if v.name != expected || v.ty != Type::Int || !init_ok {
                        push(
                            Locus::Variable(base + ai),
                            format!("expected positional variable `{expected}` initialised to the initial location of `{}`", a.name),
                        );
                    }
                }
            }
        }
    }

    diags
}

/// A concrete state: one location index per automaton (network order) and
/// one value per declared variable (declaration order).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State {
    pub locs: Vec<usize>,
    pub vals: Vec<Value>,
}

/// Valuation view of a state, resolving names through the network.
pub struct StateEnv<'a> {
    pub net: &'a Network,
    pub vals: &'a [Value],
}

impl Env for StateEnv<'_> {
    fn lookup(&self, name: &Ident) -> Option<Value> {
        self.net.var_index(name).and_then(|i| self.vals.get(i).copied())
    }
}

impl State {
    pub fn env<'a>(&'a self, net: &'a Network) -> StateEnv<'a> {
        StateEnv {
            net,
            vals: &self.vals,
        }
    }

    pub fn location<'a>(&self, net: &'a Network, automaton: usize) -> &'a Ident {
        &net.automata[automaton].locations[self.locs[automaton]]
    }

    /// `(A0.1, A1.1) {x=1}`
    pub fn display<'a>(&'a self, net: &'a Network) -> impl fmt::Display + 'a {
        StateDisplay { state: self, net }
    }
}

struct StateDisplay<'a> {
    state: &'a State,
    net: &'a Network,
}

impl fmt::Display for StateDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, a) in self.net.automata.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}.{}", a.name, a.locations[self.state.locs[i]])?;
        }
        f.write_str(") {")?;
        for (i, v) in self.net.variables.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}={}", v.name, self.state.vals[i])?;
        }
        f.write_str("}")
    }
}

/// Applies an update vector left to right; later assignments see earlier ones.
pub fn apply_updates(
    updates: &[Assignment],
    net: &Network,
    vals: &[Value],
) -> Result<Vec<Value>, EvalError> {
    let mut out = vals.to_vec();
    for asg in updates {
        let idx = net
            .var_index(&asg.target)
            .ok_or_else(|| EvalError::UnknownTarget(asg.target.clone()))?;
        let v = eval_expr(&asg.expr, &StateEnv { net, vals: &out })?;
        if v.ty() != net.variables[idx].ty {
            return Err(EvalError::TypeMismatch(format!(
                "`{}` has type {} but is assigned a {}",
                asg.target,
                net.variables[idx].ty,
                v.ty()
            )));
        }
        out[idx] = v;
    }
    Ok(out)
}

/// Same as [`apply_updates`] over a name-keyed valuation.
pub fn apply_updates_map(
    updates: &[Assignment],
    vals: &BTreeMap<Ident, Value>,
) -> Result<BTreeMap<Ident, Value>, EvalError> {
    let mut out = vals.clone();
    for asg in updates {
        let old = out
            .get(&asg.target)
            .copied()
            .ok_or_else(|| EvalError::UnknownTarget(asg.target.clone()))?;
        let v = eval_expr(&asg.expr, &out)?;
        if v.ty() != old.ty() {
            return Err(EvalError::TypeMismatch(format!(
                "`{}` has type {} but is assigned a {}",
                asg.target,
                old.ty(),
                v.ty()
            )));
        }
        out.insert(asg.target.clone(), v);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub automaton: Ident,
    pub location: Ident,
    pub negated: bool,
}

/// A conjunction of `A.l` / `!A.l` literals.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateFormula {
    pub literals: Vec<Literal>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("unknown automaton `{0}`")]
    UnknownAutomaton(Ident),
    #[error("automaton `{0}` has no location `{1}`")]
    UnknownLocation(Ident, Ident),
    #[error("a state formula needs at least one literal")]
    Empty,
}

impl StateFormula {
    pub fn new(literals: Vec<Literal>) -> Self {
        StateFormula { literals }
    }

    pub fn positive(pairs: &[(&str, &str)]) -> Self {
        StateFormula {
            literals: pairs
                .iter()
                .map(|(a, l)| Literal {
                    automaton: id(a),
                    location: id(l),
                    negated: false,
                })
                .collect(),
        }
    }

    pub fn check(&self, net: &Network) -> Result<(), FormulaError> {
        if self.literals.is_empty() {
            return Err(FormulaError::Empty);
        }
        for lit in &self.literals {
            let a = net
                .automata
                .iter()
                .find(|a| a.name == lit.automaton)
                .ok_or_else(|| FormulaError::UnknownAutomaton(lit.automaton.clone()))?;
            if a.location_index(&lit.location).is_none() {
                return Err(FormulaError::UnknownLocation(
                    lit.automaton.clone(),
                    lit.location.clone(),
                ));
            }
        }
        Ok(())
    }
}

impl fmt::Display for StateFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("EF (")?;
        for (i, lit) in self.literals.iter().enumerate() {
            if i > 0 {
                f.write_str(" && ")?;
            }
            if lit.negated {
                f.write_str("!")?;
            }
            write!(f, "{}.{}", lit.automaton, lit.location)?;
        }
        f.write_str(")")
    }
}

pub fn state_satisfies(net: &Network, s: &State, f: &StateFormula) -> Result<bool, FormulaError> {
    f.check(net)?;
    Ok(f.literals.iter().all(|lit| {
        let ai = net.automaton_index(&lit.automaton).expect("checked");
        let here = s.location(net, ai) == &lit.location;
        here != lit.negated
    }))
}

/// `(blockee, blocker)`: when both are enabled, blocker edges go first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Priority {
    pub blockee: Ident,
    pub blocker: Ident,
}

impl Priority {
    pub fn new(blockee: &str, blocker: &str) -> Self {
        Priority {
            blockee: id(blockee),
            blocker: id(blocker),
        }
    }

    pub fn is_reflexive(&self) -> bool {
        self.blockee == self.blocker
    }
}

impl fmt::Display for Priority {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.blockee, self.blocker)
    }
}

/// A snapshot extracted from a solver model at one unfolding step. All maps
/// are partial; `loc_excluded` carries negated location literals of an
/// error formula.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub loc: BTreeMap<Ident, Ident>,
    pub loc_excluded: BTreeMap<Ident, BTreeSet<Ident>>,
    pub var: BTreeMap<Ident, Value>,
    pub act: BTreeMap<Ident, bool>,
    pub stp: usize,
}

impl Configuration {
    /// The configuration denoting an error formula.
    pub fn from_formula(f: &StateFormula) -> Self {
        let mut c = Configuration::default();
        for lit in &f.literals {
            if lit.negated {
                c.loc_excluded
                    .entry(lit.automaton.clone())
                    .or_default()
                    .insert(lit.location.clone());
            } else {
                c.loc.insert(lit.automaton.clone(), lit.location.clone());
            }
        }
        c
    }

    /// The full loc/var snapshot of a concrete state.
    pub fn from_state(net: &Network, s: &State, stp: usize) -> Self {
        Configuration {
            loc: net
                .automata
                .iter()
                .enumerate()
                .map(|(i, a)| (a.name.clone(), a.locations[s.locs[i]].clone()))
                .collect(),
            loc_excluded: BTreeMap::new(),
            var: net
                .variables
                .iter()
                .zip(&s.vals)
                .map(|(d, v)| (d.name.clone(), *v))
                .collect(),
            act: BTreeMap::new(),
            stp,
        }
    }

    pub fn is_vacuous(&self) -> bool {
        self.loc.is_empty() && self.var.is_empty() && self.loc_excluded.is_empty()
    }

    /// True when `loc` maps every automaton and `var` every variable.
    pub fn is_total(&self, net: &Network) -> bool {
        net.automata.iter().all(|a| self.loc.contains_key(&a.name))
            && net.variables.iter().all(|v| self.var.contains_key(&v.name))
    }

    /// The state denoted by a total configuration.
    pub fn to_state(&self, net: &Network) -> Option<State> {
        let locs = net
            .automata
            .iter()
            .map(|a| self.loc.get(&a.name).and_then(|l| a.location_index(l)))
            .collect::<Option<Vec<_>>>()?;
        let vals = net
            .variables
            .iter()
            .map(|v| self.var.get(&v.name).copied())
            .collect::<Option<Vec<_>>>()?;
        Some(State { locs, vals })
    }

    /// Whether a concrete state matches every mapped entry.
    pub fn matches(&self, net: &Network, s: &State) -> bool {
        let loc_ok = self.loc.iter().all(|(a, l)| {
            net.automaton_index(a)
                .map(|ai| s.location(net, ai) == l)
                .unwrap_or(false)
        });
        let excl_ok = self.loc_excluded.iter().all(|(a, ls)| {
            net.automaton_index(a)
                .map(|ai| !ls.contains(s.location(net, ai)))
                .unwrap_or(false)
        });
        let var_ok = self.var.iter().all(|(v, val)| {
            net.var_index(v)
                .map(|vi| s.vals[vi] == *val)
                .unwrap_or(false)
        });
        loc_ok && excl_ok && var_ok
    }

    /// The (loc, excluded, var) part that identifies a state.
    pub fn snapshot(&self) -> Configuration {
        Configuration {
            loc: self.loc.clone(),
            loc_excluded: self.loc_excluded.clone(),
            var: self.var.clone(),
            act: BTreeMap::new(),
            stp: 0,
        }
    }

    pub fn same_snapshot(&self, other: &Configuration) -> bool {
        self.loc == other.loc && self.loc_excluded == other.loc_excluded && self.var == other.var
    }

    /// The action mapped to `true`, if exactly one is.
    pub fn true_action(&self) -> Option<&Ident> {
        let mut trues = self.act.iter().filter(|(_, &b)| b).map(|(a, _)| a);
        let first = trues.next()?;
        if trues.next().is_some() {
            None
        } else {
            Some(first)
        }
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        let mut first = true;
        let mut sep = |f: &mut fmt::Formatter<'_>| {
            if first {
                first = false;
                Ok(())
            } else {
                f.write_str(", ")
            }
        };
        for (a, l) in &self.loc {
            sep(f)?;
            write!(f, "{a}={l}")?;
        }
        for (a, ls) in &self.loc_excluded {
            for l in ls {
                sep(f)?;
                write!(f, "{a}!={l}")?;
            }
        }
        for (v, val) in &self.var {
            sep(f)?;
            write!(f, "{v}={val}")?;
        }
        write!(f, "; step {}>", self.stp)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StatefulPriority {
    pub pre: Configuration,
    pub prio: Priority,
}

impl StatefulPriority {
    /// Identity used for set comparisons: snapshot plus priority.
    pub fn key(&self) -> (Configuration, Priority) {
        (self.pre.snapshot(), self.prio.clone())
    }
}

impl fmt::Display for StatefulPriority {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.pre, self.prio)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::BinOp;
    use crate::fixtures as examples;

    #[test]
    fn identifiers() {
        assert!(Ident::new("A0").is_ok());
        assert!(Ident::new("_x1").is_ok());
        assert!(Ident::new("1a").is_err());
        assert!(Ident::new("").is_err());
        assert!(Ident::location("5").is_ok());
        assert!(Ident::new("5").is_err());
    }

    #[test]
    fn n1_is_valid() {
        assert_eq!(validate_network(&examples::n1()), vec![]);
        assert_eq!(validate_network(&examples::n2()), vec![]);
    }

    #[test]
    fn initial_location_must_be_declared() {
        let net = Network::new("X").automaton(Automaton::new("A", &["s", "t"], "u"));
        let d = validate_network(&net);
        assert_eq!(d.len(), 1, "{d:?}");
        assert_eq!(d[0].locus, Locus::Automaton(0));
    }

    #[test]
    fn shared_location_identifier() {
        let net = Network::new("X")
            .automaton(Automaton::new("A", &["s", "t"], "s"))
            .automaton(Automaton::new("B", &["t", "u"], "u"));
        let d = validate_network(&net);
        assert_eq!(d.len(), 1, "{d:?}");
        assert_eq!(d[0].locus, Locus::Location(1, 0));
    }

    #[test]
    fn ill_typed_and_nonlinear_edges() {
        let net = Network::new("X")
            .var("x", Value::Int(0))
            .var("b", Value::Bool(false))
            .automaton(
                Automaton::new("A", &["s"], "s")
                    .edge(Edge::new("s", "go", "s").when(Expr::var("x")))
                    .edge(Edge::new("s", "go2", "s").assign(
                        "x",
                        Expr::bin(BinOp::Mul, Expr::var("x"), Expr::var("x")),
                    ))
                    .edge(Edge::new("s", "go3", "s").assign("b", Expr::Int(1))),
            );
        let d = validate_network(&net);
        assert_eq!(d.len(), 3, "{d:?}");
    }

    #[test]
    fn updates_apply_left_to_right() {
        let net = Network::new("X")
            .var("x", Value::Int(1))
            .automaton(Automaton::new("A", &["s"], "s"));
        let inc = Assignment::new("x", Expr::bin(BinOp::Add, Expr::var("x"), Expr::Int(1)));
        assert_eq!(apply_updates(std::slice::from_ref(&inc), &net, &[Value::Int(1)]), Ok(vec![Value::Int(2)]));
        assert_eq!(apply_updates(&[], &net, &[Value::Int(1)]), Ok(vec![Value::Int(1)]));
        assert_eq!(
            apply_updates(&[inc.clone(), inc], &net, &[Value::Int(0)]),
            Ok(vec![Value::Int(2)])
        );
    }

    #[test]
    fn formula_satisfaction_on_n1_states() {
        let net = examples::n1();
        let f = StateFormula::positive(&[("A0", "5"), ("A1", "5")]);
        let err = examples::n1_state(&net, "5", "5", -1);
        let s2 = examples::n1_state(&net, "4", "5", 0);
        assert_eq!(state_satisfies(&net, &err, &f), Ok(true));
        assert_eq!(state_satisfies(&net, &s2, &f), Ok(false));
        let neg = StateFormula::new(vec![Literal {
            automaton: id("A0"),
            location: id("4"),
            negated: true,
        }]);
        assert_eq!(state_satisfies(&net, &s2, &neg), Ok(false));
        let bad = StateFormula::positive(&[("A9", "1")]);
        assert!(state_satisfies(&net, &s2, &bad).is_err());
    }

    #[test]
    fn numeric_location_codes() {
        let net = examples::n1();
        assert_eq!(net.automata[0].location_code(&id("4")), Some(4));
        let sym = Automaton::new("A", &["idle", "busy"], "idle");
        assert_eq!(sym.location_code(&id("busy")), Some(1));
        assert_eq!(sym.index_of_code(1), Some(1));
    }
}
