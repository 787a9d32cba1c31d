//! Bounded unfolding of a network into quantifier-free linear arithmetic,
//! the per-step constraint families used by synthesis, and SMT-LIB2 output.
//!
//! Step variables are named `<base>__<i>`: one boolean per action, one
//! integer location code per automaton and one copy of every network
//! variable per step `0..=k`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::expr::{BinOp, Expr, Rational, Type, Value};
use crate::model::{Configuration, Edge, Ident, Network};
use crate::semantics::DomainBounds;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("the unfolding bound must be at least 1")]
    ZeroBound,
    #[error("step {step} is outside the unfolding bound {k}")]
    StepOutOfRange { step: usize, k: usize },
    #[error("a configuration with no location or variable entries cannot be encoded")]
    VacuousConfiguration,
    #[error("non-linear expression `{0}`")]
    NonLinear(String),
    #[error("configuration mentions unknown automaton `{0}`")]
    UnknownAutomaton(Ident),
    #[error("automaton `{0}` has no location `{1}`")]
    UnknownLocation(Ident, Ident),
    #[error("configuration mentions unknown variable `{0}`")]
    UnknownVariable(Ident),
    #[error("value {1} does not fit variable `{0}`")]
    ValueType(Ident, Value),
}

/// A solver term.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Bool(bool),
    Int(i64),
    Real(Rational),
    Sym(String),
    App(&'static str, Vec<Term>),
}

impl Term {
    pub fn sym(name: impl Into<String>) -> Term {
        Term::Sym(name.into())
    }

    pub fn and(items: impl IntoIterator<Item = Term>) -> Term {
        let mut out = Vec::new();
        for t in items {
            match t {
                Term::Bool(true) => {}
                Term::Bool(false) => return Term::Bool(false),
                Term::App("and", inner) => out.extend(inner),
                t => out.push(t),
            }
        }
        match out.len() {
            0 => Term::Bool(true),
            1 => out.pop().expect("one item"),
            _ => Term::App("and", out),
        }
    }

    pub fn or(items: impl IntoIterator<Item = Term>) -> Term {
        let mut out = Vec::new();
        for t in items {
            match t {
                Term::Bool(false) => {}
                Term::Bool(true) => return Term::Bool(true),
                Term::App("or", inner) => out.extend(inner),
                t => out.push(t),
            }
        }
        match out.len() {
            0 => Term::Bool(false),
            1 => out.pop().expect("one item"),
            _ => Term::App("or", out),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(t: Term) -> Term {
        match t {
            Term::Bool(b) => Term::Bool(!b),
            Term::App("not", mut inner) => inner.pop().expect("unary not"),
            t => Term::App("not", vec![t]),
        }
    }

    pub fn eq(a: Term, b: Term) -> Term {
        Term::App("=", vec![a, b])
    }

    pub fn ne(a: Term, b: Term) -> Term {
        Term::not(Term::eq(a, b))
    }

    pub fn implies(a: Term, b: Term) -> Term {
        Term::App("=>", vec![a, b])
    }

    pub fn value(v: Value) -> Term {
        match v {
            Value::Int(i) => Term::Int(i),
            Value::Real(r) => Term::Real(r),
            Value::Bool(b) => Term::Bool(b),
        }
    }

    /// Symbols occurring in the term.
    pub fn symbols<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Term::Sym(s) => {
                out.insert(s);
            }
            Term::App(_, args) => args.iter().for_each(|a| a.symbols(out)),
            _ => {}
        }
    }
}

fn write_rational(f: &mut impl fmt::Write, r: Rational) -> fmt::Result {
    let (n, d) = (*r.numer(), *r.denom());
    let body = if d == 1 {
        format!("{}.0", n.unsigned_abs())
    } else {
        format!("(/ {}.0 {}.0)", n.unsigned_abs(), d)
    };
    if n < 0 {
        write!(f, "(- {body})")
    } else {
        f.write_str(&body)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Bool(b) => write!(f, "{b}"),
            Term::Int(i) if *i < 0 => write!(f, "(- {})", i.unsigned_abs()),
            Term::Int(i) => write!(f, "{i}"),
            Term::Real(r) => write_rational(f, *r),
            Term::Sym(s) => f.write_str(s),
            Term::App(op, args) => {
                write!(f, "({op}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StepKind {
    Action,
    Variable,
    Automaton,
}

/// A declared step copy of an action, variable or automaton.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StepVar {
    pub kind: StepKind,
    pub base: Ident,
    pub step: usize,
    pub sort: Type,
}

impl StepVar {
    pub fn name(&self) -> String {
        step_name(&self.base, self.step)
    }
}

pub fn step_name(base: &Ident, step: usize) -> String {
    format!("{base}__{step}")
}

fn at(base: &Ident, step: usize) -> Term {
    Term::Sym(step_name(base, step))
}

/// Splits `x__3` into `("x", 3)`.
pub fn split_step_name(name: &str) -> Option<(&str, usize)> {
    let (base, step) = name.rsplit_once("__")?;
    Some((base, step.parse().ok()?))
}

/// `I ∧ T` for bound `k`, plus appended constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct UnfoldingFormula {
    pub k: usize,
    pub decls: Vec<StepVar>,
    pub init: Term,
    pub trans: Vec<Term>,
    pub extra: Vec<Term>,
    pub logic: &'static str,
}

impl UnfoldingFormula {
    /// A copy with `c` appended to the extra constraints.
    pub fn with_extra(&self, c: Term) -> UnfoldingFormula {
        let mut f = self.clone();
        f.extra.push(c);
        f
    }

    pub fn with_extras(&self, cs: impl IntoIterator<Item = Term>) -> UnfoldingFormula {
        let mut f = self.clone();
        f.extra.extend(cs);
        f
    }

    pub fn action_decls(&self) -> impl Iterator<Item = &StepVar> {
        self.decls.iter().filter(|d| d.kind == StepKind::Action)
    }

    /// Symbols used in constraints but never declared.
    pub fn undeclared_symbols(&self) -> BTreeSet<String> {
        let declared: BTreeSet<String> = self.decls.iter().map(StepVar::name).collect();
        let mut used = BTreeSet::new();
        self.init.symbols(&mut used);
        for t in self.trans.iter().chain(&self.extra) {
            t.symbols(&mut used);
        }
        used.into_iter()
            .filter(|s| !declared.contains(*s))
            .map(str::to_string)
            .collect()
    }
}

/// For every variable, the single automaton whose edges write it, if any.
pub fn omega(net: &Network) -> Vec<Option<usize>> {
    net.variables
        .iter()
        .map(|v| {
            let writers: BTreeSet<usize> = net
                .automata
                .iter()
                .enumerate()
                .filter(|(_, a)| a.edges.iter().any(|e| e.written_vars().contains(&&v.name)))
                .map(|(ai, _)| ai)
                .collect();
            if writers.len() == 1 {
                writers.into_iter().next()
            } else {
                None
            }
        })
        .collect()
}

fn sort_name(t: Type) -> &'static str {
    match t {
        Type::Int => "Int",
        Type::Real => "Real",
        Type::Bool => "Bool",
    }
}

/// Translates an expression; variables resolve through `env`.
pub fn expr_term(e: &Expr, env: &BTreeMap<Ident, Term>) -> Term {
    match e {
        Expr::Int(i) => Term::Int(*i),
        Expr::Real(r) => Term::Real(*r),
        Expr::Bool(b) => Term::Bool(*b),
        Expr::Var(v) => env.get(v).cloned().unwrap_or_else(|| Term::Sym(v.to_string())),
        Expr::Neg(inner) => Term::App("-", vec![expr_term(inner, env)]),
        Expr::Not(inner) => Term::not(expr_term(inner, env)),
        Expr::Bin(op, l, r) => {
            let (l, r) = (expr_term(l, env), expr_term(r, env));
            match op {
                BinOp::And => Term::and([l, r]),
                BinOp::Or => Term::or([l, r]),
                BinOp::Ne => Term::ne(l, r),
                BinOp::Add => Term::App("+", vec![l, r]),
                BinOp::Sub => Term::App("-", vec![l, r]),
                BinOp::Mul => Term::App("*", vec![l, r]),
                BinOp::Div => Term::App("/", vec![l, r]),
                BinOp::Lt => Term::App("<", vec![l, r]),
                BinOp::Le => Term::App("<=", vec![l, r]),
                BinOp::Eq => Term::eq(l, r),
                BinOp::Ge => Term::App(">=", vec![l, r]),
                BinOp::Gt => Term::App(">", vec![l, r]),
            }
        }
    }
}

/// Builds unfoldings and constraint families for one network and bound.
#[derive(Debug, Clone)]
pub struct Encoder<'a> {
    net: &'a Network,
    k: usize,
    actions: Vec<Ident>,
    omega: Vec<Option<usize>>,
}

impl<'a> Encoder<'a> {
    pub fn new(net: &'a Network, k: usize) -> Result<Self, EncodeError> {
        if k == 0 {
            return Err(EncodeError::ZeroBound);
        }
        for a in &net.automata {
            for e in &a.edges {
                if !e.guard.is_linear() {
                    return Err(EncodeError::NonLinear(e.guard.to_string()));
                }
                if let Some(u) = e.updates.iter().find(|u| !u.expr.is_linear()) {
                    return Err(EncodeError::NonLinear(u.expr.to_string()));
                }
            }
        }
        Ok(Encoder {
            net,
            k,
            actions: net.actions(),
            omega: omega(net),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn network(&self) -> &'a Network {
        self.net
    }

    fn vars_at(&self, step: usize) -> BTreeMap<Ident, Term> {
        self.net
            .variables
            .iter()
            .map(|v| (v.name.clone(), at(&v.name, step)))
            .collect()
    }

    fn block(&self, action: &Ident, i: usize) -> Term {
        Term::and(
            self.actions
                .iter()
                .filter(|b| *b != action)
                .map(|b| Term::not(at(b, i))),
        )
    }

    fn code(&self, ai: usize, loc: &Ident) -> Term {
        Term::Int(
            self.net.automata[ai]
                .location_code(loc)
                .expect("validated location"),
        )
    }

    fn composed(&self, updates: &[&crate::model::Assignment], i: usize) -> BTreeMap<Ident, Term> {
        let mut env = self.vars_at(i);
        for u in updates {
            let t = expr_term(&u.expr, &env);
            env.insert(u.target.clone(), t);
        }
        env
    }

    fn edge_clause(&self, ai: usize, e: &Edge, i: usize) -> Term {
        let a = &self.net.automata[ai];
        let mut parts = vec![
            Term::eq(at(&a.name, i), self.code(ai, &e.source)),
            at(&e.action, i),
            self.block(&e.action, i),
            expr_term(&e.guard, &self.vars_at(i)),
        ];
        if !self.net.is_shared(&e.action) {
            // the mover is alone, so every variable is either written or kept
            let env = self.composed(&e.updates.iter().collect::<Vec<_>>(), i);
            for v in &self.net.variables {
                parts.push(Term::eq(at(&v.name, i + 1), env[&v.name].clone()));
            }
        }
        parts.push(Term::eq(at(&a.name, i + 1), self.code(ai, &e.target)));
        Term::and(parts)
    }

    fn idle_clause(&self, ai: usize, i: usize) -> Term {
        let a = &self.net.automata[ai];
        let mut parts = vec![Term::eq(at(&a.name, i + 1), at(&a.name, i))];
        for b in a.actions() {
            parts.push(Term::not(at(b, i)));
        }
        for (vi, v) in self.net.variables.iter().enumerate() {
            if self.omega[vi] == Some(ai) {
                parts.push(Term::eq(at(&v.name, i + 1), at(&v.name, i)));
            }
        }
        Term::and(parts)
    }

    /// `α^i → ⋁ combos`, fixing every variable at `i+1` to the composition
    /// of the participants' updates in automaton order.
    fn broadcast_effect(&self, action: &Ident, i: usize) -> Term {
        let holders = self.net.holders(action);
        let per_holder: Vec<Vec<&Edge>> = holders
            .iter()
            .map(|&ai| {
                self.net.automata[ai]
                    .edges
                    .iter()
                    .filter(|e| &e.action == action)
                    .collect()
            })
            .collect();
        let mut combos = Vec::new();
        let mut pick = vec![0usize; holders.len()];
        'outer: loop {
            let mut parts = Vec::new();
            let mut updates = Vec::new();
            for (slot, &ai) in holders.iter().enumerate() {
                let e = per_holder[slot][pick[slot]];
                let name = &self.net.automata[ai].name;
                parts.push(Term::eq(at(name, i), self.code(ai, &e.source)));
                parts.push(expr_term(&e.guard, &self.vars_at(i)));
                parts.push(Term::eq(at(name, i + 1), self.code(ai, &e.target)));
                updates.extend(e.updates.iter());
            }
            let env = self.composed(&updates, i);
            for v in &self.net.variables {
                parts.push(Term::eq(at(&v.name, i + 1), env[&v.name].clone()));
            }
            combos.push(Term::and(parts));
            for slot in (0..holders.len()).rev() {
                pick[slot] += 1;
                if pick[slot] < per_holder[slot].len() {
                    continue 'outer;
                }
                pick[slot] = 0;
            }
            break;
        }
        Term::implies(at(action, i), Term::or(combos))
    }

    /// A variable keeps its value unless an action with a writing edge fires.
    fn frame(&self, var: &Ident, i: usize) -> Term {
        let writers: BTreeSet<&Ident> = self
            .net
            .automata
            .iter()
            .flat_map(|a| a.edges.iter())
            .filter(|e| e.written_vars().contains(&var))
            .map(|e| &e.action)
            .collect();
        Term::or(
            std::iter::once(Term::eq(at(var, i + 1), at(var, i)))
                .chain(writers.into_iter().map(|a| at(a, i))),
        )
    }

    pub fn unfolding(&self) -> UnfoldingFormula {
        let net = self.net;
        let mut decls = Vec::new();
        for i in 0..=self.k {
            for a in &self.actions {
                decls.push(StepVar {
                    kind: StepKind::Action,
                    base: a.clone(),
                    step: i,
                    sort: Type::Bool,
                });
            }
            for a in &net.automata {
                decls.push(StepVar {
                    kind: StepKind::Automaton,
                    base: a.name.clone(),
                    step: i,
                    sort: Type::Int,
                });
            }
            for v in &net.variables {
                decls.push(StepVar {
                    kind: StepKind::Variable,
                    base: v.name.clone(),
                    step: i,
                    sort: v.ty,
                });
            }
        }

        let init = Term::and(
            net.automata
                .iter()
                .enumerate()
                .map(|(ai, a)| Term::eq(at(&a.name, 0), self.code(ai, &a.initial)))
                .chain(
                    net.variables
                        .iter()
                        .map(|v| Term::eq(at(&v.name, 0), Term::value(v.init))),
                ),
        );

        let mut trans = Vec::new();
        for i in 0..self.k {
            for (ai, a) in net.automata.iter().enumerate() {
                trans.push(Term::or(
                    a.edges
                        .iter()
                        .map(|e| self.edge_clause(ai, e, i))
                        .chain(std::iter::once(self.idle_clause(ai, i))),
                ));
            }
            for action in self.actions.iter().filter(|a| net.is_shared(a)) {
                trans.push(self.broadcast_effect(action, i));
            }
            for v in &net.variables {
                trans.push(self.frame(&v.name, i));
            }
        }
        // nothing fires out of the last step
        trans.push(Term::and(self.actions.iter().map(|a| Term::not(at(a, self.k)))));

        let logic = if net.variables.iter().any(|v| v.ty == Type::Real) {
            "QF_LIRA"
        } else {
            "QF_LIA"
        };
        UnfoldingFormula {
            k: self.k,
            decls,
            init,
            trans,
            extra: Vec::new(),
            logic,
        }
    }

    fn check_step(&self, step: usize) -> Result<(), EncodeError> {
        if step > self.k {
            Err(EncodeError::StepOutOfRange { step, k: self.k })
        } else {
            Ok(())
        }
    }

    /// The conjunction of `c`'s entries at `step`.
    pub fn snapshot_at(&self, c: &Configuration, step: usize) -> Result<Term, EncodeError> {
        self.check_step(step)?;
        if c.is_vacuous() {
            return Err(EncodeError::VacuousConfiguration);
        }
        let net = self.net;
        let mut parts = Vec::new();
        let lookup = |a: &Ident, l: &Ident| -> Result<Term, EncodeError> {
            let ai = net
                .automaton_index(a)
                .ok_or_else(|| EncodeError::UnknownAutomaton(a.clone()))?;
            net.automata[ai]
                .location_code(l)
                .map(Term::Int)
                .ok_or_else(|| EncodeError::UnknownLocation(a.clone(), l.clone()))
        };
        for (a, l) in &c.loc {
            parts.push(Term::eq(at(a, step), lookup(a, l)?));
        }
        for (a, ls) in &c.loc_excluded {
            for l in ls {
                parts.push(Term::ne(at(a, step), lookup(a, l)?));
            }
        }
        for (v, val) in &c.var {
            let ty = net
                .var_type(v)
                .ok_or_else(|| EncodeError::UnknownVariable(v.clone()))?;
            if ty != val.ty() {
                return Err(EncodeError::ValueType(v.clone(), *val));
            }
            parts.push(Term::eq(at(v, step), Term::value(*val)));
        }
        Ok(Term::and(parts))
    }

    /// `P(j)`: every step up to `j` changes some location or variable.
    pub fn progress(&self, j: usize) -> Result<Term, EncodeError> {
        self.check_step(j + 1)?;
        Ok(Term::and((0..=j).map(|i| {
            Term::or(
                self.net
                    .automata
                    .iter()
                    .map(|a| &a.name)
                    .chain(self.net.variables.iter().map(|v| &v.name))
                    .map(|b| Term::ne(at(b, i), at(b, i + 1))),
            )
        })))
    }

    /// `Q(j, c)`: `c` holds at step `j+1`.
    pub fn query(&self, j: usize, c: &Configuration) -> Result<Term, EncodeError> {
        self.check_step(j + 1)?;
        self.snapshot_at(c, j + 1)
    }

    /// `D(j, c)`: `c` holds at none of the steps `0..=j`.
    pub fn avoid(&self, j: usize, c: &Configuration) -> Result<Term, EncodeError> {
        self.check_step(j)?;
        let mut parts = Vec::new();
        for i in 0..=j {
            parts.push(Term::not(self.snapshot_at(c, i)?));
        }
        Ok(Term::and(parts))
    }

    /// `R(j, c)`: `c` holds at step `j`.
    pub fn preerror(&self, j: usize, c: &Configuration) -> Result<Term, EncodeError> {
        self.snapshot_at(c, j)
    }

    /// `E(j, c)`: `c` does not hold at step `j+1`.
    pub fn error(&self, j: usize, c: &Configuration) -> Result<Term, EncodeError> {
        self.check_step(j + 1)?;
        Ok(Term::not(self.snapshot_at(c, j + 1)?))
    }

    /// Keeps every numeric variable inside `bounds` at every step.
    pub fn bounds(&self, bounds: &DomainBounds) -> Term {
        let mut parts = Vec::new();
        for i in 0..=self.k {
            for v in &self.net.variables {
                let (lo, hi) = bounds.interval(&v.name);
                let (lo, hi) = match v.ty {
                    Type::Int => (Term::Int(lo), Term::Int(hi)),
                    Type::Real => (
                        Term::Real(Rational::from_integer(lo)),
                        Term::Real(Rational::from_integer(hi)),
                    ),
                    Type::Bool => continue,
                };
                parts.push(Term::App("<=", vec![lo, at(&v.name, i), hi]));
            }
        }
        Term::and(parts)
    }

    /// `¬α^step`
    pub fn forbid_action(&self, action: &Ident, step: usize) -> Term {
        Term::not(at(action, step))
    }
}

/// `⟦net⟧_k`
pub fn encode_unfolding(net: &Network, k: usize) -> Result<UnfoldingFormula, EncodeError> {
    Ok(Encoder::new(net, k)?.unfolding())
}

/// Solver input for `f`. Equal formulas give byte-identical text.
pub fn emit_script(f: &UnfoldingFormula) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(set-logic {})", f.logic);
    for d in &f.decls {
        let _ = writeln!(out, "(declare-const {} {})", d.name(), sort_name(d.sort));
    }
    let _ = writeln!(out, "(assert {})", f.init);
    for t in f.trans.iter().chain(&f.extra) {
        let _ = writeln!(out, "(assert {t})");
    }
    out.push_str("(check-sat)\n(get-model)\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::id;

    #[test]
    fn term_printing() {
        assert_eq!(Term::Int(-3).to_string(), "(- 3)");
        assert_eq!(Term::Real(Rational::new(-1, 2)).to_string(), "(- (/ 1.0 2.0))");
        assert_eq!(Term::Real(Rational::from_integer(4)).to_string(), "4.0");
        assert_eq!(Term::and([Term::Bool(true), Term::sym("p")]), Term::sym("p"));
        assert_eq!(Term::or(Vec::<Term>::new()), Term::Bool(false));
        assert_eq!(Term::not(Term::not(Term::sym("p"))), Term::sym("p"));
        assert_eq!(
            Term::and([Term::and([Term::sym("a"), Term::sym("b")]), Term::sym("c")]).to_string(),
            "(and a b c)"
        );
    }

    #[test]
    fn step_names_split() {
        assert_eq!(split_step_name("x__12"), Some(("x", 12)));
        assert_eq!(split_step_name("p_A0__3"), Some(("p_A0", 3)));
        assert_eq!(split_step_name("x"), None);
    }

    #[test]
    fn n1_init_and_counts() {
        let net = fixtures::n1();
        let f = encode_unfolding(&net, 1).unwrap();
        assert_eq!(f.init.to_string(), "(and (= A0__0 1) (= A1__0 1) (= x__0 1))");
        assert_eq!(f.action_decls().count(), 10);
        assert_eq!(f.decls.iter().filter(|d| d.kind == StepKind::Automaton).count(), 4);
        assert_eq!(f.decls.iter().filter(|d| d.kind == StepKind::Variable).count(), 2);
        assert!(f.undeclared_symbols().is_empty());
        assert!(matches!(encode_unfolding(&net, 0), Err(EncodeError::ZeroBound)));
    }

    #[test]
    fn n1_a_edge_clause() {
        let net = fixtures::n1();
        let enc = Encoder::new(&net, 1).unwrap();
        let clause = enc.edge_clause(0, &net.automata[0].edges[0], 0).to_string();
        assert_eq!(
            clause,
            "(and (= A0__0 1) a__0 (not e__0) (not b__0) (not d__0) (not c__0) (= x__1 (+ x__0 1)) (= A0__1 2))"
        );
    }

    #[test]
    fn omega_flags() {
        let net = fixtures::n1();
        assert_eq!(omega(&net), vec![None]);
        let safe = fixtures::safe();
        assert_eq!(omega(&safe), vec![Some(0)]);
    }

    #[test]
    fn sequential_updates_compose() {
        let net = crate::parser::parse_network(
            "network S { int x = 1; int y = 0; automaton A { init s; locations s; edge s -> s on t do x := x + 1, y := x; } }",
        )
        .unwrap();
        let enc = Encoder::new(&net, 1).unwrap();
        let clause = enc.edge_clause(0, &net.automata[0].edges[0], 0).to_string();
        assert!(clause.contains("(= y__1 (+ x__0 1))"), "{clause}");
    }

    #[test]
    fn constraint_ranges() {
        let net = fixtures::n1();
        let enc = Encoder::new(&net, 4).unwrap();
        let err = Configuration::from_formula(&fixtures::n1_error());
        assert!(enc.query(3, &err).is_ok());
        assert!(matches!(enc.query(4, &err), Err(EncodeError::StepOutOfRange { .. })));
        assert!(enc.progress(4).is_err());
        assert!(matches!(
            enc.query(0, &Configuration::default()),
            Err(EncodeError::VacuousConfiguration)
        ));
        assert_eq!(
            Encoder::new(&net, 1).unwrap().progress(0).unwrap().to_string(),
            "(or (not (= A0__0 A0__1)) (not (= A1__0 A1__1)) (not (= x__0 x__1)))"
        );
        let mut bad = err.clone();
        bad.loc.insert(id("A0"), id("9"));
        assert!(enc.query(0, &bad).is_err());
    }

    #[test]
    fn script_is_deterministic() {
        let net = fixtures::n1();
        let a = emit_script(&encode_unfolding(&net, 3).unwrap());
        let b = emit_script(&encode_unfolding(&net, 3).unwrap());
        assert_eq!(a, b);
        assert!(a.starts_with("(set-logic QF_LIA)\n(declare-const a__0 Bool)\n"));
        assert!(a.ends_with("(check-sat)\n(get-model)\n"));
    }

    #[test]
    fn real_networks_use_mixed_logic() {
        let net = crate::parser::parse_network(
            "network R { real r = 0.5; automaton A { init s; locations s; edge s -> s on t do r := r / 2.0; } }",
        )
        .unwrap();
        let f = encode_unfolding(&net, 1).unwrap();
        assert_eq!(f.logic, "QF_LIRA");
        assert!(emit_script(&f).contains("(= r__0 (/ 1.0 2.0))"));
    }
}
