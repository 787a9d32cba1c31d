//! Synthesis of stateful priorities for networks of discrete automata.
//!
//! The pipeline reads a network and an error formula, collects the
//! reachable preError states by bounded model checking through an external
//! SMT solver, derives `(blockee, blocker)` priorities that hold only at
//! those states, and rewrites the network with positional variables so the
//! error becomes unreachable while every other transition is kept.

pub mod cli;
pub mod expr;
pub mod fixtures;
pub mod model;
pub mod export;
pub mod parser;
pub mod report;
pub mod semantics;
pub mod smt;
pub mod solver;
pub mod synthesis;
pub mod transform;

pub use expr::{eval_expr, BinOp, EvalError, Expr, Rational, Type, Value};
pub use model::{
    apply_updates, state_satisfies, validate_network, Assignment, Automaton, Configuration,
    Diagnostic, Edge, Ident, Literal, Network, Priority, State, StateFormula, StatefulPriority,
    VarDecl,
};
pub use parser::{parse_network, parse_query, parse_query_for, print_network, ParseError};
