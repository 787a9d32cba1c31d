//! Graphviz and SMT-LIB exports of a network.

use std::fmt::Write as _;

use crate::model::{Edge, Network};
use crate::smt::{emit_script, encode_unfolding, EncodeError};

/// `action [guard] / updates`; the update part is omitted when empty.
pub fn edge_label(e: &Edge) -> String {
    let mut s = format!("{} [{}]", e.action, e.guard);
    if !e.updates.is_empty() {
        let asgs: Vec<String> = e
            .updates
            .iter()
            .map(|u| format!("{} := {}", u.target, u.expr))
            .collect();
        s.push_str(" / ");
        s.push_str(&asgs.join("; "));
    }
    s
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// One `digraph` per automaton, concatenated.
pub fn to_dot(net: &Network) -> String {
    let mut out = String::new();
    for a in &net.automata {
        let _ = writeln!(out, "digraph {} {{", quote(a.name.as_str()));
        out.push_str("  rankdir=LR;\n");
        out.push_str("  __init [shape=point];\n");
        for l in &a.locations {
            let _ = writeln!(out, "  {} [shape=circle];", quote(l.as_str()));
        }
        let _ = writeln!(out, "  __init -> {};", quote(a.initial.as_str()));
        for e in &a.edges {
            let _ = writeln!(
                out,
                "  {} -> {} [label={}];",
                quote(e.source.as_str()),
                quote(e.target.as_str()),
                quote(&edge_label(e))
            );
        }
        out.push_str("}\n");
    }
    out
}

/// The `k`-step unfolding as a standalone script.
pub fn to_smt2(net: &Network, k: usize) -> Result<String, EncodeError> {
    Ok(emit_script(&encode_unfolding(net, k)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn n1_dot_has_two_graphs_and_eleven_edges() {
        let dot = to_dot(&fixtures::n1());
        assert_eq!(dot.matches("digraph ").count(), 2);
        assert_eq!(dot.matches("[label=").count(), 11);
        assert!(dot.contains("\"4\" -> \"5\" [label=\"a [true] / x := x - 1\"];"));
    }

    #[test]
    fn n1_smt2_declares_sixteen_step_variables() {
        let script = to_smt2(&fixtures::n1(), 1).unwrap();
        let decls = script.lines().filter(|l| l.starts_with("(declare-const")).count();
        assert_eq!(decls, 16);
    }
}
