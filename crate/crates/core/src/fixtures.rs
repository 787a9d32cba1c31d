//! The reference models shipped with the crate, plus a few generators used
//! by tests and benchmarks.

use crate::expr::Value;
use crate::model::{id, Network, State, StateFormula};
use crate::parser::{parse_network, parse_query};

pub const N1_NET: &str = include_str!("../models/n1.net");
pub const N1_QUERY: &str = include_str!("../models/n1.q");
pub const N2_NET: &str = include_str!("../models/n2.net");
pub const N2_QUERY: &str = include_str!("../models/n2.q");
pub const CHAIN_NET: &str = include_str!("../models/chain.net");
pub const CHAIN_QUERY: &str = include_str!("../models/chain.q");
pub const SAFE_NET: &str = include_str!("../models/safe.net");
pub const SAFE_QUERY: &str = include_str!("../models/safe.q");

pub fn n1() -> Network {
    parse_network(N1_NET).expect("n1.net parses")
}

pub fn n1_error() -> StateFormula {
    parse_query(N1_QUERY).expect("n1.q parses")
}

pub fn n2() -> Network {
    parse_network(N2_NET).expect("n2.net parses")
}

pub fn n2_error() -> StateFormula {
    parse_query(N2_QUERY).expect("n2.q parses")
}

pub fn chain() -> Network {
    parse_network(CHAIN_NET).expect("chain.net parses")
}

pub fn chain_error() -> StateFormula {
    parse_query(CHAIN_QUERY).expect("chain.q parses")
}

pub fn safe() -> Network {
    parse_network(SAFE_NET).expect("safe.net parses")
}

pub fn safe_error() -> StateFormula {
    parse_query(SAFE_QUERY).expect("safe.q parses")
}

/// An N1 state from the two location labels and the value of `x`. Extra
/// variables (positional ones) mirror the locations.
pub fn n1_state(net: &Network, a0: &str, a1: &str, x: i64) -> State {
    let locs = vec![
        net.automata[0].location_index(&id(a0)).expect("A0 location"),
        net.automata[1].location_index(&id(a1)).expect("A1 location"),
    ];
    let mut vals = vec![Value::Int(x)];
    if net.positional {
        vals.push(Value::Int(a0.parse().expect("numeral")));
        vals.push(Value::Int(a1.parse().expect("numeral")));
    }
    State { locs, vals }
}

/// `n` robots sharing one critical section:
/// `idle -req_i-> wait -enter_i-> crit -exit_i-> idle`. The error is robots
/// 0 and 1 inside the critical section together.
pub fn robots(n: usize) -> (Network, StateFormula) {
    assert!(n >= 2, "the family starts at two robots");
    let mut text = format!("network Robots{n} {{\n");
    for i in 0..n {
        text.push_str(&format!(
            "  automaton R{i} {{\n    init idle{i};\n    locations idle{i}, wait{i}, crit{i};\n    \
             edge idle{i} -> wait{i} on req{i};\n    edge wait{i} -> crit{i} on enter{i};\n    \
             edge crit{i} -> idle{i} on exit{i};\n  }}\n"
        ));
    }
    text.push_str("}\n");
    let net = parse_network(&text).expect("robot family parses");
    let q = parse_query("EF (R0.crit0 && R1.crit1)").expect("robot query parses");
    (net, q)
}

/// A small random network: 2 or 3 automata with numeral locations, at most
/// 4 locations and 6 edges each, an optional integer `x` starting in
/// `-2..=2`, private actions plus two candidates for shared ones.
pub fn random_network<R: rand::Rng>(rng: &mut R) -> Network {
    loop {
        let text = random_network_text(rng);
        if let Ok(net) = parse_network(&text) {
            return net;
        }
    }
}

fn random_network_text<R: rand::Rng>(rng: &mut R) -> String {
    let automata = rng.gen_range(2..=3);
    let has_x = rng.gen_bool(0.7);
    let mut text = String::from("network Random {\n");
    if has_x {
        text.push_str(&format!("  int x = {};\n", rng.gen_range(-2..=2)));
    }
    for ai in 0..automata {
        let locs = rng.gen_range(2..=4);
        let names: Vec<String> = (0..locs).map(|l| l.to_string()).collect();
        text.push_str(&format!(
            "  automaton A{ai} {{\n    init 0;\n    locations {};\n",
            names.join(", ")
        ));
        for _ in 0..rng.gen_range(1..=6) {
            let (src, dst) = (rng.gen_range(0..locs), rng.gen_range(0..locs));
            let action = if rng.gen_bool(0.3) {
                format!("s{}", rng.gen_range(0..2))
            } else {
                format!("a{ai}{}", rng.gen_range(0..3))
            };
            text.push_str(&format!("    edge {src} -> {dst} on {action}"));
            if has_x && rng.gen_bool(0.4) {
                let op = ["<", "<=", ">", ">=", "==", "!="][rng.gen_range(0..6)];
                text.push_str(&format!(" when x {op} {}", rng.gen_range(-3..=3)));
            }
            if has_x && rng.gen_bool(0.4) {
                if rng.gen_bool(0.7) {
                    let c: i64 = rng.gen_range(-2..=2);
                    let op = if c < 0 { '-' } else { '+' };
                    text.push_str(&format!(" do x := x {op} {}", c.abs()));
                } else {
                    text.push_str(&format!(" do x := {}", rng.gen_range(-3..=3)));
                }
            }
            text.push_str(";\n");
        }
        text.push_str("  }\n");
    }
    text.push_str("}\n");
    text
}

/// A random conjunction of one or two positive location literals over `net`.
pub fn random_location_formula<R: rand::Rng>(rng: &mut R, net: &Network) -> StateFormula {
    use rand::seq::SliceRandom;
    let mut picked: Vec<usize> = (0..net.automata.len()).collect();
    picked.shuffle(rng);
    picked.truncate(rng.gen_range(1..=2));
    picked.sort_unstable();
    let lits: Vec<String> = picked
        .iter()
        .map(|&ai| {
            let a = &net.automata[ai];
            format!("{}.{}", a.name, a.locations[rng.gen_range(0..a.locations.len())])
        })
        .collect();
    parse_query(&format!("EF ({})", lits.join(" && "))).expect("generated query parses")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn random_networks_mostly_parse_first_time() {
        let mut rng = StdRng::seed_from_u64(1);
        let ok = (0..200)
            .filter(|_| parse_network(&random_network_text(&mut rng)).is_ok())
            .count();
        assert!(ok > 150, "{ok}");
    }

    #[test]
    fn random_networks_respect_their_shape() {
        let mut rng = StdRng::seed_from_u64(2);
        for _ in 0..50 {
            let net = random_network(&mut rng);
            assert!((2..=3).contains(&net.automata.len()));
            assert!(net.variables.len() <= 1);
            for a in &net.automata {
                assert!(a.locations.len() <= 4 && a.edges.len() <= 6);
            }
            let f = random_location_formula(&mut rng, &net);
            assert!(f.check(&net).is_ok());
        }
    }
}
