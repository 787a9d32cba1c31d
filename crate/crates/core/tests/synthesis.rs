use std::collections::BTreeSet;

use guardsynth::fixtures::{self, n1_state};
use guardsynth::model::{Configuration, Priority};
use guardsynth::semantics::{action_avoids_errors, action_reaches_error, DomainBounds};
use guardsynth::solver::{model_violations, SolverConfig};
use guardsynth::synthesis::{reachability_bound, synthesize, Outcome, Synthesizer};

fn pairs(report: &guardsynth::synthesis::SynthesisReport) -> BTreeSet<(String, String)> {
    report
        .stateful
        .iter()
        .map(|s| (s.pre.to_string(), s.prio.to_string()))
        .collect()
}

#[test]
fn n1_yields_the_two_known_priorities() {
    let net = fixtures::n1();
    let (report, synth) = Synthesizer::new(&net, 15, SolverConfig::default())
        .unwrap()
        .logging_models()
        .run(&fixtures::n1_error())
        .unwrap();
    assert_eq!(report.outcome, Outcome::PrioritiesFound);
    let want: BTreeSet<_> = [
        (Configuration::from_state(&net, &n1_state(&net, "4", "5", 0), 0).snapshot(), Priority::new("a", "d")),
        (Configuration::from_state(&net, &n1_state(&net, "5", "4", 0), 0).snapshot(), Priority::new("c", "b")),
    ]
    .into();
    assert_eq!(report.priority_set(), want);
    assert_eq!(report.errors.len(), 1);
    for (k, m) in synth.models() {
        assert!(model_violations(m, &net, *k).is_empty());
    }
    // every kept priority is sound against the explicit semantics
    for s in &report.stateful {
        let st = s.pre.to_state(&net).unwrap();
        assert!(action_reaches_error(&net, &st, &s.prio.blockee, &report.errors).unwrap());
        assert!(action_avoids_errors(&net, &st, &s.prio.blocker, &report.errors).unwrap());
    }
}

#[test]
fn n2_yields_three_priorities() {
    let net = fixtures::n2();
    let report = synthesize(&net, &fixtures::n2_error(), 10, SolverConfig::default()).unwrap();
    assert_eq!(report.outcome, Outcome::PrioritiesFound);
    let want: BTreeSet<(String, String)> = [
        ("<A0=1, A1=2; step 0>", "(a, b)"),
        ("<A0=2, A1=1; step 0>", "(b, a)"),
        ("<A0=2, A1=1; step 0>", "(c, a)"),
    ]
    .iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect();
    let got: BTreeSet<(String, String)> = report
        .priority_set()
        .into_iter()
        .map(|(c, p)| (c.to_string(), p.to_string()))
        .collect();
    assert_eq!(got, want);
    assert_eq!(
        reachability_bound(&net, &report, 20, &DomainBounds::default()).unwrap(),
        Some(3)
    );
    assert_eq!(pairs(&report).len(), 3);
}

#[test]
fn chain_turns_preerrors_into_errors_until_the_initial_state() {
    let net = fixtures::chain();
    let report = synthesize(&net, &fixtures::chain_error(), 6, SolverConfig::default()).unwrap();
    assert_eq!(report.outcome, Outcome::InitialIsError);
    assert!(report.stateful.is_empty());
    let errs: Vec<String> = report.errors.iter().map(|c| c.snapshot().to_string()).collect();
    assert_eq!(errs, vec!["<A=l3; step 0>", "<A=l2; step 0>"]);
    assert_eq!(report.stats.max_recursion_depth, 2);
}

#[test]
fn unreachable_error_is_certified() {
    let net = fixtures::safe();
    let report = synthesize(&net, &fixtures::safe_error(), 8, SolverConfig::default()).unwrap();
    assert_eq!(report.outcome, Outcome::ErrorUnreachable);
    assert!(report.stateful.is_empty());
    assert_eq!(report.stats.solver.calls, 8);
    let reach = guardsynth::semantics::bfs_reach(&net, 50, &DomainBounds::default()).unwrap();
    assert_eq!(
        reachability_bound(&net, &report, 50, &DomainBounds::default()).unwrap(),
        Some(reach.len())
    );
}

#[test]
fn initial_error_is_reported() {
    let net = fixtures::n1();
    let f = guardsynth::parse_query("EF (A0.1)").unwrap();
    let report = synthesize(&net, &f, 3, SolverConfig::default()).unwrap();
    assert_eq!(report.outcome, Outcome::InitialIsError);
}

#[test]
fn completeness_at_bound() {
    let net = fixtures::n1();
    let (report, mut synth) = Synthesizer::new(&net, 15, SolverConfig::default())
        .unwrap()
        .run(&fixtures::n1_error())
        .unwrap();
    let pres: Vec<Configuration> = report.stateful.iter().map(|s| s.pre.clone()).collect();
    for err in report.errors.clone() {
        for step in 0..15 {
            assert!(synth.check_reach(&pres, &err, step).unwrap().is_empty());
        }
    }
}

#[test]
fn pruned_bound_is_unknown() {
    let net = fixtures::n1();
    let report = synthesize(&net, &fixtures::n1_error(), 6, SolverConfig::default()).unwrap();
    assert_eq!(
        reachability_bound(&net, &report, 40, &DomainBounds::new(-2, 2)).unwrap(),
        None
    );
}
