use guardsynth::fixtures::{self, n1_state};
use guardsynth::model::{id, Configuration};
use guardsynth::semantics::{format_trace, initial_state};
use guardsynth::smt::{emit_script, encode_unfolding, Encoder, Term};
use guardsynth::solver::{
    create_config, model_violations, solve, witness, Extract, Session, SolverConfig, SolverStatus,
};
use guardsynth::Value;

fn session() -> Session {
    Session::new(SolverConfig::default())
}

#[test]
fn assert_false_is_unsat() {
    let f = encode_unfolding(&fixtures::n1(), 1).unwrap().with_extra(Term::Bool(false));
    let v = solve(&emit_script(&f), &SolverConfig::default()).unwrap();
    assert_eq!(v.status, SolverStatus::Unsat);
    assert!(v.model.is_none());
}

#[test]
fn malformed_script_reports_error() {
    let v = solve("(assert (frobnicate))\n(check-sat)\n", &SolverConfig::default()).unwrap();
    assert_eq!(v.status, SolverStatus::Error);
    assert!(!v.stderr.is_empty());
}

#[test]
fn timeout_maps_to_unknown() {
    // the script path lands in `$0` and is ignored
    let cfg = SolverConfig::new("sh")
        .with_args(["-c".to_string(), "sleep 5".to_string()])
        .with_timeout(std::time::Duration::from_millis(200));
    let v = solve("(check-sat)\n", &cfg).unwrap();
    assert_eq!(v.status, SolverStatus::Unknown);
}

#[test]
fn n1_error_reachable_in_three_steps() {
    let net = fixtures::n1();
    let enc = Encoder::new(&net, 4).unwrap();
    let err = Configuration::from_formula(&fixtures::n1_error());
    let f = enc
        .unfolding()
        .with_extras([enc.progress(2).unwrap(), enc.query(2, &err).unwrap()]);
    let mut s = session();
    let m = s.check(&f).unwrap().expect("sat");
    assert!(model_violations(&m, &net, 4).is_empty());
    let pre = create_config(&m, 2, &net, Extract::Full, true).unwrap().config;
    let candidates = [n1_state(&net, "5", "4", 0), n1_state(&net, "4", "5", 0)];
    assert!(candidates.contains(&pre.to_state(&net).unwrap()));
    let step0 = create_config(&m, 0, &net, Extract::Full, true).unwrap().config;
    assert_eq!(step0.to_state(&net).unwrap(), initial_state(&net));

    let (init, steps) = witness(&m, &net, 3).unwrap();
    assert_eq!(steps.len(), 3);
    assert_eq!(steps[2].1, n1_state(&net, "5", "5", -1));
    let text = format_trace(&net, &init, &steps);
    assert!(text.contains("step 1: e -> (A0.4, A1.4) {x=1}"), "{text}");
}

#[test]
fn progress_needs_an_edge() {
    let net = guardsynth::parse_network(
        "network Still { automaton A { init s; locations s, t; } }",
    )
    .unwrap();
    let enc = Encoder::new(&net, 2).unwrap();
    let f = enc.unfolding().with_extra(enc.progress(0).unwrap());
    assert!(session().check(&f).unwrap().is_none());
}

#[test]
fn avoid_steers_to_the_other_preerror() {
    let net = fixtures::n1();
    let enc = Encoder::new(&net, 4).unwrap();
    let err = Configuration::from_formula(&fixtures::n1_error());
    let s1 = Configuration::from_state(&net, &n1_state(&net, "5", "4", 0), 2);
    let s2 = Configuration::from_state(&net, &n1_state(&net, "4", "5", 0), 2);
    let base = enc
        .unfolding()
        .with_extras([enc.progress(2).unwrap(), enc.query(2, &err).unwrap()]);
    let mut s = session();
    let m = s
        .check(&base.with_extra(enc.avoid(2, &s1).unwrap()))
        .unwrap()
        .expect("sat");
    let got = create_config(&m, 2, &net, Extract::Full, true).unwrap().config;
    assert!(got.same_snapshot(&s2));
    let both = base.with_extras([enc.avoid(2, &s1).unwrap(), enc.avoid(2, &s2).unwrap()]);
    assert!(s.check(&both).unwrap().is_none());
}

#[test]
fn pinned_preerrors_and_blockers() {
    let net = fixtures::n1();
    let enc = Encoder::new(&net, 4).unwrap();
    let err = Configuration::from_formula(&fixtures::n1_error());
    let s1 = Configuration::from_state(&net, &n1_state(&net, "5", "4", 0), 2);
    let s2 = Configuration::from_state(&net, &n1_state(&net, "4", "5", 0), 2);
    let mut s = session();
    for (pre, blocker) in [(&s1, "b"), (&s2, "d")] {
        // the blockee cannot avoid the error
        let blockee_only = if blocker == "b" { "c__2" } else { "a__2" };
        let f_blockee = enc.unfolding().with_extras([
            enc.preerror(2, pre).unwrap(),
            enc.error(2, &err).unwrap(),
            Term::sym(blockee_only),
        ]);
        assert!(s.check(&f_blockee).unwrap().is_none());
        let f = enc.unfolding().with_extras([
            enc.preerror(2, pre).unwrap(),
            enc.error(2, &err).unwrap(),
            enc.progress(2).unwrap(),
        ]);
        let m = s.check(&f).unwrap().expect("sat");
        let acts = create_config(&m, 2, &net, Extract::Actions, true).unwrap().config;
        assert_eq!(acts.true_action(), Some(&id(blocker)));
    }
    let bogus = Configuration::from_state(&net, &n1_state(&net, "2", "1", 2), 0);
    let f = enc.unfolding().with_extra(enc.preerror(0, &bogus).unwrap());
    assert!(s.check(&f).unwrap().is_none());
}

#[test]
fn model_round_trip_stays_sat() {
    let net = fixtures::n1();
    let enc = Encoder::new(&net, 3).unwrap();
    let f = enc.unfolding().with_extra(enc.progress(2).unwrap());
    let mut s = session();
    let m = s.check(&f).unwrap().expect("sat");
    let pinned = f.with_extras(m.values.iter().map(|(name, v)| {
        Term::eq(Term::sym(name.clone()), Term::value(*v))
    }));
    assert!(s.check(&pinned).unwrap().is_some());
    assert_eq!(s.stats.calls, 2);
    assert_eq!(s.stats.sat, 2);
}

#[test]
fn real_valued_models_round_trip() {
    let net = guardsynth::parse_network(
        "network R { real r = 1.0; automaton A { init s; locations s, t; edge s -> t on half do r := r / 2.0 - 1.0 / 3.0; } }",
    )
    .unwrap();
    let enc = Encoder::new(&net, 1).unwrap();
    let f = enc.unfolding().with_extra(enc.progress(0).unwrap());
    let m = session().check(&f).unwrap().expect("sat");
    assert_eq!(
        m.get("r__1"),
        Some(Value::Real(guardsynth::Rational::new(1, 6)))
    );
}

#[test]
fn scripts_are_kept_in_call_order() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SolverConfig::default().keeping_scripts(dir.path());
    let f = encode_unfolding(&fixtures::n2(), 1).unwrap();
    solve(&emit_script(&f), &cfg).unwrap();
    solve(&emit_script(&f.with_extra(Term::Bool(false))), &cfg).unwrap();
    let second = std::fs::read_to_string(dir.path().join("0001.smt2")).unwrap();
    assert!(second.contains("(assert false)"));
    assert!(dir.path().join("0000.smt2").exists());
}
