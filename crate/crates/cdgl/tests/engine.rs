use cdgl::creal::{q, CReal, State};
use cdgl::engine::*;
use cdgl::prover::{check, parse_proof_file};
use cdgl::syntax::*;

fn checked(src: &str, proofs: &str, name: &str) -> (Formula, Strategy) {
    let src = Source::parse(src).unwrap();
    let file = parse_proof_file(proofs, &src).unwrap();
    let thm = file.get(name).unwrap();
    let res = check(&[], &thm.proof, &thm.goal);
    assert!(res.is_checked(), "{:?}", res.verdict);
    let st = extract(&res, &thm.goal, name).unwrap();
    (thm.goal.clone(), st)
}

fn value(s: &State, x: &str) -> f64 {
    s.get(x).approx()
}

#[test]
fn witness_is_played() {
    let (goal, angel) = checked("formula w = <x:=*>x>=0", r#"(theorem w (dia-random-I "0" (arith)))"#, "w");
    let Formula::Diamond(g, _) = &goal else { panic!() };
    let tr = play(g, &angel, &Strategy::passive(Role::Demon), &State::new(), &PlayConfig::default()).unwrap();
    assert_eq!(tr.evidence.outcome, Outcome::Completed);
    assert_eq!(tr.events.len(), 1);
    assert_eq!(value(&tr.final_state, "x"), 0.0);
    assert_eq!(tr.evidence.angel.holds, Some(true));
}

#[test]
fn deterministic_assignment() {
    let g = parse_game("x:=2; y:=x*x").unwrap();
    let tr = play(&g, &Strategy::passive(Role::Angel), &Strategy::passive(Role::Demon), &State::new(), &PlayConfig::default())
        .unwrap();
    assert_eq!(value(&tr.final_state, "y"), 4.0);
    assert!(tr.consistent());
}

#[test]
fn demon_choice_follows_script() {
    let src = "formula d = <{x:=1 ++ x:=2}^d>x>=1";
    let proofs = r#"(theorem d (dual-I (box-choice-I (asgn-I x0 (arith)) (asgn-I x1 (arith)))))"#;
    let (goal, angel) = checked(src, proofs, "d");
    let Formula::Diamond(g, _) = &goal else { panic!() };
    for (side, want) in [("left", 1.0), ("right", 2.0)] {
        let demon = script_demon(DemonScript::fixed(Construct::Choice, side)).unwrap();
        let tr = play(g, &angel, &demon, &State::new(), &PlayConfig::default()).unwrap();
        assert_eq!(value(&tr.final_state, "x"), want);
        assert_eq!(tr.evidence.angel.holds, Some(true));
        assert_eq!(tr.events[1].decider, Some(Role::Demon));
    }
}

#[test]
fn script_for_foreign_construct_is_rejected() {
    let g = parse_game("x:=*").unwrap();
    let demon = script_demon(DemonScript::fixed(Construct::AssignAny, "1")).unwrap();
    let err = play(&g, &Strategy::passive(Role::Angel), &demon, &State::new(), &PlayConfig::default()).unwrap_err();
    assert!(matches!(err, EngineError::StrategyMismatch(_)), "{err}");
}

#[test]
fn exhausted_table() {
    let g = parse_game("{{x:=x+1}^d ++ {x:=x-1}^d}*").unwrap();
    let script = DemonScript {
        decisions: vec![
            Decision { construct: Construct::Repeat, rule: DecisionRule::Table(vec!["go".into(), "go".into()]) },
            Decision { construct: Construct::Choice, rule: DecisionRule::Fixed("left".into()) },
        ],
        seed: 0,
    };
    let angel = Strategy::scripted(Role::Angel, script, "table").unwrap();
    let err = play(&g, &angel, &Strategy::passive(Role::Demon), &State::new(), &PlayConfig::default()).unwrap_err();
    assert!(matches!(err, EngineError::ScriptExhausted(_)), "{err}");
    assert!(DemonScript::from_json(r#"{"decisions":[{"construct":"ode","rule":{"fixed":"-1"}}]}"#)
        .unwrap()
        .validate()
        .is_err());
}

#[test]
fn failed_test_forfeits() {
    let g = parse_game("x:=1; ?x>=2").unwrap();
    let tr = play(&g, &Strategy::passive(Role::Angel), &Strategy::passive(Role::Demon), &State::new(), &PlayConfig::default())
        .unwrap();
    assert!(matches!(tr.evidence.outcome, Outcome::Forfeit { loser: Role::Angel, .. }));
    let g = parse_game("{?x>=2}^d").unwrap();
    let tr = play(&g, &Strategy::passive(Role::Angel), &Strategy::passive(Role::Demon), &State::new(), &PlayConfig::default())
        .unwrap();
    assert!(matches!(tr.evidence.outcome, Outcome::Forfeit { loser: Role::Demon, .. }));
}

#[test]
fn scripted_ode_is_clipped_by_domain() {
    let g = parse_game("{{x'=1 & x<=1}}^d").unwrap();
    let demon = script_demon(DemonScript::fixed(Construct::Ode, "5")).unwrap();
    let tr = play(&g, &Strategy::passive(Role::Angel), &demon, &State::new(), &PlayConfig::default()).unwrap();
    let x = tr.final_state.get("x").refine(40).unwrap();
    assert!(x.contains(&q(1)), "{x:?}");
}

#[test]
fn loop_converges_to_goal() {
    let src = "formula c = x>=0 -> <{x:=x-1 ++ x:=0}*>x<=0";
    let proofs = r#"(theorem c
      (box-test-I
        (dia-loop-I "x>=0" "x" "0" "1" m0
          (arith)
          (dia-choice-I2 (asgn-I x0 (arith)))
          (arith))))"#;
    let (goal, angel) = checked(src, proofs, "c");
    let Formula::Imply(_, body) = &goal else { panic!() };
    let Formula::Diamond(g, _) = &**body else { panic!() };
    let s = State::new().set("x", CReal::from_int(3));
    let tr = play(g, &angel, &Strategy::passive(Role::Demon), &s, &PlayConfig::default()).unwrap();
    assert_eq!(value(&tr.final_state, "x"), 0.0);
    assert_eq!(tr.evidence.angel.holds, Some(true));
    let again = play(g, &angel, &Strategy::passive(Role::Demon), &s, &PlayConfig::default()).unwrap();
    assert_eq!(tr.to_json(), again.to_json());
}
