use cdgl::prover::*;
use cdgl::syntax::*;

fn f(s: &str) -> Formula {
    desugar(&parse_formula(s).unwrap())
}

fn proof(src: &str) -> ProofTerm {
    let file = parse_proof_file(&format!("(theorem p \"1>0\" {src})"), &Source::default()).unwrap();
    file.theorems[0].proof.clone()
}

fn failed_at(r: &CheckResult) -> (String, String) {
    match &r.verdict {
        Verdict::Failed { rule, path, .. } => (rule.clone(), path.clone()),
        Verdict::Checked => panic!("expected a failure"),
    }
}

#[test]
fn hypothesis_closes_goal() {
    let r = check(&[f("x>0")], &ProofTerm::hyp(0), &f("x>0"));
    assert!(r.is_checked());
    let r = check(&[f("x>0")], &ProofTerm::hyp(0), &f("x>1"));
    assert_eq!(failed_at(&r), ("hyp".into(), "0".into()));
}

#[test]
fn diamond_test_splits() {
    let r = check(&[], &proof("(dia-test-I (arith) (arith))"), &f("<?1>0>2>1"));
    assert!(r.is_checked());
    assert_eq!(r.proved_leaves, 2);
    assert!(r.obligations.is_empty());
}

#[test]
fn inadmissible_witness_fails_at_root() {
    // y is bound by the ODE, so substituting x := y under it would capture.
    let goal = f("<x:=*>[{y'=1}]x>=0");
    let r = check(&[], &proof("(dia-random-I \"y\" (asgn-I x0 (arith)))"), &goal);
    let (rule, path) = failed_at(&r);
    assert_eq!((rule.as_str(), path.as_str()), ("dia-random-I", "0"));
}

#[test]
fn box_choice_elimination_needs_a_box() {
    let ctx = vec![f("<x:=1++x:=2>x>0")];
    let r = check(&ctx, &proof("(box-choice-E1 \"x:=2\" (hyp 0))"), &f("[x:=1]x>0"));
    assert!(!r.is_checked());
}

#[test]
fn apply_rule_shapes() {
    let seq = Sequent::new(vec![], f("[a:=1++b:=2]c>0"));
    let ps = apply_rule(&seq, &RuleInstance::new(Rule::BoxChoiceI, vec![])).unwrap();
    assert_eq!(ps.iter().map(|p| p.goal.clone()).collect::<Vec<_>>(), vec![f("[a:=1]c>0"), f("[b:=2]c>0")]);

    let seq = Sequent::new(vec![], f("<a:=1;b:=2>c>0"));
    let ps = apply_rule(&seq, &RuleInstance::new(Rule::SeqI, vec![])).unwrap();
    assert_eq!(ps[0].goal, f("<a:=1><b:=2>c>0"));

    let seq = Sequent::new(vec![], f("[{x'=v,v'=1}]x>=0"));
    let ps = apply_rule(&seq, &RuleInstance::new(Rule::Dc, vec![Arg::Formula(f("v>=0"))])).unwrap();
    assert_eq!(ps[0].goal, f("[{x'=v,v'=1}]v>=0"));
    assert_eq!(ps[1].goal, f("[{x'=v,v'=1&tt&v>=0}]x>=0"));
}

#[test]
fn arithmetic_oracle() {
    let seq = |ctx: &[&str], g: &str| Sequent::new(ctx.iter().map(|c| f(c)).collect(), f(g));
    assert_eq!(discharge_arith(&seq(&[], "sqrt(2)*sqrt(2)<=2+1/1000")), ArithVerdict::Proved);
    assert_eq!(discharge_arith(&seq(&["x=3", "y=x*x"], "y>=9")), ArithVerdict::Proved);
    assert!(matches!(discharge_arith(&seq(&[], "x>=0")), ArithVerdict::Refuted(_)));
    assert_eq!(discharge_arith(&seq(&["x>=0"], "x*x>=0")), ArithVerdict::Assumed);
    assert_eq!(discharge_arith(&seq(&["0>1"], "x>=5")), ArithVerdict::Proved);
}

#[test]
fn rule_table_is_complete() {
    let names: Vec<&str> = Rule::ALL.iter().map(|r| r.name()).collect();
    for want in [
        "box-choice-I", "box-choice-E1", "box-choice-E2", "dia-choice-I1", "dia-choice-I2", "dia-choice-E",
        "dia-test-I", "dia-test-E1", "dia-test-E2", "box-test-I", "box-test-E", "hyp", "box-random-I",
        "box-random-E", "dia-random-I", "dia-random-E", "seq-I", "asgn-I", "mon", "dual-I", "dia-loop-E",
        "box-loop-E", "dia-loop-S", "dia-loop-G", "box-loop-R", "loop", "fp", "dia-loop-I", "DI", "DC", "DW",
        "DG", "DV", "bsolve", "dsolve", "GV", "arith",
    ] {
        assert!(names.contains(&want), "missing {want}");
    }
    assert_eq!(names.len(), 37);
    for r in Rule::ALL {
        assert_eq!(Rule::from_name(r.name()), Some(*r));
    }
}

#[test]
fn loop_margin_must_be_positive() {
    let goal = f("x>=0 -> <{x:=x-1}*>x<=0");
    for delta in ["0", "-1", "x"] {
        let p = proof(&format!(
            "(box-test-I (dia-loop-I \"x>=0\" \"x\" \"0\" \"{delta}\" m0 (arith) (asgn-I x0 (arith)) (arith)))"
        ));
        let r = check(&[], &p, &goal);
        assert_eq!(failed_at(&r), ("dia-loop-I".into(), "0.0".into()), "δ = {delta}");
    }
}

#[test]
fn stale_name_is_not_fresh() {
    let r = check(&[f("y>0")], &proof("(asgn-I y (hyp 0))"), &f("[x:=1]y>0"));
    assert_eq!(failed_at(&r), ("asgn-I".into(), "0".into()));
}

#[test]
fn strict_mode_rejects_assumed_leaves() {
    let p = proof("(arith \"lemma\")");
    let goal = f("x*x>=0");
    let ctx = [f("x>=0")];
    assert!(check(&ctx, &p, &goal).is_checked());
    assert!(!check_with(&ctx, &p, &goal, CheckOptions { strict: true }).is_checked());
}
