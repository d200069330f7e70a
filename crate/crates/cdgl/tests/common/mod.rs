#![allow(dead_code)]

use cdgl::creal::{eval_term, pow2, to_creal, CReal, State};
use cdgl::engine::{
    decision_points, holds_relaxed, play, Construct, Decision, DecisionRule, DemonScript, EngineError, PlayConfig, Role,
    Strategy as Player,
};
use cdgl::statics::*;
use cdgl::syntax::*;
use num_rational::BigRational;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub const VARS: [&str; 4] = ["x", "y", "z", "w"];

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub fn small_rational() -> impl Strategy<Value = BigRational> {
    (-8i64..=8, 1i64..=4).prop_map(|(n, d)| rat(n, d))
}

fn var_name() -> impl Strategy<Value = String> {
    proptest::sample::select(VARS.to_vec()).prop_map(str::to_string)
}

/// Terms of depth at most 4 that evaluate everywhere: divisors are nonzero
/// literals and square roots take `t*t + c` with `c > 0`.
pub fn term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![var_name().prop_map(|x| var(&x)), small_rational().prop_map(Term::RealLit)];
    leaf.prop_recursive(3, 24, 2, |inner| {
        let nonzero = (1i64..=5, 1i64..=3).prop_map(|(n, d)| Term::RealLit(rat(n, d)));
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| plus(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| times(a, b)),
            inner.clone().prop_map(neg),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::Min(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::Max(Box::new(a), Box::new(b))),
            (inner.clone(), nonzero).prop_map(|(a, b)| div(a, b)),
            inner.prop_map(|a| Term::Sqrt(Box::new(plus(times(a.clone(), a), lit_int(1))))),
        ]
    })
}

fn rel() -> impl Strategy<Value = Rel> {
    proptest::sample::select(vec![Rel::Ge, Rel::Gt, Rel::Le, Rel::Lt, Rel::Eq])
}

fn atom() -> impl Strategy<Value = Formula> {
    (term(), rel(), term()).prop_map(|(a, r, b)| cmp(a, r, b))
}

/// Games without loops or ODEs, whose formulas the relaxed evaluator decides.
pub fn fo_game() -> BoxedStrategy<Game> {
    fo_game_depth(3)
}

pub fn fo_game_depth(depth: u32) -> BoxedStrategy<Game> {
    let leaf = prop_oneof![
        (var_name(), term()).prop_map(|(x, t)| assign(&x, t)),
        var_name().prop_map(|x| assign_any(&x)),
        atom().prop_map(test),
    ];
    leaf.prop_recursive(depth, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| choice(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| seq(a, b)),
            inner.prop_map(dual),
        ]
    })
    .boxed()
}

/// First-order formulas, possibly with modalities over shallow games.
/// Each `x:=*` multiplies the sampled evaluations, so nesting stays low.
pub fn fo_formula() -> BoxedStrategy<Formula> {
    atom()
        .prop_recursive(3, 16, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::And(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::Or(Box::new(a), Box::new(b))),
                inner.clone().prop_map(|a| Formula::Not(Box::new(a))),
                (fo_game_depth(2), inner.clone()).prop_map(|(g, p)| diamond(g, p)),
                (fo_game_depth(2), inner).prop_map(|(g, p)| boxf(g, p)),
            ]
        })
        .boxed()
}

/// ODEs whose right-hand sides never mention the evolving variable.
fn ode() -> impl Strategy<Value = Game> {
    (var_name(), var_name(), small_rational()).prop_map(|(x, y, c)| {
        let rhs = if x == y { Term::RealLit(c) } else { plus(var(&y), Term::RealLit(c)) };
        Game::Ode(vec![(x, rhs)], Box::new(tt()))
    })
}

/// Any game of depth at most 4, loops and ODEs included.
pub fn game() -> BoxedStrategy<Game> {
    let leaf = prop_oneof![
        (var_name(), term()).prop_map(|(x, t)| assign(&x, t)),
        var_name().prop_map(|x| assign_any(&x)),
        atom().prop_map(test),
        ode(),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| choice(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| seq(a, b)),
            inner.clone().prop_map(dual),
            inner.prop_map(|a| Game::Repeat(Box::new(a))),
        ]
    })
    .boxed()
}

pub fn state() -> impl Strategy<Value = State> {
    proptest::collection::vec(small_rational(), VARS.len()).prop_map(|vals| {
        VARS.iter().zip(vals).fold(State::new(), |s, (x, v)| s.set(x, CReal::from_rational(v)))
    })
}

pub fn picks() -> impl Strategy<Value = Vec<bool>> {
    proptest::collection::vec(proptest::bool::weighted(0.35), 12)
}

fn eps() -> BigRational {
    pow2(-53)
}

fn differ_outside(s: &State, keep: &VarSet, other: &BigRational) -> State {
    VARS.iter().filter(|x| !keep.contains(**x)).fold(s.clone(), |acc, x| acc.set(x, CReal::from_rational(other.clone())))
}

/// A script answering every decision one side makes in `g`. `picks` drives
/// choices and loop continuation.
fn script_for(g: &Game, angel_side: bool, picks: &[bool], value: &BigRational) -> DemonScript {
    let decisions = decision_points(g, angel_side)
        .into_iter()
        .map(|c| {
            let rule = match c {
                Construct::Choice => DecisionRule::Fixed(if picks[0] { "right" } else { "left" }.into()),
                Construct::AssignAny => DecisionRule::Fixed(fmt_rational(value)),
                Construct::Ode => DecisionRule::Fixed("1/2".into()),
                Construct::Repeat => {
                    DecisionRule::Table(picks.iter().map(|&go| if go { "go" } else { "stop" }.to_string()).collect())
                }
            };
            Decision { construct: c, rule }
        })
        .collect();
    DemonScript { decisions, seed: 0 }
}

/// Plays `g` with both sides scripted; `None` if the scripts run out.
fn run(g: &Game, s: &State, picks: &[bool], v: &BigRational) -> Option<State> {
    let a = Player::scripted(Role::Angel, script_for(g, true, picks, v), "a").unwrap();
    let d = Player::scripted(Role::Demon, script_for(g, false, picks, v), "d").unwrap();
    let cfg = PlayConfig { snapshots: false, repeat_cap: 64, ..PlayConfig::default() };
    match play(g, &a, &d, s, &cfg) {
        Ok(tr) => Some(tr.final_state),
        Err(EngineError::ScriptExhausted(_)) | Err(EngineError::NonTermination(_)) => None,
        Err(e) => panic!("{g}: {e}"),
    }
}

fn same(a: &State, b: &State, x: &str) -> bool {
    a.get(x).refine(40).unwrap() == b.get(x).refine(40).unwrap()
}

pub fn term_coincidence(t: &Term, s: &State, other: &BigRational) -> Result<(), TestCaseError> {
    let s2 = differ_outside(s, &term_vars(t), other);
    prop_assert_eq!(eval_term(t, s, 30).unwrap(), eval_term(t, &s2, 30).unwrap());
    Ok(())
}

pub fn formula_coincidence(f: &Formula, s: &State, other: &BigRational) -> Result<(), TestCaseError> {
    let s2 = differ_outside(s, &free_vars_formula(f), other);
    prop_assert_eq!(holds_relaxed(f, s, &eps()).unwrap(), holds_relaxed(f, &s2, &eps()).unwrap(), "{}", f);
    Ok(())
}

/// Runs that agree on the free variables end agreeing on them, and nothing
/// outside the bound variables changes.
pub fn game_coincidence_and_bound_effect(
    g: &Game,
    s: &State,
    other: &BigRational,
    picks: &[bool],
    v: &BigRational,
) -> Result<(), TestCaseError> {
    let (fv, bv) = (free_vars_game(g), bound_vars(g));
    let s2 = differ_outside(s, &fv, other);
    if let (Some(e1), Some(e2)) = (run(g, s, picks, v), run(g, &s2, picks, v)) {
        for x in VARS {
            if !bv.contains(x) {
                prop_assert!(same(&e1, s, x), "{} changed {}", g, x);
            }
            if fv.contains(x) {
                prop_assert!(same(&e1, &e2, x), "{} disagrees on {}", g, x);
            }
        }
    }
    Ok(())
}

pub fn renaming_involution(f: &Formula, g: &Game, t: &Term) -> Result<(), TestCaseError> {
    for (x, y) in [("x", "y"), ("z", "fresh"), ("w", "w")] {
        prop_assert_eq!(&f.rename(x, y).rename(x, y), f);
        prop_assert_eq!(&g.rename(x, y).rename(x, y), g);
        prop_assert_eq!(&t.rename(x, y).rename(x, y), t);
        let swapped: VarSet = free_vars_formula(f)
            .iter()
            .map(|v| if v == x { y.to_string() } else if v == y { x.to_string() } else { v.clone() })
            .collect();
        prop_assert_eq!(free_vars_formula(&f.rename(x, y)), swapped);
    }
    Ok(())
}

pub fn term_substitution(t: &Term, f: &Term, s: &State) -> Result<(), TestCaseError> {
    for x in VARS {
        let sub = substitute_term(t, x, f).unwrap();
        let direct = eval_term(&sub, s, 30).unwrap();
        let shifted = eval_term(t, &s.set(x, to_creal(f, s).unwrap()), 30).unwrap();
        prop_assert!(direct.overlaps(&shifted), "{}[{}:={}]", t, x, f);
    }
    Ok(())
}

/// Admissible substitution agrees with updating the state.
pub fn formula_substitution(p: &Formula, f: &Term, s: &State) -> Result<(), TestCaseError> {
    for x in VARS {
        if let Ok(sub) = substitute(p, x, f) {
            let shifted = s.set(x, to_creal(f, s).unwrap());
            prop_assert_eq!(
                holds_relaxed(&sub, s, &eps()).unwrap(),
                holds_relaxed(p, &shifted, &eps()).unwrap(),
                "{}[{}:={}]",
                p,
                x,
                f
            );
        }
    }
    Ok(())
}
