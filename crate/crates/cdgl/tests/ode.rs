use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use cdgl::creal::{eval_term, pow2, q, CReal, Interval, State};
use cdgl::ode::*;
use cdgl::syntax::*;

fn sys(text: &str) -> OdeSystem {
    OdeSystem::from_game(&parse_game(text).unwrap()).unwrap()
}

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Enclosure of Σ_{i>=0} sign^i / (i·step + offset)! truncated after the
/// remainder drops below 2^-80.
fn series(offset: u32, alternate: bool) -> Interval {
    let mut sum = BigRational::zero();
    let mut fact = BigRational::one();
    for i in 1..=offset {
        fact *= q(i as i64);
    }
    let mut n = offset;
    let mut sign = BigRational::one();
    loop {
        let term = &sign / &fact;
        sum += &term;
        let step = if alternate { 2 } else { 1 };
        for _ in 0..step {
            n += 1;
            fact *= q(n as i64);
        }
        if alternate {
            sign = -sign;
        }
        if fact > pow2(80) {
            let bound = BigRational::from_integer(2.into()) / &fact;
            return Interval::new(&sum - &bound, &sum + &bound);
        }
    }
}

#[test]
fn nilpotent_plant() {
    let s = sys("{t'=1, x'=v, v'=a}");
    let sol = solve_nilpotent(&s, "s").unwrap();
    let st = State::from_rationals([("t", q(2)), ("x", q(1)), ("v", q(3)), ("a", r(-1, 2))]);
    let at = sol.at(&lit(q(4)));
    let get = |x: &str| eval_term(&at.iter().find(|(y, _)| y == x).unwrap().1, &st, 40).unwrap();
    assert_eq!(get("t"), Interval::point(q(6)));
    assert_eq!(get("v"), Interval::point(q(1)));
    // 1 + 3*4 - 1/2 * 16 / 2
    assert_eq!(get("x"), Interval::point(q(9)));
    assert_eq!(sol.degree(), 2);
}

#[test]
fn nilpotent_trivial_and_failing() {
    let sol = solve_nilpotent(&sys("{x'=0}"), "s").unwrap();
    assert_eq!(sol.get("x"), Some(&var("x")));
    assert!(matches!(solve_nilpotent(&sys("{x'=x}"), "s"), Err(OdeError::NotNilpotent(_))));
    assert!(matches!(solve_nilpotent(&sys("{x'=s}"), "s"), Err(OdeError::TimeNotFresh(_))));
}

#[test]
fn picard_exponential_contains_e() {
    let s = sys("{x'=x}");
    let st = State::from_rationals([("x", q(1))]);
    let sol = picard_solve(&s, &st, &q(1), 20).unwrap();
    let x1 = sol.sample(&q(1)).remove(0);
    let e = series(0, false);
    assert!(x1.overlaps(&e) && x1.contains(&e.mid()), "{x1:?}");
    assert!(x1.width() <= pow2(-20));
}

#[test]
fn picard_rotation_matches_sine() {
    let s = sys("{x'=v, v'=-x}");
    let st = State::from_rationals([("x", q(0)), ("v", q(1))]);
    let sol = picard_solve(&s, &st, &q(1), 24).unwrap();
    let x1 = sol.sample_var("x", &q(1)).unwrap();
    let v1 = sol.sample_var("v", &q(1)).unwrap();
    let sin1 = series(1, true);
    let cos1 = series(0, true);
    assert!(x1.contains(&sin1.mid()), "{x1:?}");
    assert!(v1.contains(&cos1.mid()), "{v1:?}");
    assert!(x1.width() <= pow2(-24));
}

#[test]
fn picard_constant_is_exact() {
    let s = sys("{x'=0}");
    let st = State::from_rationals([("x", r(7, 3))]);
    let sol = picard_solve(&s, &st, &q(5), 30).unwrap();
    for t in [q(0), r(5, 2), q(5)] {
        assert!(sol.sample(&t)[0].contains(&r(7, 3)));
        assert!(sol.sample(&t)[0].width() <= pow2(-30));
    }
}

#[test]
fn solves_examples() {
    let s = sys("{t'=1, x'=2*t}");
    let st = State::from_rationals([("t", q(0)), ("x", q(0))]);
    let cfg = SolvesConfig::default();
    let good = SymbolicSolution::from_terms("r", vec![("t".into(), var("r")), ("x".into(), parse_term("r*r").unwrap())], &s).unwrap();
    assert!(check_solves(&Solution::Symbolic(good), &st, &q(1), &s, &cfg));
    let bad = SymbolicSolution::from_terms("r", vec![("t".into(), var("r")), ("x".into(), parse_term("r*r*r").unwrap())], &s).unwrap();
    assert!(!check_solves(&Solution::Symbolic(bad.clone()), &st, &q(1), &s, &cfg));
    assert!(check_solves(&Solution::Symbolic(bad), &st, &q(0), &s, &cfg));
}

#[test]
fn sampled_solution_passes_check() {
    let s = sys("{x'=x}");
    let st = State::from_rationals([("x", q(1))]);
    let sol = picard_solve(&s, &st, &q(1), 40).unwrap();
    let cfg = SolvesConfig::default();
    let sol = Solution::Sampled(sol);
    assert!(check_solves(&sol, &st, &q(1), &s, &cfg));
    assert!(check_solves(&sol, &st, &r(1, 3), &s, &cfg));
    let other = State::from_rationals([("x", q(2))]);
    assert!(!check_solves(&sol, &other, &q(1), &s, &cfg));
}

#[test]
fn solution_state_sets_primes() {
    let s = sys("{x'=v, v'=a}");
    let sol = Solution::Symbolic(solve_nilpotent(&s, "s").unwrap());
    let st = State::from_rationals([("v", q(1)), ("a", q(2))]);
    let end = sol.state_at(&s, &st, &CReal::from_int(3), 40).unwrap();
    assert_eq!(end.get("x").refine(30).unwrap(), Interval::point(q(12)));
    assert_eq!(end.get("x'").refine(30).unwrap(), Interval::point(q(7)));
}

#[test]
fn differential_examples() {
    let st = State::from_rationals([("x", q(3)), ("x'", q(2)), ("y'", q(2))]);
    let st1 = st.set("x'", CReal::from_int(1));
    assert_eq!(differential_eval(&parse_term("(x*x)'").unwrap(), &st, 20).unwrap(), Interval::point(q(12)));
    assert_eq!(differential_eval(&parse_term("(x+y)'").unwrap(), &st1, 20).unwrap(), Interval::point(q(3)));
    assert!(matches!(differential_eval(&parse_term("(min(x,y))'").unwrap(), &st, 20), Err(OdeError::NonDifferentiable(_))));
}

#[test]
fn ill_formed_systems() {
    let dup = OdeSystem::new(vec![("x".into(), lit_int(1)), ("x".into(), lit_int(2))], Formula::True);
    assert!(dup.validate().is_err());
    let primed_rhs = OdeSystem::new(vec![("x".into(), Term::PrimedVar("y".into()))], Formula::True);
    assert!(primed_rhs.validate().is_err());
}
