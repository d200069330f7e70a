use cdgl::creal::*;
use cdgl::syntax::parse_term;
use num_bigint::BigInt;
use num_rational::BigRational;

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[test]
fn sqrt_two_brackets_its_square() {
    let s = CReal::from_int(2).sqrt().unwrap();
    for k in [8, 53, 120] {
        let i = s.refine(k).unwrap();
        assert!(&i.lo * &i.lo <= q(2) && q(2) <= &i.hi * &i.hi, "k = {k}");
        assert!(i.width() <= pow2(-(k as i64)));
    }
}

#[test]
fn exact_values_stay_exact() {
    assert_eq!(CReal::from_rational(r(9, 4)).sqrt().unwrap().as_exact(), Some(&r(3, 2)));
    let third = CReal::from_int(1).div(&CReal::from_int(3)).unwrap();
    assert_eq!(third.as_exact(), Some(&r(1, 3)));
}

#[test]
fn division_by_a_nonexact_value() {
    let x = CReal::from_int(1).div(&CReal::from_int(3).sqrt().unwrap()).unwrap();
    let i = x.refine(64).unwrap();
    // 1/sqrt(3) squared is 1/3.
    assert!(&i.lo * &i.lo <= r(1, 3) && r(1, 3) <= &i.hi * &i.hi);
}

#[test]
fn evaluation_errors() {
    assert_eq!(CReal::from_int(-1).sqrt().unwrap_err(), CRealError::SqrtOfNegative);
    assert!(CReal::from_int(1).div(&CReal::zero()).is_err());
    let two = CReal::from_int(2).sqrt().unwrap();
    let zero = two.mul(&two).sub(&CReal::from_int(2));
    assert_eq!(CReal::from_int(1).div(&zero).unwrap().refine(8).unwrap_err(), CRealError::DivisionNearZero);
}

#[test]
fn min_max_of_equal_values_written_differently() {
    let s = State::from_rationals([("x", r(5, 7))]);
    let a = to_creal(&parse_term("(x*3)/3").unwrap(), &s).unwrap();
    let b = to_creal(&parse_term("x + 1 - 1").unwrap(), &s).unwrap();
    for k in [8, 53, 200] {
        for v in [a.min(&b), a.max(&b)] {
            let i = v.refine(k).unwrap();
            assert!(i.contains(&r(5, 7)) && i.width() <= pow2(-(k as i64)));
        }
    }
}

#[test]
fn eps_comparison_near_equality() {
    let s = State::from_rationals([("x", r(1, 2))]);
    let f = parse_term("sqrt(x)*sqrt(x)").unwrap();
    let g = parse_term("x").unwrap();
    let eps = pow2(-30);
    assert_eq!(cmp_eps(&f, &g, &eps, &s).unwrap(), EpsCmp::LtPlusEps);
    let g = parse_term("x - 1/1000").unwrap();
    assert_eq!(cmp_eps(&f, &g, &eps, &s).unwrap(), EpsCmp::Gt);
}

#[test]
fn term_evaluation_matches_f64() {
    let s = State::from_rationals([("x", r(3, 4)), ("y", r(-5, 2))]);
    let t = parse_term("max(x*y, -2) + sqrt(x)/(1 + y*y) - min(x, y)").unwrap();
    let want = (0.75f64 * -2.5).max(-2.0) + 0.75f64.sqrt() / (1.0 + 6.25) - 0.75f64.min(-2.5);
    let i = eval_term(&t, &s, 60).unwrap();
    assert!((to_f64(&i.mid()) - want).abs() < 1e-12);
}
