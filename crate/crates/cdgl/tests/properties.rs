mod common;

use cdgl::creal::{cmp_eps_real, pow2, CReal, EpsCmp};
use cdgl::syntax::*;
use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn print_parse_round_trip(f in fo_formula(), g in game()) {
        prop_assert_eq!(parse_formula(&f.to_string()).unwrap(), f.clone());
        prop_assert_eq!(parse_game(&g.to_string()).unwrap(), g);
    }

    #[test]
    fn desugar_is_idempotent(f in fo_formula()) {
        let d = desugar(&f);
        prop_assert!(is_core(&d));
        prop_assert_eq!(desugar(&d), d.clone());
        prop_assert_eq!(desugar(&resugar(&d)), d);
    }

    #[test]
    fn renaming_is_an_involution(f in fo_formula(), g in game(), t in term()) {
        renaming_involution(&f, &g, &t)?;
    }

    #[test]
    fn terms_depend_only_on_free_variables(t in term(), s in state(), other in small_rational()) {
        term_coincidence(&t, &s, &other)?;
    }

    #[test]
    fn formulas_depend_only_on_free_variables(f in fo_formula(), s in state(), other in small_rational()) {
        formula_coincidence(&f, &s, &other)?;
    }

    #[test]
    fn games_respect_free_and_bound_variables(
        g in game(), s in state(), other in small_rational(), p in picks(), v in small_rational()
    ) {
        game_coincidence_and_bound_effect(&g, &s, &other, &p, &v)?;
    }

    #[test]
    fn substitution_in_terms(t in term(), f in term(), s in state()) {
        term_substitution(&t, &f, &s)?;
    }

    #[test]
    fn substitution_in_formulas(p in fo_formula(), f in term(), s in state()) {
        formula_substitution(&p, &f, &s)?;
    }

    #[test]
    fn intervals_nest_and_contain_rational_value(n in -50i64..50, d in 1i64..20, m in -50i64..50, e in 1i64..20) {
        let (a, b) = (rat(n, d), rat(m, e));
        let exact = [&a + &b, &a * &b, a.clone().min(b.clone()), a.clone().max(b.clone())];
        let (ca, cb) = (CReal::from_rational(a.clone()), CReal::from_rational(b.clone()));
        let lazy = [ca.add(&cb), ca.mul(&cb), ca.min(&cb), ca.max(&cb)];
        for (q, r) in exact.iter().zip(lazy) {
            let mut prev = r.refine(1).unwrap();
            for k in [4, 16, 40] {
                let iv = r.refine(k).unwrap();
                prop_assert!(iv.contains(q));
                prop_assert!(iv.width() <= pow2(-(k as i64)));
                prop_assert!(iv.overlaps(&prev));
                prev = iv;
            }
        }
        if n > 0 {
            let root = ca.sqrt().unwrap().refine(30).unwrap();
            prop_assert!(&root.lo * &root.lo <= a && a <= &root.hi * &root.hi);
        }
    }

    #[test]
    fn cmp_eps_is_total_and_sound(n in -50i64..50, d in 1i64..20, m in -50i64..50, e in 1i64..20, k in 1i64..40) {
        let (a, b) = (rat(n, d), rat(m, e));
        let eps = pow2(-k);
        match cmp_eps_real(&CReal::from_rational(a.clone()), &CReal::from_rational(b.clone()), &eps).unwrap() {
            EpsCmp::Gt => prop_assert!(a > b),
            EpsCmp::LtPlusEps => prop_assert!(a < &b + &eps),
        }
    }
}
