mod common;

use bbmkdv::expr::{rational, DepVar, Param, Rational, Symbol};
use bbmkdv::jet::JetSpace;
use bbmkdv::selfadjoint::{substituted_adjoint, substituted_adjoint_via_system, Substitution};
use bbmkdv::system::{bbm_kdv_symbolic, euler_lagrange};
use bbmkdv::{parse, Assumptions};
use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn normalize_is_idempotent(e in expr(3, true)) {
        let once = e.normalize();
        prop_assert_eq!(&once, &e);
        prop_assert_eq!(once.normalize(), once.clone());
        prop_assert_eq!(parse(&once.to_string()).unwrap(), once);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn total_derivatives_commute(e in expr(3, true)) {
        let js = JetSpace::default();
        let tx = js.dx(&js.dt(&e).unwrap()).unwrap();
        let xt = js.dt(&js.dx(&e).unwrap()).unwrap();
        prop_assert_eq!(tx, xt);
    }

    #[test]
    fn ring_axioms(a in expr(2, false), b in expr(2, false), c in expr(2, false)) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
    }

    #[test]
    fn partials_obey_leibniz(a in expr(2, true), b in expr(2, true), i in 0usize..4) {
        let s = [Symbol::dep(DepVar::U), Symbol::dep(DepVar::V), Symbol::jet(DepVar::U, 0, 1), Symbol::Param(Param::A)][i];
        prop_assert_eq!((&a * &b).diff(&s), &(&a.diff(&s) * &b) + &(&a * &b.diff(&s)));
        prop_assert_eq!((&a + &b).diff(&s), &a.diff(&s) + &b.diff(&s));
    }

    #[test]
    fn partials_match_difference_quotients(e in expr(2, false), seed in prop::collection::vec(-9i64..10, 4)) {
        // central differences are exact up to O(h^2) on rational functions
        let u = Symbol::dep(DepVar::U);
        let base = point(&seed);
        let h = rational(1, 1_000_000);
        let at = |du: Rational| {
            let f = |s: &Symbol| if *s == u { base(s).map(|q| q + du.clone()) } else { base(s) };
            e.eval(&f)
        };
        let (Ok(hi), Ok(lo), Ok(d)) = (at(h.clone()), at(-h.clone()), e.diff(&u).eval(&base)) else {
            return Ok(());
        };
        let fd = (hi - lo) / (h * Rational::from_integer(2.into()));
        let to_f = |q: &Rational| q.numer().to_string().parse::<f64>().unwrap() / q.denom().to_string().parse::<f64>().unwrap();
        let (fd, d) = (to_f(&fd), to_f(&d));
        prop_assert!((fd - d).abs() <= 1e-6 * (1.0 + d.abs()), "{} vs {}", fd, d);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn euler_operator_annihilates_divergences(h in expr(2, true), k in expr(2, true), w in 0usize..2) {
        let js = JetSpace::default();
        let div = js.dt(&h).unwrap() + js.dx(&k).unwrap();
        let var = [DepVar::U, DepVar::V][w];
        prop_assert!(euler_lagrange(&js, &div, var, 3).unwrap().is_zero());
    }

    #[test]
    fn substituted_adjoint_paths_agree(phi in point_function(), psi in point_function(), zero in prop::collection::btree_set(0usize..7, 0..3)) {
        prop_assume!(!(phi.is_zero() && psi.is_zero()));
        let names: Vec<&str> = zero.iter().map(|&i| PARAMS[i].name()).collect();
        let Ok(asm) = Assumptions::new().with_zero(&names) else { return Ok(()) };
        let Ok(sys) = bbm_kdv_symbolic(&asm) else { return Ok(()) };
        let Ok(sub) = Substitution::new(sys.reduce(&phi).unwrap(), sys.reduce(&psi).unwrap()) else { return Ok(()) };
        let direct = substituted_adjoint(&sys, &sub).unwrap();
        let via = substituted_adjoint_via_system(&sys, &sub).unwrap();
        prop_assert_eq!(direct, via);
    }
}

#[test]
fn euler_operator_on_a_quadratic_lagrangian() {
    // a quadratic Lagrangian with a known variational derivative
    let js = JetSpace::default();
    let l = parse("u_x^2/2 + u*v_t").unwrap();
    assert_eq!(euler_lagrange(&js, &l, DepVar::U, 2).unwrap(), parse("v_t - u_xx").unwrap());
    assert_eq!(euler_lagrange(&js, &l, DepVar::V, 2).unwrap(), parse("-u_t").unwrap());
}
