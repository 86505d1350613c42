use std::collections::BTreeMap;

use bbmkdv::expr::{rational, Param, Rational};
use bbmkdv::system::{bbm_kdv, bbm_kdv_symbolic, kaup, preset};
use bbmkdv::{parse, Assumptions, Expr};

fn p(s: &str) -> Expr {
    parse(s).unwrap()
}

fn bindings(pairs: &[(Param, i64, i64)]) -> BTreeMap<Param, Rational> {
    pairs.iter().map(|&(k, n, d)| (k, rational(n, d))).collect()
}

#[test]
fn symbolic_adjoint_has_the_classical_form() {
    let sys = bbm_kdv_symbolic(&Assumptions::new()).unwrap();
    let adj = sys.adjoint_system().unwrap();
    let f1 = p("ubar_t + (a+b)*v*ubar_x + (b*u + c)*vbar_x + b*ubar*v_x + eps*ubar_txx + lambda*vbar_xxx");
    let f2 = p("vbar_t + (a*u + c)*ubar_x + (a+b)*v*vbar_x - b*ubar*u_x + kappa*ubar_xxx + sigma*vbar_txx");
    assert!(sys.equals(&adj.equations()[0], &f1));
    assert!(sys.equals(&adj.equations()[1], &f2));
}

#[test]
fn adjoint_commutes_with_binding_parameters() {
    // substitute the Kaup values into the symbolic adjoint, then compare
    // with the adjoint computed from the bound system
    let sym = bbm_kdv_symbolic(&Assumptions::new()).unwrap().adjoint_system().unwrap();
    let b = bindings(&[
        (Param::A, 1, 1),
        (Param::B, 0, 1),
        (Param::C, 1, 1),
        (Param::Eps, 0, 1),
        (Param::Kappa, 1, 3),
        (Param::Lambda, 0, 1),
        (Param::Sigma, 0, 1),
    ]);
    let subs: BTreeMap<_, _> =
        b.iter().map(|(k, v)| (bbmkdv::expr::Symbol::Param(*k), Expr::from_rational(v.clone()))).collect();
    let bound = kaup().adjoint_system().unwrap();
    for i in 0..2 {
        assert_eq!(sym.equations()[i].substitute(&subs).unwrap(), bound.equations()[i]);
    }
    assert_eq!(bound.equations()[1], p("vbar_t + (u + 1)*ubar_x + v*vbar_x + 1/3*ubar_xxx"));
}

#[test]
fn b_zero_drops_the_coupling_terms() {
    let sys = bbm_kdv_symbolic(&Assumptions::new().with_zero(&["b"]).unwrap()).unwrap();
    let adj = sys.adjoint_system().unwrap();
    assert_eq!(adj.equations()[0], p("ubar_t + a*v*ubar_x + c*vbar_x + eps*ubar_txx + lambda*vbar_xxx"));
}

#[test]
fn equal_components_give_bbm_and_kdv() {
    // v = u merges the two nonlinear terms into 2*a*u*u_x
    let bbm = bindings(&[(Param::A, 1, 2), (Param::B, 0, 1), (Param::C, 1, 1), (Param::Eps, -1, 1), (Param::Kappa, 0, 1)]);
    let sys = bbm_kdv(&bbm, &Assumptions::new()).unwrap();
    assert_eq!(sys.reduce_equal_components().unwrap()[0], p("u_t + (u + 1)*u_x - u_txx"));
    let kdv = bindings(&[(Param::A, 1, 2), (Param::B, 0, 1), (Param::C, 1, 1), (Param::Eps, 0, 1), (Param::Kappa, 1, 1)]);
    let sys = bbm_kdv(&kdv, &Assumptions::new()).unwrap();
    assert_eq!(sys.reduce_equal_components().unwrap()[0], p("u_t + (u + 1)*u_x + u_xxx"));
}

#[test]
fn presets_bind_every_parameter() {
    for name in ["boussinesq", "kaup", "bona-smith(lambda=-1)", "bona-smith(lambda = -3/2)"] {
        assert!(preset(name).unwrap().is_numeric(), "{name}");
    }
    assert!(preset("bona-smith(lambda=0)").is_err());
}
