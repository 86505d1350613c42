use bbmkdv::conslaw::*;
use bbmkdv::expr::Param;
use bbmkdv::reduce::{numeric_witness, DEFAULT_LADDER};
use bbmkdv::selfadjoint::Substitution;
use bbmkdv::symmetry::parse_combination;
use bbmkdv::system::{bbm_kdv_symbolic, PdeSystem};
use bbmkdv::{parse, Assumptions, Expr};
use proptest::prelude::*;

fn branch(id: &'static str, zero: &[Param]) -> PdeSystem {
    SweepCase::new(id, zero).system().unwrap()
}

fn build(sys: &PdeSystem, g: &str, phi: &str, psi: &str) -> ConservedVector {
    let sub = Substitution::parse(phi, psi).unwrap();
    conserved_vector(sys, &sub, &parse_combination(g).unwrap(), g).unwrap()
}

/// Divergence checked at sampled points of the solution manifold, apart
/// from the elimination that produced the certificate.
fn vanishes_at_samples(c: &ConservedVector, sys: &PdeSystem) -> bool {
    let div = c.divergence(sys).unwrap();
    numeric_witness(&div, sys, 8, 0xc0ffee).unwrap().is_none()
}

#[test]
fn catalog_vectors_are_conserved_on_their_branches() {
    let expected = [
        ("i.a", "{F1: 2*v, F2: 2*u}"),
        ("i.b-lambda0", "{F1: ln(a*u + c) + 1, F2: a*v/c}"),
        ("i.b-sigma0", "{F1: 2*a*t*v - 2*x, F2: 2*a*t*u + 2*c*t}"),
        ("ii.a", "{F1: 2*a*u + 2*c}"),
    ];
    for (id, cert) in expected {
        let (v, _) = catalog_vector(id).unwrap();
        let sys = bbm_kdv_symbolic(&catalog_assumptions(id).unwrap()).unwrap();
        let c = verify_divergence(&v, &sys, &DEFAULT_LADDER).unwrap();
        assert_eq!(c.to_string(), cert, "{id}");
        assert!(vanishes_at_samples(&v, &sys), "{id}");
    }
    let (v, _) = catalog_vector("ii.b").unwrap();
    let sys = bbm_kdv_symbolic(&catalog_assumptions("ii.b").unwrap()).unwrap();
    assert!(verify_divergence(&v, &sys, &DEFAULT_LADDER).unwrap().is_valid());
    assert!(vanishes_at_samples(&v, &sys));
}

#[test]
fn catalog_vectors_fail_off_their_branches() {
    // the energy-type vector needs eps = sigma
    let (v, _) = catalog_vector("i.a").unwrap();
    let sys = branch("i.b-lambda0", &[]);
    assert!(verify_divergence(&v, &sys, &DEFAULT_LADDER).is_err());
    assert!(!vanishes_at_samples(&v, &sys));
}

#[test]
fn obvious_vectors() {
    let sys = bbm_kdv_symbolic(&Assumptions::new().with_zero(&["b"]).unwrap()).unwrap();
    let o1 = obvious_vector(1).unwrap();
    assert_eq!(verify_divergence(&o1, &sys, &DEFAULT_LADDER).unwrap().to_string(), "{F1: 1}");
    assert_eq!(is_trivial(&o1, &sys, 3, &DEFAULT_LADDER[..2]).unwrap(), None);
    let full = bbm_kdv_symbolic(&Assumptions::new()).unwrap();
    assert!(verify_divergence(&o1, &full, &DEFAULT_LADDER).is_err());
    let o2 = obvious_vector(2).unwrap();
    assert_eq!(verify_divergence(&o2, &full, &DEFAULT_LADDER).unwrap().to_string(), "{F2: 2}");
}

#[test]
fn vanishing_and_curl_vectors_are_trivial() {
    let sys = bbm_kdv_symbolic(&Assumptions::new()).unwrap();
    let f1 = sys.equations()[0].clone();
    let c = ConservedVector::new(f1, Expr::zero(), Provenance::Given);
    assert_eq!(is_trivial(&c, &sys, 1, &DEFAULT_LADDER).unwrap().unwrap().h, Expr::zero());
    let c = ConservedVector::parse("u_x*v + u*v_x", "-u_t*v - u*v_t").unwrap();
    assert_eq!(is_trivial(&c, &sys, 2, &DEFAULT_LADDER).unwrap().unwrap().h, parse("u*v").unwrap());
}

#[test]
fn constructed_vectors_satisfy_the_divergence_identity() {
    let cases = [
        ("i.a", vec![Param::Kappa], "X1", "a*v", "a*u + c"),
        ("i.b-lambda0", vec![], "X1", "c*ln(a*u + c)", "a*v"),
        ("i.b-sigma0", vec![], "X1", "a*t*v - x", "a*t*u + c*t"),
        ("ii.b", vec![], "X1", "(a*u + c)*ln(a*u + c)", "a*v"),
    ];
    for (id, zero, g, phi, psi) in cases {
        let sys = branch(id, &zero);
        let v = certify(build(&sys, g, phi, psi), &sys, &DEFAULT_LADDER).unwrap();
        assert!(v.certificate.as_ref().unwrap().is_valid());
        assert!(vanishes_at_samples(&v, &sys), "{id}");
    }
}

#[test]
fn scaling_vectors_reach_the_catalog() {
    let cases = [
        ("i.a", vec![Param::Kappa], "a*v", "a*u + c", vec!["-3/2*a*c", "-3/2*a^2"], vec!["obvious-2", "catalog i.a"]),
        ("i.b-lambda0", vec![], "c*ln(a*u + c)", "a*v", vec!["-2*a*c"], vec!["catalog i.b-lambda0"]),
        ("i.b-sigma0", vec![], "a*t*v - x", "a*t*u + c*t", vec!["-a"], vec!["catalog i.b-sigma0"]),
        ("ii.a", vec![Param::Lambda], "a*u + c", "0", vec!["-2*a"], vec!["catalog ii.a"]),
    ];
    for (id, zero, phi, psi, coeffs, names) in cases {
        let sys = branch(id, &zero);
        let refs = reference_vectors(&sys, &DEFAULT_LADDER).unwrap();
        let v = build(&sys, "X1", phi, psi);
        let class = classify_vector(&v, &refs, &sys, SWEEP_DEGREE, &DEFAULT_LADDER).unwrap();
        let EquivalenceClass::Combination(terms, pot) = class else { panic!("{id}: {}", class.label()) };
        let want: Vec<(String, Expr)> =
            names.iter().zip(&coeffs).map(|(n, k)| (n.to_string(), parse(k).unwrap())).collect();
        assert_eq!(terms, want, "{id}");
        // the difference minus the curl of H vanishes at solution points
        let space = sys.space();
        let mut rest = v.clone();
        for (name, k) in &terms {
            let r = refs.iter().find(|r| &r.provenance.to_string() == name).unwrap();
            rest.ct = &rest.ct - &(k * &r.ct);
            rest.cx = &rest.cx - &(k * &r.cx);
        }
        let dt = sys.reduce(&(&rest.ct - &space.dx(&pot.h).unwrap())).unwrap();
        let dx = sys.reduce(&(&rest.cx + &space.dt(&pot.h).unwrap())).unwrap();
        for e in [dt, dx] {
            assert!(numeric_witness(&e, &sys, 6, 7).unwrap().is_none(), "{id}");
        }
    }
}

#[test]
fn time_translation_on_the_energy_branch_is_trivial() {
    let sys = branch("i.a", &[]);
    let v = build(&sys, "X2", "a*v", "a*u + c");
    let pot = is_trivial(&v, &sys, SWEEP_DEGREE, &DEFAULT_LADDER).unwrap().unwrap();
    let h = parse(
        "a^2*u*v^2 + 1/2*a*c*u^2 + a*c*v^2 + a*eps*u*v_tx + a*eps*v*u_tx + a*kappa*v*v_xx \
         - 1/2*a*kappa*v_x^2 + a*lambda*u*u_xx - 1/2*a*lambda*u_x^2 + c^2*u + c*eps*v_tx + c*lambda*u_xx",
    )
    .unwrap();
    assert_eq!(pot.h, h);
    let space = sys.space();
    let rt = sys.reduce(&(&v.ct - &space.dx(&h).unwrap())).unwrap();
    let rx = sys.reduce(&(&v.cx + &space.dt(&h).unwrap())).unwrap();
    assert!(numeric_witness(&rt, &sys, 6, 3).unwrap().is_none());
    assert!(numeric_witness(&rx, &sys, 6, 3).unwrap().is_none());
}

#[test]
fn nonzero_defect_is_refused() {
    let sys = branch("i.a", &[]);
    let sub = Substitution::parse("u", "v").unwrap();
    let x = parse_combination("X2").unwrap();
    assert!(conserved_vector(&sys, &sub, &x, "X2").is_err());
}

#[test]
fn sweep_substitutions_are_independent_and_admitted() {
    let sys = branch("i.b-sigma0", &[]);
    let subs = single_constant_substitutions(&sys).unwrap();
    let shown: Vec<String> = subs.iter().map(|s| s.to_string()).collect();
    assert_eq!(
        shown,
        ["phi = a*t*v - x, psi = a*t*u + c*t", "phi = a*v, psi = a*u + c", "phi = 1, psi = 0", "phi = 0, psi = 1"]
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn construction_is_linear_in_the_substitution(k1 in -5i64..5, k2 in -5i64..5, g in 0usize..3) {
        let sys = branch("i.b-sigma0", &[]);
        let gen = ["X1", "X2", "X4"][g];
        let subs = single_constant_substitutions(&sys).unwrap();
        let (s1, s2) = (&subs[0], &subs[1]);
        let (e1, e2) = (Expr::int(k1), Expr::int(k2));
        let phi = &(&e1 * &s1.phi) + &(&e2 * &s2.phi);
        let psi = &(&e1 * &s1.psi) + &(&e2 * &s2.psi);
        prop_assume!(!(phi.is_zero() && psi.is_zero()));
        let x = parse_combination(gen).unwrap();
        let sum = conserved_vector(&sys, &Substitution::new(phi, psi).unwrap(), &x, gen).unwrap();
        let a = conserved_vector(&sys, s1, &x, gen).unwrap();
        let b = conserved_vector(&sys, s2, &x, gen).unwrap();
        let ct = sys.reduce(&(&(&e1 * &a.ct) + &(&e2 * &b.ct))).unwrap();
        let cx = sys.reduce(&(&(&e1 * &a.cx) + &(&e2 * &b.cx))).unwrap();
        prop_assert_eq!(sum.ct, ct);
        prop_assert_eq!(sum.cx, cx);
    }
}

#[test]
fn catalog_vectors_are_not_trivial() {
    // so a trivial constructed vector cannot stand in for one of them
    for id in CATALOG_IDS {
        let (v, _) = catalog_vector(id).unwrap();
        let sys = bbm_kdv_symbolic(&catalog_assumptions(id).unwrap()).unwrap();
        assert_eq!(is_trivial(&v, &sys, SWEEP_DEGREE, &DEFAULT_LADDER[..2]).unwrap(), None, "{id}");
    }
}
