use bbmkdv::expr::{parse, rational, CoeffFn};
use bbmkdv::jet::VectorField;
use bbmkdv::reduce::DEFAULT_LADDER;
use bbmkdv::symmetry::*;
use bbmkdv::system::{bona_smith, boussinesq, kaup, PdeSystem};
use bbmkdv::Expr;

fn numeric(sys: &PdeSystem, names: &[&str]) -> Vec<VectorField> {
    names
        .iter()
        .map(|n| parse_combination(n).unwrap().map(|c| sys.reduce(c)).unwrap())
        .collect()
}

#[test]
fn every_listed_generator_is_admitted() {
    for d in Dispersion::ALL {
        for b in Branch::ALL {
            for entry in cell_entries(b, d) {
                let case = SymmetryCase::new(b, d).with_zero(&entry.requires_zero);
                let sys = case.system().unwrap();
                let v = is_symmetry(&entry.field, &sys, &DEFAULT_LADDER).unwrap();
                assert!(v.holds(), "{} in [{case}]: {v:?}", entry.label());
            }
        }
    }
}

#[test]
fn boost_is_not_admitted_with_mixed_dispersion() {
    let v = is_symmetry(&generator(4).unwrap(), &boussinesq(), &DEFAULT_LADDER).unwrap();
    assert!(matches!(v, SymmetryVerdict::Refuted { .. }), "{v:?}");
    let k = parse_combination("2*X1 + X3").unwrap();
    assert!(is_symmetry(&k, &kaup(), &DEFAULT_LADDER).unwrap().holds());
}

#[test]
fn solver_dimensions_match_the_classification() {
    let cases: [(PdeSystem, &[&str]); 3] = [
        (boussinesq(), &["X1", "X2", "X5"]),
        (kaup(), &["2*X1 + X3", "X2", "X4", "X5"]),
        (bona_smith(&rational(-1, 1)).unwrap(), &["X1", "X2", "X5"]),
    ];
    for (sys, names) in cases {
        let basis = solve_symmetries(&sys, 2).unwrap();
        let expected = numeric(&sys, names);
        assert_eq!(basis.len(), names.len(), "{sys}");
        assert!(same_span(&basis, &expected, 2).unwrap(), "{sys}");
    }
}

#[test]
fn brackets_close_in_the_computed_span() {
    for sys in [boussinesq(), kaup(), bona_smith(&rational(-1, 1)).unwrap()] {
        let basis = solve_symmetries(&sys, 2).unwrap();
        let r = span_rank(&basis, 2).unwrap();
        for x in &basis {
            for y in &basis {
                let mut ext = basis.clone();
                ext.push(x.commutator(y));
                assert_eq!(span_rank(&ext, 2).unwrap(), r);
            }
        }
    }
}

#[test]
fn combinations_of_admitted_generators_are_admitted() {
    let sys = kaup();
    let x = parse_combination("3*X2 - 2/5*X4 + 7*X5 + 2*X1 + X3").unwrap();
    assert!(is_symmetry(&x, &sys, &DEFAULT_LADDER).unwrap().holds());
}


fn f(name: CoeffFn, d: &str) -> Expr {
    let mut slots = [0u8; 4];
    for ch in d.chars() {
        let k = "txuv".find(ch).unwrap();
        slots[k] += 1;
    }
    Expr::func(name, slots)
}

/// The classical form of the determining system, written out by hand.
fn hand_conditions(sys: &PdeSystem) -> Vec<Expr> {
    use CoeffFn::{T, U, V, X};
    let p = |s: &str| sys.reduce(&parse(s).unwrap()).unwrap();
    let (a, b, c, eps, kappa, lambda, sigma) =
        (p("a"), p("b"), p("c"), p("eps"), p("kappa"), p("lambda"), p("sigma"));
    let (u, v) = (Expr::u(), Expr::v());
    let auc = &a * &u + &c;
    let two = Expr::int(2);
    let mut out = vec![
        f(T, "x"), f(T, "u"), f(T, "v"), f(X, "u"), f(X, "v"),
        &eps * &f(X, "t"), &eps * &f(X, "x"), &sigma * &f(X, "t"), &sigma * &f(X, "x"),
        f(U, "t"), f(U, "x"), f(U, "v"), f(V, "t"), f(V, "x"),
        &a * &f(U, "") - &auc * &f(U, "u"),
    ];
    out.push(&b * &f(U, "") + (&b * &u + &c) * (f(U, "u") + &two * &(f(T, "t") - f(X, "x"))));
    out.push(&kappa * &(f(U, "u") + &two * &f(X, "x")));
    out.push(&lambda * &(f(U, "u") + &two * &(f(T, "t") - &two * &f(X, "x"))));
    out.push((&a + &b) * (f(V, "") + (f(T, "t") - f(X, "x")) * v) - f(X, "t"));
    out
}

#[test]
fn determining_system_agrees_with_the_classical_form() {
    use bbmkdv::expr::Param;
    use bbmkdv::system::bbm_kdv;
    use std::collections::BTreeMap;
    let points: [[i64; 7]; 6] = [
        [1, 0, 1, 0, 1, 2, 0],
        [2, 0, 3, 1, 0, -1, 1],
        [1, 1, 2, 0, 3, 1, 0],
        [3, 1, 1, 0, 2, 5, 0],
        [2, 1, -1, 1, 1, 1, 2],
        [1, 0, 1, 0, 0, 1, 0],
    ];
    for pt in points {
        let bind: BTreeMap<Param, _> =
            Param::ALL.iter().zip(pt).map(|(p, q)| (*p, rational(q, 1))).collect();
        let sys = bbm_kdv(&bind, &bbmkdv::Assumptions::new()).unwrap();
        let ours = solve_symmetries(&sys, 2).unwrap();
        let theirs = solve_determining(&hand_conditions(&sys), 2).unwrap();
        assert!(same_span(&ours, &theirs, 2).unwrap(), "{pt:?}: {} vs {}", ours.len(), theirs.len());
    }
}
