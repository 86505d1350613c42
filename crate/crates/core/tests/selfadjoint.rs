use bbmkdv::expr::{parse, Symbol};
use bbmkdv::selfadjoint::*;
use bbmkdv::system::{bbm_kdv_symbolic, PdeSystem};
use bbmkdv::{Assumptions, Expr};

fn sym(z: &[&str], nz: &[&str]) -> PdeSystem {
    let asm = Assumptions::new().with_zero(z).unwrap().with_nonzero(nz).unwrap();
    bbm_kdv_symbolic(&asm).unwrap()
}

#[test]
fn every_gated_family_member_has_zero_defect() {
    let base = bbm_kdv_symbolic(&Assumptions::new()).unwrap();
    for fam in classified_families() {
        let inst = fam.instances(&base).unwrap();
        assert!(!inst.is_empty());
        for (gi, sys) in inst {
            let d = defect(&sys, &gi.substitution).unwrap();
            assert!(d.iter().all(Expr::is_zero), "{} {:?}: {} | {}", fam.id, gi.active, d[0], d[1]);
        }
    }
}

/// Members of a published family with one constant switched on whose
/// gates hold under `asm`.
fn gated_members(fam: &SubstitutionFamily, asm: &Assumptions) -> Vec<(Expr, Expr)> {
    let mut out = Vec::new();
    for k in fam.constants() {
        let gate_open = fam
            .gates
            .iter()
            .filter(|g| g.constant == k)
            .all(|g| g.survives_when.iter().all(|e| asm.apply(e).unwrap().is_zero()));
        if !gate_open {
            continue;
        }
        let pick = |s: &Symbol| match s {
            Symbol::Const(j) => Some(if *j == k { Expr::one() } else { Expr::zero() }),
            _ => None,
        };
        let phi = asm.apply(&fam.phi.substitute_with(&pick).unwrap()).unwrap();
        let psi = asm.apply(&fam.psi.substitute_with(&pick).unwrap()).unwrap();
        out.push((phi, psi));
    }
    out
}

#[test]
fn solver_reproduces_the_gated_families() {
    let branches: [(&str, &[&str], &[&str]); 5] = [
        ("i", &["b"], &[]),
        ("i", &["b", "eps - sigma"], &[]),
        ("ii", &["a - b"], &[]),
        ("iii.a", &["a"], &["b"]),
        ("iii.b", &[], &["a", "b", "a - b"]),
    ];
    let families = classified_families();
    for (id, z, nz) in branches {
        let fam = families.iter().find(|f| f.id == id).unwrap();
        let sys = sym(z, nz);
        let basis = default_basis(&sys, false).unwrap();
        let leaves = solve_substitutions(&sys, &basis).unwrap();
        assert!(leaves.len() >= 2, "{id}: the branch must split");
        for leaf in leaves {
            assert!(!leaf.inconclusive, "{id} {:?}", leaf.conditions);
            let leaf_sys = sys.assume(&leaf.assumptions).unwrap();
            let want = gated_members(fam, &leaf.assumptions);
            for (phi, psi) in &want {
                assert!(span_contains(&leaf.family, phi, psi, &leaf_sys), "{id} {:?}: missing {phi}, {psi}", leaf.conditions);
            }
            for (phi, psi) in &leaf.family {
                assert!(span_contains(&want, phi, psi, &leaf_sys), "{id} {:?}: extra {phi}, {psi}", leaf.conditions);
                let sub = Substitution::new(phi.clone(), psi.clone()).unwrap();
                assert!(is_self_adjoint_with(&leaf_sys, &sub).unwrap());
            }
        }
    }
}

#[test]
fn identity_substitution_on_the_equal_dispersion_branch() {
    // b = 0 with eps = sigma: (u, v) leaves a defect, the swapped pair does not
    let sys = sym(&["b", "eps - sigma"], &[]);
    let d = defect(&sys, &Substitution::parse("u", "v").unwrap()).unwrap();
    assert_eq!(d[0], parse("-a*u*v_x + (lambda - kappa)*v_xxx").unwrap());
    assert_eq!(d[1], parse("a*u*u_x + (kappa - lambda)*u_xxx").unwrap());
    let swapped = Substitution::parse("v", "u").unwrap();
    assert!(is_self_adjoint_with(&sys, &swapped).unwrap());
    let c = classify(&sys).unwrap();
    assert_eq!(c.kind, Kind::Quasi);
    assert_eq!(c.witness, swapped);
    assert_eq!(c.strict_defect, d);
}

#[test]
fn strict_self_adjointness_needs_a_twice_b() {
    let sys = sym(&["a - 2*b", "kappa - lambda"], &[]);
    assert_eq!(classify(&sys).unwrap().kind, Kind::Strict);
    let sys = sym(&["kappa - lambda"], &["a - 2*b"]);
    assert_ne!(classify(&sys).unwrap().kind, Kind::Strict);
}
