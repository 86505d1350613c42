//! Nonlinear self-adjointness: substituted adjoints, defects, the
//! classified substitution families and an ansatz solver with case
//! splitting on parameters.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::expr::{parse, Assumptions, DepVar, Expr, Param, Symbol, Var};
use crate::linalg::LinearSystem;
use crate::system::PdeSystem;

/// `(ubar, vbar) = (phi, psi)` with the constraints it is valid under.
#[derive(Clone, Debug, PartialEq)]
pub struct Substitution {
    pub phi: Expr,
    pub psi: Expr,
    pub constraints: Assumptions,
}

/// `M = phi_u, N = phi_v, P = psi_u, Q = psi_v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefectCoefficients {
    pub m: Expr,
    pub n: Expr,
    pub p: Expr,
    pub q: Expr,
}

fn point_function(e: &Expr) -> bool {
    !e.any_symbol(|s| match s {
        Symbol::Jet(j) => j.var.is_adjoint() || j.order() > 0,
        Symbol::Func(..) => true,
        _ => false,
    })
}

impl Substitution {
    pub fn new(phi: Expr, psi: Expr) -> Result<Self> {
        Substitution::with_constraints(phi, psi, Assumptions::new())
    }

    pub fn with_constraints(phi: Expr, psi: Expr, constraints: Assumptions) -> Result<Self> {
        for e in [&phi, &psi] {
            if !point_function(e) {
                return Err(Error::Contract(format!("`{e}` must be a function of t, x, u, v")));
            }
        }
        let phi = constraints.apply(&phi)?;
        let psi = constraints.apply(&psi)?;
        if phi.is_zero() && psi.is_zero() {
            return Err(Error::Contract("phi and psi vanish simultaneously".into()));
        }
        Ok(Substitution { phi, psi, constraints })
    }

    pub fn parse(phi: &str, psi: &str) -> Result<Self> {
        Substitution::new(parse(phi)?, parse(psi)?)
    }

    pub fn coefficients(&self) -> DefectCoefficients {
        let (u, v) = (Symbol::dep(DepVar::U), Symbol::dep(DepVar::V));
        DefectCoefficients {
            m: self.phi.diff(&u),
            n: self.phi.diff(&v),
            p: self.psi.diff(&u),
            q: self.psi.diff(&v),
        }
    }

    /// Whether `phi` and `psi` are free of t and x.
    pub fn is_autonomous(&self) -> bool {
        let tx = |s: &Symbol| matches!(s, Symbol::Indep(_));
        !self.phi.any_symbol(tx) && !self.psi.any_symbol(tx)
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "phi = {}, psi = {}", self.phi, self.psi)
    }
}

fn under(sys: &PdeSystem, sub: &Substitution) -> Result<PdeSystem> {
    if sub.constraints == Assumptions::default() {
        Ok(sys.clone())
    } else {
        sys.assume(&sub.constraints)
    }
}

/// Both adjoint equations with `(ubar, vbar) = (phi, psi)`, assembled
/// from total derivatives of `phi` and `psi`.
pub fn substituted_adjoint(sys: &PdeSystem, sub: &Substitution) -> Result<[Expr; 2]> {
    let sys = under(sys, sub)?;
    let js = sys.space();
    let p = |q: Param| sys.param(q);
    let (phi, psi) = (sys.reduce(&sub.phi)?, sys.reduce(&sub.psi)?);
    let (u, v) = (Expr::u(), Expr::v());
    let d = |e: &Expr, t: u8, x: u8| js.d_index(e, crate::expr::JetIndex::new(t, x));
    let ab = p(Param::A) + p(Param::B);
    let f1 = d(&phi, 1, 0)?
        + &ab * &v * d(&phi, 0, 1)?
        + (p(Param::B) * &u + p(Param::C)) * d(&psi, 0, 1)?
        + p(Param::B) * &phi * Expr::jet(DepVar::V, 0, 1)
        + p(Param::Eps) * d(&phi, 1, 2)?
        + p(Param::Lambda) * d(&psi, 0, 3)?;
    let f2 = d(&psi, 1, 0)?
        + (p(Param::A) * &u + p(Param::C)) * d(&phi, 0, 1)?
        + &ab * &v * d(&psi, 0, 1)?
        - p(Param::B) * &phi * Expr::jet(DepVar::U, 0, 1)
        + p(Param::Kappa) * d(&phi, 0, 3)?
        + p(Param::Sigma) * d(&psi, 1, 2)?;
    Ok([sys.reduce(&f1)?, sys.reduce(&f2)?])
}

/// The same pair obtained by substituting into the computed adjoint
/// system.
pub fn substituted_adjoint_via_system(sys: &PdeSystem, sub: &Substitution) -> Result<[Expr; 2]> {
    let sys = under(sys, sub)?;
    let adj = sys.adjoint_system()?;
    let b: BTreeMap<DepVar, Expr> =
        [(DepVar::UBar, sys.reduce(&sub.phi)?), (DepVar::VBar, sys.reduce(&sub.psi)?)].into();
    let js = sys.space();
    let f1 = js.substitute_jets(&adj.equations()[0], &b)?;
    let f2 = js.substitute_jets(&adj.equations()[1], &b)?;
    Ok([sys.reduce(&f1)?, sys.reduce(&f2)?])
}

/// `(F1*| - (M F1 + N F2), F2*| - (P F1 + Q F2))`.
pub fn defect(sys: &PdeSystem, sub: &Substitution) -> Result<[Expr; 2]> {
    let [s1, s2] = substituted_adjoint(sys, sub)?;
    let sys = under(sys, sub)?;
    let c = sub.coefficients();
    let [f1, f2] = [&sys.equations()[0], &sys.equations()[1]];
    let d1 = s1 - (&c.m * f1 + &c.n * f2);
    let d2 = s2 - (&c.p * f1 + &c.q * f2);
    Ok([sys.reduce(&d1)?, sys.reduce(&d2)?])
}

pub fn is_self_adjoint_with(sys: &PdeSystem, sub: &Substitution) -> Result<bool> {
    Ok(defect(sys, sub)?.iter().all(Expr::is_zero))
}

/// An arbitrary constant that is only allowed to be nonzero when the
/// listed expressions vanish.
#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub constant: u32,
    pub survives_when: Vec<Expr>,
}

impl Gate {
    fn new(constant: u32, zero: &[&str]) -> Self {
        Gate { constant, survives_when: zero.iter().map(|s| parse(s).expect("static")).collect() }
    }

    /// `c3 = 0 unless eps = kappa = lambda = 0`.
    pub fn label(&self) -> String {
        let conds: Vec<String> = self.survives_when.iter().map(|e| e.to_string()).collect();
        format!("c{} = 0 unless {} = 0", self.constant, conds.join(" = "))
    }
}

/// A published family of substitutions on a parameter branch.
#[derive(Clone, Debug, PartialEq)]
pub struct SubstitutionFamily {
    pub id: &'static str,
    pub branch: Assumptions,
    pub phi: Expr,
    pub psi: Expr,
    pub gates: Vec<Gate>,
}

/// One gating choice of a family: the constants switched on, the
/// assumptions that license them and the resulting substitution.
#[derive(Clone, Debug, PartialEq)]
pub struct GatedInstance {
    pub active: Vec<u32>,
    pub assumptions: Assumptions,
    pub substitution: Substitution,
}

impl SubstitutionFamily {
    fn new(id: &'static str, branch: Assumptions, phi: &str, psi: &str, gates: Vec<Gate>) -> Self {
        SubstitutionFamily {
            id,
            branch,
            phi: parse(phi).expect("static"),
            psi: parse(psi).expect("static"),
            gates,
        }
    }

    /// Arbitrary constants occurring in the family.
    pub fn constants(&self) -> Vec<u32> {
        let mut out: Vec<u32> = self
            .phi
            .symbols()
            .into_iter()
            .chain(self.psi.symbols())
            .filter_map(|s| match s {
                Symbol::Const(k) => Some(k),
                _ => None,
            })
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Every consistent on/off choice of the gated constants. Inactive
    /// gated constants are set to zero; active ones add their conditions.
    pub fn instances(&self, base: &PdeSystem) -> Result<Vec<(GatedInstance, PdeSystem)>> {
        let n = self.gates.len();
        let mut out = Vec::new();
        for mask in 0..(1usize << n) {
            let mut asm = self.branch.clone();
            let mut ok = true;
            let mut active = Vec::new();
            for (i, g) in self.gates.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    active.push(g.constant);
                    for z in &g.survives_when {
                        if asm.add_zero(z).is_err() {
                            ok = false;
                        }
                    }
                }
            }
            if !ok {
                continue;
            }
            let Ok(sys) = base.assume(&asm) else { continue };
            if !dispersive(&sys) {
                continue;
            }
            let mut cons = Assumptions::new();
            for g in &self.gates {
                if !active.contains(&g.constant) {
                    cons.add_zero(&Expr::constant(g.constant))?;
                }
            }
            let substitution = Substitution::with_constraints(self.phi.clone(), self.psi.clone(), cons)?;
            out.push((GatedInstance { active, assumptions: asm, substitution }, sys));
        }
        Ok(out)
    }
}

fn dispersive(sys: &PdeSystem) -> bool {
    [Param::Eps, Param::Kappa, Param::Lambda, Param::Sigma]
        .iter()
        .any(|p| !sys.assumptions().forces_zero(&Symbol::Param(*p)))
}

/// The four classified substitution families with their gates.
pub fn classified_families() -> Vec<SubstitutionFamily> {
    let asm = |z: &[&str], nz: &[&str]| {
        Assumptions::new().with_zero(z).and_then(|a| a.with_nonzero(nz)).expect("static")
    };
    vec![
        SubstitutionFamily::new(
            "i",
            asm(&["b"], &[]),
            "(c1*t + c2)*a*v + c3*c*ln(a*u + c) - c1*x + c4",
            "c3*a*v + (c1*t + c2)*(a*u + c) + c5",
            vec![Gate::new(1, &["eps", "sigma"]), Gate::new(2, &["eps - sigma"]), Gate::new(3, &["eps", "kappa", "lambda"])],
        ),
        SubstitutionFamily::new(
            "ii",
            asm(&["a - b"], &[]),
            "(a*u + c)*(c1*ln(a*u + c) + c2)",
            "c1*a*v + c3",
            vec![Gate::new(1, &["eps", "kappa", "lambda"]), Gate::new(2, &["kappa"])],
        ),
        SubstitutionFamily::new(
            "iii.a",
            asm(&["a"], &["b"]),
            "c1*exp(b*u/c) - c2*(b*u + 2*c)",
            "c2*b*v + c3",
            vec![Gate::new(1, &["eps", "kappa"]), Gate::new(2, &["kappa + lambda"])],
        ),
        SubstitutionFamily::new(
            "iii.b",
            asm(&[], &["a", "b", "a - b"]),
            "c1*pow(a*u + c, b/a) + c2*(b^2*u + (2*b - a)*c)",
            "c2*(a - b)*b*v + c3",
            vec![Gate::new(1, &["eps", "kappa"]), Gate::new(2, &["lambda*a - (kappa + lambda)*b"])],
        ),
    ]
}

/// Shape functions for the substitution ansatz on a system.
pub fn default_basis(sys: &PdeSystem, autonomous: bool) -> Result<Vec<Expr>> {
    let mut texts = vec!["1", "u", "v", "ln(a*u + c)", "(a*u + c)*ln(a*u + c)"];
    if !autonomous {
        texts.extend(["t", "x", "t*u", "t*v"]);
    }
    let mut out: Vec<Expr> = texts.iter().map(|s| parse(s).expect("static")).collect();
    let asm = sys.assumptions();
    if asm.forces_zero(&Symbol::Param(Param::A)) {
        out.push(parse("exp(b*u/c)").expect("static"));
    } else if sys.is_nonzero(&Expr::param(Param::A)) {
        out.push(parse("pow(a*u + c, b/a)").expect("static"));
    }
    let mut reduced = vec![Expr::one()];
    for e in &out[1..] {
        let e = sys.reduce(e)?;
        // functions that collapse to parameters duplicate the constant
        if !e.is_parametric() {
            reduced.push(e);
        }
    }
    independent_subset(&reduced, sys)
}

fn is_coordinate(v: &Var) -> bool {
    !matches!(v, Var::Sym(Symbol::Param(_) | Symbol::Const(_) | Symbol::Unknown(_)))
}

/// Rows `sum_j coef_j x_j = 0` expressing `sum_j x_j e_j == 0` identically.
fn identity_rows(exprs: &[(usize, &Expr)], ls: &mut LinearSystem<Expr>) {
    let mut combo = Expr::zero();
    for (j, e) in exprs {
        combo += Expr::unknown(*j as u32) * *e;
    }
    for (_, c) in combo.numerator().split_by(is_coordinate) {
        let c = Expr::from_poly(c);
        let row: Vec<(usize, Expr)> =
            exprs.iter().map(|(j, _)| (*j, c.diff(&Symbol::Unknown(*j as u32)))).collect();
        ls.push(row, Expr::zero());
    }
}

/// Drops basis functions that are combinations of earlier ones.
fn independent_subset(basis: &[Expr], sys: &PdeSystem) -> Result<Vec<Expr>> {
    let mut kept: Vec<Expr> = Vec::new();
    for b in basis {
        if b.is_zero() {
            continue;
        }
        let mut trial = kept.clone();
        trial.push(b.clone());
        let mut ls = LinearSystem::new(trial.len());
        let refs: Vec<(usize, &Expr)> = trial.iter().enumerate().collect();
        identity_rows(&refs, &mut ls);
        let red = ls.eliminate(&|x: &Expr| sys.is_nonzero(x));
        if red.stuck.is_empty() && red.rank() == trial.len() {
            kept.push(b.clone());
        }
    }
    Ok(kept)
}

/// One leaf of the case split.
#[derive(Clone, Debug, PartialEq)]
pub struct SolvedBranch {
    /// Conditions added on top of the system's own assumptions.
    pub conditions: Vec<String>,
    pub assumptions: Assumptions,
    /// Basis of the admitted `(phi, psi)` within the ansatz.
    pub family: Vec<(Expr, Expr)>,
    /// The split depth ran out before the system could be solved.
    pub inconclusive: bool,
}

const MAX_SPLIT_DEPTH: usize = 6;

/// Writes `phi` and `psi` as combinations of `basis` with unknown
/// coefficients, imposes a vanishing defect and solves, splitting on
/// parameter factors whose vanishing is undecided.
pub fn solve_substitutions(sys: &PdeSystem, basis: &[Expr]) -> Result<Vec<SolvedBranch>> {
    let n = basis.len();
    let mut defects: Vec<[Expr; 2]> = Vec::with_capacity(2 * n);
    for slot in 0..2 {
        for b in basis {
            let (phi, psi) = if slot == 0 { (b.clone(), Expr::zero()) } else { (Expr::zero(), b.clone()) };
            let sub = Substitution { phi, psi, constraints: Assumptions::new() };
            defects.push(defect(sys, &sub)?);
        }
    }
    let mut out = Vec::new();
    split(sys, basis, &defects, sys.assumptions().clone(), Vec::new(), 0, &mut out)?;
    Ok(out)
}

fn split(
    sys: &PdeSystem,
    basis: &[Expr],
    defects: &[[Expr; 2]],
    asm: Assumptions,
    conditions: Vec<String>,
    depth: usize,
    out: &mut Vec<SolvedBranch>,
) -> Result<()> {
    let n = basis.len();
    let applied: Vec<[Expr; 2]> = defects
        .iter()
        .map(|[a, b]| Ok([asm.apply(a)?, asm.apply(b)?]))
        .collect::<Result<_>>()?;
    let mut ls = LinearSystem::new(2 * n);
    for k in 0..2 {
        let refs: Vec<(usize, &Expr)> = applied.iter().enumerate().map(|(j, d)| (j, &d[k])).collect();
        identity_rows(&refs, &mut ls);
    }
    let red = ls.eliminate(&|x: &Expr| asm.is_nonzero(x));
    if let Some((entries, _)) = red.stuck.first() {
        let factor = entries
            .values()
            .flat_map(|e| asm.unlicensed_factors(e))
            .next()
            .ok_or_else(|| Error::Internal("stuck row without an undecided factor".into()))?;
        if depth >= MAX_SPLIT_DEPTH {
            out.push(SolvedBranch { conditions, assumptions: asm, family: Vec::new(), inconclusive: true });
            return Ok(());
        }
        let f = Expr::from_poly(factor);
        let mut zero = asm.clone();
        if zero.add_zero(&f).is_ok() && sys.assume(&zero).is_ok_and(|s| dispersive(&s)) {
            let mut c = conditions.clone();
            c.push(format!("{f} = 0"));
            split(sys, basis, defects, zero, c, depth + 1, out)?;
        }
        let mut nonzero = asm.clone();
        if nonzero.add_nonzero(&f).is_ok() {
            let mut c = conditions;
            c.push(format!("{f} != 0"));
            split(sys, basis, defects, nonzero, c, depth + 1, out)?;
        }
        return Ok(());
    }
    let family = red
        .nullspace()
        .into_iter()
        .map(|v| {
            let phi: Expr = (0..n).map(|j| &v[j] * &asm.apply(&basis[j]).expect("applies")).sum();
            let psi: Expr = (0..n).map(|j| &v[n + j] * &asm.apply(&basis[j]).expect("applies")).sum();
            (phi, psi)
        })
        .collect();
    out.push(SolvedBranch { conditions, assumptions: asm, family, inconclusive: false });
    Ok(())
}

/// Strict, quasi or only nonlinear self-adjointness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Kind {
    Strict,
    Quasi,
    NonlinearOnly,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Strict => "strict",
            Kind::Quasi => "quasi",
            Kind::NonlinearOnly => "nonlinear-only",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub kind: Kind,
    pub witness: Substitution,
    /// Defect of `(phi, psi) = (u, v)`.
    pub strict_defect: [Expr; 2],
}

/// Classifies a system on a fixed parameter branch.
pub fn classify(sys: &PdeSystem) -> Result<Classification> {
    let identity = Substitution::new(Expr::u(), Expr::v())?;
    let strict_defect = defect(sys, &identity)?;
    if strict_defect.iter().all(Expr::is_zero) {
        return Ok(Classification { kind: Kind::Strict, witness: identity, strict_defect });
    }
    for autonomous in [true, false] {
        let basis = default_basis(sys, autonomous)?;
        let mut candidates: Vec<(Expr, Expr)> =
            solve_substitutions(sys, &basis)?.into_iter().flat_map(|b| b.family).collect();
        // prefer substitutions that involve u or v
        candidates.sort_by_key(|(phi, psi)| (phi.is_parametric() && psi.is_parametric(), phi.size() + psi.size()));
        for (phi, psi) in candidates {
            let Ok(sub) = Substitution::new(phi, psi) else { continue };
            if is_self_adjoint_with(sys, &sub)? {
                let kind = if autonomous { Kind::Quasi } else { Kind::NonlinearOnly };
                return Ok(Classification { kind, witness: sub, strict_defect });
            }
        }
    }
    Err(Error::Inconclusive { r: 0, deg: 0 })
}

/// Whether `(phi, psi)` is a combination of the family with coefficients
/// depending on parameters only.
pub fn span_contains(family: &[(Expr, Expr)], phi: &Expr, psi: &Expr, sys: &PdeSystem) -> bool {
    // phi + s*psi with a fresh marker s keeps the two slots apart
    let marker = Expr::sym(Symbol::Unknown(u32::MAX));
    let packed: Vec<Expr> = family.iter().map(|(a, b)| a + &(&marker * b)).collect();
    let target = phi + &(&marker * psi);
    let mut ls = LinearSystem::new(packed.len());
    let mut combo = -target;
    for (j, e) in packed.iter().enumerate() {
        combo += Expr::unknown(j as u32) * e;
    }
    for (_, c) in combo.numerator().split_by(|v| is_coordinate(v) || matches!(v, Var::Sym(Symbol::Unknown(u32::MAX)))) {
        let c = Expr::from_poly(c);
        let zeros: BTreeMap<Symbol, Expr> =
            (0..packed.len()).map(|j| (Symbol::Unknown(j as u32), Expr::zero())).collect();
        let constant = c.substitute(&zeros).expect("no jets");
        let row: Vec<(usize, Expr)> =
            (0..packed.len()).map(|j| (j, c.diff(&Symbol::Unknown(j as u32)))).collect();
        ls.push(row, -constant);
    }
    let red = ls.eliminate(&|x: &Expr| sys.is_nonzero(x));
    red.conditions.is_empty() && red.stuck.iter().all(|(_, r)| r.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::bbm_kdv_symbolic;

    fn sym(z: &[&str]) -> PdeSystem {
        bbm_kdv_symbolic(&Assumptions::new().with_zero(z).unwrap()).unwrap()
    }

    #[test]
    fn constants_are_annihilated() {
        let sys = sym(&["b"]);
        let s = substituted_adjoint(&sys, &Substitution::parse("1", "0").unwrap()).unwrap();
        assert!(s.iter().all(Expr::is_zero));
        let sys = sym(&[]);
        let s = substituted_adjoint(&sys, &Substitution::parse("0", "1").unwrap()).unwrap();
        assert!(s.iter().all(Expr::is_zero));
    }

    #[test]
    fn two_routes_agree() {
        let sys = sym(&[]);
        let sub = Substitution::parse("t*u + ln(a*u + c)", "x*v^2 + u").unwrap();
        assert_eq!(
            substituted_adjoint(&sys, &sub).unwrap(),
            substituted_adjoint_via_system(&sys, &sub).unwrap()
        );
    }

    #[test]
    fn identity_is_strict_for_a_equal_twice_b() {
        let sys = sym(&["a - 2*b", "kappa - lambda"]);
        let c = classify(&sys).unwrap();
        assert_eq!(c.kind, Kind::Strict);
    }

    #[test]
    fn identity_defect_at_generic_parameters() {
        let sys = sym(&[]);
        let d = defect(&sys, &Substitution::parse("u", "v").unwrap()).unwrap();
        assert!(!d[0].is_zero() || !d[1].is_zero());
    }

    #[test]
    fn both_slots_vanishing_is_rejected() {
        assert!(Substitution::parse("0", "0").is_err());
        assert!(Substitution::parse("u_x", "0").is_err());
    }
}
