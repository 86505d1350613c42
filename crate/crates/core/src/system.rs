//! The BBM-KdV family, its formal Lagrangian, the Euler operator and the
//! adjoint system.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::expr::{parse, rational, Assumptions, DepVar, Expr, JetIndex, Param, Rational, Symbol};
use crate::jet::JetSpace;

/// A system of differential equations `F_i = 0` in the jet space.
#[derive(Clone, Debug, PartialEq)]
pub struct PdeSystem {
    equations: Vec<Expr>,
    dep_vars: Vec<DepVar>,
    asm: Assumptions,
    space: JetSpace,
}

/// Left-hand sides of the family with all parameters symbolic.
pub fn bbm_kdv_equations() -> [Expr; 2] {
    [
        parse("u_t + (a+b)*v*u_x + (a*u + c)*v_x + eps*u_txx + kappa*v_xxx").expect("static"),
        parse("v_t + (b*u + c)*u_x + (a+b)*v*v_x + lambda*u_xxx + sigma*v_txx").expect("static"),
    ]
}

/// The assumptions every member of the family carries: `(a+b) c != 0`.
pub fn family_assumptions() -> Assumptions {
    Assumptions::new()
        .with_nonzero(&["(a+b)*c"])
        .expect("static assumption")
}

fn family_error(e: Error) -> Error {
    match e {
        Error::Inconsistent(m) => Error::FamilyConstraint(m),
        other => other,
    }
}

/// Builds the family with the given parameter values and extra
/// assumptions. Unbound parameters stay symbolic.
pub fn bbm_kdv(bindings: &BTreeMap<Param, Rational>, asm: &Assumptions) -> Result<PdeSystem> {
    let mut full = family_assumptions().merged(asm).map_err(family_error)?;
    for (p, q) in bindings {
        let c = Expr::param(*p) - Expr::from_rational(q.clone());
        full.add_zero(&c).map_err(family_error)?;
    }
    let dispersive = [Param::Eps, Param::Kappa, Param::Lambda, Param::Sigma];
    if dispersive.iter().all(|p| full.forces_zero(&Symbol::Param(*p))) {
        return Err(Error::FamilyConstraint(
            "at least one of eps, kappa, lambda, sigma must be nonzero".into(),
        ));
    }
    let equations = bbm_kdv_equations()
        .iter()
        .map(|f| full.apply(f))
        .collect::<Result<Vec<_>>>()?;
    Ok(PdeSystem {
        equations,
        dep_vars: vec![DepVar::U, DepVar::V],
        asm: full,
        space: JetSpace::default(),
    })
}

/// Family member with symbolic parameters under the given assumptions.
pub fn bbm_kdv_symbolic(asm: &Assumptions) -> Result<PdeSystem> {
    bbm_kdv(&BTreeMap::new(), asm)
}

fn bind(pairs: &[(Param, Rational)]) -> BTreeMap<Param, Rational> {
    pairs.iter().cloned().collect()
}

/// `a = c = 1, b = 0, eps = kappa = lambda = 0, sigma = -1/3`.
pub fn boussinesq() -> PdeSystem {
    use Param::*;
    let b = bind(&[
        (A, rational(1, 1)),
        (B, rational(0, 1)),
        (C, rational(1, 1)),
        (Eps, rational(0, 1)),
        (Kappa, rational(0, 1)),
        (Lambda, rational(0, 1)),
        (Sigma, rational(-1, 3)),
    ]);
    bbm_kdv(&b, &Assumptions::new()).expect("valid preset")
}

/// `a = c = 1, b = 0, eps = lambda = sigma = 0, kappa = 1/3`.
pub fn kaup() -> PdeSystem {
    use Param::*;
    let b = bind(&[
        (A, rational(1, 1)),
        (B, rational(0, 1)),
        (C, rational(1, 1)),
        (Eps, rational(0, 1)),
        (Kappa, rational(1, 3)),
        (Lambda, rational(0, 1)),
        (Sigma, rational(0, 1)),
    ]);
    bbm_kdv(&b, &Assumptions::new()).expect("valid preset")
}

/// `a = c = 1, b = 0, kappa = 0, eps = sigma = lambda/2 - 1/6` with
/// `lambda < 0`.
pub fn bona_smith(lambda: &Rational) -> Result<PdeSystem> {
    use Param::*;
    if !lambda.is_negative() {
        return Err(Error::FamilyConstraint(format!(
            "the Bona-Smith system needs lambda < 0, got {lambda}"
        )));
    }
    let es = lambda / rational(2, 1) - rational(1, 6);
    let b = bind(&[
        (A, rational(1, 1)),
        (B, rational(0, 1)),
        (C, rational(1, 1)),
        (Eps, es.clone()),
        (Kappa, rational(0, 1)),
        (Lambda, lambda.clone()),
        (Sigma, es),
    ]);
    bbm_kdv(&b, &Assumptions::new())
}

/// Resolves `boussinesq`, `kaup` or `bona-smith(lambda=<rational>)`.
pub fn preset(name: &str) -> Result<PdeSystem> {
    let name = name.trim();
    match name {
        "boussinesq" => return Ok(boussinesq()),
        "kaup" => return Ok(kaup()),
        _ => {}
    }
    let bad = || Error::Contract(format!("unknown preset `{name}`"));
    let inner = name
        .strip_prefix("bona-smith(")
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(bad)?;
    let value = inner
        .trim()
        .strip_prefix("lambda")
        .map(str::trim_start)
        .and_then(|s| s.strip_prefix('='))
        .ok_or_else(bad)?;
    let lambda = parse(value.trim())?.constant_value().ok_or_else(bad)?;
    bona_smith(&lambda)
}

impl PdeSystem {
    /// A general system; the adjoint machinery below expects two
    /// equations.
    pub fn new(equations: Vec<Expr>, dep_vars: Vec<DepVar>, asm: Assumptions) -> Result<Self> {
        let equations = equations
            .iter()
            .map(|e| asm.apply(e))
            .collect::<Result<Vec<_>>>()?;
        Ok(PdeSystem { equations, dep_vars, asm, space: JetSpace::default() })
    }

    pub fn with_space(mut self, space: JetSpace) -> Self {
        self.space = space;
        self
    }

    pub fn space(&self) -> JetSpace {
        self.space
    }

    pub fn equations(&self) -> &[Expr] {
        &self.equations
    }

    pub fn dep_vars(&self) -> &[DepVar] {
        &self.dep_vars
    }

    pub fn assumptions(&self) -> &Assumptions {
        &self.asm
    }

    /// Parameters not fixed to a value by the assumptions.
    pub fn free_params(&self) -> Vec<Param> {
        let mut out: Vec<Param> = Param::ALL
            .into_iter()
            .filter(|p| self.asm.binding(&Symbol::Param(*p)).is_none())
            .collect();
        // parameters that survive inside another binding are still free
        out.retain(|p| {
            self.equations
                .iter()
                .any(|e| e.symbols().contains(&Symbol::Param(*p)))
                || self
                    .asm
                    .bindings()
                    .values()
                    .any(|v| v.symbols().contains(&Symbol::Param(*p)))
        });
        out
    }

    /// The same system under additional assumptions.
    pub fn assume(&self, extra: &Assumptions) -> Result<PdeSystem> {
        let asm = self.asm.merged(extra).map_err(family_error)?;
        let equations = self.equations.iter().map(|e| asm.apply(e)).collect::<Result<Vec<_>>>()?;
        Ok(PdeSystem { equations, dep_vars: self.dep_vars.clone(), asm, space: self.space })
    }

    /// Whether every parameter has a numeric value.
    pub fn is_numeric(&self) -> bool {
        Param::ALL.iter().all(|p| {
            self.asm
                .binding(&Symbol::Param(*p))
                .is_some_and(|v| v.constant_value().is_some())
        })
    }

    /// Value of a parameter after the assumptions, possibly symbolic.
    pub fn param(&self, p: Param) -> Expr {
        self.asm
            .binding(&Symbol::Param(p))
            .cloned()
            .unwrap_or_else(|| Expr::param(p))
    }

    /// Applies the assumptions' zero constraints.
    pub fn reduce(&self, e: &Expr) -> Result<Expr> {
        self.asm.apply(e)
    }

    pub fn equals(&self, e1: &Expr, e2: &Expr) -> bool {
        self.asm.equals(e1, e2)
    }

    pub fn is_nonzero(&self, e: &Expr) -> bool {
        self.asm.is_nonzero(e)
    }

    /// The two scalar equations obtained by setting `v = u`.
    pub fn reduce_equal_components(&self) -> Result<Vec<Expr>> {
        let b: BTreeMap<DepVar, Expr> = [(DepVar::V, Expr::u())].into();
        self.equations
            .iter()
            .map(|e| self.space.substitute_jets(e, &b))
            .collect()
    }

    fn require_pair(&self) -> Result<()> {
        if self.equations.len() != 2 || self.dep_vars.len() < 2 {
            return Err(Error::Contract(format!(
                "expected a system of two equations in u and v, got {} equation(s)",
                self.equations.len()
            )));
        }
        Ok(())
    }

    /// `L = ubar F1 + vbar F2`.
    pub fn formal_lagrangian(&self) -> Result<Expr> {
        self.require_pair()?;
        Ok(Expr::dep(DepVar::UBar) * &self.equations[0] + Expr::dep(DepVar::VBar) * &self.equations[1])
    }

    pub fn euler_lagrange(&self, l: &Expr, var: DepVar, max_order: usize) -> Result<Expr> {
        euler_lagrange(&self.space, l, var, max_order)
    }

    /// `(F1*, F2*) = (-dL/du, -dL/dv)` as a system in u, v, ubar, vbar.
    pub fn adjoint_system(&self) -> Result<PdeSystem> {
        let l = self.formal_lagrangian()?;
        let order = self.equations.iter().map(|e| e.jet_order()).max().unwrap_or(0);
        let f1 = -self.euler_lagrange(&l, DepVar::U, order)?;
        let f2 = -self.euler_lagrange(&l, DepVar::V, order)?;
        Ok(PdeSystem {
            equations: vec![f1, f2],
            dep_vars: vec![DepVar::U, DepVar::V, DepVar::UBar, DepVar::VBar],
            asm: self.asm.clone(),
            space: self.space,
        })
    }
}

/// Variational derivative `sum_J (-1)^|J| D_J (dL/dw_J)` over all
/// multi-indices of order at most `max_order`.
pub fn euler_lagrange(space: &JetSpace, l: &Expr, var: DepVar, max_order: usize) -> Result<Expr> {
    let present = l
        .symbols()
        .into_iter()
        .filter_map(|s| s.as_jet())
        .filter(|j| j.var == var)
        .map(|j| j.order())
        .max()
        .unwrap_or(0);
    if present > max_order {
        return Err(Error::Contract(format!(
            "expression has jet order {present} in {}, above the bound {max_order}",
            var.name()
        )));
    }
    let mut out = Expr::zero();
    for idx in JetIndex::up_to(max_order) {
        let s = Symbol::jet(var, idx.t, idx.x);
        let d = l.diff(&s);
        if d.is_zero() {
            continue;
        }
        let term = space.d_index(&d, idx)?;
        if idx.order() % 2 == 0 {
            out += term;
        } else {
            out -= term;
        }
    }
    Ok(out)
}

impl fmt::Display for PdeSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.equations.iter().enumerate() {
            writeln!(f, "F{} = {e}", i + 1)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn symbolic_family() {
        let sys = bbm_kdv_symbolic(&Assumptions::new()).unwrap();
        assert_eq!(
            sys.equations()[0],
            p("u_t + (a+b)*v*u_x + (a*u + c)*v_x + eps*u_txx + kappa*v_xxx")
        );
        assert_eq!(sys.free_params().len(), 7);
        assert!(!sys.is_numeric());
    }

    #[test]
    fn presets() {
        assert_eq!(kaup().equations()[1], p("v_t + u_x + v*v_x"));
        assert_eq!(boussinesq().equations()[1], p("v_t + u_x + v*v_x - 1/3*v_txx"));
        assert!(boussinesq().is_numeric());
        let bs = preset("bona-smith(lambda=-1)").unwrap();
        assert_eq!(bs.param(Param::Eps), p("-2/3"));
        assert!(matches!(preset("bona-smith(lambda=1)"), Err(Error::FamilyConstraint(_))));
        assert!(preset("nonsense").is_err());
    }

    #[test]
    fn family_constraints() {
        let zero = |names: &[&str]| Assumptions::new().with_zero(names).unwrap();
        assert!(matches!(
            bbm_kdv_symbolic(&zero(&["eps", "kappa", "lambda", "sigma"])),
            Err(Error::FamilyConstraint(_))
        ));
        let mut b = BTreeMap::new();
        b.insert(Param::A, rational(0, 1));
        b.insert(Param::B, rational(0, 1));
        assert!(matches!(bbm_kdv(&b, &Assumptions::new()), Err(Error::FamilyConstraint(_))));
    }

    #[test]
    fn equal_components() {
        let sys = bbm_kdv_symbolic(&Assumptions::new()).unwrap();
        let r = sys.reduce_equal_components().unwrap();
        assert_eq!(r[0], p("u_t + ((2*a + b)*u + c)*u_x + eps*u_txx + kappa*u_xxx"));
    }

    #[test]
    fn euler_operator_on_a_quadratic() {
        let js = JetSpace::default();
        let el = euler_lagrange(&js, &p("u_x^2/2"), DepVar::U, 1).unwrap();
        assert_eq!(el, p("-u_xx"));
        assert!(euler_lagrange(&js, &p("u_xx"), DepVar::U, 1).is_err());
    }

    #[test]
    fn single_equation_has_no_formal_lagrangian() {
        let sys = PdeSystem::new(vec![p("u_t")], vec![DepVar::U], Assumptions::new()).unwrap();
        assert!(matches!(sys.formal_lagrangian(), Err(Error::Contract(_))));
    }
}
