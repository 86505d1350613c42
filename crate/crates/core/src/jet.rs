//! Jet-space calculus: total derivatives, prolongation of point generators
//! and characteristics.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::expr::{derive, CoeffFn, DepVar, Expr, Indep, Jet, JetIndex, Symbol};

pub const DEFAULT_ORDER_CAP: usize = 10;

/// Jet-space configuration; currently just the order cap guarding runaway
/// differentiation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct JetSpace {
    pub order_cap: usize,
}

impl Default for JetSpace {
    fn default() -> Self {
        JetSpace { order_cap: DEFAULT_ORDER_CAP }
    }
}

fn func_total(f: CoeffFn, d: [u8; 4], dir: Indep) -> Expr {
    let bump = |k: usize| {
        let mut d = d;
        d[k] += 1;
        Expr::func(f, d)
    };
    let (slot, ui, vi) = match dir {
        Indep::T => (0, Expr::jet(DepVar::U, 1, 0), Expr::jet(DepVar::V, 1, 0)),
        Indep::X => (1, Expr::jet(DepVar::U, 0, 1), Expr::jet(DepVar::V, 0, 1)),
    };
    bump(slot) + ui * bump(2) + vi * bump(3)
}

impl JetSpace {
    pub fn new(order_cap: usize) -> Self {
        JetSpace { order_cap }
    }

    fn check(&self, order: usize) -> Result<()> {
        if order > self.order_cap {
            return Err(Error::OrderCap { order, cap: self.order_cap });
        }
        Ok(())
    }

    /// `D_dir e`. Coefficient-function symbols are treated as functions of
    /// (t, x, u, v).
    pub fn total_derivative(&self, e: &Expr, dir: Indep) -> Result<Expr> {
        self.check(e.jet_order() + 1)?;
        Ok(derive(e, &mut |s: &Symbol| match s {
            Symbol::Indep(i) if *i == dir => Some(Expr::one()),
            Symbol::Jet(j) => Some(Expr::sym(Symbol::Jet(j.shifted(dir)))),
            Symbol::Func(f, d) => Some(func_total(*f, *d, dir)),
            _ => None,
        }))
    }

    pub fn dt(&self, e: &Expr) -> Result<Expr> {
        self.total_derivative(e, Indep::T)
    }

    pub fn dx(&self, e: &Expr) -> Result<Expr> {
        self.total_derivative(e, Indep::X)
    }

    /// `D_t^i D_x^j e`.
    pub fn d_index(&self, e: &Expr, idx: JetIndex) -> Result<Expr> {
        self.check(e.jet_order() + idx.order())?;
        let mut out = e.clone();
        for _ in 0..idx.x {
            out = self.dx(&out)?;
        }
        for _ in 0..idx.t {
            out = self.dt(&out)?;
        }
        Ok(out)
    }

    /// Replaces every jet coordinate `w_J` of a bound variable `w` by
    /// `D_J(value)`.
    pub fn substitute_jets(&self, e: &Expr, bindings: &BTreeMap<DepVar, Expr>) -> Result<Expr> {
        let mut derived: HashMap<Jet, Expr> = HashMap::new();
        let mut map: BTreeMap<Symbol, Expr> = BTreeMap::new();
        let mut jets: Vec<Jet> = e
            .symbols()
            .into_iter()
            .filter_map(|s| s.as_jet())
            .filter(|j| bindings.contains_key(&j.var))
            .collect();
        jets.sort();
        for j in jets {
            let value = self.jet_value(j, bindings, &mut derived)?;
            map.insert(Symbol::Jet(j), value);
        }
        e.substitute_unchecked(&map)
    }

    fn jet_value(
        &self,
        j: Jet,
        bindings: &BTreeMap<DepVar, Expr>,
        cache: &mut HashMap<Jet, Expr>,
    ) -> Result<Expr> {
        if let Some(v) = cache.get(&j) {
            return Ok(v.clone());
        }
        let v = if j.order() == 0 {
            bindings[&j.var].clone()
        } else {
            let (parent, dir) = parent_of(j);
            let pv = self.jet_value(parent, bindings, cache)?;
            self.total_derivative(&pv, dir)?
        };
        cache.insert(j, v.clone());
        Ok(v)
    }

    pub fn characteristics(&self, x: &VectorField) -> Characteristics {
        x.characteristics()
    }

    /// Prolongation coefficients for every jet coordinate of u and v up to
    /// `order`, by the coefficient recursion.
    pub fn prolong(&self, x: &VectorField, order: usize) -> Result<BTreeMap<Jet, Expr>> {
        self.check(order)?;
        let mut p = Prolongation::new(*self, x);
        let mut out = BTreeMap::new();
        for var in [DepVar::U, DepVar::V] {
            for idx in JetIndex::up_to(order) {
                let j = Jet { var, index: idx };
                out.insert(j, p.zeta(j)?);
            }
        }
        Ok(out)
    }

    /// Prolongation coefficients by the characteristic form
    /// `zeta_J = D_J W + T w_{J,t} + X w_{J,x}`.
    pub fn prolong_characteristic(&self, x: &VectorField, order: usize) -> Result<BTreeMap<Jet, Expr>> {
        self.check(order + 1)?;
        let w = x.characteristics();
        let mut out = BTreeMap::new();
        for var in [DepVar::U, DepVar::V] {
            let wv = if var == DepVar::U { &w.w_u } else { &w.w_v };
            let mut cur = HashMap::new();
            for idx in JetIndex::up_to(order) {
                let dj = if idx.order() == 0 {
                    wv.clone()
                } else {
                    let (parent, dir) = parent_of(Jet { var, index: idx });
                    let pv: &Expr = &cur[&parent.index];
                    self.total_derivative(pv, dir)?
                };
                let j = Jet { var, index: idx };
                let zeta = &dj
                    + &(&x.xi_t * &Expr::sym(Symbol::Jet(j.shifted(Indep::T))))
                    + &x.xi_x * &Expr::sym(Symbol::Jet(j.shifted(Indep::X)));
                cur.insert(idx, dj);
                out.insert(j, zeta);
            }
        }
        Ok(out)
    }

    /// `pr X (e)`; `order` must bound the jet order of `e`.
    pub fn apply_generator(&self, x: &VectorField, e: &Expr, order: usize) -> Result<Expr> {
        let eo = e.jet_order();
        if eo > order {
            return Err(Error::Contract(format!(
                "prolongation order {order} is below the jet order {eo} of the expression"
            )));
        }
        self.check(order)?;
        let mut p = Prolongation::new(*self, x);
        let mut zetas: BTreeMap<Jet, Expr> = BTreeMap::new();
        for s in e.symbols() {
            if let Symbol::Jet(j) = s {
                if !j.var.is_adjoint() {
                    zetas.insert(j, p.zeta(j)?);
                }
            }
        }
        Ok(derive(e, &mut |s: &Symbol| match s {
            Symbol::Indep(Indep::T) => Some(x.xi_t.clone()),
            Symbol::Indep(Indep::X) => Some(x.xi_x.clone()),
            Symbol::Jet(j) => zetas.get(j).cloned(),
            _ => None,
        }))
    }
}

/// The jet one derivative below `j` together with the direction leading
/// back up. x-derivatives are peeled first.
pub fn parent_of(j: Jet) -> (Jet, Indep) {
    let mut idx = j.index;
    if idx.x > 0 {
        idx.x -= 1;
        (Jet { var: j.var, index: idx }, Indep::X)
    } else {
        idx.t -= 1;
        (Jet { var: j.var, index: idx }, Indep::T)
    }
}

/// Lazily computed, cached prolongation of one generator.
pub struct Prolongation<'a> {
    space: JetSpace,
    x: &'a VectorField,
    cache: HashMap<Jet, Expr>,
    dt_xi: Option<(Expr, Expr)>,
    dx_xi: Option<(Expr, Expr)>,
}

impl<'a> Prolongation<'a> {
    pub fn new(space: JetSpace, x: &'a VectorField) -> Self {
        Prolongation { space, x, cache: HashMap::new(), dt_xi: None, dx_xi: None }
    }

    fn d_xi(&mut self, dir: Indep) -> Result<(Expr, Expr)> {
        let slot = match dir {
            Indep::T => &mut self.dt_xi,
            Indep::X => &mut self.dx_xi,
        };
        if let Some(v) = slot {
            return Ok(v.clone());
        }
        let v = (
            self.space.total_derivative(&self.x.xi_t, dir)?,
            self.space.total_derivative(&self.x.xi_x, dir)?,
        );
        *slot = Some(v.clone());
        Ok(v)
    }

    pub fn zeta(&mut self, j: Jet) -> Result<Expr> {
        if let Some(z) = self.cache.get(&j) {
            return Ok(z.clone());
        }
        self.space.check(j.order())?;
        let z = if j.order() == 0 {
            match j.var {
                DepVar::U => self.x.eta_u.clone(),
                DepVar::V => self.x.eta_v.clone(),
                _ => Expr::zero(),
            }
        } else {
            let (parent, dir) = parent_of(j);
            let zp = self.zeta(parent)?;
            let (dt_, dx_) = self.d_xi(dir)?;
            let ut = Expr::sym(Symbol::Jet(parent.shifted(Indep::T)));
            let ux = Expr::sym(Symbol::Jet(parent.shifted(Indep::X)));
            self.space.total_derivative(&zp, dir)? - ut * dt_ - ux * dx_
        };
        self.cache.insert(j, z.clone());
        Ok(z)
    }
}

/// A point generator `T d/dt + X d/dx + U d/du + V d/dv`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VectorField {
    pub xi_t: Expr,
    pub xi_x: Expr,
    pub eta_u: Expr,
    pub eta_v: Expr,
}

/// Evolutionary form `(W^u, W^v)` of a generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Characteristics {
    pub w_u: Expr,
    pub w_v: Expr,
}

impl VectorField {
    /// Fails when a coefficient depends on a jet coordinate of positive
    /// order or on an adjoint variable.
    pub fn new(xi_t: Expr, xi_x: Expr, eta_u: Expr, eta_v: Expr) -> Result<Self> {
        let v = VectorField { xi_t, xi_x, eta_u, eta_v };
        for c in v.coefficients() {
            if c.any_symbol(|s| s.is_positive_jet() || matches!(s, Symbol::Jet(j) if j.var.is_adjoint())) {
                return Err(Error::Contract(format!(
                    "generator coefficient `{c}` must depend on t, x, u, v only"
                )));
            }
        }
        Ok(v)
    }

    pub fn zero() -> Self {
        VectorField {
            xi_t: Expr::zero(),
            xi_x: Expr::zero(),
            eta_u: Expr::zero(),
            eta_v: Expr::zero(),
        }
    }

    /// Generator with opaque coefficient functions T, X, U, V of (t, x, u, v).
    pub fn symbolic() -> Self {
        VectorField {
            xi_t: Expr::func(CoeffFn::T, [0; 4]),
            xi_x: Expr::func(CoeffFn::X, [0; 4]),
            eta_u: Expr::func(CoeffFn::U, [0; 4]),
            eta_v: Expr::func(CoeffFn::V, [0; 4]),
        }
    }

    pub fn coefficients(&self) -> [&Expr; 4] {
        [&self.xi_t, &self.xi_x, &self.eta_u, &self.eta_v]
    }

    pub fn map(&self, mut f: impl FnMut(&Expr) -> Result<Expr>) -> Result<Self> {
        Ok(VectorField {
            xi_t: f(&self.xi_t)?,
            xi_x: f(&self.xi_x)?,
            eta_u: f(&self.eta_u)?,
            eta_v: f(&self.eta_v)?,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients().iter().all(|c| c.is_zero())
    }

    pub fn scale(&self, k: &Expr) -> Self {
        self.map(|c| Ok(c * k)).expect("scaling is infallible")
    }

    pub fn add(&self, other: &VectorField) -> Self {
        VectorField {
            xi_t: &self.xi_t + &other.xi_t,
            xi_x: &self.xi_x + &other.xi_x,
            eta_u: &self.eta_u + &other.eta_u,
            eta_v: &self.eta_v + &other.eta_v,
        }
    }

    pub fn sub(&self, other: &VectorField) -> Self {
        self.add(&other.scale(&Expr::int(-1)))
    }

    pub fn characteristics(&self) -> Characteristics {
        let jt = |v: DepVar| Expr::jet(v, 1, 0);
        let jx = |v: DepVar| Expr::jet(v, 0, 1);
        Characteristics {
            w_u: &self.eta_u - &(&self.xi_t * &jt(DepVar::U)) - &self.xi_x * &jx(DepVar::U),
            w_v: &self.eta_v - &(&self.xi_t * &jt(DepVar::V)) - &self.xi_x * &jx(DepVar::V),
        }
    }

    /// Applies the generator to a function of (t, x, u, v).
    pub fn act(&self, f: &Expr) -> Expr {
        let pairs = [
            (Symbol::t(), &self.xi_t),
            (Symbol::x(), &self.xi_x),
            (Symbol::dep(DepVar::U), &self.eta_u),
            (Symbol::dep(DepVar::V), &self.eta_v),
        ];
        pairs
            .iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(s, c)| *c * &f.diff(s))
            .sum()
    }

    /// Lie bracket `[self, other]` computed from the coefficient functions.
    pub fn commutator(&self, other: &VectorField) -> VectorField {
        let comp = |a: &Expr, b: &Expr| self.act(b) - other.act(a);
        VectorField {
            xi_t: comp(&self.xi_t, &other.xi_t),
            xi_x: comp(&self.xi_x, &other.xi_x),
            eta_u: comp(&self.eta_u, &other.eta_u),
            eta_v: comp(&self.eta_v, &other.eta_v),
        }
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (c, d) in self.coefficients().into_iter().zip(["d/dt", "d/dx", "d/du", "d/dv"]) {
            if !c.is_zero() {
                parts.push(format!("({c})*{d}"));
            }
        }
        if parts.is_empty() {
            return f.write_str("0");
        }
        f.write_str(&parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    fn vf(t: &str, x: &str, u: &str, v: &str) -> VectorField {
        VectorField::new(p(t), p(x), p(u), p(v)).unwrap()
    }

    #[test]
    fn total_derivatives() {
        let js = JetSpace::default();
        assert_eq!(js.dx(&p("u")).unwrap(), p("u_x"));
        assert_eq!(js.dt(&p("u_xx")).unwrap(), p("u_txx"));
        assert_eq!(js.dx(&p("ln(a*u + c)")).unwrap(), p("a*u_x/(a*u + c)"));
        assert_eq!(js.dt(&p("t*x")).unwrap(), p("x"));
    }

    #[test]
    fn order_cap_is_enforced() {
        let js = JetSpace::new(3);
        assert!(js.dx(&p("u_xx")).is_ok());
        assert_eq!(js.dx(&p("u_xxx")), Err(Error::OrderCap { order: 4, cap: 3 }));
    }

    #[test]
    fn translation_prolongs_to_zero() {
        let js = JetSpace::default();
        let pr = js.prolong(&vf("0", "1", "0", "0"), 3).unwrap();
        assert!(pr.values().all(|z| z.is_zero()));
    }

    #[test]
    fn characteristics_of_galilean_boost() {
        let x4 = vf("0", "(a+b)*t", "0", "1");
        let w = x4.characteristics();
        assert_eq!(w.w_u, p("-(a+b)*t*u_x"));
        assert_eq!(w.w_v, p("1 - (a+b)*t*v_x"));
        let pr = JetSpace::default().prolong(&x4, 1).unwrap();
        assert!(pr[&Jet::new(DepVar::U, 0, 1)].is_zero());
        assert_eq!(pr[&Jet::new(DepVar::V, 1, 0)], p("-(a+b)*v_x"));
    }

    #[test]
    fn both_prolongation_routes_agree() {
        let js = JetSpace::default();
        for x in [
            vf("(a+b)*t", "0", "-2*(a*u + c)", "-(a+b)*v"),
            vf("t^2*u", "x*v", "u*v + t", "ln(a*u+c)"),
            VectorField::symbolic(),
        ] {
            let a = js.prolong(&x, 3).unwrap();
            let b = js.prolong_characteristic(&x, 3).unwrap();
            for (j, z) in &a {
                assert!((z - &b[j]).is_zero(), "{j:?}");
            }
        }
    }

    #[test]
    fn dilation_prolongation() {
        let x1 = vf("(a+b)*t", "0", "-2*(a*u + c)", "-(a+b)*v");
        let pr = JetSpace::default().prolong(&x1, 1).unwrap();
        assert_eq!(pr[&Jet::new(DepVar::U, 1, 0)], p("-(3*a + b)*u_t"));
    }

    #[test]
    fn jet_substitution_differentiates() {
        let js = JetSpace::default();
        let mut b = BTreeMap::new();
        b.insert(DepVar::UBar, p("u*t"));
        let e = js.substitute_jets(&p("ubar_t + ubar"), &b).unwrap();
        assert_eq!(e, p("u + t*u_t + u*t"));
    }

    #[test]
    fn boost_and_time_translation_bracket() {
        let x2 = vf("1", "0", "0", "0");
        let x4 = vf("0", "(a+b)*t", "0", "1");
        assert_eq!(x2.commutator(&x4), vf("0", "a+b", "0", "0"));
    }
}
