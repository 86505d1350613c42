//! Derivations and substitution.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;


use super::atom::{Atom, AtomHead};
use super::poly::{Monomial, Poly, Rational, Var};
use super::symbol::{DepVar, Indep, Symbol};
use super::{cancel, expand, fold_pow_atoms, Expr};
use crate::error::{Error, Result};

/// Applies the derivation determined by its values on symbols (`None` means
/// zero), extended to atoms by the chain rule and to quotients by the
/// quotient rule.
pub fn derive(e: &Expr, d: &mut dyn FnMut(&Symbol) -> Option<Expr>) -> Expr {
    Deriver { d, atoms: HashMap::new(), syms: HashMap::new() }.expr(e)
}

struct Deriver<'a> {
    d: &'a mut dyn FnMut(&Symbol) -> Option<Expr>,
    atoms: HashMap<Arc<Atom>, Option<Expr>>,
    syms: HashMap<Symbol, Option<Expr>>,
}

impl Deriver<'_> {
    fn var(&mut self, v: &Var) -> Option<Expr> {
        match v {
            Var::Sym(s) => {
                if let Some(r) = self.syms.get(s) {
                    return r.clone();
                }
                let r = (self.d)(s).filter(|e| !e.is_zero());
                self.syms.insert(*s, r.clone());
                r
            }
            Var::Atom(a) => {
                if let Some(r) = self.atoms.get(a) {
                    return r.clone();
                }
                let r = self.atom(a);
                self.atoms.insert(a.clone(), r.clone());
                r
            }
        }
    }

    fn atom(&mut self, a: &Arc<Atom>) -> Option<Expr> {
        let g = a.arg();
        let dg = self.expr(g);
        let this = Expr::from_var(Var::Atom(a.clone()));
        let r = match a.head() {
            AtomHead::Ln => dg.checked_div(g).expect("log argument is nonzero"),
            AtomHead::Exp => &this * &dg,
            AtomHead::Pow => {
                let s = a.exponent().expect("pow exponent");
                let ds = self.expr(s);
                let mut inner = (&dg * s).checked_div(g).expect("pow base is nonzero");
                if !ds.is_zero() {
                    let ln = Expr::ln(g).expect("pow base is nonzero");
                    inner += &ln * &ds;
                }
                &this * &inner
            }
        };
        (!r.is_zero()).then_some(r)
    }

    fn poly(&mut self, p: &Poly) -> Expr {
        let mut out = Expr::zero();
        let mut poly_part = Poly::zero();
        for v in p.vars() {
            let Some(dv) = self.var(&v) else { continue };
            let dp = p.partial(&v);
            if dv.is_polynomial() {
                poly_part = poly_part.add(&dp.mul(dv.numerator()));
            } else {
                out += &Expr::from_poly(dp) * &dv;
            }
        }
        fold_pow_atoms(Expr::from_poly(poly_part)) + out
    }

    fn expr(&mut self, e: &Expr) -> Expr {
        let dn = self.poly(&e.num);
        if e.den.is_empty() {
            return dn;
        }
        // d(N/D) = (dN * P - N * sum m_i df_i P/f_i) / (D * P), P = prod f_i
        let p = expand(&e.den.iter().map(|(f, _)| (f.clone(), 1)).collect::<Vec<_>>());
        let mut acc = &dn * &Expr::from_poly(p.clone());
        let n = Expr::from_poly(e.num.clone());
        for (f, m) in &e.den {
            let df = self.poly(f);
            if df.is_zero() {
                continue;
            }
            let rest = p.div_exact(f).expect("factor divides product");
            let k = Rational::from_integer((*m).into());
            acc -= &(&n * &df) * &Expr::from_poly(rest.scale(&k));
        }
        let den: Vec<(Poly, u32)> = e.den.iter().map(|(f, m)| (f.clone(), m + 1)).collect();
        let inv = Expr { num: Poly::one(), den };
        acc * inv
    }
}

/// Partial derivative with jet coordinates as independent coordinates.
/// When `s` is one of t, x, u, v the coefficient functions of a symbolic
/// generator are differentiated as functions of (t, x, u, v).
pub fn diff_partial(e: &Expr, s: &Symbol) -> Expr {
    let slot = func_slot(s);
    derive(e, &mut |sym: &Symbol| match sym {
        Symbol::Func(f, d) => slot.map(|k| {
            let mut d = *d;
            d[k] += 1;
            Expr::func(*f, d)
        }),
        _ if sym == s => Some(Expr::one()),
        _ => None,
    })
}

/// Argument slot of a coefficient function corresponding to `s`.
pub(crate) fn func_slot(s: &Symbol) -> Option<usize> {
    match s {
        Symbol::Indep(Indep::T) => Some(0),
        Symbol::Indep(Indep::X) => Some(1),
        Symbol::Jet(j) if j.order() == 0 && j.var == DepVar::U => Some(2),
        Symbol::Jet(j) if j.order() == 0 && j.var == DepVar::V => Some(3),
        _ => None,
    }
}

impl Expr {
    pub fn diff(&self, s: &Symbol) -> Expr {
        diff_partial(self, s)
    }

    /// Simultaneous substitution of symbols. Positive-order jet coordinates
    /// cannot be bound here; use the jet-aware wrapper instead.
    pub fn substitute(&self, bindings: &BTreeMap<Symbol, Expr>) -> Result<Expr> {
        if let Some(s) = bindings.keys().find(|s| s.is_positive_jet()) {
            return Err(Error::JetBinding(s.to_string()));
        }
        self.substitute_unchecked(bindings)
    }

    pub(crate) fn substitute_unchecked(&self, bindings: &BTreeMap<Symbol, Expr>) -> Result<Expr> {
        if bindings.is_empty() {
            return Ok(self.clone());
        }
        Substituter { bindings, atoms: HashMap::new() }.expr(self)
    }

    /// Substitution through a callback (`None` keeps the symbol).
    pub fn substitute_with(&self, f: &dyn Fn(&Symbol) -> Option<Expr>) -> Result<Expr> {
        let mut map = BTreeMap::new();
        for s in self.symbols() {
            if let Some(e) = f(&s) {
                map.insert(s, e);
            }
        }
        self.substitute_unchecked(&map)
    }
}

struct Substituter<'a> {
    bindings: &'a BTreeMap<Symbol, Expr>,
    atoms: HashMap<Arc<Atom>, Expr>,
}

impl Substituter<'_> {
    fn touches(&self, e: &Expr) -> bool {
        e.any_symbol(|s| self.bindings.contains_key(s))
    }

    fn var(&mut self, v: &Var) -> Result<Option<Expr>> {
        match v {
            Var::Sym(s) => Ok(self.bindings.get(s).cloned()),
            Var::Atom(a) => {
                if let Some(r) = self.atoms.get(a) {
                    return Ok(Some(r.clone()));
                }
                let arg = a.arg();
                if !self.touches(arg) && !a.exponent().is_some_and(|s| self.touches(s)) {
                    return Ok(None);
                }
                let arg = self.expr(arg)?;
                let exp = match a.exponent() {
                    Some(s) => Some(self.expr(s)?),
                    None => None,
                };
                let r = Expr::rebuild_atom(a.head(), &arg, exp.as_ref())?;
                self.atoms.insert(a.clone(), r.clone());
                Ok(Some(r))
            }
        }
    }

    /// Substitutes into a polynomial, returning `num / prod(den)` with a
    /// common denominator built from the largest power of each value's
    /// denominator.
    fn poly(&mut self, p: &Poly) -> Result<Expr> {
        let mut values: BTreeMap<Var, Expr> = BTreeMap::new();
        for v in p.vars() {
            if let Some(e) = self.var(&v)? {
                values.insert(v, e);
            }
        }
        if values.is_empty() {
            return Ok(Expr::from_poly(p.clone()));
        }
        let max_deg: BTreeMap<&Var, u32> = values.keys().map(|v| (v, p.degree_in(v))).collect();
        let mut lcm: Vec<(Poly, u32)> = Vec::new();
        for (v, e) in &values {
            let k = max_deg[v];
            let scaled: Vec<(Poly, u32)> = e.den.iter().map(|(f, m)| (f.clone(), m * k)).collect();
            lcm = super::merge_factors(&lcm, &scaled, |a, b| a + b);
        }
        let mut num_pows: HashMap<(&Var, u32), Poly> = HashMap::new();
        let mut den_pows: HashMap<(&Var, u32), Poly> = HashMap::new();
        let mut acc: Vec<(Monomial, Rational)> = Vec::new();
        let mut total = Poly::zero();
        for (m, c) in p.terms() {
            let mut rest = Vec::new();
            let mut prod = Poly::one();
            for (v, e) in m.factors() {
                match values.get_key_value(v) {
                    Some((key, val)) => {
                        let np = num_pows
                            .entry((key, *e))
                            .or_insert_with(|| val.num.pow(*e))
                            .clone();
                        prod = prod.mul(&np);
                    }
                    None => rest.push((v.clone(), *e)),
                }
            }
            for (key, val) in &values {
                if val.den.is_empty() {
                    continue;
                }
                let e = m.exponent(key);
                let k = max_deg[key] - e;
                if k > 0 {
                    let dp = den_pows
                        .entry((key, k))
                        .or_insert_with(|| expand(&val.den).pow(k))
                        .clone();
                    prod = prod.mul(&dp);
                }
            }
            let mono = Monomial::from_factors(rest);
            if prod == Poly::one() {
                acc.push((mono, c.clone()));
            } else {
                total = total.add(&prod.mul_term(&mono, c));
            }
        }
        total = total.add(&Poly::from_terms(acc));
        Ok(fold_pow_atoms(cancel(total, lcm)))
    }

    fn expr(&mut self, e: &Expr) -> Result<Expr> {
        let num = self.poly(&e.num)?;
        if e.den.is_empty() {
            return Ok(num);
        }
        let mut den = Expr::one();
        for (f, m) in &e.den {
            let fs = self.poly(f)?;
            if fs.is_zero() {
                return Err(Error::DivisionByZero);
            }
            den = den * fs.powi(*m as i64)?;
        }
        num.checked_div(&den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Param};

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn chain_rule_through_log() {
        let e = p("ln(a*u + c)");
        assert_eq!(e.diff(&Symbol::dep(DepVar::U)), p("a/(a*u + c)"));
    }

    #[test]
    fn partial_treats_jets_as_coordinates() {
        assert_eq!(p("u_x*v").diff(&Symbol::dep(DepVar::V)), p("u_x"));
        assert!(p("u_x*v").diff(&Symbol::jet(DepVar::U, 1, 0)).is_zero());
    }

    #[test]
    fn pow_derivative_uses_log_rule() {
        let e = p("pow(a*u + c, b/a)");
        let d = e.diff(&Symbol::dep(DepVar::U));
        let expected = p("b*pow(a*u + c, b/a)/(a*u + c)");
        assert!((d - expected).is_zero());
    }

    #[test]
    fn quotient_rule() {
        let e = p("u/(u + v)");
        let d = e.diff(&Symbol::dep(DepVar::U));
        assert!((d - p("v/(u + v)^2")).is_zero());
    }

    #[test]
    fn substitution_of_parameters() {
        let mut m = BTreeMap::new();
        m.insert(Symbol::Param(Param::B), Expr::zero());
        assert!(p("b*u").substitute(&m).unwrap().is_zero());
        let mut m = BTreeMap::new();
        m.insert(Symbol::Param(Param::A), Expr::one());
        m.insert(Symbol::Param(Param::C), Expr::one());
        assert_eq!(p("a*u + c").substitute(&m).unwrap(), p("u + 1"));
    }

    #[test]
    fn substitution_rejects_jet_keys() {
        let mut m = BTreeMap::new();
        m.insert(Symbol::jet(DepVar::U, 0, 1), Expr::zero());
        assert!(matches!(p("u_x").substitute(&m), Err(Error::JetBinding(_))));
    }

    #[test]
    fn substitution_into_denominators_and_atoms() {
        let mut m = BTreeMap::new();
        m.insert(Symbol::dep(DepVar::U), p("v/a"));
        let e = p("ln(a*u + c)/(a*u + c)").substitute(&m).unwrap();
        assert_eq!(e, p("ln(v + c)/(v + c)"));
        m.insert(Symbol::dep(DepVar::U), p("-c/a"));
        assert_eq!(p("1/(a*u + c)").substitute(&m), Err(Error::DivisionByZero));
    }
}
