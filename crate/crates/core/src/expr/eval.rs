//! Exact rational evaluation.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::atom::{Atom, AtomHead};
use super::poly::{Poly, Rational, Var};
use super::symbol::Symbol;
use super::Expr;
use crate::error::{Error, Result};

impl Expr {
    /// Evaluates at a rational point. Fails when a symbol is unbound, a
    /// denominator vanishes, or an atom has no rational value.
    pub fn eval(&self, point: &dyn Fn(&Symbol) -> Option<Rational>) -> Result<Rational> {
        Evaluator { point, atoms: HashMap::new(), fallback: None }.expr(self)
    }

    /// Like [`Expr::eval`], but atoms without a rational value take the
    /// value chosen by `fallback`, once per distinct atom.
    pub fn eval_with(
        &self,
        point: &dyn Fn(&Symbol) -> Option<Rational>,
        fallback: &mut dyn FnMut(&Atom) -> Rational,
    ) -> Result<Rational> {
        Evaluator { point, atoms: HashMap::new(), fallback: Some(fallback) }.expr(self)
    }
}

struct Evaluator<'a> {
    point: &'a dyn Fn(&Symbol) -> Option<Rational>,
    atoms: HashMap<Arc<Atom>, Rational>,
    fallback: Option<&'a mut dyn FnMut(&Atom) -> Rational>,
}

impl Evaluator<'_> {
    fn var(&mut self, v: &Var) -> Result<Rational> {
        match v {
            Var::Sym(s) => (self.point)(s).ok_or_else(|| Error::Unevaluable(s.to_string())),
            Var::Atom(a) => {
                if let Some(q) = self.atoms.get(a) {
                    return Ok(q.clone());
                }
                let q = match (self.atom(a), self.fallback.as_mut()) {
                    (Ok(q), _) => q,
                    (Err(Error::Unevaluable(_)), Some(f)) => f(a),
                    (Err(err), _) => return Err(err),
                };
                self.atoms.insert(a.clone(), q.clone());
                Ok(q)
            }
        }
    }

    fn atom(&mut self, a: &Atom) -> Result<Rational> {
        let g = self.expr(a.arg())?;
        let fail = || Error::Unevaluable(format!("{}(...)", a.head().name()));
        match a.head() {
            AtomHead::Ln if g.is_one() => Ok(Rational::zero()),
            AtomHead::Exp if g.is_zero() => Ok(Rational::one()),
            AtomHead::Pow => {
                let s = self.expr(a.exponent().expect("pow exponent"))?;
                rational_pow(&g, &s).ok_or_else(fail)
            }
            _ => Err(fail()),
        }
    }

    fn poly(&mut self, p: &Poly) -> Result<Rational> {
        let mut cache: HashMap<&Var, Rational> = HashMap::new();
        let mut total = Rational::zero();
        for (m, c) in p.terms() {
            let mut t = c.clone();
            for (v, e) in m.factors() {
                let q = match cache.get(v) {
                    Some(q) => q.clone(),
                    None => {
                        let q = self.var(v)?;
                        cache.insert(v, q.clone());
                        q
                    }
                };
                t *= num_traits::pow(q, *e as usize);
            }
            total += t;
        }
        Ok(total)
    }

    fn expr(&mut self, e: &Expr) -> Result<Rational> {
        let n = self.poly(&e.num)?;
        let mut d = Rational::one();
        for (f, m) in &e.den {
            d *= num_traits::pow(self.poly(f)?, *m as usize);
        }
        if d.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(n / d)
    }
}

/// `g^s` when the result is rational.
fn rational_pow(g: &Rational, s: &Rational) -> Option<Rational> {
    if g.is_zero() {
        return s.is_positive().then(Rational::zero);
    }
    let p = s.numer().to_i64()?;
    let q = s.denom().to_u32()?;
    if p.unsigned_abs() > 64 {
        return None;
    }
    let root = |n: &BigInt| -> Option<BigInt> {
        if n.is_negative() {
            if q % 2 == 0 {
                return None;
            }
            let r = (-n).nth_root(q);
            (num_traits::pow(r.clone(), q as usize) == -n).then(|| -r)
        } else {
            let r = n.nth_root(q);
            (num_traits::pow(r.clone(), q as usize) == *n).then_some(r)
        }
    };
    let base = Rational::new(root(g.numer())?, root(g.denom())?);
    let r = num_traits::pow(base, p.unsigned_abs() as usize);
    Some(if p < 0 { r.recip() } else { r })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, rational, DepVar, Param};

    fn at(s: &Symbol) -> Option<Rational> {
        match s {
            Symbol::Param(Param::A) => Some(rational(2, 1)),
            Symbol::Param(Param::C) => Some(rational(1, 1)),
            Symbol::Jet(j) if j.var == DepVar::U => Some(rational(3, 2)),
            _ => None,
        }
    }

    #[test]
    fn evaluates_rational_functions() {
        let e = parse("u^2/(a*u + c)").unwrap();
        assert_eq!(e.eval(&at).unwrap(), rational(9, 16));
    }

    #[test]
    fn exact_roots_only() {
        let e = parse("pow(a*u + c, 1/2)").unwrap();
        assert_eq!(e.eval(&at).unwrap(), rational(2, 1));
        let e = parse("ln(a*u + c)").unwrap();
        assert!(e.eval(&at).is_err());
    }

    #[test]
    fn unbound_symbols_fail() {
        assert!(parse("v").unwrap().eval(&at).is_err());
    }
}
