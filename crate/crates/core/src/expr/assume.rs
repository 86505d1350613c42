//! Parameter assumptions: nonvanishing polynomials and zero constraints.
//!
//! Zero constraints are solved for one parameter (or arbitrary constant)
//! each and applied by substitution. Nonvanishing polynomials are stored as
//! primitive factors; a parameter polynomial is known to be nonzero when it
//! is a constant or a product of stored factors.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::One;

use super::poly::{Poly, Rational, Var};
use super::symbol::Symbol;
use super::Expr;
use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Assumptions {
    nonzero: Vec<Poly>,
    zero: Vec<Expr>,
    bindings: BTreeMap<Symbol, Expr>,
}

fn is_parametric_poly(p: &Poly) -> bool {
    !p.any_var(|v| !matches!(v, Var::Sym(Symbol::Param(_) | Symbol::Const(_))))
}

impl Assumptions {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn nonzero(mut self, e: &Expr) -> Result<Self> {
        self.add_nonzero(e)?;
        Ok(self)
    }

    pub fn zero(mut self, e: &Expr) -> Result<Self> {
        self.add_zero(e)?;
        Ok(self)
    }

    /// Parses and adds each text as a nonvanishing polynomial.
    pub fn with_nonzero(mut self, texts: &[&str]) -> Result<Self> {
        for t in texts {
            self.add_nonzero(&super::parse(t)?)?;
        }
        Ok(self)
    }

    /// Parses and adds each text as a zero constraint.
    pub fn with_zero(mut self, texts: &[&str]) -> Result<Self> {
        for t in texts {
            self.add_zero(&super::parse(t)?)?;
        }
        Ok(self)
    }

    /// The declared zero constraints, in insertion order.
    pub fn zero_constraints(&self) -> &[Expr] {
        &self.zero
    }

    /// The stored nonvanishing factors after applying zero constraints.
    pub fn nonzero_factors(&self) -> &[Poly] {
        &self.nonzero
    }

    /// Solved form of the zero constraints.
    pub fn bindings(&self) -> &BTreeMap<Symbol, Expr> {
        &self.bindings
    }

    /// Value forced on `s` by the zero constraints, if any.
    pub fn binding(&self, s: &Symbol) -> Option<&Expr> {
        self.bindings.get(s)
    }

    pub fn add_nonzero(&mut self, e: &Expr) -> Result<()> {
        if !e.is_parametric() {
            return Err(Error::NotParametric(e.to_string()));
        }
        let e = self.apply(e)?;
        if e.is_zero() {
            return Err(Error::Inconsistent(format!(
                "`{e}` is declared nonzero but vanishes under the zero constraints"
            )));
        }
        for (f, _) in e.denominator_factors() {
            self.insert_factors(f);
        }
        self.insert_factors(e.numerator());
        Ok(())
    }

    fn insert_factors(&mut self, p: &Poly) {
        for f in split_factors(p) {
            if !self.nonzero.contains(&f) {
                self.nonzero.push(f);
            }
        }
        self.nonzero.sort();
    }

    pub fn add_zero(&mut self, e: &Expr) -> Result<()> {
        if !e.is_parametric() {
            return Err(Error::NotParametric(e.to_string()));
        }
        let original = e.clone();
        let e = self.apply(e)?;
        if e.is_zero() {
            self.zero.push(original);
            return Ok(());
        }
        if self.is_nonzero(&e) {
            return Err(Error::Inconsistent(format!(
                "`{original}` cannot vanish under the nonzero assumptions"
            )));
        }
        let p = e.numerator();
        let mut solved = None;
        for v in p.vars().into_iter().rev() {
            if p.degree_in(&v) != 1 {
                continue;
            }
            let (coef, rest) = linear_split(p, &v);
            let coef = Expr::from_poly(coef);
            if !self.is_nonzero(&coef) {
                continue;
            }
            let value = (-Expr::from_poly(rest)).checked_div(&coef)?;
            solved = Some((*v.as_symbol().expect("parametric"), value));
            break;
        }
        let Some((s, value)) = solved else {
            return Err(Error::UnsolvableConstraint(original.to_string()));
        };
        let single: BTreeMap<Symbol, Expr> = [(s, value.clone())].into();
        for v in self.bindings.values_mut() {
            *v = v.substitute_unchecked(&single)?;
        }
        self.bindings.insert(s, value);
        let old = std::mem::take(&mut self.nonzero);
        for f in old {
            let g = self.apply(&Expr::from_poly(f.clone()))?;
            if g.is_zero() {
                return Err(Error::Inconsistent(format!(
                    "`{original}` = 0 forces the nonzero factor `{f}` to vanish"
                )));
            }
            self.insert_factors(g.numerator());
        }
        self.zero.push(original);
        Ok(())
    }

    /// Applies the zero constraints by substitution.
    pub fn apply(&self, e: &Expr) -> Result<Expr> {
        if self.bindings.is_empty() {
            return Ok(e.clone());
        }
        e.substitute_unchecked(&self.bindings)
    }

    /// Whether `e` is known to be nonzero. Expressions in further variables
    /// are nonzero when one of their parameter coefficients is.
    pub fn is_nonzero(&self, e: &Expr) -> bool {
        let Ok(e) = self.apply(e) else { return false };
        if e.is_zero() {
            return false;
        }
        let p = e.numerator();
        if is_parametric_poly(p) {
            return self.licensed(p);
        }
        p.split_by(|v| !matches!(v, Var::Sym(Symbol::Param(_) | Symbol::Const(_))))
            .iter()
            .any(|(_, c)| self.licensed(c))
    }

    fn licensed(&self, p: &Poly) -> bool {
        if p.is_zero() {
            return false;
        }
        if p.is_constant() {
            return true;
        }
        split_factors(p).iter().all(|f| self.licensed_factor(f))
    }

    fn licensed_factor(&self, f: &Poly) -> bool {
        let mut rest = f.clone();
        let mut progress = true;
        while progress && !rest.is_constant() {
            progress = false;
            for g in &self.nonzero {
                if let Some(q) = rest.div_exact(g) {
                    rest = q;
                    progress = true;
                }
            }
        }
        rest.is_constant()
    }

    /// Factors of a parameter polynomial that are not known to be nonzero.
    pub fn unlicensed_factors(&self, e: &Expr) -> Vec<Poly> {
        let Ok(e) = self.apply(e) else { return Vec::new() };
        if e.is_zero() {
            return Vec::new();
        }
        split_factors(e.numerator())
            .into_iter()
            .filter(|f| !self.licensed_factor(f))
            .collect()
    }

    /// `e1 == e2` after applying the zero constraints.
    pub fn equals(&self, e1: &Expr, e2: &Expr) -> bool {
        self.apply(&(e1 - e2)).is_ok_and(|d| d.is_zero())
    }

    /// Whether the symbol is forced to zero.
    pub fn forces_zero(&self, s: &Symbol) -> bool {
        self.bindings.get(s).is_some_and(|v| v.is_zero())
    }

    /// Merges another set of assumptions into this one.
    pub fn merged(&self, other: &Assumptions) -> Result<Assumptions> {
        let mut out = self.clone();
        for z in &other.zero {
            out.add_zero(z)?;
        }
        for f in &other.nonzero {
            out.add_nonzero(&Expr::from_poly(f.clone()))?;
        }
        Ok(out)
    }
}

/// Monomial content split into single variables, plus the primitive rest.
fn split_factors(p: &Poly) -> Vec<Poly> {
    let (_, prim) = p.primitive();
    let mono = prim.monomial_content();
    let mut out: Vec<Poly> = mono.factors().iter().map(|(v, _)| Poly::var(v.clone())).collect();
    let rest = if mono.is_one() {
        prim
    } else {
        prim.div_exact(&Poly::monomial(mono, Rational::one())).expect("content divides")
    };
    if !rest.is_constant() {
        out.push(rest.primitive().1);
    }
    out
}

/// Writes a polynomial of degree one in `v` as `coef * v + rest`.
fn linear_split(p: &Poly, v: &Var) -> (Poly, Poly) {
    let mut coef = Vec::new();
    let mut rest = Vec::new();
    for (m, c) in p.terms() {
        let (e, other) = m.split_off(v);
        if e == 1 {
            coef.push((other, c.clone()));
        } else {
            rest.push((m.clone(), c.clone()));
        }
    }
    (Poly::from_terms(coef), Poly::from_terms(rest))
}

impl fmt::Display for Assumptions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nz: Vec<String> = self.nonzero.iter().map(|p| format!("{p} != 0")).collect();
        let z: Vec<String> = self.zero.iter().map(|e| format!("{e} = 0")).collect();
        write!(f, "[{}]", nz.into_iter().chain(z).collect::<Vec<_>>().join(", "))
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
    fn nonzero_products_split_into_factors() {
        let asm = Assumptions::new().with_nonzero(&["(a+b)*c"]).unwrap();
        assert!(asm.is_nonzero(&p("c")));
        assert!(asm.is_nonzero(&p("2*a + 2*b")));
        assert!(asm.is_nonzero(&p("c^2*(a+b)")));
        assert!(!asm.is_nonzero(&p("a")));
        assert!(asm.equals(&p("(a+b)*c*u/((a+b)*c)"), &p("u")));
    }

    #[test]
    fn zero_constraints_substitute() {
        let asm = Assumptions::new()
            .with_nonzero(&["(a+b)*c"])
            .unwrap()
            .with_zero(&["b"])
            .unwrap();
        assert!(asm.equals(&p("b*u"), &Expr::zero()));
        assert!(asm.is_nonzero(&p("a")));
        assert!(asm.forces_zero(&Symbol::Param(Param::B)));
    }

    #[test]
    fn solves_for_the_greatest_parameter() {
        let asm = Assumptions::new().with_zero(&["a - b", "eps - sigma"]).unwrap();
        assert_eq!(asm.binding(&Symbol::Param(Param::B)), Some(&p("a")));
        assert_eq!(asm.binding(&Symbol::Param(Param::Sigma)), Some(&p("eps")));
    }

    #[test]
    fn inconsistent_assumptions_are_rejected() {
        let asm = Assumptions::new().with_nonzero(&["(a+b)*c"]).unwrap();
        assert!(matches!(asm.clone().with_zero(&["c"]), Err(Error::Inconsistent(_))));
        assert!(matches!(asm.with_zero(&["a + b"]), Err(Error::Inconsistent(_))));
        assert!(matches!(
            Assumptions::new().with_nonzero(&["u"]),
            Err(Error::NotParametric(_))
        ));
    }

    #[test]
    fn polynomials_in_jets_are_nonzero_if_a_coefficient_is() {
        let asm = Assumptions::new().with_nonzero(&["c"]).unwrap();
        assert!(asm.is_nonzero(&p("c*u + b")));
        assert!(!asm.is_nonzero(&p("b*u + a")));
    }
}
