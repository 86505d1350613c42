//! Transcendental atoms: `ln(g)`, `exp(g)` and `pow(g, s)` with a
//! jet-constant exponent.

use std::sync::Arc;

use super::poly::{Poly, Var};
use super::Expr;
use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum AtomHead {
    Ln,
    Exp,
    Pow,
}

impl AtomHead {
    pub fn name(self) -> &'static str {
        match self {
            AtomHead::Ln => "ln",
            AtomHead::Exp => "exp",
            AtomHead::Pow => "pow",
        }
    }
}

/// An opaque transcendental function application. Two atoms are equal iff
/// their heads and normalized arguments agree.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Atom {
    head: AtomHead,
    arg: Expr,
    exponent: Option<Expr>,
}

impl Atom {
    pub fn head(&self) -> AtomHead {
        self.head
    }

    pub fn arg(&self) -> &Expr {
        &self.arg
    }

    /// Exponent of a `pow` atom.
    pub fn exponent(&self) -> Option<&Expr> {
        self.exponent.as_ref()
    }

    fn into_expr(self) -> Expr {
        Expr::from_poly(Poly::var(Var::Atom(Arc::new(self))))
    }
}

impl Expr {
    pub fn ln(arg: &Expr) -> Result<Expr> {
        if arg.is_zero() {
            return Err(Error::LogOfZero);
        }
        if arg.is_one() {
            return Ok(Expr::zero());
        }
        Ok(Atom { head: AtomHead::Ln, arg: arg.clone(), exponent: None }.into_expr())
    }

    pub fn exp(arg: &Expr) -> Expr {
        if arg.is_zero() {
            return Expr::one();
        }
        Atom { head: AtomHead::Exp, arg: arg.clone(), exponent: None }.into_expr()
    }

    /// `base^exponent` for an exponent that is constant over the jet space.
    /// Integer exponents fold into the polynomial layer.
    pub fn pow(base: &Expr, exponent: &Expr) -> Result<Expr> {
        if exponent.any_symbol(|s| !s.is_constant()) {
            return Err(Error::InvalidExponent(format!(
                "`{exponent}` depends on the jet space"
            )));
        }
        if let Some(q) = exponent.constant_value() {
            if q.is_integer() {
                let n: i64 = q
                    .to_integer()
                    .try_into()
                    .map_err(|_| Error::InvalidExponent(format!("{q} is too large")))?;
                return base.powi(n);
            }
        }
        if base.is_one() {
            return Ok(Expr::one());
        }
        if base.is_zero() {
            return Err(Error::InvalidExponent("zero base with symbolic exponent".into()));
        }
        Ok(Atom {
            head: AtomHead::Pow,
            arg: base.clone(),
            exponent: Some(exponent.clone()),
        }
        .into_expr())
    }

    /// Rebuilds an atom from (possibly changed) parts through the
    /// normalizing constructors.
    pub(crate) fn rebuild_atom(head: AtomHead, arg: &Expr, exponent: Option<&Expr>) -> Result<Expr> {
        match head {
            AtomHead::Ln => Expr::ln(arg),
            AtomHead::Exp => Ok(Expr::exp(arg)),
            AtomHead::Pow => Expr::pow(arg, exponent.expect("pow atom carries an exponent")),
        }
    }
}
