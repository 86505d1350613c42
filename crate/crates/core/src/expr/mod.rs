//! Exact symbolic expressions.
//!
//! An [`Expr`] is a quotient of an expanded numerator polynomial by a
//! product of primitive denominator factors. Factors are kept separately so
//! that least common denominators and cancellation reduce to exact trial
//! division; no polynomial factorization is ever attempted. Equality of two
//! expressions is decided by normalizing their difference, which is exact.
//!
//! Note that the model parameter `c` and the arbitrary constants `c1`, `c2`,
//! ... live in different namespaces.

mod assume;
mod atom;
mod calc;
mod eval;
mod parse;
mod poly;
mod print;
mod symbol;

use std::collections::BTreeSet;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

pub use assume::Assumptions;
pub use calc::{derive, diff_partial};
pub use atom::{Atom, AtomHead};
pub use parse::parse;
pub use poly::{Monomial, Poly, Rational, Var};
pub use symbol::{CoeffFn, DepVar, FuncDerivs, Indep, Jet, JetIndex, Param, Symbol, SymbolKind};

use crate::error::{Error, Result};

/// Canonical exact expression: `num / prod(factor^mult)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Expr {
    num: Poly,
    den: Vec<(Poly, u32)>,
}

pub fn rational(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

impl Expr {
    pub fn zero() -> Self {
        Expr::default()
    }

    pub fn one() -> Self {
        Expr::from_poly(Poly::one())
    }

    pub fn int(n: i64) -> Self {
        Expr::from_rational(Rational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Expr::from_rational(rational(n, d))
    }

    pub fn from_rational(q: Rational) -> Self {
        Expr::from_poly(Poly::constant(q))
    }

    pub fn from_poly(num: Poly) -> Self {
        Expr { num, den: Vec::new() }
    }

    pub fn from_var(v: Var) -> Self {
        Expr::from_poly(Poly::var(v))
    }

    pub fn sym(s: Symbol) -> Self {
        Expr::from_var(Var::Sym(s))
    }

    pub fn param(p: Param) -> Self {
        Expr::sym(Symbol::Param(p))
    }

    /// Arbitrary constant `c<k>`.
    pub fn constant(k: u32) -> Self {
        Expr::sym(Symbol::Const(k))
    }

    pub fn unknown(k: u32) -> Self {
        Expr::sym(Symbol::Unknown(k))
    }

    pub fn t() -> Self {
        Expr::sym(Symbol::t())
    }

    pub fn x() -> Self {
        Expr::sym(Symbol::x())
    }

    pub fn dep(var: DepVar) -> Self {
        Expr::sym(Symbol::dep(var))
    }

    pub fn u() -> Self {
        Expr::dep(DepVar::U)
    }

    pub fn v() -> Self {
        Expr::dep(DepVar::V)
    }

    pub fn jet(var: DepVar, t: u8, x: u8) -> Self {
        Expr::sym(Symbol::jet(var, t, x))
    }

    pub fn func(f: CoeffFn, d: FuncDerivs) -> Self {
        Expr::sym(Symbol::Func(f, d))
    }

    // ---- queries ----

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator_factors(&self) -> &[(Poly, u32)] {
        &self.den
    }

    /// Expanded denominator polynomial.
    pub fn denominator(&self) -> Poly {
        expand(&self.den)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_empty() && self.num.constant_value().is_some_and(|q| q.is_one())
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_empty()
    }

    pub fn constant_value(&self) -> Option<Rational> {
        if self.den.is_empty() {
            self.num.constant_value()
        } else {
            None
        }
    }

    /// Top-level variables of numerator and denominator.
    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = self.num.vars();
        for (f, _) in &self.den {
            out.extend(f.vars());
        }
        out
    }

    /// Every symbol occurring anywhere, including inside atoms.
    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        for v in self.vars() {
            match v {
                Var::Sym(s) => {
                    out.insert(s);
                }
                Var::Atom(a) => {
                    a.arg().collect_symbols(out);
                    if let Some(e) = a.exponent() {
                        e.collect_symbols(out);
                    }
                }
            }
        }
    }

    pub fn any_symbol(&self, pred: impl Fn(&Symbol) -> bool + Copy) -> bool {
        self.vars().iter().any(|v| match v {
            Var::Sym(s) => pred(s),
            Var::Atom(a) => {
                a.arg().any_symbol(pred) || a.exponent().is_some_and(|e| e.any_symbol(pred))
            }
        })
    }

    pub fn atoms(&self) -> BTreeSet<Arc<Atom>> {
        self.vars()
            .into_iter()
            .filter_map(|v| v.as_atom().cloned())
            .collect()
    }

    /// Highest jet order of any dependent-variable symbol, zero if none.
    pub fn jet_order(&self) -> usize {
        self.symbols()
            .iter()
            .filter_map(|s| s.as_jet().map(|j| j.order()))
            .max()
            .unwrap_or(0)
    }

    /// True when no symbol other than parameters and constants occurs.
    pub fn is_parametric(&self) -> bool {
        !self.any_symbol(|s| !matches!(s, Symbol::Param(_) | Symbol::Const(_)))
    }

    /// Groups terms by the monomial in the variables selected by `pred`.
    /// Returns `None` when the denominator involves a selected variable.
    pub fn coefficients_by(&self, pred: impl Fn(&Var) -> bool + Copy) -> Option<Vec<(Monomial, Expr)>> {
        if self.den.iter().any(|(f, _)| f.any_var(pred)) {
            return None;
        }
        let inv_den = Expr { num: Poly::one(), den: self.den.clone() };
        Some(
            self.num
                .split_by(pred)
                .into_iter()
                .map(|(m, p)| {
                    let c = Expr::from_poly(p);
                    let c = if inv_den.den.is_empty() { c } else { c.mul_impl(&inv_den) };
                    (m, c)
                })
                .collect(),
        )
    }

    /// Number of numerator terms, a rough size measure.
    pub fn size(&self) -> usize {
        self.num.len() + self.den.iter().map(|(f, _)| f.len()).sum::<usize>()
    }

    // ---- arithmetic ----

    pub fn scale(&self, k: &Rational) -> Expr {
        if k.is_zero() {
            return Expr::zero();
        }
        Expr { num: self.num.scale(k), den: self.den.clone() }
    }

    fn add_impl(&self, other: &Expr, negate: bool) -> Expr {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return if negate { other.neg_ref() } else { other.clone() };
        }
        let combine = |a: &Poly, b: &Poly| if negate { a.sub(b) } else { a.add(b) };
        if self.den == other.den {
            let num = combine(&self.num, &other.num);
            if self.den.is_empty() {
                return Expr::from_poly(num);
            }
            return cancel(num, self.den.clone());
        }
        let lcm = merge_factors(&self.den, &other.den, u32::max);
        let fa = expand(&quotient_factors(&lcm, &self.den));
        let fb = expand(&quotient_factors(&lcm, &other.den));
        let num = combine(&self.num.mul(&fa), &other.num.mul(&fb));
        cancel(num, lcm)
    }

    fn neg_ref(&self) -> Expr {
        Expr { num: self.num.neg(), den: self.den.clone() }
    }

    fn mul_impl(&self, other: &Expr) -> Expr {
        if self.is_zero() || other.is_zero() {
            return Expr::zero();
        }
        if self.den.is_empty() && other.den.is_empty() {
            return fold_pow_atoms(Expr::from_poly(self.num.mul(&other.num)));
        }
        let (n1, d2) = cancel_against(self.num.clone(), &other.den);
        let (n2, d1) = cancel_against(other.num.clone(), &self.den);
        let den = merge_factors(&d1, &d2, |a, b| a + b);
        fold_pow_atoms(Expr { num: n1.mul(&n2), den })
    }

    /// Multiplicative inverse; fails on zero.
    pub fn inv(&self) -> Result<Expr> {
        self.inv_with_hints(&[])
    }

    fn inv_with_hints(&self, hints: &[(Poly, u32)]) -> Result<Expr> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let new_num = expand(&self.den);
        let (mut content, prim) = self.num.primitive();
        let mono = prim.monomial_content();
        let mut rest = if mono.is_one() {
            prim
        } else {
            prim.div_exact(&Poly::monomial(mono.clone(), Rational::one()))
                .expect("monomial content divides")
        };
        let mut factors: Vec<(Poly, u32)> = mono
            .factors()
            .iter()
            .map(|(v, k)| (Poly::var(v.clone()), *k))
            .collect();
        if !rest.is_constant() {
            for (h, _) in hints {
                if h.total_degree() > rest.total_degree() {
                    continue;
                }
                while !rest.is_constant() {
                    match rest.div_exact(h) {
                        Some(q) => {
                            factors.push((h.clone(), 1));
                            rest = q;
                        }
                        None => break,
                    }
                }
            }
        }
        if let Some(q) = rest.constant_value() {
            content *= q;
        } else {
            let (c2, p2) = rest.primitive();
            content *= c2;
            factors.push((p2, 1));
        }
        let factors = normalize_factor_list(factors);
        Ok(cancel(new_num.scale(&content.recip()), factors))
    }

    pub fn checked_div(&self, other: &Expr) -> Result<Expr> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if let Some(q) = other.constant_value() {
            return Ok(self.scale(&q.recip()));
        }
        let inv = other.inv_with_hints(&self.den)?;
        Ok(self.mul_impl(&inv))
    }

    pub fn powi(&self, n: i64) -> Result<Expr> {
        if n < 0 {
            return self.inv()?.powi(-n);
        }
        let mut result = Expr::one();
        let mut base = self.clone();
        let mut n = n as u64;
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul_impl(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul_impl(&base);
            }
        }
        Ok(result)
    }

    /// Recomputes the canonical form from scratch. Idempotent.
    pub fn normalize(&self) -> Expr {
        let factors = normalize_factor_list(self.den.clone());
        let (num, den) = cancel_against(self.num.clone(), &factors);
        fold_pow_atoms(Expr { num, den })
    }
}

// ---- factor-list helpers ----

pub(crate) fn expand(factors: &[(Poly, u32)]) -> Poly {
    let mut out = Poly::one();
    for (f, m) in factors {
        out = out.mul(&f.pow(*m));
    }
    out
}

fn merge_factors(
    a: &[(Poly, u32)],
    b: &[(Poly, u32)],
    combine: impl Fn(u32, u32) -> u32,
) -> Vec<(Poly, u32)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j].clone());
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push((a[i].0.clone(), combine(a[i].1, b[j].1)));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend(a[i..].iter().cloned());
    out.extend(b[j..].iter().cloned());
    out
}

/// `lcm / part` as a factor list; `part` must divide `lcm`.
fn quotient_factors(lcm: &[(Poly, u32)], part: &[(Poly, u32)]) -> Vec<(Poly, u32)> {
    lcm.iter()
        .filter_map(|(f, m)| {
            let k = part
                .iter()
                .find(|(g, _)| g == f)
                .map(|(_, k)| *k)
                .unwrap_or(0);
            (m > &k).then(|| (f.clone(), m - k))
        })
        .collect()
}

fn normalize_factor_list(mut factors: Vec<(Poly, u32)>) -> Vec<(Poly, u32)> {
    factors.retain(|(_, m)| *m > 0);
    factors.sort_by(|a, b| a.0.cmp(&b.0));
    let mut out: Vec<(Poly, u32)> = Vec::with_capacity(factors.len());
    for (f, m) in factors {
        match out.last_mut() {
            Some(last) if last.0 == f => last.1 += m,
            _ => out.push((f, m)),
        }
    }
    out
}

/// Divides `num` by the listed factors as often as possible.
fn cancel_against(mut num: Poly, den: &[(Poly, u32)]) -> (Poly, Vec<(Poly, u32)>) {
    if num.is_zero() {
        return (num, Vec::new());
    }
    let mut out = Vec::with_capacity(den.len());
    for (f, m) in den {
        let mut m = *m;
        while m > 0 && !num.is_constant() {
            match num.div_exact(f) {
                Some(q) => {
                    num = q;
                    m -= 1;
                }
                None => break,
            }
        }
        if m > 0 {
            out.push((f.clone(), m));
        }
    }
    (num, out)
}

fn cancel(num: Poly, den: Vec<(Poly, u32)>) -> Expr {
    if num.is_zero() {
        return Expr::zero();
    }
    let (num, den) = cancel_against(num, &den);
    Expr { num, den }
}

fn is_pow_atom(v: &Var) -> Option<&Arc<Atom>> {
    v.as_atom().filter(|a| a.head() == AtomHead::Pow)
}

fn needs_fold(m: &Monomial) -> bool {
    let pows: Vec<(&Arc<Atom>, u32)> = m
        .factors()
        .iter()
        .filter_map(|(v, e)| is_pow_atom(v).map(|a| (a, *e)))
        .collect();
    if pows.iter().any(|(_, e)| *e > 1) {
        return true;
    }
    for i in 0..pows.len() {
        for j in i + 1..pows.len() {
            if pows[i].0.arg() == pows[j].0.arg() {
                return true;
            }
        }
    }
    false
}

/// Merges `pow(g, s)^k * pow(g, r)` into `pow(g, k*s + r)` inside numerator
/// monomials.
fn fold_pow_atoms(e: Expr) -> Expr {
    if !e.num.terms().iter().any(|(m, _)| needs_fold(m)) {
        return e;
    }
    let mut acc = Expr::zero();
    for (m, c) in e.num.terms() {
        if !needs_fold(m) {
            acc += Expr::from_poly(Poly::monomial(m.clone(), c.clone()));
            continue;
        }
        let mut rest = Vec::new();
        let mut groups: std::collections::BTreeMap<Expr, Expr> = Default::default();
        for (v, k) in m.factors() {
            match is_pow_atom(v) {
                Some(a) => {
                    let s = a.exponent().expect("pow exponent").scale(&Rational::from_integer((*k).into()));
                    let entry = groups.entry(a.arg().clone()).or_default();
                    *entry = &*entry + &s;
                }
                None => rest.push((v.clone(), *k)),
            }
        }
        let mut term = Expr::from_poly(Poly::monomial(Monomial::from_factors(rest), c.clone()));
        for (g, s) in groups {
            // the base is nonzero because it was accepted as an atom
            let p = Expr::pow(&g, &s).expect("folded pow of an accepted atom");
            term = term.mul_impl(&p);
        }
        acc += term;
    }
    let den = Expr { num: Poly::one(), den: e.den };
    acc.mul_impl(&den)
}

// ---- operator impls ----

impl Add<&Expr> for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        self.add_impl(rhs, false)
    }
}

impl Sub<&Expr> for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        self.add_impl(rhs, true)
    }
}

impl Mul<&Expr> for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        self.mul_impl(rhs)
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.neg_ref()
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.neg_ref()
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                (&self).$m(rhs)
            }
        }
        impl $tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                self.$m(&rhs)
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl AddAssign<&Expr> for Expr {
    fn add_assign(&mut self, rhs: &Expr) {
        *self = self.add_impl(rhs, false);
    }
}

impl AddAssign<Expr> for Expr {
    fn add_assign(&mut self, rhs: Expr) {
        *self = self.add_impl(&rhs, false);
    }
}

impl SubAssign<&Expr> for Expr {
    fn sub_assign(&mut self, rhs: &Expr) {
        *self = self.add_impl(rhs, true);
    }
}

impl SubAssign<Expr> for Expr {
    fn sub_assign(&mut self, rhs: Expr) {
        *self = self.add_impl(&rhs, true);
    }
}

impl MulAssign<&Expr> for Expr {
    fn mul_assign(&mut self, rhs: &Expr) {
        *self = self.mul_impl(rhs);
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        iter.fold(Expr::zero(), |a, b| a + b)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

impl From<Param> for Expr {
    fn from(p: Param) -> Self {
        Expr::param(p)
    }
}

impl From<Symbol> for Expr {
    fn from(s: Symbol) -> Self {
        Expr::sym(s)
    }
}
