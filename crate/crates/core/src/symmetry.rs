//! Lie point symmetries: the classified generators, invariance checks,
//! determining equations and a polynomial-ansatz solver.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{parse, Assumptions, CoeffFn, Expr, Monomial, Param, Poly, Rational, Symbol, Var};
use crate::jet::VectorField;
use crate::linalg::LinearSystem;
use crate::reduce::{numeric_witness, residual_conditions, vanishes_with_ladder, MembershipCertificate};
use crate::system::{bbm_kdv_symbolic, PdeSystem};

/// Coupling branch of the classification.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Branch {
    /// `b = 0`
    BZero,
    /// `a = b`
    AEqualsB,
    /// `b (a - b) != 0`
    Generic,
}

/// Whether the mixed dispersion terms are present.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Dispersion {
    /// `eps = sigma = 0`
    Absent,
    /// `eps` and `sigma` not both zero
    Present,
}

impl Branch {
    pub const ALL: [Branch; 3] = [Branch::BZero, Branch::AEqualsB, Branch::Generic];

    pub fn label(self) -> &'static str {
        match self {
            Branch::BZero => "b = 0",
            Branch::AEqualsB => "a = b",
            Branch::Generic => "b*(a - b) != 0",
        }
    }

    pub fn assumptions(self) -> Assumptions {
        let asm = Assumptions::new();
        match self {
            Branch::BZero => asm.with_zero(&["b"]),
            Branch::AEqualsB => asm.with_zero(&["a - b"]),
            Branch::Generic => asm.with_nonzero(&["b", "a - b"]),
        }
        .expect("static assumptions")
    }
}

impl Dispersion {
    pub const ALL: [Dispersion; 2] = [Dispersion::Absent, Dispersion::Present];

    pub fn label(self) -> &'static str {
        match self {
            Dispersion::Absent => "eps = sigma = 0",
            Dispersion::Present => "{eps, sigma} != {0}",
        }
    }

    pub fn assumptions(self) -> Assumptions {
        let asm = Assumptions::new();
        match self {
            Dispersion::Absent => asm.with_zero(&["eps", "sigma"]),
            Dispersion::Present => asm.with_nonzero(&["eps^2 + sigma^2"]),
        }
        .expect("static assumptions")
    }
}

/// A cell of the classification, optionally narrowed by extra vanishing
/// parameters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SymmetryCase {
    pub branch: Branch,
    pub dispersion: Dispersion,
    pub zero: Vec<Param>,
}

impl SymmetryCase {
    pub fn new(branch: Branch, dispersion: Dispersion) -> Self {
        SymmetryCase { branch, dispersion, zero: Vec::new() }
    }

    pub fn with_zero(mut self, params: &[Param]) -> Self {
        for p in params {
            if !self.zero.contains(p) {
                self.zero.push(*p);
            }
        }
        self.zero.sort();
        self
    }

    pub fn assumptions(&self) -> Result<Assumptions> {
        let mut asm = self.branch.assumptions().merged(&self.dispersion.assumptions())?;
        for p in &self.zero {
            asm.add_zero(&Expr::param(*p))?;
        }
        Ok(asm)
    }

    /// The family member of this case with symbolic parameters.
    pub fn system(&self) -> Result<PdeSystem> {
        bbm_kdv_symbolic(&self.assumptions()?)
    }
}

impl fmt::Display for SymmetryCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}, {}", self.branch.label(), self.dispersion.label())?;
        for p in &self.zero {
            write!(f, ", {} = 0", p.name())?;
        }
        Ok(())
    }
}

fn vf(t: &str, x: &str, u: &str, v: &str) -> VectorField {
    VectorField::new(
        parse(t).expect("static"),
        parse(x).expect("static"),
        parse(u).expect("static"),
        parse(v).expect("static"),
    )
    .expect("static generator")
}

/// The named generators `X1` to `X5` with symbolic parameters.
pub fn generator(k: usize) -> Option<VectorField> {
    Some(match k {
        1 => vf("(a+b)*t", "0", "-2*(a*u + c)", "-(a+b)*v"),
        2 => vf("1", "0", "0", "0"),
        3 => vf("0", "(a+b)*x", "2*(a*u + c)", "(a+b)*v"),
        4 => vf("0", "(a+b)*t", "0", "1"),
        5 => vf("0", "1", "0", "0"),
        _ => return None,
    })
}

/// Parses a rational combination of named generators such as
/// `2*X1 + X3` or `X4 - 1/2*X5`.
pub fn parse_combination(text: &str) -> Result<VectorField> {
    let err = |m: &str| Error::Syntax { offset: 0, message: format!("{m} in generator `{text}`") };
    let mut out = VectorField::zero();
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(err("empty combination"));
    }
    let mut terms = Vec::new();
    let mut start = 0;
    for (i, ch) in compact.char_indices() {
        if (ch == '+' || ch == '-') && i > 0 {
            terms.push(&compact[start..i]);
            start = i;
        }
    }
    terms.push(&compact[start..]);
    for term in terms {
        let (sign, body) = match term.strip_prefix('-') {
            Some(rest) => (-1, rest),
            None => (1, term.strip_prefix('+').unwrap_or(term)),
        };
        let (coef, name) = match body.rsplit_once('*') {
            Some((c, n)) => (parse(c)?, n),
            None => (Expr::one(), body),
        };
        if coef.constant_value().is_none() {
            return Err(err("non-numeric coefficient"));
        }
        let k: usize = name
            .strip_prefix('X')
            .and_then(|n| n.parse().ok())
            .ok_or_else(|| err("expected X1..X5"))?;
        let g = generator(k).ok_or_else(|| err("expected X1..X5"))?;
        out = out.add(&g.scale(&(coef * Expr::int(sign))));
    }
    Ok(out)
}

/// A generator listed in a cell, with the parameters that must vanish for
/// it to be admitted.
#[derive(Clone, Debug, PartialEq)]
pub struct CatalogEntry {
    pub name: String,
    pub field: VectorField,
    pub requires_zero: Vec<Param>,
}

impl CatalogEntry {
    fn new(name: &str, requires_zero: &[Param]) -> Self {
        CatalogEntry {
            name: name.to_string(),
            field: parse_combination(name).expect("static combination"),
            requires_zero: requires_zero.to_vec(),
        }
    }

    /// `X1 (kappa = 0)` style label.
    pub fn label(&self) -> String {
        if self.requires_zero.is_empty() {
            return self.name.clone();
        }
        let conds: Vec<&str> = self.requires_zero.iter().map(|p| p.name()).collect();
        format!("{} ({} = 0)", self.name, conds.join(" = "))
    }
}

/// Every generator listed in a cell, whatever its side conditions.
pub fn cell_entries(branch: Branch, dispersion: Dispersion) -> Vec<CatalogEntry> {
    use Param::{Kappa, Lambda};
    let e = CatalogEntry::new;
    match (dispersion, branch) {
        (Dispersion::Absent, Branch::BZero) => vec![
            e("X1", &[Kappa]),
            e("2*X1 + X3", &[Lambda]),
            e("X2", &[]),
            e("X4", &[]),
            e("X5", &[]),
        ],
        (Dispersion::Absent, Branch::AEqualsB) => {
            vec![e("3*X1 + X3", &[]), e("X2", &[]), e("X4", &[]), e("X5", &[])]
        }
        (Dispersion::Absent, Branch::Generic) => vec![e("X2", &[]), e("X4", &[]), e("X5", &[])],
        (Dispersion::Present, Branch::BZero) => vec![e("X1", &[Kappa]), e("X2", &[]), e("X5", &[])],
        (Dispersion::Present, Branch::AEqualsB) => {
            vec![e("X1", &[Kappa, Lambda]), e("X2", &[]), e("X5", &[])]
        }
        (Dispersion::Present, Branch::Generic) => vec![e("X2", &[]), e("X5", &[])],
    }
}

/// Generators admitted in a case: the cell's entries whose side
/// conditions the case implies.
pub fn catalog(case: &SymmetryCase) -> Result<Vec<CatalogEntry>> {
    let asm = case.assumptions()?;
    case.system()?;
    Ok(cell_entries(case.branch, case.dispersion)
        .into_iter()
        .filter(|e| e.requires_zero.iter().all(|p| asm.forces_zero(&Symbol::Param(*p))))
        .collect())
}

/// `pr X (F_a)` for both equations, reduced under the system's
/// assumptions.
pub fn invariance_defect(x: &VectorField, sys: &PdeSystem) -> Result<Vec<Expr>> {
    let x = x.map(|c| sys.reduce(c))?;
    let space = sys.space();
    sys.equations()
        .iter()
        .map(|f| {
            let order = f.jet_order().max(1);
            sys.reduce(&space.apply_generator(&x, f, order)?)
        })
        .collect()
}

/// Outcome of an invariance check.
#[derive(Clone, Debug, PartialEq)]
pub enum SymmetryVerdict {
    /// Both components vanish on solutions.
    Holds(Vec<MembershipCertificate>),
    /// No certificate, and a sampled solution jet where a component is
    /// nonzero.
    Refuted { component: usize, point: BTreeMap<Symbol, Rational>, value: Rational },
    /// Neither a certificate nor a refuting point was found.
    Inconclusive(Error),
}

impl SymmetryVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, SymmetryVerdict::Holds(_))
    }
}

const WITNESS_SAMPLES: usize = 6;
const WITNESS_SEED: u64 = 0x5eed;

pub fn is_symmetry(x: &VectorField, sys: &PdeSystem, ladder: &[(usize, usize)]) -> Result<SymmetryVerdict> {
    let defect = invariance_defect(x, sys)?;
    let mut certs = Vec::new();
    for (k, d) in defect.iter().enumerate() {
        match vanishes_with_ladder(d, sys, ladder) {
            Ok(c) => certs.push(c),
            Err(err @ (Error::Inconclusive { .. } | Error::UnlicensedPivot(_))) => {
                return Ok(match numeric_witness(d, sys, WITNESS_SAMPLES, WITNESS_SEED)? {
                    Some((point, value)) => SymmetryVerdict::Refuted { component: k, point, value },
                    None => SymmetryVerdict::Inconclusive(err),
                });
            }
            Err(other) => return Err(other),
        }
    }
    Ok(SymmetryVerdict::Holds(certs))
}

/// Conditions on the coefficient functions `T, X, U, V` of a general
/// generator: each returned expression must vanish. Multipliers are
/// searched at bounds `(r, deg)` to strip what vanishes on solutions.
pub fn determining_equations(sys: &PdeSystem, (r, deg): (usize, usize)) -> Result<Vec<Expr>> {
    let x = VectorField::symbolic();
    let mut out: Vec<Expr> = Vec::new();
    for d in invariance_defect(&x, sys)? {
        for c in residual_conditions(&d, sys, r, deg)? {
            let p = c.numerator().primitive().1;
            let p = if p.leading().is_some_and(|(_, q)| q < &Rational::zero()) { p.neg() } else { p };
            let e = Expr::from_poly(p);
            if !out.contains(&e) {
                out.push(e);
            }
        }
    }
    Ok(out)
}

/// Multiplier bounds used when deriving determining equations.
pub const DETERMINING_BOUNDS: (usize, usize) = (1, 1);

/// Monomials in t, x, u, v of total degree at most `deg`.
pub fn ansatz_monomials(deg: usize) -> Vec<Monomial> {
    let vars = [Symbol::t(), Symbol::x(), Symbol::dep(crate::expr::DepVar::U), Symbol::dep(crate::expr::DepVar::V)];
    let mut out = vec![Monomial::one()];
    let mut frontier = vec![(Monomial::one(), 0usize)];
    for _ in 0..deg {
        let mut next = Vec::new();
        for (m, start) in &frontier {
            for (i, s) in vars.iter().enumerate().skip(*start) {
                let nm = m.mul(&Monomial::var(Var::Sym(*s), 1));
                out.push(nm.clone());
                next.push((nm, i));
            }
        }
        frontier = next;
    }
    out
}

fn ansatz_field(monos: &[Monomial], coeffs: &dyn Fn(usize) -> Expr) -> VectorField {
    let n = monos.len();
    let comp = |k: usize| -> Expr {
        monos
            .iter()
            .enumerate()
            .map(|(i, m)| coeffs(k * n + i) * Expr::from_poly(Poly::monomial(m.clone(), Rational::one())))
            .sum()
    };
    VectorField { xi_t: comp(0), xi_x: comp(1), eta_u: comp(2), eta_v: comp(3) }
}

fn partial(e: &Expr, d: [u8; 4]) -> Expr {
    let vars = [Symbol::t(), Symbol::x(), Symbol::dep(crate::expr::DepVar::U), Symbol::dep(crate::expr::DepVar::V)];
    let mut e = e.clone();
    for (s, n) in vars.iter().zip(d) {
        for _ in 0..n {
            e = e.diff(s);
        }
    }
    e
}

/// Coefficients of a generator on the degree-`deg` ansatz monomials, or
/// `None` when it does not fit (or has non-numeric coefficients).
pub fn coefficient_vector(x: &VectorField, deg: usize) -> Option<Vec<Rational>> {
    let monos = ansatz_monomials(deg);
    let mut out = Vec::with_capacity(4 * monos.len());
    for c in x.coefficients() {
        if !c.is_polynomial() {
            return None;
        }
        let mut found = 0;
        for m in &monos {
            let q = c
                .numerator()
                .terms()
                .iter()
                .find(|(tm, _)| tm == m)
                .map(|(_, q)| q.clone())
                .unwrap_or_else(Rational::zero);
            if !q.is_zero() {
                found += 1;
            }
            out.push(q);
        }
        if found != c.numerator().len() {
            return None;
        }
    }
    Some(out)
}

/// Basis of the generators whose coefficients are polynomials of degree
/// at most `deg` in (t, x, u, v). All parameters must be numeric.
pub fn solve_symmetries(sys: &PdeSystem, deg: usize) -> Result<Vec<VectorField>> {
    if !sys.is_numeric() {
        return Err(Error::Contract("the symmetry solver needs numeric parameters".into()));
    }
    let eqs = determining_equations(sys, DETERMINING_BOUNDS)?;
    solve_determining(&eqs, deg)
}

/// Generators with polynomial coefficients of degree at most `deg`
/// satisfying the given conditions on `T, X, U, V`, which must have
/// numeric coefficients.
pub fn solve_determining(eqs: &[Expr], deg: usize) -> Result<Vec<VectorField>> {
    let monos = ansatz_monomials(deg);
    let n = 4 * monos.len();
    let ansatz = ansatz_field(&monos, &|k| Expr::unknown(k as u32));
    let comps = [&ansatz.xi_t, &ansatz.xi_x, &ansatz.eta_u, &ansatz.eta_v];
    let mut ls: LinearSystem<Rational> = LinearSystem::new(n);
    for eq in eqs {
        let sub = eq.substitute_with(&|s: &Symbol| match s {
            Symbol::Func(f, d) => {
                let k = CoeffFn::ALL.iter().position(|g| g == f).expect("known function");
                Some(partial(comps[k], *d))
            }
            _ => None,
        })?;
        let parts = sub
            .coefficients_by(|v| !matches!(v, Var::Sym(Symbol::Unknown(_))))
            .ok_or_else(|| Error::Internal(format!("unexpected denominator in {sub}")))?;
        for (_, c) in parts {
            let mut row = Vec::new();
            for (m, q) in c.numerator().terms() {
                match m.factors() {
                    [(Var::Sym(Symbol::Unknown(j)), 1)] => row.push((*j as usize, q.clone())),
                    _ => return Err(Error::Internal(format!("determining condition not linear: {c}"))),
                }
            }
            ls.push(row, Rational::zero());
        }
    }
    let red = ls.eliminate(&|_| true);
    Ok(red
        .nullspace()
        .into_iter()
        .map(|v| ansatz_field(&monos, &|k| Expr::from_rational(v[k].clone())))
        .collect())
}

/// Rank of a family of generators on the degree-`deg` ansatz space.
pub fn span_rank(fields: &[VectorField], deg: usize) -> Result<usize> {
    let rows = fields
        .iter()
        .map(|f| {
            coefficient_vector(f, deg)
                .ok_or_else(|| Error::Contract(format!("generator `{f}` is outside the degree-{deg} ansatz")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(crate::linalg::rank(&rows))
}

/// Whether two families span the same space.
pub fn same_span(a: &[VectorField], b: &[VectorField], deg: usize) -> Result<bool> {
    let ra = span_rank(a, deg)?;
    let rb = span_rank(b, deg)?;
    let both: Vec<VectorField> = a.iter().chain(b).cloned().collect();
    Ok(ra == rb && span_rank(&both, deg)? == ra)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduce::DEFAULT_LADDER;
    use crate::system::{bbm_kdv_symbolic, kaup};

    #[test]
    fn translations_leave_the_family_invariant() {
        let sys = bbm_kdv_symbolic(&Assumptions::new()).unwrap();
        for k in [2, 5] {
            let d = invariance_defect(&generator(k).unwrap(), &sys).unwrap();
            assert!(d.iter().all(Expr::is_zero));
        }
    }

    #[test]
    fn combinations_parse() {
        let g = parse_combination("2*X1 + X3").unwrap();
        let want = generator(1).unwrap().scale(&Expr::int(2)).add(&generator(3).unwrap());
        assert_eq!(g, want);
        let g = parse_combination("X4 - 1/2*X5").unwrap();
        assert_eq!(g.xi_x, parse("(a+b)*t - 1/2").unwrap());
        assert!(parse_combination("X7").is_err());
        assert!(parse_combination("a*X1").is_err());
    }

    #[test]
    fn side_conditions_filter_the_cell() {
        let case = SymmetryCase::new(Branch::BZero, Dispersion::Absent).with_zero(&[Param::Kappa]);
        let names: Vec<String> = catalog(&case).unwrap().into_iter().map(|e| e.name).collect();
        assert_eq!(names, ["X1", "X2", "X4", "X5"]);
        let case = SymmetryCase::new(Branch::Generic, Dispersion::Present);
        let names: Vec<String> = catalog(&case).unwrap().into_iter().map(|e| e.name).collect();
        assert_eq!(names, ["X2", "X5"]);
    }

    #[test]
    fn scaling_symmetry_with_kappa_zero() {
        let case = SymmetryCase::new(Branch::BZero, Dispersion::Absent).with_zero(&[Param::Kappa]);
        let sys = case.system().unwrap();
        let v = is_symmetry(&generator(1).unwrap(), &sys, &DEFAULT_LADDER).unwrap();
        assert!(v.holds(), "{v:?}");
    }

    #[test]
    fn kaup_admits_four_generators() {
        let sys = kaup();
        let basis = solve_symmetries(&sys, 2).unwrap();
        assert_eq!(basis.len(), 4);
    }
}
