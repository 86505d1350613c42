//! Deciding whether a jet-space expression vanishes on the solutions of a
//! system, with explicit multiplier certificates.
//!
//! A certificate writes the expression as `sum_k q_k G_k` where the `G_k`
//! are the equations and their total derivatives and every multiplier
//! `q_k` is a polynomial of bounded degree in jet coordinates whose
//! coefficients are rational in t, x, u, v, parameters and atoms. The
//! search is a linear system in the multiplier coefficients; failure at a
//! given bound is reported as inconclusive, never as "nonzero".

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::{rational, DepVar, Expr, JetIndex, Monomial, Param, Poly, Rational, Symbol, Var};
use crate::linalg::LinearSystem;
use crate::system::PdeSystem;

/// Default search ladder of (r, deg) bounds, tried in order.
pub const DEFAULT_LADDER: [(usize, usize); 4] = [(1, 1), (2, 1), (2, 2), (3, 2)];

/// `D_t^i D_x^j F_a` together with its identifier.
#[derive(Clone, Debug, PartialEq)]
pub struct ProlongedEquation {
    pub id: String,
    pub equation: usize,
    pub index: JetIndex,
    pub expr: Expr,
}

pub fn prolonged_id(equation: usize, index: JetIndex) -> String {
    let mut parts = Vec::new();
    let op = |name: &str, n: u8| match n {
        0 => None,
        1 => Some(name.to_string()),
        _ => Some(format!("{name}^{n}")),
    };
    parts.extend(op("Dt", index.t));
    parts.extend(op("Dx", index.x));
    parts.push(format!("F{}", equation + 1));
    parts.join(" ")
}

/// All `D_t^i D_x^j F_a` with `i + j <= r`.
pub fn prolong_system(sys: &PdeSystem, r: usize) -> Result<Vec<ProlongedEquation>> {
    let space = sys.space();
    let mut out = Vec::new();
    for idx in JetIndex::up_to(r) {
        for (a, f) in sys.equations().iter().enumerate() {
            out.push(ProlongedEquation {
                id: prolonged_id(a, idx),
                equation: a,
                index: idx,
                expr: space.d_index(f, idx)?,
            });
        }
    }
    Ok(out)
}

/// Multipliers proving that an expression vanishes on solutions.
#[derive(Clone, Debug, PartialEq)]
pub struct MembershipCertificate {
    /// Nonzero multipliers, in prolongation order.
    pub coefficients: Vec<(String, Expr)>,
    pub residual: Expr,
    pub r: usize,
    pub deg: usize,
}

impl MembershipCertificate {
    pub fn get(&self, id: &str) -> Option<&Expr> {
        self.coefficients.iter().find(|(k, _)| k == id).map(|(_, v)| v)
    }

    pub fn is_valid(&self) -> bool {
        self.residual.is_zero()
    }

    /// Certificate of the zero expression.
    pub fn trivial() -> Self {
        MembershipCertificate { coefficients: Vec::new(), residual: Expr::zero(), r: 0, deg: 0 }
    }
}

impl fmt::Display for MembershipCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .coefficients
            .iter()
            .map(|(id, q)| format!("{id}: {q}"))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

fn is_positive_jet(v: &Var) -> bool {
    matches!(v, Var::Sym(s) if s.is_positive_jet())
}

/// Coefficients of an expression by jet monomial.
pub type JetParts = Vec<(Monomial, Expr)>;

/// Sparse coefficients with a right-hand side.
type SparseRow = (Vec<(usize, Expr)>, Expr);

/// Coefficients of `e` with respect to monomials in positive-order jets.
pub fn split_jets(e: &Expr) -> Result<JetParts> {
    for a in e.atoms() {
        if a.arg().any_symbol(|s| s.is_positive_jet())
            || a.exponent().is_some_and(|s| s.any_symbol(|s| s.is_positive_jet()))
        {
            return Err(Error::NonPolynomialInJets(e.to_string()));
        }
    }
    e.coefficients_by(is_positive_jet)
        .ok_or_else(|| Error::NonPolynomialInJets(e.to_string()))
}

fn check_atom_degree(e: &Expr) -> Result<()> {
    for (m, _) in e.numerator().terms() {
        let deg: u32 = m
            .factors()
            .iter()
            .filter(|(v, _)| v.as_atom().is_some())
            .map(|(_, k)| k)
            .sum();
        if deg > 2 {
            return Err(Error::AtomDegree(e.to_string()));
        }
    }
    Ok(())
}

/// All monomials of degree `1..=deg` in the given jets.
fn monomials_up_to(jets: &[Symbol], deg: usize) -> Vec<Monomial> {
    let mut out = vec![Monomial::one()];
    let mut frontier = vec![(Monomial::one(), 0usize)];
    for _ in 0..deg {
        let mut next = Vec::new();
        for (m, start) in &frontier {
            for (i, s) in jets.iter().enumerate().skip(*start) {
                let nm = m.mul(&Monomial::var(Var::Sym(*s), 1));
                out.push(nm.clone());
                next.push((nm, i));
            }
        }
        frontier = next;
    }
    out
}

/// One identity `rhs = sum_i extra_i h_i + sum_k q_k G_k` to be matched
/// coefficientwise in positive-jet monomials. The `h_i` are shared between
/// blocks; each block has its own multipliers.
struct Block {
    rhs: Expr,
    extra: Vec<(usize, Expr)>,
}

struct Assembled {
    system: LinearSystem<Expr>,
    /// (block, prolonged equation, multiplier monomial) per multiplier column.
    columns: Vec<(usize, usize, Monomial)>,
    nextra: usize,
}

fn assemble(
    blocks: &[Block],
    nextra: usize,
    prolonged: &[ProlongedEquation],
    sys: &PdeSystem,
    deg: usize,
) -> Result<Assembled> {
    let gs: Vec<Vec<(Monomial, Expr)>> = prolonged
        .iter()
        .map(|g| split_jets(&g.expr))
        .collect::<Result<_>>()?;
    let mut mult_jets: BTreeSet<Symbol> = BTreeSet::new();
    for v in sys.dep_vars() {
        mult_jets.insert(Symbol::jet(*v, 1, 0));
        mult_jets.insert(Symbol::jet(*v, 0, 1));
    }
    let mut block_terms = Vec::new();
    for blk in blocks {
        let mut terms: Vec<(Option<usize>, JetParts)> = Vec::new();
        for e in std::iter::once(&blk.rhs).chain(blk.extra.iter().map(|(_, e)| e)) {
            check_atom_degree(e)?;
            mult_jets.extend(e.symbols().into_iter().filter(|s| s.is_positive_jet()));
        }
        terms.push((None, split_jets(&blk.rhs)?));
        for (i, e) in &blk.extra {
            terms.push((Some(*i), split_jets(e)?));
        }
        block_terms.push(terms);
    }
    let mult_jets: Vec<Symbol> = mult_jets.into_iter().collect();
    let monos = monomials_up_to(&mult_jets, deg);

    let mut columns: Vec<(usize, usize, Monomial)> = Vec::new();
    for (blk, terms) in block_terms.iter().enumerate() {
        // keep only multiplier terms connected to the monomials of the block
        let mut reach: HashSet<Monomial> =
            terms.iter().flat_map(|(_, ms)| ms.iter().map(|(m, _)| m.clone())).collect();
        let mut touching = vec![vec![false; monos.len()]; gs.len()];
        loop {
            let mut changed = false;
            for (k, g) in gs.iter().enumerate() {
                for (mi, m) in monos.iter().enumerate() {
                    if touching[k][mi] {
                        continue;
                    }
                    if g.iter().any(|(mu, _)| reach.contains(&m.mul(mu))) {
                        touching[k][mi] = true;
                        changed = true;
                        for (mu, _) in g {
                            reach.insert(m.mul(mu));
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        for (k, row) in touching.iter().enumerate() {
            for (mi, &t) in row.iter().enumerate() {
                if t {
                    columns.push((blk, k, monos[mi].clone()));
                }
            }
        }
    }
    let mut rows: HashMap<(usize, Monomial), SparseRow> = HashMap::new();
    for (ci, (blk, k, m)) in columns.iter().enumerate() {
        for (mu, c) in &gs[*k] {
            rows.entry((*blk, m.mul(mu)))
                .or_insert_with(|| (Vec::new(), Expr::zero()))
                .0
                .push((nextra + ci, c.clone()));
        }
    }
    for (blk, terms) in block_terms.iter().enumerate() {
        for (which, ms) in terms {
            for (m, c) in ms {
                let entry = rows.entry((blk, m.clone())).or_insert_with(|| (Vec::new(), Expr::zero()));
                match which {
                    None => entry.1 = c.clone(),
                    // the extras move to the left: rhs = sum q G + sum extra h
                    Some(i) => entry.0.push((*i, c.clone())),
                }
            }
        }
    }
    let mut keys: Vec<&(usize, Monomial)> = rows.keys().collect();
    keys.sort();
    let mut system = LinearSystem::new(nextra + columns.len());
    for k in keys {
        let (entries, rhs) = &rows[k];
        system.push(entries.iter().cloned(), rhs.clone());
    }
    Ok(Assembled { system, columns, nextra })
}

fn multipliers(
    asm: &Assembled,
    sol: &BTreeMap<usize, Expr>,
    block: usize,
    prolonged: &[ProlongedEquation],
) -> Vec<(String, Expr)> {
    let mut qs: BTreeMap<usize, Expr> = BTreeMap::new();
    for (ci, (blk, k, m)) in asm.columns.iter().enumerate() {
        if *blk != block {
            continue;
        }
        if let Some(beta) = sol.get(&(asm.nextra + ci)) {
            let term = beta * &Expr::from_poly(Poly::monomial(m.clone(), Rational::one()));
            *qs.entry(*k).or_default() += term;
        }
    }
    qs.into_iter()
        .filter(|(_, q)| !q.is_zero())
        .map(|(k, q)| (prolonged[k].id.clone(), q))
        .collect()
}

/// Searches for a certificate at bounds (r, deg).
pub fn vanishes_on_solutions(
    e: &Expr,
    sys: &PdeSystem,
    r: usize,
    deg: usize,
) -> Result<MembershipCertificate> {
    let e = sys.reduce(e)?;
    if e.is_zero() {
        return Ok(MembershipCertificate { r, deg, ..MembershipCertificate::trivial() });
    }
    let prolonged = prolong_system(sys, r)?;
    let asm = assemble(&[Block { rhs: e.clone(), extra: Vec::new() }], 0, &prolonged, sys, deg)?;
    let red = asm.system.clone().eliminate(&|x: &Expr| sys.is_nonzero(x));
    if !red.conditions.is_empty() {
        return Err(Error::Inconclusive { r, deg });
    }
    if let Some((entries, _)) = red.stuck.iter().find(|(_, rhs)| !rhs.is_zero()) {
        let (_, a) = entries.iter().next().expect("stuck rows have entries");
        return Err(Error::UnlicensedPivot(a.to_string()));
    }
    let coefficients = multipliers(&asm, &red.particular(), 0, &prolonged);
    let cert = MembershipCertificate { coefficients, residual: Expr::zero(), r, deg };
    let residual = recompute_residual(&e, sys, &cert)?;
    if !residual.is_zero() {
        return Err(Error::Internal(format!("certificate fails re-expansion: residual {residual}")));
    }
    Ok(cert)
}

/// What is left of `e` after removing everything a bounded multiplier
/// combination can absorb: `e` vanishes on solutions at these bounds iff
/// every returned expression is zero. Multipliers whose pivots are not
/// licensed are taken as zero, which can only add conditions.
pub fn residual_conditions(e: &Expr, sys: &PdeSystem, r: usize, deg: usize) -> Result<Vec<Expr>> {
    let e = sys.reduce(e)?;
    if e.is_zero() {
        return Ok(Vec::new());
    }
    let prolonged = prolong_system(sys, r)?;
    let asm = assemble(&[Block { rhs: e, extra: Vec::new() }], 0, &prolonged, sys, deg)?;
    let red = asm.system.eliminate(&|x: &Expr| sys.is_nonzero(x));
    let mut out = red.conditions;
    out.extend(red.stuck.into_iter().map(|(_, rhs)| rhs).filter(|r| !r.is_zero()));
    Ok(out)
}

/// `E - sum q G` recomputed from scratch.
pub fn recompute_residual(e: &Expr, sys: &PdeSystem, cert: &MembershipCertificate) -> Result<Expr> {
    let space = sys.space();
    let mut acc = sys.reduce(e)?;
    for (id, q) in &cert.coefficients {
        let (a, idx) = parse_prolonged_id(id)
            .ok_or_else(|| Error::Internal(format!("bad prolonged equation id `{id}`")))?;
        let g = space.d_index(&sys.equations()[a], idx)?;
        acc -= q * &g;
    }
    sys.reduce(&acc)
}

/// Inverse of [`prolonged_id`].
pub fn parse_prolonged_id(id: &str) -> Option<(usize, JetIndex)> {
    let mut idx = JetIndex::ZERO;
    let mut eq = None;
    for part in id.split_whitespace() {
        if let Some(n) = part.strip_prefix('F') {
            eq = Some(n.parse::<usize>().ok()?.checked_sub(1)?);
            continue;
        }
        let (name, pow) = match part.split_once('^') {
            Some((n, p)) => (n, p.parse::<u8>().ok()?),
            None => (part, 1),
        };
        match name {
            "Dt" => idx.t += pow,
            "Dx" => idx.x += pow,
            _ => return None,
        }
    }
    Some((eq?, idx))
}

/// Runs the ladder; the first success wins. When every rung fails the
/// last failure is returned.
pub fn vanishes_with_ladder(
    e: &Expr,
    sys: &PdeSystem,
    ladder: &[(usize, usize)],
) -> Result<MembershipCertificate> {
    let mut last = Error::Inconclusive { r: 0, deg: 0 };
    for &(r, deg) in ladder {
        match vanishes_on_solutions(e, sys, r, deg) {
            Ok(c) => return Ok(c),
            Err(err @ (Error::Inconclusive { .. } | Error::UnlicensedPivot(_))) => last = err,
            Err(other) => return Err(other),
        }
    }
    Err(last)
}

/// A potential `H` with `Ct - D_x H` and `Cx + D_t H` vanishing on
/// solutions, so that `(Ct, Cx)` is a total curl up to trivial terms.
#[derive(Clone, Debug, PartialEq)]
pub struct FluxPotential {
    pub h: Expr,
    pub ct_certificate: MembershipCertificate,
    pub cx_certificate: MembershipCertificate,
}

impl FluxPotential {
    /// `H = 0`, the potential of the zero vector.
    pub fn zero() -> Self {
        FluxPotential {
            h: Expr::zero(),
            ct_certificate: MembershipCertificate::trivial(),
            cx_certificate: MembershipCertificate::trivial(),
        }
    }
}

/// Candidate terms for `H`: monomials of degree `0..=deg` in u, v and the
/// jets below the order of the inputs, times powers of t and x up to their
/// degrees in the inputs, plus every atom of the inputs times monomials of
/// degree up to `deg`. Pure coordinate monomials go one degree further, as
/// coordinate-only densities and fluxes are curls of them.
fn potential_basis(ct: &Expr, cx: &Expr, sys: &PdeSystem, deg: usize) -> Vec<Expr> {
    let order = ct.jet_order().max(cx.jet_order()).saturating_sub(1).max(1);
    let mut vars = Vec::new();
    for v in sys.dep_vars() {
        for idx in JetIndex::up_to(order) {
            vars.push(Symbol::jet(*v, idx.t, idx.x));
        }
    }
    let coord_degree = |s: Symbol| {
        let v = Var::Sym(s);
        ct.numerator().degree_in(&v).max(cx.numerator().degree_in(&v))
    };
    let mut coords = Vec::new();
    for i in 0..=coord_degree(Symbol::t()) {
        for j in 0..=coord_degree(Symbol::x()) {
            coords.push(Monomial::var(Var::Sym(Symbol::t()), i).mul(&Monomial::var(Var::Sym(Symbol::x()), j)));
        }
    }
    let as_expr = |m: &Monomial| Expr::from_poly(Poly::monomial(m.clone(), Rational::one()));
    let monos = monomials_up_to(&vars, deg);
    let mut out: Vec<Expr> = Vec::new();
    // pure coordinate terms one degree higher absorb coordinate sources
    for i in 0..=coord_degree(Symbol::t()) + 1 {
        for j in 0..=coord_degree(Symbol::x()) + 1 {
            let m = Monomial::var(Var::Sym(Symbol::t()), i).mul(&Monomial::var(Var::Sym(Symbol::x()), j));
            if !m.is_one() && !coords.contains(&m) {
                out.push(as_expr(&m));
            }
        }
    }
    for c in &coords {
        out.extend(monos.iter().map(|m| m.mul(c)).filter(|m| !m.is_one()).map(|m| as_expr(&m)));
    }
    let atoms: BTreeSet<_> = ct.atoms().into_iter().chain(cx.atoms()).collect();
    for atom in atoms {
        let a = Expr::from_var(Var::Atom(atom));
        for c in &coords {
            out.extend(monos.iter().map(|m| &a * &as_expr(&m.mul(c))));
        }
    }
    out
}

/// Searches for a flux potential of degree at most `deg`, with membership
/// of the two residuals checked at multiplier bounds `(r, mdeg)`.
pub fn find_flux_potential(
    ct: &Expr,
    cx: &Expr,
    sys: &PdeSystem,
    deg: usize,
    bounds: (usize, usize),
) -> Result<Option<FluxPotential>> {
    Ok(find_combination(ct, cx, &[], sys, deg, bounds)?.map(|c| c.potential))
}

/// `(Ct, Cx) = sum_i k_i (Ct_i, Cx_i) + (D_x H, -D_t H)` on solutions,
/// with the `k_i` depending on parameters only.
#[derive(Clone, Debug, PartialEq)]
pub struct Combination {
    pub coefficients: Vec<Expr>,
    pub potential: FluxPotential,
}

fn is_coordinate(v: &Var) -> bool {
    !matches!(v, Var::Sym(Symbol::Param(_) | Symbol::Const(_) | Symbol::Unknown(_)))
}

/// Searches for a combination of reference vectors that differs from
/// `(ct, cx)` by a total curl plus terms vanishing on solutions.
pub fn find_combination(
    ct: &Expr,
    cx: &Expr,
    refs: &[(Expr, Expr)],
    sys: &PdeSystem,
    deg: usize,
    (r, mdeg): (usize, usize),
) -> Result<Option<Combination>> {
    let ct = sys.reduce(ct)?;
    let cx = sys.reduce(cx)?;
    let refs: Vec<(Expr, Expr)> =
        refs.iter().map(|(a, b)| Ok((sys.reduce(a)?, sys.reduce(b)?))).collect::<Result<_>>()?;
    let space = sys.space();
    let basis = potential_basis(&ct, &cx, sys, deg);
    let mut ext = Vec::new();
    let mut ert = Vec::new();
    for (i, b) in basis.iter().enumerate() {
        ext.push((i, space.dx(b)?));
        ert.push((i, -space.dt(b)?));
    }
    let nb = basis.len();
    for (i, (a, b)) in refs.iter().enumerate() {
        ext.push((nb + i, a.clone()));
        ert.push((nb + i, b.clone()));
    }
    let blocks = [Block { rhs: ct.clone(), extra: ext }, Block { rhs: cx.clone(), extra: ert }];
    let prolonged = prolong_system(sys, r)?;
    let n = nb + refs.len();
    let asm = assemble(&blocks, n, &prolonged, sys, mdeg)?;
    let red = asm.system.eliminate_in(&|x: &Expr| sys.is_nonzero(x), &|j| j >= n);
    if !red.conditions.is_empty() {
        return Ok(None);
    }
    // what is left constrains the scalar unknowns, which must not depend
    // on coordinates; multipliers without a licensed pivot are set to zero
    let mut hs = LinearSystem::new(n);
    for (entries, rhs) in &red.stuck {
        let entries: BTreeMap<usize, Expr> =
            entries.iter().filter(|(j, _)| **j < n).map(|(j, a)| (*j, a.clone())).collect();
        let mut cond = -rhs;
        for (j, a) in &entries {
            cond += a * &Expr::unknown(*j as u32);
        }
        let zeros: BTreeMap<Symbol, Expr> =
            entries.keys().map(|j| (Symbol::Unknown(*j as u32), Expr::zero())).collect();
        for (_, c) in cond.numerator().split_by(is_coordinate) {
            let c = Expr::from_poly(c);
            let constant = c.substitute(&zeros)?;
            let row: Vec<(usize, Expr)> =
                entries.keys().map(|j| (*j, c.diff(&Symbol::Unknown(*j as u32)))).collect();
            hs.push(row, -constant);
        }
    }
    let hred = hs.eliminate(&|x: &Expr| sys.is_nonzero(x));
    if !hred.conditions.is_empty() {
        return Ok(None);
    }
    if let Some((entries, _)) = hred.stuck.iter().find(|(_, rhs)| !rhs.is_zero()) {
        let (_, a) = entries.iter().next().expect("stuck rows have entries");
        return Err(Error::UnlicensedPivot(a.to_string()));
    }
    let sol = hred.particular();
    let mut h = Expr::zero();
    let mut rt = ct.clone();
    let mut rx = cx.clone();
    let mut coefficients = vec![Expr::zero(); refs.len()];
    for (j, c) in sol {
        if j < nb {
            h += &c * &basis[j];
        } else {
            rt -= &c * &refs[j - nb].0;
            rx -= &c * &refs[j - nb].1;
            coefficients[j - nb] = c;
        }
    }
    let ct_certificate = vanishes_on_solutions(&(&rt - &space.dx(&h)?), sys, r, mdeg)?;
    let cx_certificate = vanishes_on_solutions(&(&rx + &space.dt(&h)?), sys, r, mdeg)?;
    Ok(Some(Combination { coefficients, potential: FluxPotential { h, ct_certificate, cx_certificate } }))
}

/// Runs [`find_combination`] along a multiplier ladder.
pub fn find_combination_with_ladder(
    ct: &Expr,
    cx: &Expr,
    refs: &[(Expr, Expr)],
    sys: &PdeSystem,
    deg: usize,
    ladder: &[(usize, usize)],
) -> Result<Option<Combination>> {
    let mut last = Ok(None);
    for &bounds in ladder {
        match find_combination(ct, cx, refs, sys, deg, bounds) {
            Ok(Some(p)) => return Ok(Some(p)),
            Ok(None) => {}
            Err(err @ (Error::Inconclusive { .. } | Error::UnlicensedPivot(_))) => last = Err(err),
            Err(other) => return Err(other),
        }
    }
    if matches!(last, Err(Error::UnlicensedPivot(_))) {
        return last;
    }
    Ok(None)
}

/// Runs [`find_flux_potential`] along a multiplier ladder.
pub fn find_flux_potential_with_ladder(
    ct: &Expr,
    cx: &Expr,
    sys: &PdeSystem,
    deg: usize,
    ladder: &[(usize, usize)],
) -> Result<Option<FluxPotential>> {
    Ok(find_combination_with_ladder(ct, cx, &[], sys, deg, ladder)?.map(|c| c.potential))
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    let n: i64 = rng.gen_range(1..=9) * if rng.gen_bool(0.5) { 1 } else { -1 };
    let d: i64 = rng.gen_range(1..=4);
    rational(n, d)
}

/// A rational point of the jet space up to `order` lying on the prolonged
/// solution manifold, found by fixing pure x-derivatives at random and
/// solving level by level for the t-derivatives. Parameters, constants and
/// t, x get random values too. Only systems whose equation `a` is linear in
/// the t-derivatives of the `a`-th dependent variable are supported.
pub struct SolutionSampler<'a> {
    sys: &'a PdeSystem,
    order: usize,
    derived: HashMap<(usize, JetIndex), Expr>,
}

impl<'a> SolutionSampler<'a> {
    pub fn new(sys: &'a PdeSystem, order: usize) -> Self {
        SolutionSampler { sys, order, derived: HashMap::new() }
    }

    fn prolonged(&mut self, a: usize, idx: JetIndex) -> Result<Expr> {
        if let Some(e) = self.derived.get(&(a, idx)) {
            return Ok(e.clone());
        }
        let e = self.sys.space().d_index(&self.sys.equations()[a], idx)?;
        self.derived.insert((a, idx), e.clone());
        Ok(e)
    }

    /// Draws a point; `extra` lists further symbols (such as arbitrary
    /// constants) that need values.
    pub fn sample(&mut self, rng: &mut ChaCha8Rng, extra: &BTreeSet<Symbol>) -> Result<Option<BTreeMap<Symbol, Rational>>> {
        let n = self.order;
        let vars: Vec<DepVar> = self.sys.dep_vars().to_vec();
        let mut pt: BTreeMap<Symbol, Rational> = BTreeMap::new();
        for p in Param::ALL {
            pt.insert(Symbol::Param(p), random_rational(rng));
        }
        for s in extra {
            if !s.is_positive_jet() && !matches!(s, Symbol::Jet(_)) {
                pt.insert(*s, random_rational(rng));
            }
        }
        // honour the zero constraints on the chosen parameter values
        for (s, v) in self.sys.assumptions().bindings() {
            let q = v.eval(&|t: &Symbol| pt.get(t).cloned())?;
            pt.insert(*s, q);
        }
        for f in self.sys.assumptions().nonzero_factors() {
            let q = Expr::from_poly(f.clone()).eval(&|t: &Symbol| pt.get(t).cloned())?;
            if q.is_zero() {
                return Ok(None);
            }
        }
        pt.insert(Symbol::t(), random_rational(rng));
        pt.insert(Symbol::x(), random_rational(rng));
        for v in &vars {
            for k in 0..=n {
                pt.insert(Symbol::jet(*v, 0, k as u8), random_rational(rng));
            }
        }
        for level in 1..=n {
            let kmax = n - level;
            let mut solve_for: Vec<(usize, usize)> = Vec::new();
            for (a, v) in vars.iter().enumerate().take(self.sys.equations().len()) {
                for k in 0..=kmax {
                    let idx = JetIndex::new((level - 1) as u8, k as u8);
                    let eq_order = self.sys.equations()[a].jet_order() + idx.order();
                    if eq_order <= n {
                        solve_for.push((a, k));
                    } else {
                        pt.insert(Symbol::jet(*v, level as u8, k as u8), random_rational(rng));
                    }
                }
            }
            solve_for.sort_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(&y.0)));
            for (a, k) in solve_for {
                let target = Symbol::jet(vars[a], level as u8, k as u8);
                let g = self.prolonged(a, JetIndex::new((level - 1) as u8, k as u8))?;
                let tv = Var::Sym(target);
                if g.numerator().degree_in(&tv) != 1 || g.denominator().degree_in(&tv) != 0 {
                    return Ok(None);
                }
                let missing = g
                    .symbols()
                    .into_iter()
                    .any(|s| s != target && matches!(s, Symbol::Jet(_)) && !pt.contains_key(&s));
                if missing {
                    return Ok(None);
                }
                let at = |z: Rational| {
                    let pt = &pt;
                    g.eval(&move |s: &Symbol| if *s == target { Some(z.clone()) } else { pt.get(s).cloned() })
                };
                let g0 = at(Rational::zero())?;
                let g1 = at(Rational::one())?;
                let coef = &g1 - &g0;
                if coef.is_zero() {
                    return Ok(None);
                }
                pt.insert(target, -g0 / coef);
            }
        }
        Ok(Some(pt))
    }
}

/// Evaluates `e` at sampled solution points; returns the first point where
/// it is nonzero. `None` means every sample vanished or none could be drawn.
/// Atoms without a rational value are sampled as independent rationals,
/// which is sound for ln and exp of nonconstant arguments as they are
/// transcendental over the jets.
pub fn numeric_witness(
    e: &Expr,
    sys: &PdeSystem,
    samples: usize,
    seed: u64,
) -> Result<Option<(BTreeMap<Symbol, Rational>, Rational)>> {
    let e = sys.reduce(e)?;
    let order = (e.jet_order() + 1).max(sys.equations().iter().map(|f| f.jet_order()).max().unwrap_or(0));
    let order = order.min(sys.space().order_cap);
    let mut sampler = SolutionSampler::new(sys, order);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let extra = e.symbols();
    for _ in 0..samples {
        let Some(pt) = sampler.sample(&mut rng, &extra)? else { continue };
        let mut free = |_: &crate::expr::Atom| Rational::new(rng.gen_range(-40..=40).into(), rng.gen_range(1..=7).into());
        match e.eval_with(&|s: &Symbol| pt.get(s).cloned(), &mut free) {
            Ok(q) if !q.is_zero() => return Ok(Some((pt, q))),
            Ok(_) => {}
            Err(Error::DivisionByZero) => {}
            Err(err) => return Err(err),
        }
    }
    Ok(None)
}
