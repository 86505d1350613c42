//! Conserved vectors from symmetries and self-adjointness substitutions,
//! divergence certificates, triviality and equivalence.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{parse, Assumptions, Expr, JetIndex, Param};
use crate::jet::VectorField;
use crate::reduce::{
    find_combination, find_combination_with_ladder, find_flux_potential_with_ladder, vanishes_with_ladder, Combination,
    FluxPotential, MembershipCertificate,
};
use crate::expr::Symbol;
use crate::selfadjoint::{classified_families, defect, is_self_adjoint_with, span_contains, Substitution};
use crate::symmetry::{is_symmetry, parse_combination};
use crate::system::PdeSystem;

/// Degree bound used for flux potentials unless stated otherwise.
pub const DEFAULT_POTENTIAL_DEGREE: usize = 2;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    Constructed { generator: String, substitution: String },
    Obvious { index: u8 },
    Catalog { id: String },
    Given,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Constructed { generator, substitution } => write!(f, "{generator} with {substitution}"),
            Provenance::Obvious { index } => write!(f, "obvious-{index}"),
            Provenance::Catalog { id } => write!(f, "catalog {id}"),
            Provenance::Given => f.write_str("given"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConservedVector {
    pub ct: Expr,
    pub cx: Expr,
    pub provenance: Provenance,
    pub certificate: Option<MembershipCertificate>,
}

impl ConservedVector {
    pub fn new(ct: Expr, cx: Expr, provenance: Provenance) -> Self {
        ConservedVector { ct, cx, provenance, certificate: None }
    }

    pub fn parse(ct: &str, cx: &str) -> Result<Self> {
        Ok(ConservedVector::new(parse(ct)?, parse(cx)?, Provenance::Given))
    }

    /// `D_t Ct + D_x Cx`.
    pub fn divergence(&self, sys: &PdeSystem) -> Result<Expr> {
        let js = sys.space();
        sys.reduce(&(js.dt(&self.ct)? + js.dx(&self.cx)?))
    }

    pub fn is_zero(&self) -> bool {
        self.ct.is_zero() && self.cx.is_zero()
    }
}

/// The vector attached to a generator and an admissible substitution.
pub fn conserved_vector(
    sys: &PdeSystem,
    sub: &Substitution,
    x: &VectorField,
    generator: &str,
) -> Result<ConservedVector> {
    if !defect(sys, sub)?.iter().all(Expr::is_zero) {
        return Err(Error::NonzeroDefect);
    }
    let sys = if sub.constraints == Assumptions::default() { sys.clone() } else { sys.assume(&sub.constraints)? };
    let js = sys.space();
    let x = x.map(|c| sys.reduce(c))?;
    let w = x.characteristics();
    let (phi, psi) = (sys.reduce(&sub.phi)?, sys.reduce(&sub.psi)?);
    let p = |q: Param| sys.param(q);
    let d = |e: &Expr, t: u8, x: u8| js.d_index(e, JetIndex::new(t, x));
    let (u, v) = (Expr::u(), Expr::v());
    let (wu, wv) = (&w.w_u, &w.w_v);

    let ct = &phi * wu - p(Param::Eps) * d(&phi, 0, 1)? * d(wu, 0, 1)? + &psi * wv
        - p(Param::Sigma) * d(&psi, 0, 1)? * d(wv, 0, 1)?;

    let ab = p(Param::A) + p(Param::B);
    let cx = ((&ab * &v * &phi) + (p(Param::B) * &u + p(Param::C)) * &psi) * wu
        + p(Param::Eps) * (&phi * d(wu, 1, 1)? + d(&phi, 1, 1)? * wu)
        + p(Param::Lambda) * (&psi * d(wu, 0, 2)? - d(&psi, 0, 1)? * d(wu, 0, 1)? + d(&psi, 0, 2)? * wu)
        + ((p(Param::A) * &u + p(Param::C)) * &phi + &ab * &v * &psi) * wv
        + p(Param::Sigma) * (&psi * d(wv, 1, 1)? + d(&psi, 1, 1)? * wv)
        + p(Param::Kappa) * (&phi * d(wv, 0, 2)? - d(&phi, 0, 1)? * d(wv, 0, 1)? + d(&phi, 0, 2)? * wv);
    Ok(ConservedVector::new(
        sys.reduce(&ct)?,
        sys.reduce(&cx)?,
        Provenance::Constructed { generator: generator.to_string(), substitution: sub.to_string() },
    ))
}

/// Certificate that the divergence vanishes on solutions.
pub fn verify_divergence(
    c: &ConservedVector,
    sys: &PdeSystem,
    ladder: &[(usize, usize)],
) -> Result<MembershipCertificate> {
    vanishes_with_ladder(&c.divergence(sys)?, sys, ladder)
}

/// Attaches a divergence certificate.
pub fn certify(mut c: ConservedVector, sys: &PdeSystem, ladder: &[(usize, usize)]) -> Result<ConservedVector> {
    c.certificate = Some(verify_divergence(&c, sys, ladder)?);
    Ok(c)
}

/// A flux potential showing the vector is trivial, if one of degree at
/// most `deg` exists.
pub fn is_trivial(
    c: &ConservedVector,
    sys: &PdeSystem,
    deg: usize,
    ladder: &[(usize, usize)],
) -> Result<Option<FluxPotential>> {
    find_flux_potential_with_ladder(&c.ct, &c.cx, sys, deg, ladder)
}

/// Writes `c` as a combination of reference vectors up to a trivial one.
pub fn equivalence(
    c: &ConservedVector,
    refs: &[ConservedVector],
    sys: &PdeSystem,
    deg: usize,
    ladder: &[(usize, usize)],
) -> Result<Option<Combination>> {
    let pairs: Vec<(Expr, Expr)> = refs.iter().map(|r| (r.ct.clone(), r.cx.clone())).collect();
    find_combination_with_ladder(&c.ct, &c.cx, &pairs, sys, deg, ladder)
}

/// Outcome of comparing a vector against the known ones.
#[derive(Clone, Debug, PartialEq)]
pub enum EquivalenceClass {
    Trivial(FluxPotential),
    /// Nonzero coefficients on the listed reference vectors.
    Combination(Vec<(String, Expr)>, FluxPotential),
    Unclassified,
}

impl EquivalenceClass {
    pub fn label(&self) -> String {
        match self {
            EquivalenceClass::Trivial(_) => "trivial".into(),
            EquivalenceClass::Combination(terms, _) => {
                let parts: Vec<String> = terms.iter().map(|(id, k)| format!("({k})*{id}")).collect();
                format!("equivalent to {}", parts.join(" + "))
            }
            EquivalenceClass::Unclassified => "no equivalence found".into(),
        }
    }
}

/// Tries each rung in turn; a combination with all coefficients zero
/// means the vector is trivial.
pub fn classify_vector(
    c: &ConservedVector,
    refs: &[ConservedVector],
    sys: &PdeSystem,
    deg: usize,
    ladder: &[(usize, usize)],
) -> Result<EquivalenceClass> {
    let pairs: Vec<(Expr, Expr)> = refs.iter().map(|r| (r.ct.clone(), r.cx.clone())).collect();
    for &bounds in ladder {
        let comb = match find_combination(&c.ct, &c.cx, &pairs, sys, deg, bounds) {
            Ok(Some(comb)) => comb,
            Ok(None) | Err(Error::Inconclusive { .. } | Error::UnlicensedPivot(_)) => continue,
            Err(other) => return Err(other),
        };
        if comb.coefficients.iter().all(Expr::is_zero) {
            return Ok(EquivalenceClass::Trivial(comb.potential));
        }
        let terms = refs
            .iter()
            .zip(comb.coefficients)
            .filter(|(_, k)| !k.is_zero())
            .map(|(r, k)| (r.provenance.to_string(), k))
            .collect();
        return Ok(EquivalenceClass::Combination(terms, comb.potential));
    }
    Ok(EquivalenceClass::Unclassified)
}

/// The two vectors read off the equations; the first needs `b = 0`.
pub fn obvious_vector(index: u8) -> Option<ConservedVector> {
    let (ct, cx) = match index {
        1 => ("u + eps*u_xx", "(a*u + c)*v + kappa*v_xx"),
        2 => ("2*(v + sigma*v_xx)", "(a + b)*v^2 + (b*u + 2*c)*u + 2*lambda*u_xx"),
        _ => return None,
    };
    Some(ConservedVector::new(parse(ct).ok()?, parse(cx).ok()?, Provenance::Obvious { index }))
}

/// Identifiers of the catalog of nontrivial vectors.
pub const CATALOG_IDS: [&str; 5] = ["i.a", "i.b-lambda0", "i.b-sigma0", "ii.a", "ii.b"];

/// A catalog vector with the zero constraints of its parameter branch.
pub fn catalog_vector(id: &str) -> Result<(ConservedVector, Vec<&'static str>)> {
    let (ct, cx, zero): (&str, &str, Vec<&'static str>) = match id {
        "i.a" => (
            "2*(u*v - eps*u_x*v_x)",
            "c*u^2 + (2*a*u + c)*v^2 - (lambda*u_x^2 + kappa*v_x^2) \
             + 2*(u*(lambda*u_xx + eps*v_tx) + v*(eps*u_tx + kappa*v_xx))",
            vec!["b", "eps - sigma"],
        ),
        "i.b-lambda0" => (
            "(a*u + c)*ln(a*u + c)/a + a/(2*c)*(v^2 - sigma*v_x^2)",
            "(a*u + c)*(ln(a*u + c) + 1)*v + a*v/c*(a*v^2/3 + sigma*v_tx)",
            vec!["b", "eps", "kappa", "lambda"],
        ),
        "i.b-sigma0" => (
            "2*(t*(a*u + c)*v - x*u)",
            "t*(c*(a*u + 2*c)*u - a*lambda*u_x^2) + 2*(a*u + c)*((a*t*v - x)*v + lambda*t*u_xx)",
            vec!["b", "eps", "kappa", "sigma"],
        ),
        "ii.a" => (
            "(a*u + 2*c)*u - a*eps*u_x^2",
            "2*(a*u + c)*((a*u + c)*v + eps*u_tx)",
            vec!["a - b", "kappa"],
        ),
        "ii.b" => (
            "(a*u + c)^2*ln(a*u + c)/a + a*(v^2 - sigma*v_x^2)",
            "(a*u + c)^2*(2*ln(a*u + c) + 1)*v + 2*a*v*(2*a*v^2/3 + sigma*v_tx)",
            vec!["a - b", "eps", "kappa", "lambda"],
        ),
        _ => return Err(Error::Contract(format!("unknown catalog vector `{id}`"))),
    };
    let v = ConservedVector::new(parse(ct)?, parse(cx)?, Provenance::Catalog { id: id.to_string() });
    Ok((v, zero))
}

/// Assumptions of a catalog vector's branch.
pub fn catalog_assumptions(id: &str) -> Result<Assumptions> {
    let (_, zero) = catalog_vector(id)?;
    Assumptions::new().with_zero(&zero)
}

/// Generators tried by the sweep: the named ones and two combinations.
pub const SWEEP_GENERATORS: [&str; 7] = ["X1", "X2", "X3", "X4", "X5", "2*X1 + X3", "3*X1 + X3"];

/// A catalog branch, optionally narrowed by further vanishing parameters
/// under which more generators are admitted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepCase {
    pub id: &'static str,
    pub zero: Vec<Param>,
}

impl SweepCase {
    pub fn new(id: &'static str, zero: &[Param]) -> Self {
        SweepCase { id, zero: zero.to_vec() }
    }

    pub fn system(&self) -> Result<PdeSystem> {
        let mut asm = catalog_assumptions(self.id)?;
        for p in &self.zero {
            asm.add_zero(&Expr::param(*p))?;
        }
        crate::system::bbm_kdv_symbolic(&asm)
    }
}

impl fmt::Display for SweepCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id)?;
        for p in &self.zero {
            write!(f, ", {} = 0", p.name())?;
        }
        Ok(())
    }
}

/// The catalog branches, plus the narrowings where the scaling generator
/// becomes admitted.
pub fn sweep_cases() -> Vec<SweepCase> {
    let mut out: Vec<SweepCase> = CATALOG_IDS.iter().map(|id| SweepCase::new(id, &[])).collect();
    out.insert(1, SweepCase::new("i.a", &[Param::Kappa]));
    out.push(SweepCase::new("ii.a", &[Param::Lambda]));
    out
}

/// A single constructed vector with its classification.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepEntry {
    pub generator: String,
    pub substitution: Substitution,
    pub vector: ConservedVector,
    pub class: EquivalenceClass,
}

/// Every vector built on one catalog branch.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub case: SweepCase,
    pub references: Vec<String>,
    pub generators: Vec<String>,
    pub substitutions: Vec<Substitution>,
    pub entries: Vec<SweepEntry>,
}

impl SweepReport {
    pub fn unclassified(&self) -> impl Iterator<Item = &SweepEntry> {
        self.entries.iter().filter(|e| e.class == EquivalenceClass::Unclassified)
    }
}

/// Family members with exactly one arbitrary constant switched on that
/// have zero defect on `sys`, without duplicates.
pub fn single_constant_substitutions(sys: &PdeSystem) -> Result<Vec<Substitution>> {
    let mut out: Vec<Substitution> = Vec::new();
    for fam in classified_families() {
        for k in fam.constants() {
            let pick = |s: &Symbol| match s {
                Symbol::Const(j) => Some(if *j == k { Expr::one() } else { Expr::zero() }),
                _ => None,
            };
            let Ok(phi) = fam.phi.substitute_with(&pick).and_then(|e| sys.reduce(&e)) else { continue };
            let Ok(psi) = fam.psi.substitute_with(&pick).and_then(|e| sys.reduce(&e)) else { continue };
            let Ok(sub) = Substitution::new(phi, psi) else { continue };
            let pairs: Vec<(Expr, Expr)> = out.iter().map(|s| (s.phi.clone(), s.psi.clone())).collect();
            if span_contains(&pairs, &sub.phi, &sub.psi, sys) || !matches!(is_self_adjoint_with(sys, &sub), Ok(true)) {
                continue;
            }
            out.push(sub);
        }
    }
    Ok(out)
}

/// Reference vectors that are conserved on `sys`.
pub fn reference_vectors(sys: &PdeSystem, ladder: &[(usize, usize)]) -> Result<Vec<ConservedVector>> {
    let mut out = Vec::new();
    let known = [1, 2].into_iter().filter_map(obvious_vector);
    let cat = CATALOG_IDS.iter().map(|id| catalog_vector(id).map(|(v, _)| v)).collect::<Result<Vec<_>>>()?;
    for c in known.chain(cat) {
        let Ok(div) = c.divergence(sys) else { continue };
        if vanishes_with_ladder(&div, sys, ladder).is_ok() {
            out.push(c);
        }
    }
    Ok(out)
}

/// Potential degree used to classify sweep vectors; cubic potentials
/// are needed for the time translations.
pub const SWEEP_DEGREE: usize = 3;

/// Builds, certifies and classifies every vector on a catalog branch.
pub fn sweep(case: &SweepCase, deg: usize, ladder: &[(usize, usize)]) -> Result<SweepReport> {
    let sys = case.system()?;
    let mut generators = Vec::new();
    for g in SWEEP_GENERATORS {
        let x = parse_combination(g)?;
        if is_symmetry(&x, &sys, ladder)?.holds() {
            generators.push((g.to_string(), x));
        }
    }
    let substitutions = single_constant_substitutions(&sys)?;
    let refs = reference_vectors(&sys, ladder)?;
    let mut entries = Vec::new();
    for (name, x) in &generators {
        for sub in &substitutions {
            let vector = certify(conserved_vector(&sys, sub, x, name)?, &sys, ladder)?;
            let class = if vector.is_zero() {
                EquivalenceClass::Trivial(FluxPotential::zero())
            } else {
                classify_vector(&vector, &refs, &sys, deg, ladder)?
            };
            entries.push(SweepEntry { generator: name.clone(), substitution: sub.clone(), vector, class });
        }
    }
    Ok(SweepReport {
        case: case.clone(),
        references: refs.iter().map(|r| r.provenance.to_string()).collect(),
        generators: generators.into_iter().map(|(g, _)| g).collect(),
        substitutions,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduce::DEFAULT_LADDER;
    use crate::system::bbm_kdv_symbolic;

    fn sym(z: &[&str]) -> PdeSystem {
        bbm_kdv_symbolic(&Assumptions::new().with_zero(z).unwrap()).unwrap()
    }

    #[test]
    fn obvious_vectors_have_unit_certificates() {
        let sys = sym(&["b"]);
        let c = verify_divergence(&obvious_vector(1).unwrap(), &sys, &DEFAULT_LADDER).unwrap();
        assert_eq!(c.coefficients, vec![("F1".to_string(), Expr::one())]);
        let sys = sym(&[]);
        let c = verify_divergence(&obvious_vector(2).unwrap(), &sys, &DEFAULT_LADDER).unwrap();
        assert_eq!(c.coefficients, vec![("F2".to_string(), Expr::int(2))]);
    }

    #[test]
    fn curl_is_trivial() {
        let sys = sym(&[]);
        let c = ConservedVector::parse("u_x", "-u_t").unwrap();
        let p = is_trivial(&c, &sys, 1, &DEFAULT_LADDER).unwrap().unwrap();
        assert_eq!(p.h, parse("u").unwrap());
    }

    #[test]
    fn nonzero_defect_is_rejected() {
        let sys = sym(&[]);
        let sub = Substitution::parse("u", "v").unwrap();
        let x = crate::symmetry::generator(2).unwrap();
        assert_eq!(conserved_vector(&sys, &sub, &x, "X2"), Err(Error::NonzeroDefect));
    }
}
