//! The full reproduction pipeline and its report.

use std::collections::BTreeMap;
use std::time::Instant;

use bbmkdv::conslaw::{
    catalog_assumptions, catalog_vector, obvious_vector, sweep, sweep_cases, ConservedVector, EquivalenceClass,
    CATALOG_IDS, SWEEP_DEGREE,
};
use bbmkdv::expr::{Param, Symbol};
use bbmkdv::jet::VectorField;
use bbmkdv::selfadjoint::{classified_families, classify, defect, Kind, Substitution};
use bbmkdv::symmetry::{
    cell_entries, generator, is_symmetry, same_span, solve_symmetries, Branch, Dispersion, SymmetryCase,
    SymmetryVerdict,
};
use bbmkdv::system::{bbm_kdv_symbolic, kaup, preset, PdeSystem};
use bbmkdv::{parse, Assumptions, Error, Expr};
use clap::ValueEnum;
use serde::Serialize;

use crate::commands::{class_status, point_string, verify_vector, Status};
use crate::CliError;

/// Polynomial degree of the symmetry solver ansatz.
pub const SOLVER_DEGREE: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Section {
    Adjoint,
    Symmetries,
    Solver,
    Families,
    Strict,
    Conslaw,
    Sweep,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub id: String,
    pub description: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// A computed result that departs from the published statement.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Erratum {
    pub id: String,
    pub description: String,
    pub computed: BTreeMap<String, String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReproductionReport {
    pub version: String,
    pub ladder: Vec<(usize, usize)>,
    pub checks: Vec<Check>,
    pub errata_candidates: Vec<Erratum>,
    pub summary: Summary,
    /// Seconds per check id; the only nondeterministic part.
    pub wall_times: BTreeMap<String, f64>,
}

impl ReproductionReport {
    pub fn passed(&self) -> bool {
        self.summary.fail == 0 && self.summary.inconclusive == 0
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let t = self.wall_times.get(&c.id).copied().unwrap_or(0.0);
            out.push_str(&format!("{:<12} {:>8.3}s  {}  {}\n", c.status.label(), t, c.id, c.description));
            if c.status != Status::Pass {
                for extra in [&c.witness, &c.detail].into_iter().flatten() {
                    out.push_str(&format!("{:23}{extra}\n", ""));
                }
            }
        }
        if !self.errata_candidates.is_empty() {
            out.push_str("\nerrata candidates\n");
            for e in &self.errata_candidates {
                out.push_str(&format!("  {}: {}\n", e.id, e.description));
                for (k, v) in &e.computed {
                    out.push_str(&format!("    {k}: {v}\n"));
                }
            }
        }
        let s = &self.summary;
        out.push_str(&format!("\n{} pass, {} fail, {} inconclusive\n", s.pass, s.fail, s.inconclusive));
        out
    }
}

/// What a check produced.
#[derive(Default)]
struct Verdict {
    certificate: Option<String>,
    witness: Option<String>,
    detail: Option<String>,
}

impl Verdict {
    fn detail(d: impl Into<String>) -> Self {
        Verdict { detail: Some(d.into()), ..Verdict::default() }
    }

    fn certificate(c: impl Into<String>) -> Self {
        Verdict { certificate: Some(c.into()), ..Verdict::default() }
    }
}

struct Runner {
    ladder: Vec<(usize, usize)>,
    checks: Vec<Check>,
    errata: Vec<Erratum>,
    times: BTreeMap<String, f64>,
}

impl Runner {
    fn run(&mut self, id: String, description: String, f: impl FnOnce() -> Result<(Status, Verdict), Error>) {
        let start = Instant::now();
        let (status, v) = match f() {
            Ok(r) => r,
            Err(e @ (Error::Inconclusive { .. } | Error::UnlicensedPivot(_))) => {
                (Status::Inconclusive, Verdict::detail(e.to_string()))
            }
            Err(e) => (Status::Fail, Verdict::detail(format!("error: {e}"))),
        };
        let secs = start.elapsed().as_secs_f64();
        assert!(!self.times.contains_key(&id), "duplicate check id {id}");
        self.times.insert(id.clone(), secs);
        self.checks.push(Check {
            id,
            description,
            status,
            certificate: v.certificate,
            witness: v.witness,
            detail: v.detail,
        });
    }
}

fn pass_if(ok: bool, v: Verdict) -> (Status, Verdict) {
    (if ok { Status::Pass } else { Status::Fail }, v)
}

fn sym(zero: &[&str], nonzero: &[&str]) -> Result<PdeSystem, Error> {
    bbm_kdv_symbolic(&Assumptions::new().with_zero(zero)?.with_nonzero(nonzero)?)
}

/// Runs the selected sections in order. An extra preset adds a solver
/// check for that system.
pub fn reproduce(
    ladder: &[(usize, usize)],
    sections: &[Section],
    extra_preset: Option<&str>,
) -> Result<ReproductionReport, CliError> {
    let mut r = Runner { ladder: ladder.to_vec(), checks: Vec::new(), errata: Vec::new(), times: BTreeMap::new() };
    let all = sections.is_empty();
    let on = |s: Section| all || sections.contains(&s);
    if on(Section::Adjoint) {
        adjoint_checks(&mut r);
    }
    if on(Section::Symmetries) {
        table_checks(&mut r);
    }
    if on(Section::Solver) {
        solver_checks(&mut r, extra_preset)?;
    }
    if on(Section::Families) {
        family_checks(&mut r);
    }
    if on(Section::Strict) {
        strict_checks(&mut r);
    }
    if on(Section::Conslaw) {
        conslaw_checks(&mut r);
    }
    if on(Section::Sweep) {
        sweep_checks(&mut r);
    }
    let mut summary = Summary::default();
    for c in &r.checks {
        match c.status {
            Status::Pass => summary.pass += 1,
            Status::Fail => summary.fail += 1,
            Status::Inconclusive => summary.inconclusive += 1,
        }
    }
    Ok(ReproductionReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        ladder: r.ladder,
        checks: r.checks,
        errata_candidates: r.errata,
        summary,
        wall_times: r.times,
    })
}

const ADJOINT: [&str; 2] = [
    "ubar_t + (a+b)*v*ubar_x + (b*u + c)*vbar_x + b*ubar*v_x + eps*ubar_txx + lambda*vbar_xxx",
    "vbar_t + (a*u + c)*ubar_x + (a+b)*v*vbar_x - b*ubar*u_x + kappa*ubar_xxx + sigma*vbar_txx",
];

fn adjoint_checks(r: &mut Runner) {
    r.run("adjoint.symbolic".into(), "adjoint of the family with symbolic parameters".into(), || {
        let sys = bbm_kdv_symbolic(&Assumptions::new())?;
        let adj = sys.adjoint_system()?;
        let ok = (0..2).all(|i| parse(ADJOINT[i]).is_ok_and(|e| sys.equals(&adj.equations()[i], &e)));
        let shown = format!("F1* = {}; F2* = {}", adj.equations()[0], adj.equations()[1]);
        Ok(pass_if(ok, Verdict::certificate(shown)))
    });
    r.run("adjoint.kaup".into(), "Kaup adjoint agrees with the symbolic adjoint at the Kaup values".into(), || {
        let sym = bbm_kdv_symbolic(&Assumptions::new())?.adjoint_system()?;
        let sys = kaup();
        let bound = sys.adjoint_system()?;
        let subs: BTreeMap<Symbol, Expr> = Param::ALL
            .iter()
            .map(|p| (Symbol::Param(*p), sys.param(*p)))
            .collect();
        let mut ok = true;
        for i in 0..2 {
            ok &= sym.equations()[i].substitute(&subs)? == bound.equations()[i];
        }
        let shown = format!("F1* = {}; F2* = {}", bound.equations()[0], bound.equations()[1]);
        Ok(pass_if(ok, Verdict::certificate(shown)))
    });
}

fn slug(b: Branch, d: Dispersion) -> String {
    let b = match b {
        Branch::BZero => "b0",
        Branch::AEqualsB => "a-eq-b",
        Branch::Generic => "generic",
    };
    let d = match d {
        Dispersion::Absent => "unmixed",
        Dispersion::Present => "mixed",
    };
    format!("{d}.{b}")
}

fn verdict_of(v: SymmetryVerdict) -> (Status, Verdict) {
    match v {
        SymmetryVerdict::Holds(certs) => {
            let c: Vec<String> = certs.iter().map(|c| c.to_string()).collect();
            (Status::Pass, Verdict::certificate(c.join("; ")))
        }
        SymmetryVerdict::Refuted { component, point, value } => (
            Status::Fail,
            Verdict {
                witness: Some(format!("component {} equals {value} at {}", component + 1, point_string(&point))),
                ..Verdict::default()
            },
        ),
        SymmetryVerdict::Inconclusive(e) => (Status::Inconclusive, Verdict::detail(e.to_string())),
    }
}

fn table_checks(r: &mut Runner) {
    for d in Dispersion::ALL {
        for b in Branch::ALL {
            for entry in cell_entries(b, d) {
                let case = SymmetryCase::new(b, d).with_zero(&entry.requires_zero);
                let name: String = entry.name.chars().filter(|c| !c.is_whitespace()).collect();
                let mut id = format!("symmetry.{}.{name}", slug(b, d));
                for p in &entry.requires_zero {
                    id.push_str(&format!(".{}0", p.name()));
                }
                let ladder = r.ladder.clone();
                r.run(id, format!("{} admitted for {case}", entry.label()), || {
                    Ok(verdict_of(is_symmetry(&entry.field, &case.system()?, &ladder)?))
                });
            }
        }
    }
    let ladder = r.ladder.clone();
    r.run("symmetry.boussinesq.X4-refuted".into(), "X4 is not admitted by the Boussinesq system".into(), || {
        let v = is_symmetry(&generator(4).expect("named"), &preset("boussinesq")?, &ladder)?;
        Ok(match verdict_of(v) {
            (Status::Fail, v) => (Status::Pass, v),
            (Status::Pass, v) => (Status::Fail, v),
            other => other,
        })
    });
}

/// Generators listed for the cell of a numeric system, with the
/// parameters bound.
fn listed_generators(sys: &PdeSystem) -> Result<Vec<(String, VectorField)>, Error> {
    let zero = |p: Param| sys.param(p).is_zero();
    let branch = if zero(Param::B) {
        Branch::BZero
    } else if (sys.param(Param::A) - sys.param(Param::B)).is_zero() {
        Branch::AEqualsB
    } else {
        Branch::Generic
    };
    let dispersion = if zero(Param::Eps) && zero(Param::Sigma) { Dispersion::Absent } else { Dispersion::Present };
    cell_entries(branch, dispersion)
        .into_iter()
        .filter(|e| e.requires_zero.iter().all(|p| zero(*p)))
        .map(|e| Ok((e.name, e.field.map(|c| sys.reduce(c))?)))
        .collect()
}

fn solver_check(r: &mut Runner, id: &str, name: &str, expected: Option<usize>) {
    r.run(id.into(), format!("solver basis for {name} spans the listed generators"), || {
        let sys = preset(name)?;
        let basis = solve_symmetries(&sys, SOLVER_DEGREE)?;
        let listed = listed_generators(&sys)?;
        let fields: Vec<VectorField> = listed.iter().map(|(_, f)| f.clone()).collect();
        let names: Vec<&str> = listed.iter().map(|(n, _)| n.as_str()).collect();
        let same = same_span(&basis, &fields, SOLVER_DEGREE)?;
        let dim_ok = expected.is_none_or(|k| k == basis.len());
        let v = Verdict::certificate(format!("dimension {}, span of {}", basis.len(), names.join(", ")));
        Ok(pass_if(same && dim_ok && basis.len() == fields.len(), v))
    });
}

fn solver_checks(r: &mut Runner, extra: Option<&str>) -> Result<(), CliError> {
    solver_check(r, "solver.boussinesq", "boussinesq", Some(3));
    solver_check(r, "solver.kaup", "kaup", Some(4));
    solver_check(r, "solver.bona-smith", "bona-smith(lambda=-1)", Some(3));
    if let Some(name) = extra {
        preset(name).map_err(|e| CliError::Input(format!("invalid preset: {e}")))?;
        solver_check(r, "solver.preset", name, None);
    }
    Ok(())
}

fn family_checks(r: &mut Runner) {
    let base = match bbm_kdv_symbolic(&Assumptions::new()) {
        Ok(b) => b,
        Err(e) => return r.run("family".into(), "family setup".into(), || Err(e)),
    };
    for fam in classified_families() {
        let instances = match fam.instances(&base) {
            Ok(i) => i,
            Err(e) => {
                r.run(format!("family.{}", fam.id), "gated instances".into(), || Err(e));
                continue;
            }
        };
        for (gi, sys) in instances {
            let active: Vec<String> = gi.active.iter().map(|k| format!("c{k}")).collect();
            let tag = if active.is_empty() { "base".to_string() } else { active.join("-") };
            let gates: Vec<String> = fam.gates.iter().map(|g| g.label()).collect();
            let desc = format!("family {} with {} active ({})", fam.id, if active.is_empty() { "no gated constant".into() } else { active.join(", ") }, gates.join("; "));
            r.run(format!("family.{}.{tag}", fam.id), desc, || {
                let d = defect(&sys, &gi.substitution)?;
                let ok = d.iter().all(Expr::is_zero);
                let v = if ok {
                    Verdict::certificate(format!("defect vanishes for {}", gi.substitution))
                } else {
                    Verdict::detail(format!("defect = ({}, {})", d[0], d[1]))
                };
                Ok(pass_if(ok, v))
            });
        }
    }
}

fn strict_checks(r: &mut Runner) {
    r.run("strict.a-eq-2b".into(), "strictly self-adjoint when a = 2b and kappa = lambda".into(), || {
        let c = classify(&sym(&["a - 2*b", "kappa - lambda"], &[])?)?;
        Ok(pass_if(c.kind == Kind::Strict, Verdict::certificate(format!("{} with {}", c.kind, c.witness))))
    });
    let mut erratum = None;
    r.run(
        "strict.b0-eps-eq-sigma".into(),
        "classification for b = 0, eps = sigma is computed and consistent".into(),
        || {
            let sys = sym(&["b", "eps - sigma"], &[])?;
            let c = classify(&sys)?;
            // the reported defect must match a fresh computation, and the
            // witness must have zero defect
            let fresh = defect(&sys, &Substitution::new(Expr::u(), Expr::v())?)?;
            let witness_ok = defect(&sys, &c.witness)?.iter().all(Expr::is_zero);
            let strict = c.strict_defect.iter().all(Expr::is_zero);
            let ok = fresh == c.strict_defect && witness_ok && (c.kind == Kind::Strict) == strict;
            if !strict {
                let mut computed = BTreeMap::new();
                computed.insert("strict defect".into(), format!("({}, {})", c.strict_defect[0], c.strict_defect[1]));
                computed.insert("classification".into(), format!("{} with {}", c.kind, c.witness));
                erratum = Some(Erratum {
                    id: "strict.b0-eps-eq-sigma".into(),
                    description: "(phi, psi) = (u, v) leaves a nonzero defect for b = 0, eps = sigma".into(),
                    computed,
                });
            }
            let v = Verdict::certificate(format!(
                "{} with {}; strict defect ({}, {})",
                c.kind, c.witness, c.strict_defect[0], c.strict_defect[1]
            ));
            Ok(pass_if(ok, v))
        },
    );
    r.errata.extend(erratum);
}

fn vector_check(r: &mut Runner, id: String, desc: String, c: ConservedVector, sys: Result<PdeSystem, Error>) {
    let ladder = r.ladder.clone();
    r.run(id, desc, || {
        let sys = sys?;
        let (status, _, json) = verify_vector(&c, &sys, &ladder).map_err(|e| match e {
            CliError::Core(e) => e,
            other => Error::Internal(other.to_string()),
        })?;
        let field = |k: &str| json.get(k).map(|v| v.to_string().trim_matches('"').to_string());
        let v = Verdict {
            certificate: field("certificate"),
            witness: field("witness"),
            detail: field("reason").or_else(|| field("residual")),
        };
        Ok((status, v))
    });
}

fn conslaw_checks(r: &mut Runner) {
    let o1 = obvious_vector(1).expect("known");
    vector_check(r, "conslaw.obvious-1".into(), "first obvious vector for b = 0".into(), o1, sym(&["b"], &[]));
    let o2 = obvious_vector(2).expect("known");
    vector_check(r, "conslaw.obvious-2".into(), "second obvious vector".into(), o2, sym(&[], &[]));
    for id in CATALOG_IDS {
        let Ok((v, zero)) = catalog_vector(id) else { continue };
        let sys = catalog_assumptions(id).and_then(|a| bbm_kdv_symbolic(&a));
        let conds: Vec<String> = zero.iter().map(|z| format!("{z} = 0")).collect();
        let desc = format!("catalog vector {id} for {}", conds.join(", "));
        vector_check(r, format!("conslaw.catalog.{id}"), desc, v, sys);
    }
}

fn sweep_checks(r: &mut Runner) {
    // catalog id -> (reached on the unnarrowed branch, where it was reached)
    let mut reached: BTreeMap<&str, (bool, Vec<String>)> = BTreeMap::new();
    for case in sweep_cases() {
        let mut tag = case.id.to_string();
        for p in &case.zero {
            tag.push_str(&format!(".{}0", p.name()));
        }
        let start = Instant::now();
        let report = sweep(&case, SWEEP_DEGREE, &r.ladder);
        let per = start.elapsed().as_secs_f64();
        let report = match report {
            Ok(rep) => rep,
            Err(e) => {
                r.run(format!("sweep.{tag}"), format!("sweep on {case}"), || Err(e));
                continue;
            }
        };
        let n = report.entries.len().max(1) as f64;
        let slot = reached.entry(case.id).or_default();
        for (k, entry) in report.entries.iter().enumerate() {
            let id = format!("sweep.{tag}.{}.{k}", entry.generator.replace(' ', ""));
            let desc = format!("{} with {}", entry.generator, entry.substitution);
            let label = entry.class.label();
            if let EquivalenceClass::Combination(terms, _) = &entry.class {
                if terms.iter().any(|(n, _)| n == &format!("catalog {}", case.id)) {
                    if case.zero.is_empty() {
                        slot.0 = true;
                    }
                    slot.1.push(format!("{desc} on {case}"));
                }
            }
            let status = class_status(&entry.class);
            r.run(id, desc, || {
                Ok((status, Verdict { certificate: entry.vector.certificate.as_ref().map(|c| c.to_string()), detail: Some(label), ..Verdict::default() }))
            });
            // the sweep is timed as a whole; spread it over its entries
            if let Some(t) = r.times.get_mut(&r.checks.last().expect("just pushed").id) {
                *t = per / n;
            }
        }
    }
    for (id, (direct, via)) in reached {
        if direct {
            continue;
        }
        let mut computed = BTreeMap::new();
        computed.insert(
            "reached by".into(),
            if via.is_empty() { "no constructed vector".into() } else { via.join("; ") },
        );
        r.errata.push(Erratum {
            id: format!("sweep.{id}"),
            description: format!("no admitted pair on branch {id} constructs catalog {id} up to equivalence"),
            computed,
        });
    }
}
