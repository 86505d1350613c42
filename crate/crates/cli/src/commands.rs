//! The single-shot commands. Each returns a status, a human-readable
//! text and a JSON value.

use bbmkdv::conslaw::{
    certify, classify_vector, conserved_vector, reference_vectors, verify_divergence, ConservedVector,
    EquivalenceClass, Provenance, SWEEP_DEGREE,
};
use bbmkdv::reduce::{numeric_witness, recompute_residual, MembershipCertificate};
use bbmkdv::selfadjoint::{classify, default_basis, defect, solve_substitutions};
use bbmkdv::symmetry::{is_symmetry, solve_symmetries, SymmetryVerdict};
use bbmkdv::system::PdeSystem;
use bbmkdv::{Error, Expr};
use serde::Serialize;
use serde_json::{json, Value};

use crate::input::Document;
use crate::CliError;

const WITNESS_SAMPLES: usize = 8;
const WITNESS_SEED: u64 = 0xc11;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub status: Status,
    pub text: String,
    pub json: Value,
}

impl Outcome {
    fn new(status: Status, text: String, mut json: Value) -> Self {
        json["status"] = json!(status);
        Outcome { status, text, json }
    }
}

/// Settings shared by every command.
#[derive(Clone, Debug)]
pub struct Context {
    pub ladder: Vec<(usize, usize)>,
    pub preset: Option<String>,
    pub order_cap: Option<usize>,
}

impl Context {
    pub fn system(&self, doc: &Document) -> Result<PdeSystem, CliError> {
        doc.system(self.preset.as_deref(), self.order_cap)
    }
}

fn strings(es: &[Expr]) -> Vec<String> {
    es.iter().map(Expr::to_string).collect()
}

pub fn point_string(point: &std::collections::BTreeMap<bbmkdv::expr::Symbol, bbmkdv::expr::Rational>) -> String {
    let parts: Vec<String> = point.iter().map(|(s, q)| format!("{s} = {q}")).collect();
    parts.join(", ")
}

pub fn adjoint(ctx: &Context, doc: &Document) -> Result<Outcome, CliError> {
    let sys = ctx.system(doc)?;
    let adj = sys.adjoint_system()?;
    let eqs = strings(adj.equations());
    let text = format!("F1* = {}\nF2* = {}", eqs[0], eqs[1]);
    Ok(Outcome::new(Status::Pass, text, json!({ "system": sys.to_string(), "adjoint": eqs })))
}

pub fn check_symmetry(ctx: &Context, doc: &Document) -> Result<Outcome, CliError> {
    let sys = ctx.system(doc)?;
    let (name, x) = doc.generator()?;
    let verdict = is_symmetry(&x, &sys, &ctx.ladder)?;
    let (status, detail, body) = match &verdict {
        SymmetryVerdict::Holds(certs) => {
            let c: Vec<String> = certs.iter().map(MembershipCertificate::to_string).collect();
            (Status::Pass, format!("certificates: {}", c.join("; ")), json!({ "certificates": c }))
        }
        SymmetryVerdict::Refuted { component, point, value } => (
            Status::Fail,
            format!("component {} equals {value} at {}", component + 1, point_string(point)),
            json!({ "witness": { "component": component + 1, "point": point_string(point), "value": value.to_string() } }),
        ),
        SymmetryVerdict::Inconclusive(e) => (Status::Inconclusive, e.to_string(), json!({ "reason": e.to_string() })),
    };
    let mut json = body;
    json["generator"] = json!(name);
    json["field"] = json!(x.to_string());
    let text = format!("{name}: {}\n{detail}", status.label());
    Ok(Outcome::new(status, text, json))
}

pub fn solve_symmetries_cmd(ctx: &Context, doc: &Document, degree: usize) -> Result<Outcome, CliError> {
    let sys = ctx.system(doc)?;
    let basis = solve_symmetries(&sys, degree)?;
    let fields: Vec<String> = basis.iter().map(|x| x.to_string()).collect();
    let mut text = format!("dimension {}", fields.len());
    for f in &fields {
        text.push_str(&format!("\n  {f}"));
    }
    Ok(Outcome::new(Status::Pass, text, json!({ "degree": degree, "dimension": fields.len(), "basis": fields })))
}

pub fn check_substitution(ctx: &Context, doc: &Document) -> Result<Outcome, CliError> {
    let sys = ctx.system(doc)?;
    let sub = doc.substitution()?;
    let d = defect(&sys, &sub)?;
    let status = if d.iter().all(Expr::is_zero) { Status::Pass } else { Status::Fail };
    let d = strings(&d);
    let text = format!("{sub}: {}\ndefect = ({}, {})", status.label(), d[0], d[1]);
    Ok(Outcome::new(status, text, json!({ "substitution": sub.to_string(), "defect": d })))
}

pub fn solve_substitutions_cmd(ctx: &Context, doc: &Document, autonomous: bool) -> Result<Outcome, CliError> {
    let sys = ctx.system(doc)?;
    let basis = default_basis(&sys, autonomous)?;
    let branches = solve_substitutions(&sys, &basis)?;
    let mut status = Status::Pass;
    let mut text = String::new();
    let mut out = Vec::new();
    for b in &branches {
        if b.inconclusive {
            status = Status::Inconclusive;
        }
        let cond = if b.conditions.is_empty() { "generic".to_string() } else { b.conditions.join(", ") };
        text.push_str(&format!("[{cond}]{}\n", if b.inconclusive { " inconclusive" } else { "" }));
        let fam: Vec<Value> = b
            .family
            .iter()
            .map(|(phi, psi)| {
                text.push_str(&format!("  phi = {phi}, psi = {psi}\n"));
                json!({ "phi": phi.to_string(), "psi": psi.to_string() })
            })
            .collect();
        out.push(json!({ "conditions": b.conditions, "inconclusive": b.inconclusive, "family": fam }));
    }
    Ok(Outcome::new(status, text.trim_end().to_string(), json!({ "autonomous": autonomous, "branches": out })))
}

pub fn classify_cmd(ctx: &Context, doc: &Document) -> Result<Outcome, CliError> {
    let sys = ctx.system(doc)?;
    let d = |c: &[Expr; 2]| strings(c);
    match classify(&sys) {
        Ok(c) => {
            let sd = d(&c.strict_defect);
            let text = format!(
                "{} with {}\nstrict defect = ({}, {})",
                c.kind, c.witness, sd[0], sd[1]
            );
            let json = json!({ "kind": c.kind, "witness": c.witness.to_string(), "strict_defect": sd });
            Ok(Outcome::new(Status::Pass, text, json))
        }
        Err(e @ Error::Inconclusive { .. }) => {
            Ok(Outcome::new(Status::Inconclusive, e.to_string(), json!({ "reason": e.to_string() })))
        }
        Err(e) => Err(e.into()),
    }
}

fn vector_json(c: &ConservedVector) -> Value {
    json!({
        "ct": c.ct.to_string(),
        "cx": c.cx.to_string(),
        "provenance": c.provenance.to_string(),
        "certificate": c.certificate.as_ref().map(|m| m.to_string()),
    })
}

pub fn build_conslaw(ctx: &Context, doc: &Document, with_class: bool) -> Result<Outcome, CliError> {
    let sys = ctx.system(doc)?;
    let (name, x) = doc.generator()?;
    let sub = doc.substitution()?;
    let c = match conserved_vector(&sys, &sub, &x, &name) {
        Ok(c) => c,
        Err(Error::NonzeroDefect) => {
            let text = format!("{sub} is not admitted: nonzero defect");
            return Ok(Outcome::new(Status::Fail, text, json!({ "reason": "nonzero defect" })));
        }
        Err(e) => return Err(e.into()),
    };
    let c = match certify(c.clone(), &sys, &ctx.ladder) {
        Ok(c) => c,
        Err(e @ (Error::Inconclusive { .. } | Error::UnlicensedPivot(_))) => {
            let text = format!("Ct = {}\nCx = {}\n{e}", c.ct, c.cx);
            return Ok(Outcome::new(Status::Inconclusive, text, vector_json(&c)));
        }
        Err(e) => return Err(e.into()),
    };
    let mut text = format!(
        "Ct = {}\nCx = {}\ncertificate: {}",
        c.ct,
        c.cx,
        c.certificate.as_ref().map(|m| m.to_string()).unwrap_or_default()
    );
    let mut json = vector_json(&c);
    if with_class {
        let refs = reference_vectors(&sys, &ctx.ladder)?;
        let class = if c.is_zero() {
            "trivial".to_string()
        } else {
            classify_vector(&c, &refs, &sys, SWEEP_DEGREE, &ctx.ladder)?.label()
        };
        text.push_str(&format!("\nclass: {class}"));
        json["class"] = json!(class);
    }
    Ok(Outcome::new(Status::Pass, text, json))
}

pub fn verify_conslaw(ctx: &Context, doc: &Document) -> Result<Outcome, CliError> {
    let sys = ctx.system(doc)?;
    let (ct, cx) = doc.vector()?;
    let c = ConservedVector::new(ct, cx, Provenance::Given);
    let (status, text, json) = verify_vector(&c, &sys, &ctx.ladder)?;
    Ok(Outcome::new(status, text, json))
}

/// Certifies the divergence, re-expands the certificate and falls back
/// to a numeric witness when no certificate is found.
pub fn verify_vector(
    c: &ConservedVector,
    sys: &PdeSystem,
    ladder: &[(usize, usize)],
) -> Result<(Status, String, Value), CliError> {
    let div = c.divergence(sys)?;
    match verify_divergence(c, sys, ladder) {
        Ok(cert) => {
            let residual = recompute_residual(&div, sys, &cert)?;
            if !residual.is_zero() {
                let text = format!("certificate does not re-expand: residual {residual}");
                return Ok((Status::Fail, text, json!({ "residual": residual.to_string() })));
            }
            Ok((Status::Pass, format!("certificate: {cert}"), json!({ "certificate": cert.to_string() })))
        }
        Err(e @ (Error::Inconclusive { .. } | Error::UnlicensedPivot(_))) => {
            match numeric_witness(&div, sys, WITNESS_SAMPLES, WITNESS_SEED)? {
                Some((point, value)) => {
                    let text = format!("divergence equals {value} at {}", point_string(&point));
                    Ok((Status::Fail, text, json!({ "witness": { "point": point_string(&point), "value": value.to_string() } })))
                }
                None => Ok((Status::Inconclusive, e.to_string(), json!({ "reason": e.to_string() }))),
            }
        }
        Err(e) => Err(e.into()),
    }
}

pub fn class_status(class: &EquivalenceClass) -> Status {
    match class {
        EquivalenceClass::Unclassified => Status::Inconclusive,
        _ => Status::Pass,
    }
}
