//! JSON input documents and their translation into core objects.

use std::collections::BTreeMap;

use bbmkdv::expr::{Param, Rational};
use bbmkdv::jet::{JetSpace, VectorField};
use bbmkdv::selfadjoint::Substitution;
use bbmkdv::symmetry::parse_combination;
use bbmkdv::system::{bbm_kdv, preset, PdeSystem};
use bbmkdv::{parse, Assumptions, Expr};
use serde::Deserialize;
use serde_json::Value;

use crate::CliError;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    #[serde(default)]
    pub system: SystemSpec,
    pub generator: Option<GeneratorSpec>,
    pub substitution: Option<SubstitutionSpec>,
    pub vector: Option<VectorSpec>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub preset: Option<String>,
    /// Parameter values: integers or rational strings such as `"-1/3"`.
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
    #[serde(default)]
    pub assume_nonzero: Vec<String>,
    #[serde(default)]
    pub assume_zero: Vec<String>,
}

/// Either a combination of named generators or explicit components.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum GeneratorSpec {
    Named(String),
    Components {
        #[serde(default = "zero")]
        xi_t: String,
        #[serde(default = "zero")]
        xi_x: String,
        #[serde(default = "zero")]
        eta_u: String,
        #[serde(default = "zero")]
        eta_v: String,
    },
}

fn zero() -> String {
    "0".into()
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubstitutionSpec {
    pub phi: String,
    pub psi: String,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorSpec {
    pub ct: String,
    pub cx: String,
}

fn input<E: std::fmt::Display>(what: &str) -> impl Fn(E) -> CliError + '_ {
    move |e| CliError::Input(format!("{what}: {e}"))
}

impl Document {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(input("invalid input document"))
    }

    /// The system described by the document. A preset given on the
    /// command line wins over the document's own.
    pub fn system(&self, preset_flag: Option<&str>, order_cap: Option<usize>) -> Result<PdeSystem, CliError> {
        let spec = &self.system;
        let asm = Assumptions::new()
            .with_nonzero(&spec.assume_nonzero.iter().map(String::as_str).collect::<Vec<_>>())
            .and_then(|a| a.with_zero(&spec.assume_zero.iter().map(String::as_str).collect::<Vec<_>>()))
            .map_err(input("invalid assumption"))?;
        let sys = match preset_flag.or(spec.preset.as_deref()) {
            Some(name) => {
                if !spec.params.is_empty() {
                    return Err(CliError::Input("a preset cannot be combined with params".into()));
                }
                preset(name).and_then(|s| s.assume(&asm)).map_err(input("invalid preset"))?
            }
            None => bbm_kdv(&bindings(&spec.params)?, &asm).map_err(input("invalid system"))?,
        };
        Ok(match order_cap {
            Some(cap) => sys.with_space(JetSpace::new(cap)),
            None => sys,
        })
    }

    /// The generator and a display name for it.
    pub fn generator(&self) -> Result<(String, VectorField), CliError> {
        match self.generator.as_ref().ok_or_else(|| CliError::Input("missing generator".into()))? {
            GeneratorSpec::Named(name) => {
                let x = parse_combination(name).map_err(input("invalid generator"))?;
                Ok((name.clone(), x))
            }
            GeneratorSpec::Components { xi_t, xi_x, eta_u, eta_v } => {
                let p = |s: &String| parse(s).map_err(input("invalid generator component"));
                let x = VectorField::new(p(xi_t)?, p(xi_x)?, p(eta_u)?, p(eta_v)?)
                    .map_err(input("invalid generator"))?;
                Ok((x.to_string(), x))
            }
        }
    }

    pub fn substitution(&self) -> Result<Substitution, CliError> {
        let s = self.substitution.as_ref().ok_or_else(|| CliError::Input("missing substitution".into()))?;
        Substitution::parse(&s.phi, &s.psi).map_err(input("invalid substitution"))
    }

    pub fn vector(&self) -> Result<(Expr, Expr), CliError> {
        let v = self.vector.as_ref().ok_or_else(|| CliError::Input("missing vector".into()))?;
        let p = |s: &String| parse(s).map_err(input("invalid vector component"));
        Ok((p(&v.ct)?, p(&v.cx)?))
    }
}

fn bindings(params: &BTreeMap<String, Value>) -> Result<BTreeMap<Param, Rational>, CliError> {
    let mut out = BTreeMap::new();
    for (name, value) in params {
        let p = Param::from_name(name).ok_or_else(|| CliError::Input(format!("unknown parameter `{name}`")))?;
        let text = match value {
            Value::Number(n) if n.is_i64() => n.to_string(),
            Value::String(s) => s.clone(),
            other => {
                return Err(CliError::Input(format!(
                    "parameter `{name}` must be an integer or a rational string, got {other}"
                )))
            }
        };
        let q = parse(&text)
            .map_err(input("invalid parameter value"))?
            .constant_value()
            .ok_or_else(|| CliError::Input(format!("parameter `{name}` is not a rational number")))?;
        out.insert(p, q);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameters_accept_integers_and_rationals() {
        let doc = Document::from_json(r#"{"system": {"params": {"a": 1, "b": 0, "c": "1", "kappa": "1/3", "eps": 0, "lambda": 0, "sigma": 0}}}"#)
            .unwrap();
        let sys = doc.system(None, None).unwrap();
        assert!(sys.is_numeric());
        assert_eq!(sys.equations()[0], parse("u_t + v*u_x + (u + 1)*v_x + 1/3*v_xxx").unwrap());
    }

    #[test]
    fn generators_by_name_or_components() {
        let doc = Document::from_json(r#"{"generator": "2*X1 + X3"}"#).unwrap();
        assert_eq!(doc.generator().unwrap().0, "2*X1 + X3");
        let doc = Document::from_json(r#"{"generator": {"xi_x": "1"}}"#).unwrap();
        assert_eq!(doc.generator().unwrap().1, parse_combination("X5").unwrap());
    }

    #[test]
    fn bad_input_is_reported_as_such() {
        assert!(matches!(Document::from_json("{"), Err(CliError::Input(_))));
        let doc = Document::from_json(r#"{"system": {"params": {"mu": 1}}}"#).unwrap();
        assert!(matches!(doc.system(None, None), Err(CliError::Input(_))));
        let doc = Document::from_json(r#"{"system": {"params": {"a": 0.5}}}"#).unwrap();
        assert!(matches!(doc.system(None, None), Err(CliError::Input(_))));
        let doc = Document::from_json(r#"{"substitution": {"phi": "u +", "psi": "v"}}"#).unwrap();
        assert!(matches!(doc.substitution(), Err(CliError::Input(_))));
    }
}
