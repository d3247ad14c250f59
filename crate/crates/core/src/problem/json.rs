//! JSON problem documents.
//!
//! ```json
//! {
//!   "dimension": 1,
//!   "potential": {"polynomial": [{"coeff": 0.5, "powers": [2]}]},
//!   "reference": {"constant": 1.0},
//!   "minimal_set": [{"point": [0.0]}],
//!   "epsilon": 1.0,
//!   "domain": {"lo": [-8.0], "hi": [8.0]}
//! }
//! ```
//!
//! A `{"builtin": name}` potential fills in every field left out from the
//! named builtin family.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::builtin;
use super::{Component, Domain, GibbsFamily, MinimalSetSpec, Polynomial, ScalarField};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDoc {
    #[serde(default)]
    pub name: Option<String>,
    pub dimension: Option<usize>,
    pub potential: PotentialDoc,
    #[serde(default)]
    pub reference: Option<ReferenceDoc>,
    #[serde(default)]
    pub minimal_set: Option<Vec<ComponentDoc>>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub domain: Option<DomainDoc>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialDoc {
    Builtin(String),
    Polynomial(Vec<TermDoc>),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceDoc {
    /// Only `"lebesgue"` (constant 1) is recognised.
    Builtin(String),
    Constant(f64),
    /// `π₀ = exp(polynomial)`.
    ExpPolynomial(Vec<TermDoc>),
}

#[derive(Clone, Debug, Deserialize)]
pub struct TermDoc {
    pub coeff: f64,
    pub powers: Vec<u32>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentDoc {
    Point(Vec<f64>),
    Sphere { center: Vec<f64>, radius: f64 },
}

#[derive(Clone, Debug, Deserialize)]
pub struct DomainDoc {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

fn to_t<T: Real>(v: &[f64]) -> Vec<T> {
    v.iter().map(|&x| T::lit(x)).collect()
}

fn polynomial<T: Real>(dim: usize, terms: &[TermDoc]) -> Result<Polynomial<T>> {
    Polynomial::new(
        dim,
        terms.iter().map(|t| (T::lit(t.coeff), t.powers.clone())).collect(),
    )
}

impl ProblemDoc {
    pub fn into_family<T: Real>(self) -> Result<GibbsFamily<T>> {
        let base: Option<GibbsFamily<T>> = match &self.potential {
            PotentialDoc::Builtin(name) => Some(builtin::by_name(name, self.dimension)?),
            PotentialDoc::Polynomial(_) => None,
        };
        let dim = match (&base, self.dimension) {
            (Some(b), Some(d)) if b.dim() != d => {
                return Err(Error::InvalidProblem(format!(
                    "builtin has dimension {}, document says {d}",
                    b.dim()
                )))
            }
            (Some(b), _) => b.dim(),
            (None, Some(d)) => d,
            (None, None) => {
                return Err(Error::InvalidProblem("dimension is required".into()));
            }
        };
        let missing = |what: &str| Error::InvalidProblem(format!("{what} is required for a polynomial potential"));

        let ell = match (&self.potential, &base) {
            (PotentialDoc::Polynomial(terms), _) => polynomial::<T>(dim, terms)?.into_field("polynomial"),
            (PotentialDoc::Builtin(_), Some(b)) => b.ell().clone(),
            (PotentialDoc::Builtin(_), None) => unreachable!(),
        };
        let pi0 = match &self.reference {
            None => match &base {
                Some(b) => b.pi0().clone(),
                None => ScalarField::constant(dim, T::one()),
            },
            Some(ReferenceDoc::Builtin(name)) if name == "lebesgue" => ScalarField::constant(dim, T::one()),
            Some(ReferenceDoc::Builtin(name)) => {
                return Err(Error::InvalidProblem(format!("unknown reference {name}")))
            }
            Some(ReferenceDoc::Constant(c)) => {
                if !(*c > 0.0) {
                    return Err(Error::InvalidProblem("reference constant must be positive".into()));
                }
                ScalarField::constant(dim, T::lit(*c))
            }
            Some(ReferenceDoc::ExpPolynomial(terms)) => {
                let p = polynomial::<T>(dim, terms)?;
                ScalarField::new(dim, "exp(polynomial)", move |x: &[T]| p.eval(x).exp())
            }
        };
        let minimal_set = match (self.minimal_set, &base) {
            (Some(items), _) => {
                let comps = items
                    .into_iter()
                    .map(|c| match c {
                        ComponentDoc::Point(p) => Component::point(to_t(&p)),
                        ComponentDoc::Sphere { center, radius } => Component::sphere(to_t(&center), T::lit(radius)),
                    })
                    .collect();
                MinimalSetSpec::new(comps)
            }
            (None, Some(b)) => b.minimal_set().clone(),
            (None, None) => return Err(missing("minimal_set")),
        };
        let epsilon = match (self.epsilon, &base) {
            (Some(e), _) => T::lit(e),
            (None, Some(b)) => b.epsilon(),
            (None, None) => return Err(missing("epsilon")),
        };
        let domain = match (self.domain, &base) {
            (Some(d), _) => Domain::new(to_t(&d.lo), to_t(&d.hi)),
            (None, Some(b)) => b.domain().clone(),
            (None, None) => return Err(missing("domain")),
        };
        let name = self
            .name
            .or_else(|| base.as_ref().map(|b| b.name().to_string()))
            .unwrap_or_else(|| "custom".to_string());
        GibbsFamily::new(name, ell, pi0, minimal_set, epsilon, domain)
    }
}

pub fn parse_problem<T: Real>(text: &str) -> Result<GibbsFamily<T>> {
    let doc: ProblemDoc = serde_json::from_str(text)?;
    doc.into_family()
}

pub fn load_problem<T: Real>(path: impl AsRef<Path>) -> Result<GibbsFamily<T>> {
    let text = std::fs::read_to_string(path)?;
    parse_problem(&text)
}

/// A builtin name, or else a path to a JSON problem document.
pub fn resolve_problem<T: Real>(spec: &str, dim: Option<usize>) -> Result<GibbsFamily<T>> {
    if builtin::BUILTIN_NAMES.contains(&spec) {
        return builtin::by_name(spec, dim);
    }
    let path = Path::new(spec);
    if path.exists() {
        load_problem(path)
    } else {
        Err(Error::UnknownProblem(spec.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_problem_round_trip() {
        let fam: GibbsFamily<f64> = parse_problem(
            r#"{
                "dimension": 1,
                "potential": {"polynomial": [{"coeff": 0.5, "powers": [2]}]},
                "reference": {"constant": 2.0},
                "minimal_set": [{"point": [0.0]}],
                "epsilon": 1.0,
                "domain": {"lo": [-8.0], "hi": [8.0]}
            }"#,
        )
        .unwrap();
        assert_eq!(fam.dim(), 1);
        assert!((fam.ell().value(&[2.0]) - 2.0).abs() < 1e-15);
        assert_eq!(fam.pi0().value(&[0.3]), 2.0);
        assert!(fam.validate().unwrap().passed);
    }

    #[test]
    fn builtin_with_overrides() {
        let fam: GibbsFamily<f64> = parse_problem(
            r#"{"dimension": 2, "potential": {"builtin": "volcano"}, "epsilon": 0.25,
                "reference": {"exp_polynomial": [{"coeff": 0.3, "powers": [1, 0]}]}}"#,
        )
        .unwrap();
        assert_eq!(fam.epsilon(), 0.25);
        assert!((fam.pi0().value(&[1.0, 0.0]) - 0.3f64.exp()).abs() < 1e-14);
        assert!(fam.components()[0].as_sphere().is_some());
    }

    #[test]
    fn sphere_component_parses() {
        let fam: GibbsFamily<f64> = parse_problem(
            r#"{"dimension": 2,
                "potential": {"polynomial": [
                    {"coeff": 0.5, "powers": [4, 0]}, {"coeff": 1.0, "powers": [2, 2]},
                    {"coeff": 0.5, "powers": [0, 4]}, {"coeff": -1.0, "powers": [2, 0]},
                    {"coeff": -1.0, "powers": [0, 2]}, {"coeff": 0.5, "powers": [0, 0]}]},
                "minimal_set": [{"sphere": {"center": [0.0, 0.0], "radius": 1.0}}],
                "epsilon": 0.5,
                "domain": {"lo": [-2.5, -2.5], "hi": [2.5, 2.5]}}"#,
        )
        .unwrap();
        // (‖x‖² − 1)²/2: normal second derivative 4 on the unit circle
        let h = fam.normal_hessian(0, &[0.0, 1.0]).unwrap();
        assert!((h.get(0, 0) - 4.0).abs() < 1e-8);
    }

    #[test]
    fn missing_fields_are_errors() {
        let r: Result<GibbsFamily<f64>> = parse_problem(
            r#"{"dimension": 1, "potential": {"polynomial": [{"coeff": 0.5, "powers": [2]}]}}"#,
        );
        assert!(matches!(r, Err(Error::InvalidProblem(_))));
        let r: Result<GibbsFamily<f64>> = parse_problem(r#"{"potential": {"builtin": "nope"}}"#);
        assert!(matches!(r, Err(Error::UnknownProblem(_))));
    }
}
