//! Declarative spec documents: algebras, diagrams, matrices and command
//! parameters, validated before any computation.

use std::collections::BTreeMap;

use localk::algebra::{Carrier, FilteredHom, HomKind, LocalizedAlgebra, PropagationSpace, Value, DEFAULT_MAX_LEVEL};
use localk::matrix::{FilteredMatrix, InvertibleCert};
use localk::mayer_vietoris::MVDiagram;
use localk::scalars::{Poly, Rational};
use serde::Deserialize;
use serde_json::Value as Json;

use crate::CliError;

fn default_level() -> u32 {
    DEFAULT_MAX_LEVEL
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    #[serde(default)]
    pub algebra: Option<AlgebraSpec>,
    #[serde(default)]
    pub diagram: Option<DiagramSpec>,
    #[serde(default)]
    pub matrices: BTreeMap<String, MatrixSpec>,
    #[serde(default)]
    pub command: CommandSpec,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlgebraSpec {
    Rationals {
        #[serde(default = "default_level")]
        max_level: u32,
    },
    Polynomial {
        degree_base: u32,
        #[serde(default = "default_level")]
        max_level: u32,
    },
    Quotient {
        modulus: Vec<String>,
        degree_base: u32,
        #[serde(default = "default_level")]
        max_level: u32,
    },
    Propagation {
        /// Points `0..n` on a line; ignored when `distances` is given.
        #[serde(default)]
        points: Option<usize>,
        #[serde(default)]
        distances: Option<Vec<Vec<String>>>,
        radius: String,
        #[serde(default = "yes")]
        causal: bool,
        #[serde(default = "default_level")]
        max_level: u32,
    },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiagramSpec {
    /// `Q[x] -> Q[x]/(modulus)` on both legs.
    Quotient {
        modulus: Vec<String>,
        degree_base: u32,
        #[serde(default = "default_level")]
        max_level: u32,
        #[serde(default = "yes")]
        section: bool,
    },
    /// Causal kernels on a line covered by two runs of points.
    Cover {
        points: usize,
        radius: String,
        first: Vec<usize>,
        second: Vec<usize>,
        #[serde(default = "default_level")]
        max_level: u32,
        #[serde(default = "yes")]
        section: bool,
    },
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Over {
    Algebra,
    First,
    Second,
    Overlap,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    pub over: Over,
    pub rows: Vec<Vec<Json>>,
    #[serde(default)]
    pub inverse: Option<Vec<Vec<Json>>>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommandSpec {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub max_size: Option<usize>,
    /// Matrix names for the boundary command.
    #[serde(default)]
    pub u: Option<String>,
    #[serde(default)]
    pub lift_a: Option<String>,
    #[serde(default)]
    pub lift_b: Option<String>,
    #[serde(default)]
    pub zeros: Option<usize>,
    /// Supplied trivialization of a boundary, checked by the exactness command.
    #[serde(default)]
    pub witness: Option<WitnessSpec>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessSpec {
    pub u: String,
    /// First leg of the double conjugator; the second leg is the identity.
    pub conjugator: String,
}

fn spec_err(msg: impl Into<String>) -> CliError {
    CliError::Spec(msg.into())
}

fn lib_err(context: &str) -> impl Fn(localk::Error) -> CliError + '_ {
    move |e| CliError::Spec(format!("{context}: {e}"))
}

pub fn parse_document(text: &str) -> Result<SpecDocument, CliError> {
    serde_json::from_str(text).map_err(|e| spec_err(format!("malformed spec: {e}")))
}

fn rational(s: &str) -> Result<Rational, CliError> {
    s.parse().map_err(lib_err("rational"))
}

fn poly(coeffs: &[String]) -> Result<Poly, CliError> {
    Ok(Poly::new(coeffs.iter().map(|c| rational(c)).collect::<Result<_, _>>()?))
}

impl AlgebraSpec {
    pub fn build(&self) -> Result<LocalizedAlgebra, CliError> {
        Ok(match self {
            AlgebraSpec::Rationals { max_level } => LocalizedAlgebra::rationals(*max_level),
            AlgebraSpec::Polynomial { degree_base, max_level } => LocalizedAlgebra::polynomial(*degree_base, *max_level),
            AlgebraSpec::Quotient { modulus, degree_base, max_level } => {
                LocalizedAlgebra::quotient(poly(modulus)?, *degree_base, *max_level).map_err(lib_err("algebra"))?
            }
            AlgebraSpec::Propagation { points, distances, radius, causal, max_level } => {
                let radius = rational(radius)?;
                let space = match (distances, points) {
                    (Some(rows), _) => {
                        let dist = rows
                            .iter()
                            .map(|r| r.iter().map(|s| rational(s)).collect::<Result<Vec<_>, _>>())
                            .collect::<Result<Vec<_>, _>>()?;
                        let labels = (0..dist.len()).map(|i| i.to_string()).collect();
                        PropagationSpace::new(labels, dist, radius)
                    }
                    (None, Some(n)) => PropagationSpace::line(*n, radius),
                    (None, None) => return Err(spec_err("propagation algebra needs points or distances")),
                }
                .map_err(lib_err("space"))?;
                LocalizedAlgebra::propagation(space, *causal, *max_level)
            }
        })
    }
}

/// Positions of `sub` inside `whole`.
fn positions(sub: &[usize], whole: &[usize]) -> Vec<usize> {
    sub.iter().filter_map(|p| whole.iter().position(|q| q == p)).collect()
}

impl DiagramSpec {
    pub fn build(&self) -> Result<MVDiagram, CliError> {
        let err = lib_err("diagram");
        match self {
            DiagramSpec::Quotient { modulus, degree_base, max_level, section } => {
                let ring = LocalizedAlgebra::polynomial(*degree_base, *max_level);
                let overlap = LocalizedAlgebra::quotient(poly(modulus)?, *degree_base, *max_level).map_err(&err)?;
                let j = FilteredHom::new(ring, overlap, HomKind::Quotient, *section).map_err(&err)?;
                MVDiagram::new(j.clone(), j).map_err(err)
            }
            DiagramSpec::Cover { points, radius, first, second, max_level, section } => {
                let line = PropagationSpace::line(*points, rational(radius)?).map_err(&err)?;
                let overlap_points: Vec<usize> = first.iter().copied().filter(|p| second.contains(p)).collect();
                if overlap_points.is_empty() {
                    return Err(spec_err("cover parts do not overlap"));
                }
                let part = |pts: &[usize]| -> Result<LocalizedAlgebra, CliError> {
                    Ok(LocalizedAlgebra::propagation(line.subspace(pts).map_err(&err)?, true, *max_level))
                };
                let (left, right, overlap) = (part(first)?, part(second)?, part(&overlap_points)?);
                let leg = |src: LocalizedAlgebra, pts: &[usize]| {
                    let kind = HomKind::Restriction { points: positions(&overlap_points, pts) };
                    FilteredHom::new(src, overlap.clone(), kind, *section).map_err(&err)
                };
                MVDiagram::new(leg(left, first)?, leg(right, second)?).map_err(&err)
            }
        }
    }
}

fn element(alg: &LocalizedAlgebra, v: &Json) -> Result<Value, CliError> {
    let bad = || spec_err(format!("cannot read {v} as an element of {}", alg.name()));
    let as_rational = |v: &Json| -> Result<Rational, CliError> { rational(v.as_str().ok_or_else(bad)?) };
    match alg.carrier() {
        Carrier::Rationals => Ok(Value::Scalar(as_rational(v)?)),
        Carrier::Polynomial { .. } => {
            let coeffs = match v {
                Json::String(_) => vec![as_rational(v)?],
                Json::Array(xs) => xs.iter().map(as_rational).collect::<Result<_, _>>()?,
                _ => return Err(bad()),
            };
            alg.poly_element(&Poly::new(coeffs)).map_err(lib_err("element"))
        }
        Carrier::Propagation { .. } => {
            let triples = v
                .as_array()
                .ok_or_else(bad)?
                .iter()
                .map(|t| match t.as_array().map(Vec::as_slice) {
                    Some([i, j, c]) => Ok((
                        i.as_u64().ok_or_else(bad)? as usize,
                        j.as_u64().ok_or_else(bad)? as usize,
                        as_rational(c)?,
                    )),
                    _ => Err(bad()),
                })
                .collect::<Result<Vec<_>, _>>()?;
            alg.kernel(&triples).map_err(lib_err("kernel"))
        }
    }
}

fn matrix(alg: &LocalizedAlgebra, rows: &[Vec<Json>]) -> Result<FilteredMatrix, CliError> {
    let rows = rows
        .iter()
        .map(|r| r.iter().map(|v| element(alg, v)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    FilteredMatrix::from_rows(alg, rows).map_err(lib_err("matrix"))
}

/// Fully validated document.
#[derive(Clone, Debug)]
pub struct LoadedSpec {
    pub doc: SpecDocument,
    pub algebra: Option<LocalizedAlgebra>,
    pub diagram: Option<MVDiagram>,
}

impl LoadedSpec {
    pub fn load(text: &str) -> Result<Self, CliError> {
        let doc = parse_document(text)?;
        let algebra = doc.algebra.as_ref().map(AlgebraSpec::build).transpose()?;
        let diagram = doc.diagram.as_ref().map(DiagramSpec::build).transpose()?;
        let spec = LoadedSpec { doc, algebra, diagram };
        for name in spec.doc.matrices.keys() {
            spec.matrix(name)?;
        }
        Ok(spec)
    }

    fn algebra_for(&self, over: Over) -> Result<&LocalizedAlgebra, CliError> {
        let diagram = || self.diagram.as_ref().ok_or_else(|| spec_err("matrix over a leg needs a diagram"));
        Ok(match over {
            Over::Algebra => self.algebra.as_ref().ok_or_else(|| spec_err("matrix over the algebra needs an algebra"))?,
            Over::First => diagram()?.lambda1(),
            Over::Second => diagram()?.lambda2(),
            Over::Overlap => diagram()?.lambda_prime(),
        })
    }

    fn entry(&self, name: &str) -> Result<&MatrixSpec, CliError> {
        self.doc.matrices.get(name).ok_or_else(|| spec_err(format!("unknown matrix {name:?}")))
    }

    pub fn matrix(&self, name: &str) -> Result<FilteredMatrix, CliError> {
        let m = self.entry(name)?;
        let alg = self.algebra_for(m.over)?;
        let out = matrix(alg, &m.rows)?;
        if let Some(inv) = &m.inverse {
            let inv = matrix(alg, inv)?;
            InvertibleCert::new(out.clone(), inv).map_err(lib_err(name))?;
        }
        Ok(out)
    }

    /// Matrix with its certified inverse; `1 x 1` inverses are computed.
    pub fn invertible(&self, name: &str) -> Result<InvertibleCert, CliError> {
        let m = self.entry(name)?;
        let alg = self.algebra_for(m.over)?;
        let a = matrix(alg, &m.rows)?;
        let inv = match &m.inverse {
            Some(rows) => matrix(alg, rows)?,
            None if a.size() == 1 => {
                let v = alg.invert(a.get(0, 0)).map_err(lib_err(name))?;
                FilteredMatrix::from_rows(alg, vec![vec![v]]).map_err(lib_err(name))?
            }
            None => return Err(spec_err(format!("matrix {name:?} needs an inverse"))),
        };
        InvertibleCert::new(a, inv).map_err(lib_err(name))
    }

    pub fn over(&self, name: &str) -> Result<Over, CliError> {
        Ok(self.entry(name)?.over)
    }

    pub fn require_algebra(&self) -> Result<&LocalizedAlgebra, CliError> {
        self.algebra.as_ref().ok_or_else(|| spec_err("spec has no algebra section"))
    }

    pub fn require_diagram(&self) -> Result<&MVDiagram, CliError> {
        self.diagram.as_ref().ok_or_else(|| spec_err("spec has no diagram section"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_zero_denominator() {
        let text = r#"{"algebra": {"kind": "rationals"}, "matrices": {"M": {"over": "algebra", "rows": [["1/0"]]}}}"#;
        assert!(matches!(LoadedSpec::load(text), Err(CliError::Spec(_))));
    }

    #[test]
    fn reads_each_encoding() {
        let text = r#"{
            "diagram": {"kind": "cover", "points": 5, "radius": "4", "first": [0, 1, 2], "second": [2, 3, 4]},
            "matrices": {"K": {"over": "first", "rows": [[[[0, 2, "1/2"], [2, 2, "3"]]]]}}
        }"#;
        let spec = LoadedSpec::load(text).unwrap();
        assert_eq!(spec.matrix("K").unwrap().size(), 1);
        let text = r#"{
            "diagram": {"kind": "quotient", "modulus": ["-1", "0", "1"], "degree_base": 8},
            "matrices": {"U": {"over": "overlap", "rows": [[["0", "1"]]]}}
        }"#;
        let spec = LoadedSpec::load(text).unwrap();
        let u = spec.invertible("U").unwrap();
        assert_eq!(u.matrix(), u.inverse());
    }

    #[test]
    fn rejects_unknown_fields() {
        assert!(parse_document(r#"{"algebra": {"kind": "rationals"}, "extra": 1}"#).is_err());
        assert!(parse_document(r#"{"command": {"sed": 1}}"#).is_err());
    }

    #[test]
    fn rejects_non_inverse() {
        let text = r#"{"algebra": {"kind": "rationals"},
            "matrices": {"M": {"over": "algebra", "rows": [["2"]], "inverse": [["1/3"]]}}}"#;
        assert!(LoadedSpec::load(text).is_err());
    }
}
