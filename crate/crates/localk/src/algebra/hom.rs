use std::fmt;

use super::{AlgebraElement, Carrier, LocalizedAlgebra, Value};
use crate::error::{Error, Result};
use crate::scalars::Rational;

/// How a filtered homomorphism acts on payloads.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HomKind {
    Identity,
    /// Reduction `Q[x](/m) -> Q[x]/(m')` with `m'` dividing `m`.
    Quotient,
    /// Restriction of causal kernels to an order-convex run of points.
    Restriction { points: Vec<usize> },
}

/// Unital, level-preserving homomorphism, optionally carrying a section.
#[derive(Clone, PartialEq, Eq)]
pub struct FilteredHom {
    source: LocalizedAlgebra,
    target: LocalizedAlgebra,
    kind: HomKind,
    has_section: bool,
}

impl fmt::Debug for FilteredHom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {} -> {}", self.kind, self.source, self.target)
    }
}

impl FilteredHom {
    /// Validates that the requested map is a unital, filtration-preserving
    /// ring homomorphism between the given algebras.
    pub fn new(source: LocalizedAlgebra, target: LocalizedAlgebra, kind: HomKind, has_section: bool) -> Result<Self> {
        let invalid = |s: String| Err(Error::InvalidHom(s));
        if source.max_level() != target.max_level() {
            return invalid("source and target must expose the same max level".into());
        }
        match (&kind, source.carrier(), target.carrier()) {
            (HomKind::Identity, _, _) => {
                if source != target {
                    return invalid("identity needs equal source and target".into());
                }
            }
            (
                HomKind::Quotient,
                Carrier::Polynomial { modulus: ms, degree_base: ds },
                Carrier::Polynomial { modulus: Some(mt), degree_base: dt },
            ) => {
                if ds != dt {
                    return invalid("quotient map needs equal degree bases to preserve levels both ways".into());
                }
                if let Some(ms) = ms {
                    if !ms.rem(mt)?.is_zero() {
                        return invalid(format!("{} does not divide {}", mt.pretty(), ms.pretty()));
                    }
                }
            }
            (
                HomKind::Restriction { points },
                Carrier::Propagation { space: sx, causal: cx },
                Carrier::Propagation { space: sy, causal: cy },
            ) => {
                if !cx || !cy {
                    return invalid("restriction is multiplicative only on causal kernel algebras".into());
                }
                if points.is_empty() || points.windows(2).any(|w| w[1] != w[0] + 1) {
                    return invalid("restriction points must form a nonempty increasing run".into());
                }
                if sx.subspace(points)? != *sy {
                    return invalid("target space is not the induced subspace".into());
                }
            }
            _ => return invalid(format!("{kind:?} cannot map {} to {}", source.name(), target.name())),
        }
        Ok(FilteredHom { source, target, kind, has_section })
    }

    pub fn source(&self) -> &LocalizedAlgebra {
        &self.source
    }

    pub fn target(&self) -> &LocalizedAlgebra {
        &self.target
    }

    pub fn kind(&self) -> &HomKind {
        &self.kind
    }

    pub fn is_surjective(&self) -> bool {
        self.has_section
    }

    pub(crate) fn with_section(&self) -> Self {
        FilteredHom { has_section: true, ..self.clone() }
    }

    /// Copy of this hom without its section.
    pub fn without_section(&self) -> Self {
        FilteredHom { has_section: false, ..self.clone() }
    }

    pub fn apply(&self, v: &Value) -> Value {
        match (&self.kind, v) {
            (HomKind::Identity, v) => v.clone(),
            (HomKind::Quotient, Value::Poly(p)) => {
                Value::Poly(p.rem(self.target.modulus().expect("quotient target")).expect("monic modulus"))
            }
            (HomKind::Restriction { points }, Value::Kernel(k)) => {
                let n = self.source.space().expect("kernel source").len();
                let mut out = Vec::with_capacity(points.len() * points.len());
                for &i in points {
                    for &j in points {
                        out.push(k[i * n + j].clone());
                    }
                }
                Value::Kernel(out)
            }
            _ => panic!("payload does not belong to {}", self.source.name()),
        }
    }

    /// Deterministic right inverse: canonical representatives for quotient
    /// maps, extension by zero for restrictions.
    pub fn section(&self, v: &Value) -> Result<Value> {
        if !self.has_section {
            return Err(Error::NoSection(format!("{self:?}")));
        }
        Ok(match (&self.kind, v) {
            (HomKind::Identity | HomKind::Quotient, v) => v.clone(),
            (HomKind::Restriction { points }, Value::Kernel(k)) => {
                let n = self.source.space().expect("kernel source").len();
                let m = points.len();
                let mut out = vec![Rational::zero(); n * n];
                for (a, &i) in points.iter().enumerate() {
                    for (b, &j) in points.iter().enumerate() {
                        out[i * n + j] = k[a * m + b].clone();
                    }
                }
                Value::Kernel(out)
            }
            _ => panic!("payload does not belong to {}", self.target.name()),
        })
    }

    /// The complement of the restricted points, as a diagonal kernel; used
    /// to extend matrices unitally.
    pub(crate) fn complement_unit(&self) -> Option<Value> {
        match &self.kind {
            HomKind::Identity => Some(self.source.zero()),
            HomKind::Restriction { points } => {
                let n = self.source.space()?.len();
                let mut out = vec![Rational::zero(); n * n];
                for i in (0..n).filter(|i| !points.contains(i)) {
                    out[i * n + i] = Rational::one();
                }
                Some(Value::Kernel(out))
            }
            HomKind::Quotient => None,
        }
    }
}

pub fn hom_apply(h: &FilteredHom, a: &AlgebraElement) -> Result<AlgebraElement> {
    h.source.check_same(a.algebra())?;
    h.target.element(h.apply(a.value()))
}

pub fn hom_section(h: &FilteredHom, b: &AlgebraElement) -> Result<AlgebraElement> {
    h.target.check_same(b.algebra())?;
    h.source.element(h.section(b.value())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::PropagationSpace;
    use crate::scalars::{q, Poly};

    #[test]
    fn quotient_map_examples() {
        let src = LocalizedAlgebra::polynomial(2, 16);
        let tgt = LocalizedAlgebra::quotient(Poly::from_ints(&[-1, 0, 1]), 2, 16).unwrap();
        let h = FilteredHom::new(src.clone(), tgt.clone(), HomKind::Quotient, true).unwrap();
        let x3 = src.element(Value::Poly(Poly::from_ints(&[0, 0, 0, 1]))).unwrap();
        let img = hom_apply(&h, &x3).unwrap();
        assert_eq!(img.value(), &Value::Poly(Poly::x()));
        assert!(img.degree() >= x3.degree());
        assert_eq!(h.apply(&src.one()), tgt.one());
        assert_eq!(hom_section(&h, &img).unwrap().value(), &Value::Poly(Poly::x()));
        assert_eq!(h.section(&tgt.one()).unwrap(), src.one());
    }

    #[test]
    fn restriction_and_extension() {
        let x = PropagationSpace::line(3, q(4, 1)).unwrap();
        let big = LocalizedAlgebra::propagation(x.clone(), true, 16);
        let small = LocalizedAlgebra::propagation(x.subspace(&[1, 2]).unwrap(), true, 16);
        let h = FilteredHom::new(big.clone(), small.clone(), HomKind::Restriction { points: vec![1, 2] }, true)
            .unwrap();
        let k = big.kernel(&[(0, 1, q(2, 1)), (1, 2, q(3, 1)), (2, 2, q(1, 1))]).unwrap();
        let r = h.apply(&k);
        assert_eq!(r, small.kernel(&[(0, 1, q(3, 1)), (1, 1, q(1, 1))]).unwrap());
        let ext = h.section(&r).unwrap();
        assert_eq!(ext, big.kernel(&[(1, 2, q(3, 1)), (2, 2, q(1, 1))]).unwrap());
        assert_eq!(h.apply(&ext), r);
        assert_eq!(h.apply(&big.one()), small.one());
    }

    #[test]
    fn restriction_needs_causal_convex_run() {
        let x = PropagationSpace::line(3, q(4, 1)).unwrap();
        let full = LocalizedAlgebra::propagation(x.clone(), false, 16);
        let sub = LocalizedAlgebra::propagation(x.subspace(&[0, 1]).unwrap(), false, 16);
        assert!(FilteredHom::new(full, sub, HomKind::Restriction { points: vec![0, 1] }, true).is_err());
        let big = LocalizedAlgebra::propagation(x.clone(), true, 16);
        let gap = LocalizedAlgebra::propagation(x.subspace(&[0, 2]).unwrap(), true, 16);
        assert!(FilteredHom::new(big, gap, HomKind::Restriction { points: vec![0, 2] }, true).is_err());
    }

    #[test]
    fn missing_section_is_an_error() {
        let a = LocalizedAlgebra::rationals(16);
        let h = FilteredHom::new(a.clone(), a.clone(), HomKind::Identity, false).unwrap();
        assert!(matches!(h.section(&a.one()), Err(Error::NoSection(_))));
    }
}
