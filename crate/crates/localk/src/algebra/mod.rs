//! Localized algebras: filtered carriers, their elements and filtered homomorphisms.

mod hom;
mod space;

use std::fmt;
use std::sync::Arc;

pub use hom::{hom_apply, hom_section, FilteredHom, HomKind};
pub use space::PropagationSpace;

use crate::error::{Error, Result};
use crate::scalars::{check_modulus, quot_invert, quot_reduce, Poly, Rational};

pub const DEFAULT_MAX_LEVEL: u32 = 16;

/// Concrete carrier of a localized algebra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Carrier {
    /// The rationals with the trivial filtration: every element sits at the top level.
    Rationals,
    /// Kernels on a finite metric space filtered by support radius. Causal
    /// algebras only admit kernels supported on `i <= j`.
    Propagation { space: PropagationSpace, causal: bool },
    /// `Q[x]` or `Q[x]/(modulus)` filtered by degree against `degree_base`.
    Polynomial { modulus: Option<Poly>, degree_base: u32 },
}

/// Element payload; the owning algebra determines how it is interpreted.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Value {
    Scalar(Rational),
    /// Dense row-major kernel table; zero entries are implicit in every encoding.
    Kernel(Vec<Rational>),
    Poly(Poly),
}

struct AlgebraData {
    name: String,
    carrier: Carrier,
    max_level: u32,
    pair_levels: Vec<u32>,
}

/// Shared handle to a localized algebra instance.
#[derive(Clone)]
pub struct LocalizedAlgebra(Arc<AlgebraData>);

impl PartialEq for LocalizedAlgebra {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.max_level == other.0.max_level && self.0.carrier == other.0.carrier)
    }
}

impl Eq for LocalizedAlgebra {}

impl fmt::Debug for LocalizedAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.name)
    }
}

impl fmt::Display for LocalizedAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.name)
    }
}

impl LocalizedAlgebra {
    fn build(name: String, carrier: Carrier, max_level: u32) -> Self {
        let pair_levels = match &carrier {
            Carrier::Propagation { space, .. } => {
                let n = space.len();
                (0..n * n).map(|k| space.level_for_distance(space.dist(k / n, k % n), max_level)).collect()
            }
            _ => Vec::new(),
        };
        LocalizedAlgebra(Arc::new(AlgebraData { name, carrier, max_level, pair_levels }))
    }

    pub fn rationals(max_level: u32) -> Self {
        Self::build("Q".into(), Carrier::Rationals, max_level)
    }

    pub fn propagation(space: PropagationSpace, causal: bool, max_level: u32) -> Self {
        let name = format!(
            "{}Prop({} points, R={})",
            if causal { "causal " } else { "" },
            space.len(),
            space.radius_base()
        );
        Self::build(name, Carrier::Propagation { space, causal }, max_level)
    }

    /// `Q[x]` with `deg p <= degree_base / 2^mu` defining level `mu`.
    pub fn polynomial(degree_base: u32, max_level: u32) -> Self {
        Self::build("Q[x]".into(), Carrier::Polynomial { modulus: None, degree_base }, max_level)
    }

    pub fn quotient(modulus: Poly, degree_base: u32, max_level: u32) -> Result<Self> {
        check_modulus(&modulus)?;
        let name = format!("Q[x]/({})", modulus.pretty());
        Ok(Self::build(name, Carrier::Polynomial { modulus: Some(modulus), degree_base }, max_level))
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn carrier(&self) -> &Carrier {
        &self.0.carrier
    }

    pub fn max_level(&self) -> u32 {
        self.0.max_level
    }

    /// Short tag for the algebra family: `trivial`, `propagation` or `polynomial`.
    pub fn kind(&self) -> &'static str {
        match self.carrier() {
            Carrier::Rationals => "trivial",
            Carrier::Propagation { .. } => "propagation",
            Carrier::Polynomial { .. } => "polynomial",
        }
    }

    pub fn modulus(&self) -> Option<&Poly> {
        match self.carrier() {
            Carrier::Polynomial { modulus, .. } => modulus.as_ref(),
            _ => None,
        }
    }

    pub fn space(&self) -> Option<&PropagationSpace> {
        match self.carrier() {
            Carrier::Propagation { space, .. } => Some(space),
            _ => None,
        }
    }

    pub fn is_causal(&self) -> bool {
        matches!(self.carrier(), Carrier::Propagation { causal: true, .. })
    }

    pub fn check_same(&self, other: &LocalizedAlgebra) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::AlgebraMismatch { left: self.name().into(), right: other.name().into() })
        }
    }

    fn points(&self) -> usize {
        self.space().map_or(0, PropagationSpace::len)
    }

    pub fn zero(&self) -> Value {
        self.scalar(&Rational::zero())
    }

    pub fn one(&self) -> Value {
        self.scalar(&Rational::one())
    }

    /// The element `c * 1`.
    pub fn scalar(&self, c: &Rational) -> Value {
        match self.carrier() {
            Carrier::Rationals => Value::Scalar(c.clone()),
            Carrier::Propagation { space, .. } => {
                let n = space.len();
                let mut k = vec![Rational::zero(); n * n];
                for i in 0..n {
                    k[i * n + i] = c.clone();
                }
                Value::Kernel(k)
            }
            Carrier::Polynomial { .. } => Value::Poly(Poly::constant(c.clone())),
        }
    }

    /// Checks that a payload is a well-formed element of this algebra.
    pub fn validate(&self, v: &Value) -> Result<()> {
        let bad = |reason: String| Err(Error::InvalidElement { algebra: self.name().into(), reason });
        match (self.carrier(), v) {
            (Carrier::Rationals, Value::Scalar(_)) => Ok(()),
            (Carrier::Propagation { space, causal }, Value::Kernel(k)) => {
                let n = space.len();
                if k.len() != n * n {
                    return bad(format!("kernel table has {} entries, expected {}", k.len(), n * n));
                }
                if *causal {
                    if let Some(idx) = (0..n * n).find(|&t| t / n > t % n && !k[t].is_zero()) {
                        return bad(format!("causal kernel has support at ({}, {})", idx / n, idx % n));
                    }
                }
                Ok(())
            }
            (Carrier::Polynomial { modulus, .. }, Value::Poly(p)) => match modulus {
                Some(m) if p.degree().is_some_and(|d| d >= m.degree().unwrap_or(0)) => {
                    bad(format!("representative {} is not reduced", p.pretty()))
                }
                _ => Ok(()),
            },
            _ => bad("payload kind does not match the algebra".into()),
        }
    }

    /// Wraps a payload as an element, computing its degree.
    pub fn element(&self, v: Value) -> Result<AlgebraElement> {
        self.validate(&v)?;
        let degree = self.degree(&v);
        Ok(AlgebraElement { algebra: self.clone(), value: v, degree })
    }

    pub fn poly_element(&self, p: &Poly) -> Result<Value> {
        match self.modulus() {
            Some(m) => Ok(Value::Poly(p.rem(m)?)),
            None if matches!(self.carrier(), Carrier::Polynomial { .. }) => Ok(Value::Poly(p.clone())),
            None => Err(Error::InvalidElement {
                algebra: self.name().into(),
                reason: "not a polynomial algebra".into(),
            }),
        }
    }

    /// Builds a kernel from sparse `(row, col, value)` triples.
    pub fn kernel(&self, triples: &[(usize, usize, Rational)]) -> Result<Value> {
        let n = self.points();
        if n == 0 {
            return Err(Error::InvalidElement { algebra: self.name().into(), reason: "not a kernel algebra".into() });
        }
        let mut k = vec![Rational::zero(); n * n];
        for (i, j, c) in triples {
            if *i >= n || *j >= n {
                return Err(Error::InvalidElement {
                    algebra: self.name().into(),
                    reason: format!("point pair ({i}, {j}) out of range"),
                });
            }
            k[i * n + j] += c;
        }
        let v = Value::Kernel(k);
        self.validate(&v)?;
        Ok(v)
    }

    /// Largest filtration index containing `v`, capped at `max_level`.
    pub fn degree(&self, v: &Value) -> u32 {
        let top = self.max_level();
        match (self.carrier(), v) {
            (Carrier::Propagation { .. }, Value::Kernel(k)) => k
                .iter()
                .zip(&self.0.pair_levels)
                .filter(|(c, _)| !c.is_zero())
                .map(|(_, &l)| l)
                .min()
                .unwrap_or(top),
            (Carrier::Polynomial { degree_base, .. }, Value::Poly(p)) => match p.degree() {
                None | Some(0) => top,
                Some(d) => {
                    let (d, base) = (d as u64, *degree_base as u64);
                    let mut mu = 0;
                    while mu < top && mu < 63 && d << (mu + 1) <= base {
                        mu += 1;
                    }
                    mu
                }
            },
            _ => top,
        }
    }

    pub fn is_zero(&self, v: &Value) -> bool {
        match v {
            Value::Scalar(c) => c.is_zero(),
            Value::Kernel(k) => k.iter().all(Rational::is_zero),
            Value::Poly(p) => p.is_zero(),
        }
    }

    pub fn is_one(&self, v: &Value) -> bool {
        *v == self.one()
    }

    pub fn add(&self, a: &Value, b: &Value) -> Value {
        match (a, b) {
            (Value::Scalar(x), Value::Scalar(y)) => Value::Scalar(x + y),
            (Value::Kernel(x), Value::Kernel(y)) => Value::Kernel(x.iter().zip(y).map(|(s, t)| s + t).collect()),
            (Value::Poly(x), Value::Poly(y)) => Value::Poly(x.add(y)),
            _ => panic!("mixed payload kinds in {}", self.name()),
        }
    }

    pub fn neg(&self, a: &Value) -> Value {
        match a {
            Value::Scalar(x) => Value::Scalar(-x),
            Value::Kernel(x) => Value::Kernel(x.iter().map(|s| -s).collect()),
            Value::Poly(x) => Value::Poly(x.neg()),
        }
    }

    pub fn sub(&self, a: &Value, b: &Value) -> Value {
        self.add(a, &self.neg(b))
    }

    pub fn scale(&self, c: &Rational, a: &Value) -> Value {
        match a {
            Value::Scalar(x) => Value::Scalar(c * x),
            Value::Kernel(x) => Value::Kernel(x.iter().map(|s| c * s).collect()),
            Value::Poly(x) => Value::Poly(x.scale(c)),
        }
    }

    pub fn mul(&self, a: &Value, b: &Value) -> Value {
        let mut acc = self.zero();
        self.mul_acc(&mut acc, a, b);
        self.finish(acc)
    }

    /// `acc += a * b`. Polynomial accumulators stay unreduced until [`Self::finish`].
    pub fn mul_acc(&self, acc: &mut Value, a: &Value, b: &Value) {
        match (acc, a, b) {
            (Value::Scalar(s), Value::Scalar(x), Value::Scalar(y)) => {
                if !x.is_zero() && !y.is_zero() {
                    *s += &(x * y);
                }
            }
            (Value::Kernel(s), Value::Kernel(x), Value::Kernel(y)) => {
                let n = self.points();
                for i in 0..n {
                    for k in 0..n {
                        let xik = &x[i * n + k];
                        if xik.is_zero() {
                            continue;
                        }
                        for j in 0..n {
                            let ykj = &y[k * n + j];
                            if !ykj.is_zero() {
                                s[i * n + j] += &(xik * ykj);
                            }
                        }
                    }
                }
            }
            (Value::Poly(s), Value::Poly(x), Value::Poly(y)) => {
                if !x.is_zero() && !y.is_zero() {
                    *s = s.add(&x.mul(y));
                }
            }
            _ => panic!("mixed payload kinds in {}", self.name()),
        }
    }

    /// Normalizes an accumulator produced by [`Self::mul_acc`].
    pub fn finish(&self, v: Value) -> Value {
        match (self.modulus(), v) {
            (Some(m), Value::Poly(p)) => Value::Poly(p.rem(m).expect("monic modulus")),
            (_, v) => v,
        }
    }

    /// Convenience inverse for the instances where one is computable:
    /// nonzero rationals, units of a quotient ring, nonzero constants of
    /// `Q[x]` and invertible diagonal kernels.
    pub fn invert(&self, v: &Value) -> Result<Value> {
        match (self.carrier(), v) {
            (Carrier::Rationals, Value::Scalar(c)) => c.recip().map(Value::Scalar).map_err(|_| Error::NotInvertible),
            (Carrier::Polynomial { modulus: Some(m), .. }, Value::Poly(p)) => {
                Ok(Value::Poly(quot_invert(&quot_reduce(p, m)?)?.into_rep()))
            }
            (Carrier::Polynomial { modulus: None, .. }, Value::Poly(p)) if p.degree() == Some(0) => {
                Ok(Value::Poly(Poly::constant(p.coeff(0).recip()?)))
            }
            (Carrier::Propagation { space, .. }, Value::Kernel(k)) => {
                let n = space.len();
                let mut out = vec![Rational::zero(); n * n];
                for i in 0..n {
                    for j in 0..n {
                        if i != j && !k[i * n + j].is_zero() {
                            return Err(Error::NotInvertible);
                        }
                    }
                    out[i * n + i] = k[i * n + i].recip().map_err(|_| Error::NotInvertible)?;
                }
                Ok(Value::Kernel(out))
            }
            _ => Err(Error::NotInvertible),
        }
    }

    /// Canonical text encoding of a payload.
    pub fn encode(&self, v: &Value) -> String {
        match v {
            Value::Scalar(c) => c.to_string(),
            Value::Poly(p) => p.to_string(),
            Value::Kernel(k) => {
                let n = self.points();
                let parts: Vec<String> = (0..k.len())
                    .filter(|&t| !k[t].is_zero())
                    .map(|t| format!("[{}, {}, {}]", t / n, t % n, k[t]))
                    .collect();
                format!("[{}]", parts.join(", "))
            }
        }
    }

    /// Sparse `(row, col, value)` triples of a kernel payload.
    pub fn kernel_triples(&self, v: &Value) -> Vec<(usize, usize, Rational)> {
        match v {
            Value::Kernel(k) => {
                let n = self.points();
                (0..k.len()).filter(|&t| !k[t].is_zero()).map(|t| (t / n, t % n, k[t].clone())).collect()
            }
            _ => Vec::new(),
        }
    }
}

/// An element of a localized algebra together with its computed degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraElement {
    algebra: LocalizedAlgebra,
    value: Value,
    degree: u32,
}

impl AlgebraElement {
    pub fn algebra(&self) -> &LocalizedAlgebra {
        &self.algebra
    }

    pub fn value(&self) -> &Value {
        &self.value
    }

    pub fn into_value(self) -> Value {
        self.value
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    fn lift(&self, v: Value) -> AlgebraElement {
        let degree = self.algebra.degree(&v);
        AlgebraElement { algebra: self.algebra.clone(), value: v, degree }
    }

    pub fn mul(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.algebra.check_same(&other.algebra)?;
        Ok(self.lift(self.algebra.mul(&self.value, &other.value)))
    }

    pub fn add(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.algebra.check_same(&other.algebra)?;
        Ok(self.lift(self.algebra.add(&self.value, &other.value)))
    }

    pub fn sub(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.algebra.check_same(&other.algebra)?;
        Ok(self.lift(self.algebra.sub(&self.value, &other.value)))
    }

    pub fn scale(&self, c: &Rational) -> AlgebraElement {
        self.lift(self.algebra.scale(c, &self.value))
    }

    pub fn is_zero(&self) -> bool {
        self.algebra.is_zero(&self.value)
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.algebra.encode(&self.value))
    }
}

/// Multiplies two elements of the same algebra, recomputing the degree.
pub fn alg_mul(a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
    a.mul(b)
}

pub fn degree_of(a: &AlgebraElement) -> u32 {
    a.degree()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::q;

    fn line3() -> LocalizedAlgebra {
        LocalizedAlgebra::propagation(PropagationSpace::line(3, q(4, 1)).unwrap(), false, DEFAULT_MAX_LEVEL)
    }

    #[test]
    fn nearest_neighbor_kernels_compose_one_level_down() {
        let a = line3();
        let nn = a.kernel(&[(0, 1, q(1, 1)), (1, 2, q(1, 1)), (1, 0, q(1, 1)), (2, 1, q(1, 1))]).unwrap();
        let e = a.element(nn).unwrap();
        assert_eq!(e.degree(), 2);
        let sq = e.mul(&e).unwrap();
        assert_eq!(sq.degree(), 1);
        let reach = a.kernel_triples(sq.value()).iter().map(|t| t.0.abs_diff(t.1)).max();
        assert_eq!(reach, Some(2));
    }

    #[test]
    fn scalars_and_zero_at_top() {
        let a = line3();
        assert_eq!(a.degree(&a.one()), DEFAULT_MAX_LEVEL);
        assert_eq!(a.degree(&a.zero()), DEFAULT_MAX_LEVEL);
        assert_eq!(a.degree(&a.scalar(&q(-7, 3))), DEFAULT_MAX_LEVEL);
        let p = LocalizedAlgebra::polynomial(8, DEFAULT_MAX_LEVEL);
        assert_eq!(p.degree(&p.scalar(&q(5, 1))), DEFAULT_MAX_LEVEL);
        assert_eq!(p.degree(&Value::Poly(Poly::x())), 3);
        assert_eq!(p.degree(&Value::Poly(Poly::from_ints(&[0, 0, 0, 0, 0, 0, 0, 0, 0, 1]))), 0);
    }

    #[test]
    fn unit_multiplication_keeps_degree() {
        let p = LocalizedAlgebra::polynomial(8, DEFAULT_MAX_LEVEL);
        let x = p.element(Value::Poly(Poly::x())).unwrap();
        let one = p.element(p.one()).unwrap();
        assert_eq!(alg_mul(&one, &x).unwrap(), x);
    }

    #[test]
    fn mixed_algebras_rejected() {
        let a = line3().element(line3().one()).unwrap();
        let r = LocalizedAlgebra::rationals(DEFAULT_MAX_LEVEL);
        let b = r.element(r.one()).unwrap();
        assert!(matches!(a.mul(&b), Err(Error::AlgebraMismatch { .. })));
    }

    #[test]
    fn causal_support_enforced() {
        let a = LocalizedAlgebra::propagation(PropagationSpace::line(3, q(4, 1)).unwrap(), true, 16);
        assert!(a.kernel(&[(0, 1, q(1, 1))]).is_ok());
        assert!(a.kernel(&[(1, 0, q(1, 1))]).is_err());
    }

    #[test]
    fn quotient_reduces_products() {
        let a = LocalizedAlgebra::quotient(Poly::from_ints(&[-1, 0, 1]), 2, 16).unwrap();
        let x = Value::Poly(Poly::x());
        assert_eq!(a.mul(&x, &x), a.one());
        assert_eq!(a.invert(&x).unwrap(), x);
        assert!(a.validate(&Value::Poly(Poly::from_ints(&[0, 0, 1]))).is_err());
    }
}
