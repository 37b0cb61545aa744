//! Mayer-Vietoris squares, double matrices over the pullback, and gluing.
//!
//! The pullback algebra is never built; a [`DoubleMatrix`] is a pair of
//! matrices over the two legs whose images in the overlap agree exactly.

mod glue;

pub use glue::{
    glue_idempotents, glue_invertibles, glue_k0_classes, glue_k1_classes, lemma28_glue, lift_o_element,
    lift_o_map, normalize_difference, trivializer, GluedIdempotent, GluedK0, GluedK1, K0Witness, K1Witness, OLift,
};

use crate::algebra::{FilteredHom, HomKind, LocalizedAlgebra, PropagationSpace};
use crate::error::{Error, Result};
use crate::matrix::{FilteredMatrix, InvertibleCert};
use crate::scalars::{q, Poly};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SurjectiveLeg {
    First,
    Second,
    Both,
}

/// Commuting square `j1: A1 -> A'`, `j2: A2 -> A'` with at least one surjective leg.
#[derive(Clone, Debug)]
pub struct MVDiagram {
    j1: FilteredHom,
    j2: FilteredHom,
}

impl MVDiagram {
    pub fn new(j1: FilteredHom, j2: FilteredHom) -> Result<Self> {
        j1.target().check_same(j2.target())?;
        if !j1.is_surjective() && !j2.is_surjective() {
            return Err(Error::InvalidHom("neither leg is surjective".into()));
        }
        Ok(MVDiagram { j1, j2 })
    }

    pub fn lambda1(&self) -> &LocalizedAlgebra {
        self.j1.source()
    }

    pub fn lambda2(&self) -> &LocalizedAlgebra {
        self.j2.source()
    }

    pub fn lambda_prime(&self) -> &LocalizedAlgebra {
        self.j1.target()
    }

    pub fn j1(&self) -> &FilteredHom {
        &self.j1
    }

    pub fn j2(&self) -> &FilteredHom {
        &self.j2
    }

    pub fn leg(&self, k: usize) -> &FilteredHom {
        if k == 1 {
            &self.j1
        } else {
            &self.j2
        }
    }

    pub fn surjective_leg(&self) -> SurjectiveLeg {
        match (self.j1.is_surjective(), self.j2.is_surjective()) {
            (true, true) => SurjectiveLeg::Both,
            (true, false) => SurjectiveLeg::First,
            _ => SurjectiveLeg::Second,
        }
    }

    /// Both legs are the same map out of the same algebra.
    pub fn legs_identical(&self) -> bool {
        self.j1 == self.j2
    }

    pub fn require_surjective(&self, k: usize, stage: &str) -> Result<()> {
        if self.leg(k).is_surjective() {
            Ok(())
        } else {
            Err(Error::precondition(stage, format!("leg j{k} has no section")))
        }
    }
}

/// `Q[x] -> Q[x]/(x^2 - 1)` on both legs, with canonical-representative sections.
pub fn quotient_diagram(degree_base: u32, max_level: u32) -> MVDiagram {
    let ring = LocalizedAlgebra::polynomial(degree_base, max_level);
    let modulus = Poly::from_ints(&[-1, 0, 1]);
    let overlap = LocalizedAlgebra::quotient(modulus, degree_base, max_level).expect("monic modulus");
    let j = FilteredHom::new(ring, overlap, HomKind::Quotient, true).expect("valid quotient map");
    MVDiagram::new(j.clone(), j).expect("surjective legs")
}

/// Causal kernels on the line `0..=4` (radius base 4), covered by `{0,1,2}`
/// and `{2,3,4}` overlapping in `{2}`; the legs restrict to the overlap.
pub fn propagation_cover(max_level: u32) -> MVDiagram {
    let line = PropagationSpace::line(5, q(4, 1)).expect("valid line");
    let part = |points: &[usize]| {
        LocalizedAlgebra::propagation(line.subspace(points).expect("valid subspace"), true, max_level)
    };
    let (left, right, overlap) = (part(&[0, 1, 2]), part(&[2, 3, 4]), part(&[2]));
    let j1 = FilteredHom::new(left, overlap.clone(), HomKind::Restriction { points: vec![2] }, true);
    let j2 = FilteredHom::new(right, overlap, HomKind::Restriction { points: vec![0] }, true);
    MVDiagram::new(j1.expect("valid restriction"), j2.expect("valid restriction")).expect("surjective legs")
}

/// Pair of matrices over the two legs with equal images in the overlap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoubleMatrix {
    m1: FilteredMatrix,
    m2: FilteredMatrix,
}

/// Validates the agreement `j1(m1) = j2(m2)`, reporting the first mismatch.
pub fn make_double(m1: FilteredMatrix, m2: FilteredMatrix, diagram: &MVDiagram) -> Result<DoubleMatrix> {
    m1.algebra().check_same(diagram.lambda1())?;
    m2.algebra().check_same(diagram.lambda2())?;
    if m1.size() != m2.size() {
        return Err(Error::SizeMismatch(format!("legs of sizes {} and {}", m1.size(), m2.size())));
    }
    let (a, b) = (m1.apply_hom(diagram.j1())?, m2.apply_hom(diagram.j2())?);
    if let Some((row, col, left, right)) = a.first_difference(&b) {
        return Err(Error::NotDouble { row, col, left, right });
    }
    Ok(DoubleMatrix { m1, m2 })
}

impl DoubleMatrix {
    pub fn identity(diagram: &MVDiagram, n: usize) -> Self {
        DoubleMatrix {
            m1: FilteredMatrix::identity(diagram.lambda1(), n),
            m2: FilteredMatrix::identity(diagram.lambda2(), n),
        }
    }

    pub fn projector(diagram: &MVDiagram, zeros: usize, ones: usize) -> Self {
        DoubleMatrix {
            m1: FilteredMatrix::projector(diagram.lambda1(), zeros, ones),
            m2: FilteredMatrix::projector(diagram.lambda2(), zeros, ones),
        }
    }

    pub fn m1(&self) -> &FilteredMatrix {
        &self.m1
    }

    pub fn m2(&self) -> &FilteredMatrix {
        &self.m2
    }

    pub fn leg(&self, k: usize) -> &FilteredMatrix {
        if k == 1 {
            &self.m1
        } else {
            &self.m2
        }
    }

    pub fn size(&self) -> usize {
        self.m1.size()
    }

    pub fn level(&self) -> u32 {
        self.m1.level().min(self.m2.level())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        Ok(DoubleMatrix { m1: self.m1.try_mul(&other.m1)?, m2: self.m2.try_mul(&other.m2)? })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(DoubleMatrix { m1: self.m1.try_add(&other.m1)?, m2: self.m2.try_add(&other.m2)? })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(DoubleMatrix { m1: self.m1.try_sub(&other.m1)?, m2: self.m2.try_sub(&other.m2)? })
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        Ok(DoubleMatrix { m1: self.m1.direct_sum(&other.m1)?, m2: self.m2.direct_sum(&other.m2)? })
    }

    pub fn pad_zero(&self, k: usize) -> Self {
        DoubleMatrix { m1: self.m1.pad_zero(k), m2: self.m2.pad_zero(k) }
    }

    pub fn pad_one(&self, k: usize) -> Self {
        DoubleMatrix { m1: self.m1.pad_one(k), m2: self.m2.pad_one(k) }
    }

    pub fn is_idempotent(&self) -> bool {
        self.mul(self).is_ok_and(|sq| &sq == self)
    }

    /// Re-checks the agreement constraint.
    pub fn verify(&self, diagram: &MVDiagram) -> Result<()> {
        make_double(self.m1.clone(), self.m2.clone(), diagram).map(drop)
    }

    /// Image of the leg matrices in the overlap (equal on both legs).
    pub fn image(&self, diagram: &MVDiagram) -> Result<FilteredMatrix> {
        self.m1.apply_hom(diagram.j1())
    }
}

/// Double matrix together with its double inverse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoubleInvertible {
    m: DoubleMatrix,
    inv: DoubleMatrix,
}

impl DoubleInvertible {
    pub fn new(m: DoubleMatrix, inv: DoubleMatrix) -> Result<Self> {
        for k in [1, 2] {
            InvertibleCert::new(m.leg(k).clone(), inv.leg(k).clone())?;
        }
        Ok(DoubleInvertible { m, inv })
    }

    pub fn from_legs(a: InvertibleCert, b: InvertibleCert, diagram: &MVDiagram) -> Result<Self> {
        let m = make_double(a.matrix().clone(), b.matrix().clone(), diagram)?;
        let inv = make_double(a.inverse().clone(), b.inverse().clone(), diagram)?;
        Ok(DoubleInvertible { m, inv })
    }

    pub fn identity(diagram: &MVDiagram, n: usize) -> Self {
        DoubleInvertible { m: DoubleMatrix::identity(diagram, n), inv: DoubleMatrix::identity(diagram, n) }
    }

    pub fn matrix(&self) -> &DoubleMatrix {
        &self.m
    }

    pub fn inverse(&self) -> &DoubleMatrix {
        &self.inv
    }

    pub fn inv(&self) -> Self {
        DoubleInvertible { m: self.inv.clone(), inv: self.m.clone() }
    }

    pub fn size(&self) -> usize {
        self.m.size()
    }

    pub fn level(&self) -> u32 {
        self.m.level().min(self.inv.level())
    }

    /// Invertible certificate of leg `k`.
    pub fn leg(&self, k: usize) -> InvertibleCert {
        InvertibleCert::trusted(self.m.leg(k).clone(), self.inv.leg(k).clone())
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        Ok(DoubleInvertible { m: self.m.mul(&other.m)?, inv: other.inv.mul(&self.inv)? })
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        Ok(DoubleInvertible { m: self.m.direct_sum(&other.m)?, inv: self.inv.direct_sum(&other.inv)? })
    }

    pub fn pad_one(&self, k: usize) -> Self {
        DoubleInvertible { m: self.m.pad_one(k), inv: self.inv.pad_one(k) }
    }

    /// `g p g^-1` computed legwise.
    pub fn conjugate(&self, p: &DoubleMatrix) -> Result<DoubleMatrix> {
        self.m.mul(p)?.mul(&self.inv)
    }

    pub fn verify(&self, diagram: &MVDiagram) -> Result<()> {
        self.m.verify(diagram)?;
        self.inv.verify(diagram)?;
        (1..=2).try_for_each(|k| self.leg(k).verify())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Value, DEFAULT_MAX_LEVEL};

    #[test]
    fn identity_is_double() {
        let d = quotient_diagram(8, DEFAULT_MAX_LEVEL);
        DoubleMatrix::identity(&d, 2).verify(&d).unwrap();
    }

    #[test]
    fn agreement_modulo_the_relation() {
        let d = quotient_diagram(8, DEFAULT_MAX_LEVEL);
        let alg = d.lambda1();
        let x = FilteredMatrix::diag(alg, &[Value::Poly(Poly::x())]).unwrap();
        let x_shift = FilteredMatrix::diag(alg, &[Value::Poly(Poly::from_ints(&[-1, 1, 1]))]).unwrap();
        make_double(x.clone(), x.clone(), &d).unwrap();
        make_double(x.clone(), x_shift, &d).unwrap();
        let err = make_double(x.clone(), FilteredMatrix::identity(alg, 1), &d).unwrap_err();
        assert!(matches!(err, Error::NotDouble { row: 0, col: 0, .. }));
    }

    #[test]
    fn cover_restricts_to_the_shared_point() {
        let d = propagation_cover(DEFAULT_MAX_LEVEL);
        assert_eq!(d.surjective_leg(), SurjectiveLeg::Both);
        assert!(!d.legs_identical());
        let a = d.lambda1().kernel(&[(0, 2, q(1, 1)), (2, 2, q(3, 1))]).unwrap();
        let b = d.lambda2().kernel(&[(0, 0, q(3, 1)), (0, 1, q(5, 1))]).unwrap();
        let m1 = FilteredMatrix::diag(d.lambda1(), &[a]).unwrap();
        let m2 = FilteredMatrix::diag(d.lambda2(), &[b]).unwrap();
        make_double(m1, m2, &d).unwrap();
    }
}
