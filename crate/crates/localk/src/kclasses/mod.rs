//! Class representatives and the certificates that identify them.
//!
//! Equality of `K`-classes is never decided. Every claimed equality comes
//! with an [`EquivalenceCertificate`] that is re-checked exactly: after
//! padding (zeros for idempotents, ones for invertibles) and appending
//! O-shaped summands, the two sides are conjugate by a recorded invertible.

mod exactness;
mod suite;

pub use exactness::{
    exactness_boundary_zero, exactness_boundary_zero_o, exactness_i_after_boundary, exactness_k0_middle,
    exactness_k1_glue, exactness_kernel_boundary, exactness_kernel_i, trivializing_witness, CheckLine,
    ExactnessReport, KernelBoundary, KernelI,
};
pub use suite::{run_exactness_suite, SegmentFailure, SegmentSummary, SEGMENTS};

use crate::algebra::LocalizedAlgebra;
use crate::error::{Error, Result};
use crate::mayer_vietoris::{DoubleInvertible, DoubleMatrix, MVDiagram};
use crate::matrix::{block_permutation, conjugate, FilteredMatrix, IdempotentCert, InvertibleCert};
use crate::scalars::Dyadic;

/// Padding used when stabilizing: zero blocks for idempotents, identity
/// blocks for invertibles.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fill {
    Zero,
    One,
}

impl Fill {
    fn pad(self, m: &FilteredMatrix, k: usize) -> FilteredMatrix {
        match self {
            Fill::Zero => m.pad_zero(k),
            Fill::One => m.pad_one(k),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertificateKind {
    Stabilize,
    Conjugate,
    OAbsorb,
}

impl CertificateKind {
    pub fn name(self) -> &'static str {
        match self {
            CertificateKind::Stabilize => "stabilize",
            CertificateKind::Conjugate => "conjugate",
            CertificateKind::OAbsorb => "o_absorb",
        }
    }
}

/// Claims `lhs + fill_a + X = g (rhs + fill_b + Y) g^-1` with `X`, `Y` sums
/// of O-shaped invertibles (only meaningful for invertibles).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceCertificate {
    pub lhs_padding: usize,
    pub rhs_padding: usize,
    pub conjugator: Option<InvertibleCert>,
    pub lhs_summands: Vec<InvertibleCert>,
    pub rhs_summands: Vec<InvertibleCert>,
}

/// Outcome of re-checking a certificate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertificateCheck {
    pub kind: CertificateKind,
    pub level: u32,
    pub residual: Option<String>,
}

impl CertificateCheck {
    pub fn passed(&self) -> bool {
        self.residual.is_none()
    }
}

fn summand_size(list: &[InvertibleCert]) -> usize {
    list.iter().map(InvertibleCert::size).sum()
}

fn append(m: FilteredMatrix, list: &[InvertibleCert]) -> Result<FilteredMatrix> {
    list.iter().try_fold(m, |acc, x| acc.direct_sum(x.matrix()))
}

impl EquivalenceCertificate {
    /// Literal equality, or equality after padding.
    pub fn stabilize(lhs_padding: usize, rhs_padding: usize) -> Self {
        EquivalenceCertificate {
            lhs_padding,
            rhs_padding,
            conjugator: None,
            lhs_summands: Vec::new(),
            rhs_summands: Vec::new(),
        }
    }

    pub fn conjugate(g: InvertibleCert) -> Self {
        EquivalenceCertificate { conjugator: Some(g), ..Self::stabilize(0, 0) }
    }

    pub fn kind(&self) -> CertificateKind {
        if !self.lhs_summands.is_empty() || !self.rhs_summands.is_empty() {
            CertificateKind::OAbsorb
        } else if self.conjugator.is_some() {
            CertificateKind::Conjugate
        } else {
            CertificateKind::Stabilize
        }
    }

    /// Lowest level among the recorded witnesses.
    pub fn level(&self, max_level: u32) -> u32 {
        let conj = self.conjugator.as_ref().map_or(max_level, InvertibleCert::level);
        self.lhs_summands.iter().chain(&self.rhs_summands).map(InvertibleCert::level).fold(conj, u32::min)
    }

    /// Certificate for the reverse claim `rhs ~ lhs`.
    pub fn reverse(&self) -> Self {
        EquivalenceCertificate {
            lhs_padding: self.rhs_padding,
            rhs_padding: self.lhs_padding,
            conjugator: self.conjugator.as_ref().map(InvertibleCert::inv),
            lhs_summands: self.rhs_summands.clone(),
            rhs_summands: self.lhs_summands.clone(),
        }
    }

    fn sides(&self, lhs: &FilteredMatrix, rhs: &FilteredMatrix, fill: Fill) -> Result<(FilteredMatrix, FilteredMatrix)> {
        if fill == Fill::Zero && self.kind() == CertificateKind::OAbsorb {
            return Err(Error::NotOShaped("O-summands only apply to invertibles".into()));
        }
        for x in self.lhs_summands.iter().chain(&self.rhs_summands) {
            x.o_blocks()?;
        }
        let left = append(fill.pad(lhs, self.lhs_padding), &self.lhs_summands)?;
        let mut right = append(fill.pad(rhs, self.rhs_padding), &self.rhs_summands)?;
        if left.size() != right.size() {
            return Err(Error::SizeMismatch(format!("padded sides of sizes {} and {}", left.size(), right.size())));
        }
        if let Some(g) = &self.conjugator {
            g.verify()?;
            right = conjugate(&right, g)?;
        }
        Ok((left, right))
    }

    /// Composes `self: a ~ b` with `next: b ~ c` into `a ~ c`.
    ///
    /// `b_size` is the size of the middle representative.
    pub fn compose(&self, next: &Self, a_size: usize, b_size: usize, c_size: usize, alg: &LocalizedAlgebra) -> Result<Self> {
        let (fa, x1) = (self.lhs_padding, summand_size(&self.lhs_summands));
        let (fb, y1) = (self.rhs_padding, summand_size(&self.rhs_summands));
        let (fc, x2) = (next.lhs_padding, summand_size(&next.lhs_summands));
        let (fd, y2) = (next.rhs_padding, summand_size(&next.rhs_summands));
        let g1 = self.conjugator.clone().unwrap_or_else(|| InvertibleCert::identity(alg, b_size + fb + y1));
        let g2 = next.conjugator.clone().unwrap_or_else(|| InvertibleCert::identity(alg, c_size + fd + y2));
        let q0 = block_permutation(alg, &[a_size, fa, x1, fc, x2], &[0, 1, 3, 2, 4])?;
        let q1 = block_permutation(alg, &[b_size, fb, y1, fc, x2], &[0, 3, 4, 1, 2])?;
        let q2 = block_permutation(alg, &[c_size, fd, y2, fb, y1], &[0, 1, 3, 2, 4])?;
        let g = InvertibleCert::product([
            &q0,
            &g1.pad_one(fc + x2),
            &q1.inv(),
            &g2.pad_one(fb + y1),
            &q2.inv(),
        ])?;
        Ok(EquivalenceCertificate {
            lhs_padding: fa + fc,
            rhs_padding: fd + fb,
            conjugator: Some(g),
            lhs_summands: self.lhs_summands.iter().chain(&next.lhs_summands).cloned().collect(),
            rhs_summands: next.rhs_summands.iter().chain(&self.rhs_summands).cloned().collect(),
        })
    }
}

/// Re-checks `cert` for the claim `lhs ~ rhs`; failures carry the residual.
pub fn check_certificate(
    cert: &EquivalenceCertificate,
    lhs: &FilteredMatrix,
    rhs: &FilteredMatrix,
    fill: Fill,
) -> CertificateCheck {
    let residual = match cert.sides(lhs, rhs, fill) {
        Ok((l, r)) => match l.first_difference(&r) {
            None => None,
            Some((i, j, a, b)) => Some(format!("entry ({i}, {j}): {a} vs {b}")),
        },
        Err(e) => Some(e.to_string()),
    };
    CertificateCheck { kind: cert.kind(), level: cert.level(lhs.algebra().max_level()), residual }
}

/// `a + b ~ b + a` by the block swap.
pub fn swap_certificate(a: &FilteredMatrix, b: &FilteredMatrix) -> Result<EquivalenceCertificate> {
    let g = block_permutation(a.algebra(), &[b.size(), a.size()], &[1, 0])?;
    Ok(EquivalenceCertificate::conjugate(g))
}

/// `xi ~ 1` for O-shaped `xi`: `xi + 1 = s (1 + xi) s^-1` with `s` the swap.
pub fn o_absorb_certificate(xi: &InvertibleCert) -> Result<EquivalenceCertificate> {
    xi.o_blocks()?;
    let n = xi.size();
    let one = InvertibleCert::identity(xi.algebra(), n);
    Ok(EquivalenceCertificate {
        lhs_summands: vec![one],
        rhs_summands: vec![xi.clone()],
        ..EquivalenceCertificate::conjugate(block_permutation(xi.algebra(), &[n, n], &[1, 0])?)
    })
}

/// `[u] + [u^-1] ~ 0`: `(u + u^-1) + 1 = swap (1 + O(u)) swap^-1`.
pub fn inverse_pair_certificate(u: &InvertibleCert) -> Result<EquivalenceCertificate> {
    let n = 2 * u.size();
    let g = block_permutation(u.algebra(), &[n, n], &[1, 0])?;
    Ok(EquivalenceCertificate {
        lhs_padding: n,
        rhs_summands: vec![crate::matrix::o_map(u)],
        ..EquivalenceCertificate::conjugate(g)
    })
}

/// Formal difference `[plus] - [minus]` of idempotents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct K0Rep {
    pub plus: IdempotentCert,
    pub minus: IdempotentCert,
}

impl K0Rep {
    pub fn new(plus: IdempotentCert, minus: IdempotentCert) -> Result<Self> {
        plus.algebra().check_same(minus.algebra())?;
        Ok(K0Rep { plus, minus })
    }

    pub fn level(&self) -> u32 {
        self.plus.level().min(self.minus.level())
    }

    pub fn algebra(&self) -> &LocalizedAlgebra {
        self.plus.algebra()
    }
}

/// `[a] - [b] = [c] - [d]` is certified as `a + d ~ c + b`.
pub fn check_k0_equal(x: &K0Rep, y: &K0Rep, cert: &EquivalenceCertificate) -> Result<CertificateCheck> {
    let lhs = x.plus.direct_sum(&y.minus)?;
    let rhs = y.plus.direct_sum(&x.minus)?;
    Ok(check_certificate(cert, lhs.matrix(), rhs.matrix(), Fill::Zero))
}

/// Formal difference of double idempotents, a class over the pullback.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoubleK0Rep {
    pub plus: DoubleMatrix,
    pub minus: DoubleMatrix,
}

impl DoubleK0Rep {
    pub fn new(plus: DoubleMatrix, minus: DoubleMatrix, diagram: &MVDiagram) -> Result<Self> {
        for m in [&plus, &minus] {
            m.verify(diagram)?;
            for k in [1, 2] {
                crate::matrix::check_idempotent(m.leg(k))?;
            }
        }
        Ok(DoubleK0Rep { plus, minus })
    }

    /// Image under the projection to leg `k`.
    pub fn push(&self, k: usize) -> K0Rep {
        let cert = |m: &DoubleMatrix| crate::matrix::check_idempotent(m.leg(k)).expect("validated on construction");
        K0Rep { plus: cert(&self.plus), minus: cert(&self.minus) }
    }

    pub fn level(&self) -> u32 {
        self.plus.level().min(self.minus.level())
    }
}

/// Double-matrix certificate: one claim per leg with a double conjugator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoubleCertificate {
    pub lhs_padding: usize,
    pub rhs_padding: usize,
    pub conjugator: Option<DoubleInvertible>,
}

impl DoubleCertificate {
    pub fn leg(&self, k: usize) -> EquivalenceCertificate {
        EquivalenceCertificate {
            conjugator: self.conjugator.as_ref().map(|g| g.leg(k)),
            ..EquivalenceCertificate::stabilize(self.lhs_padding, self.rhs_padding)
        }
    }
}

/// Checks both legs and that the conjugator is a genuine double invertible.
pub fn check_double_certificate(
    cert: &DoubleCertificate,
    lhs: &DoubleMatrix,
    rhs: &DoubleMatrix,
    diagram: &MVDiagram,
) -> CertificateCheck {
    let mut out = check_certificate(&cert.leg(1), lhs.m1(), rhs.m1(), Fill::Zero);
    let second = check_certificate(&cert.leg(2), lhs.m2(), rhs.m2(), Fill::Zero);
    out.level = out.level.min(second.level);
    if out.residual.is_none() {
        out.residual = second.residual.map(|r| format!("second leg: {r}"));
    }
    if out.residual.is_none() {
        if let Some(Err(e)) = cert.conjugator.as_ref().map(|g| g.verify(diagram)) {
            out.residual = Some(e.to_string());
        }
    }
    out
}

/// `[a] - [b] = [c] - [d]` over the pullback, certified as `a + d ~ c + b`.
pub fn check_double_k0_equal(
    x: &DoubleK0Rep,
    y: &DoubleK0Rep,
    cert: &DoubleCertificate,
    diagram: &MVDiagram,
) -> Result<CertificateCheck> {
    let lhs = x.plus.direct_sum(&y.minus)?;
    let rhs = y.plus.direct_sum(&x.minus)?;
    Ok(check_double_certificate(cert, &lhs, &rhs, diagram))
}

/// Formal `Z[1/2]`-combination of invertibles; the empty ledger is zero.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct K1Rep {
    pub terms: Vec<(InvertibleCert, Dyadic)>,
}

impl K1Rep {
    pub fn zero() -> Self {
        K1Rep::default()
    }

    pub fn single(u: InvertibleCert) -> Self {
        K1Rep { terms: vec![(u, Dyadic::one())] }
    }

    pub fn scaled(u: InvertibleCert, c: Dyadic) -> Self {
        K1Rep { terms: vec![(u, c)] }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn level(&self, max_level: u32) -> u32 {
        self.terms.iter().map(|(u, _)| u.level()).fold(max_level, u32::min)
    }

    /// Representative `u_1 + u_2 + ...` when every coefficient is one.
    pub fn direct_sum(&self) -> Option<InvertibleCert> {
        if self.terms.iter().any(|(_, c)| *c != Dyadic::one()) {
            return None;
        }
        let mut it = self.terms.iter().map(|(u, _)| u);
        let first = it.next()?.clone();
        it.try_fold(first, |acc, u| acc.direct_sum(u).ok())
    }
}

/// Ledger sum; only syntactically equal invertibles merge coefficients.
pub fn k1_add(a: &K1Rep, b: &K1Rep) -> K1Rep {
    let mut terms = a.terms.clone();
    for (u, c) in &b.terms {
        match terms.iter_mut().find(|(v, _)| v == u) {
            Some((_, d)) => *d = &*d + c,
            None => terms.push((u.clone(), c.clone())),
        }
    }
    terms.retain(|(_, c)| !c.is_zero());
    K1Rep { terms }
}

/// `-[u] = [u^-1]` termwise.
pub fn k1_negate(a: &K1Rep) -> K1Rep {
    K1Rep { terms: a.terms.iter().map(|(u, c)| (u.inv(), c.clone())).collect() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::DEFAULT_MAX_LEVEL;
    use crate::matrix::{check_idempotent, o_map, rotation};
    use crate::scalars::q;

    fn rationals() -> LocalizedAlgebra {
        LocalizedAlgebra::rationals(DEFAULT_MAX_LEVEL)
    }

    fn unit(c: i64) -> InvertibleCert {
        InvertibleCert::scalar_diag(&rationals(), &[q(c, 1)]).unwrap()
    }

    #[test]
    fn identity_conjugator_on_equal_matrices() {
        let m = unit(2).matrix().clone();
        let cert = EquivalenceCertificate::conjugate(InvertibleCert::identity(&rationals(), 1));
        assert!(check_certificate(&cert, &m, &m, Fill::One).passed());
    }

    #[test]
    fn rotation_swaps_summands() {
        let (a, b) = (unit(2).matrix().clone(), unit(3).matrix().clone());
        let cert = EquivalenceCertificate::conjugate(rotation(&rationals(), 1));
        let check = check_certificate(&cert, &b.direct_sum(&a).unwrap(), &a.direct_sum(&b).unwrap(), Fill::One);
        assert!(check.passed());
        assert_eq!(check.kind, CertificateKind::Conjugate);
        let swap = swap_certificate(&a, &b).unwrap();
        assert!(check_certificate(&swap, &b.direct_sum(&a).unwrap(), &a.direct_sum(&b).unwrap(), Fill::One).passed());
    }

    #[test]
    fn o_shaped_is_zero() {
        let xi = o_map(&unit(5));
        let cert = o_absorb_certificate(&xi).unwrap();
        let one = FilteredMatrix::identity(&rationals(), 2);
        let check = check_certificate(&cert, xi.matrix(), &one, Fill::One);
        assert!(check.passed(), "{check:?}");
        assert_eq!(check.kind, CertificateKind::OAbsorb);
        assert!(!check_certificate(&cert, unit(5).matrix(), &one, Fill::One).passed());
    }

    #[test]
    fn inverse_pair_is_zero() {
        let u = unit(7);
        let cert = inverse_pair_certificate(&u).unwrap();
        let lhs = u.direct_sum(&u.inv()).unwrap();
        let zero = FilteredMatrix::identity(&rationals(), 2);
        assert!(check_certificate(&cert, lhs.matrix(), &zero, Fill::One).passed());
    }

    #[test]
    fn composition_chains_claims() {
        let alg = rationals();
        let (a, b) = (unit(2), unit(3));
        let ab = a.direct_sum(&b).unwrap();
        let ba = b.direct_sum(&a).unwrap();
        // ab ~ ba by swap, then ba ~ ba + 1 by padding.
        let first = swap_certificate(b.matrix(), a.matrix()).unwrap();
        assert!(check_certificate(&first, ab.matrix(), ba.matrix(), Fill::One).passed());
        let second = EquivalenceCertificate::stabilize(1, 0);
        let target = ba.pad_one(1);
        assert!(check_certificate(&second, ba.matrix(), target.matrix(), Fill::One).passed());
        let both = first.compose(&second, 2, 2, 3, &alg).unwrap();
        let check = check_certificate(&both, ab.matrix(), target.matrix(), Fill::One);
        assert!(check.passed(), "{check:?}");
        let back = both.reverse();
        assert!(check_certificate(&back, target.matrix(), ab.matrix(), Fill::One).passed());
    }

    #[test]
    fn composition_keeps_o_summands() {
        let alg = rationals();
        let xi = o_map(&unit(5));
        let absorb = o_absorb_certificate(&xi).unwrap();
        let one2 = FilteredMatrix::identity(&alg, 2);
        let reverse = absorb.reverse();
        let round = absorb.compose(&reverse, 2, 2, 2, &alg).unwrap();
        assert!(check_certificate(&round, xi.matrix(), xi.matrix(), Fill::One).passed());
        assert!(check_certificate(&reverse, &one2, xi.matrix(), Fill::One).passed());
    }

    #[test]
    fn ledger_arithmetic() {
        let a = K1Rep::single(unit(2));
        assert_eq!(k1_add(&a, &K1Rep::zero()), a);
        assert_eq!(k1_negate(&a).terms[0].0, unit(2).inv());
        assert_eq!(k1_negate(&k1_negate(&a)), a);
        assert!(k1_negate(&K1Rep::zero()).is_zero());
        let half = K1Rep::scaled(unit(2), Dyadic::one().half());
        assert_eq!(k1_add(&half, &half), a);
        assert_eq!(k1_add(&a, &K1Rep::single(unit(3))).terms.len(), 2);
        let cancel = k1_add(&a, &K1Rep::scaled(unit(2), -&Dyadic::one()));
        assert!(cancel.is_zero());
    }

    #[test]
    fn k0_formal_equality() {
        let alg = rationals();
        let p = check_idempotent(&FilteredMatrix::projector(&alg, 0, 1)).unwrap();
        let z = check_idempotent(&FilteredMatrix::zero(&alg, 1)).unwrap();
        let x = K0Rep::new(p.clone(), p.clone()).unwrap();
        let y = K0Rep::new(z.clone(), z).unwrap();
        let cert = swap_certificate(&FilteredMatrix::zero(&alg, 1), p.matrix()).unwrap();
        assert!(check_k0_equal(&x, &y, &cert).unwrap().passed());
    }
}
