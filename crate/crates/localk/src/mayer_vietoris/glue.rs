use super::{make_double, DoubleInvertible, DoubleMatrix, MVDiagram};
use crate::algebra::FilteredHom;
use crate::error::{Error, Result};
use crate::identities::{whitehead_factors, whitehead_inverse_factors};
use crate::matrix::{
    block_permutation, check_idempotent, conjugate, o_map, FilteredMatrix, IdempotentCert, InvertibleCert,
};
use crate::scalars::Dyadic;

fn product(factors: &[FilteredMatrix]) -> FilteredMatrix {
    factors[1..].iter().fold(factors[0].clone(), |acc, f| &acc * f)
}

/// Reports `lhs = rhs` as a precondition with the residual `lhs - rhs`.
fn require_equal(stage: &str, lhs: &FilteredMatrix, rhs: &FilteredMatrix) -> Result<()> {
    if lhs.size() != rhs.size() {
        return Err(Error::precondition(stage, format!("sizes {} and {} differ", lhs.size(), rhs.size())));
    }
    if lhs == rhs {
        Ok(())
    } else {
        Err(Error::precondition(stage, format!("residual {}", lhs.try_sub(rhs)?.render())))
    }
}

/// Lift of `diag(u, u^-1)` through `leg`, built factor by factor from the
/// four-factor decomposition with section-lifted blocks.
pub fn lift_o_map(u: &InvertibleCert, leg: &FilteredHom) -> Result<InvertibleCert> {
    let a = u.matrix().lift_through(leg)?;
    let b = u.inverse().lift_through(leg)?;
    InvertibleCert::new(product(&whitehead_factors(&a, &b)), product(&whitehead_inverse_factors(&a, &b)))
}

/// Double idempotent glued from idempotents over the two legs.
#[derive(Clone, Debug)]
pub struct GluedIdempotent {
    p: DoubleMatrix,
    p1: IdempotentCert,
    p2: IdempotentCert,
    u: InvertibleCert,
    conjugator: InvertibleCert,
}

impl GluedIdempotent {
    pub fn double(&self) -> &DoubleMatrix {
        &self.p
    }

    pub fn inputs(&self) -> (&IdempotentCert, &IdempotentCert, &InvertibleCert) {
        (&self.p1, &self.p2, &self.u)
    }

    /// Lift over the second leg conjugating `p2 + 0` into the second component.
    pub fn conjugator(&self) -> &InvertibleCert {
        &self.conjugator
    }

    pub fn size(&self) -> usize {
        self.p.size()
    }

    pub fn level(&self) -> u32 {
        self.p.level()
    }

    /// Recomputes every recorded relation.
    pub fn verify(&self, diagram: &MVDiagram) -> Result<()> {
        self.p.verify(diagram)?;
        let n = self.p1.size();
        check_idempotent(self.p.m1())?;
        check_idempotent(self.p.m2())?;
        require_equal("first component", self.p.m1(), &self.p1.matrix().pad_zero(n))?;
        self.conjugator.verify()?;
        let second = conjugate(&self.p2.matrix().pad_zero(n), &self.conjugator)?;
        require_equal("second component", self.p.m2(), &second)
    }
}

/// Glues `p1` and `p2` along `u`, given `j1(p1) = u j2(p2) u^-1`; the result
/// has size `2n` with components `p1 + 0` and `U (p2 + 0) U^-1`.
pub fn glue_idempotents(
    p1: &IdempotentCert,
    p2: &IdempotentCert,
    u: &InvertibleCert,
    diagram: &MVDiagram,
) -> Result<GluedIdempotent> {
    diagram.require_surjective(2, "glue idempotents")?;
    let image = conjugate(&p2.apply_hom(diagram.j2())?.into_matrix(), u)?;
    require_equal("glue idempotents", p1.apply_hom(diagram.j1())?.matrix(), &image)?;
    let n = p1.size();
    let lift = lift_o_map(u, diagram.j2())?;
    let second = conjugate(&p2.matrix().pad_zero(n), &lift)?;
    let p = make_double(p1.matrix().pad_zero(n), second, diagram)?;
    Ok(GluedIdempotent { p, p1: p1.clone(), p2: p2.clone(), u: u.clone(), conjugator: lift })
}

/// Size-preserving gluing when the transition already lifts to `u_lift` over
/// the second leg: components `p1` and `u_lift p2 u_lift^-1`.
pub fn lemma28_glue(
    p1: &IdempotentCert,
    p2: &IdempotentCert,
    u_lift: &InvertibleCert,
    diagram: &MVDiagram,
) -> Result<DoubleMatrix> {
    let second = conjugate(p2.matrix(), u_lift)?;
    require_equal("liftable glue", &p1.matrix().apply_hom(diagram.j1())?, &second.apply_hom(diagram.j2())?)?;
    let p = make_double(p1.matrix().clone(), second, diagram)?;
    check_idempotent(p.m2())?;
    Ok(p)
}

/// Self-inverse `[[p, 1-p], [1-p, p]]`, conjugating `1 + 0` to `p + (1-p)`.
pub fn trivializer(p: &IdempotentCert) -> InvertibleCert {
    let (a, b) = (p.matrix().clone(), p.matrix().complement());
    let r = FilteredMatrix::from_blocks(&[vec![a.clone(), b.clone()], vec![b, a]]).expect("uniform blocks");
    InvertibleCert::trusted(r.clone(), r)
}

/// Rewrites `[p1] - [p2]` as `[p1 + (1 - p2)] - [1_n]` with `n` the size of `p2`.
pub fn normalize_difference(p1: &IdempotentCert, p2: &IdempotentCert) -> Result<(IdempotentCert, usize)> {
    Ok((p1.direct_sum(&p2.complement())?, p2.size()))
}

/// Stable conjugacy of normalized differences in the overlap:
/// `j1(p1') + xi = u (j2(p2') + xi) u^-1`.
#[derive(Clone, Debug)]
pub struct K0Witness {
    pub xi: Option<IdempotentCert>,
    pub u: InvertibleCert,
}

/// Glued `K0` class `[plus] - [1_minus]` over the pullback.
#[derive(Clone, Debug)]
pub struct GluedK0 {
    pub plus: GluedIdempotent,
    pub minus: usize,
    /// Normalized inputs `p_k'` and their common subtracted rank.
    pub normalized: (IdempotentCert, IdempotentCert),
    pub rank: usize,
    /// Size `N` of the stabilizer absorbed from the witness.
    pub padding: usize,
}

/// Glues formal differences `d1 = [a1] - [b1]` and `d2 = [a2] - [b2]`.
pub fn glue_k0_classes(
    d1: (&IdempotentCert, &IdempotentCert),
    d2: (&IdempotentCert, &IdempotentCert),
    witness: &K0Witness,
    diagram: &MVDiagram,
) -> Result<GluedK0> {
    let (p1, n1) = normalize_difference(d1.0, d1.1)?;
    let (p2, n2) = normalize_difference(d2.0, d2.1)?;
    if p1.size() != p2.size() || n1 != n2 {
        return Err(Error::precondition(
            "glue k0",
            format!("normalized shapes ({}, {n1}) and ({}, {n2}) differ; stabilize first", p1.size(), p2.size()),
        ));
    }
    let (i1, i2) = (p1.apply_hom(diagram.j1())?, p2.apply_hom(diagram.j2())?);
    let (q1, q2, u, padding) = match &witness.xi {
        None => (p1.clone(), p2.clone(), witness.u.clone(), 0),
        Some(xi) => {
            let lhs = i1.direct_sum(xi)?.into_matrix();
            let rhs = conjugate(i2.direct_sum(xi)?.matrix(), &witness.u)?;
            require_equal("glue k0 witness", &lhs, &rhs)?;
            let big = xi.size();
            let t = InvertibleCert::identity(diagram.lambda_prime(), p1.size()).direct_sum(&trivializer(xi))?;
            let u = t.inv().compose(&witness.u.pad_one(big))?.compose(&t)?;
            let ones = check_idempotent(&FilteredMatrix::projector(diagram.lambda1(), 0, big).pad_zero(big))?;
            let ones2 = check_idempotent(&FilteredMatrix::projector(diagram.lambda2(), 0, big).pad_zero(big))?;
            (p1.direct_sum(&ones)?, p2.direct_sum(&ones2)?, u, big)
        }
    };
    let plus = glue_idempotents(&q1, &q2, &u, diagram)?;
    Ok(GluedK0 { plus, minus: n1 + padding, normalized: (p1, p2), rank: n1, padding })
}

/// Glues invertibles with `j1(s1) = u j2(s2) u^-1` into a double invertible
/// with components `s1 + 1` and `U (s2 + 1) U^-1`.
pub fn glue_invertibles(
    s1: &InvertibleCert,
    s2: &InvertibleCert,
    u: &InvertibleCert,
    diagram: &MVDiagram,
) -> Result<DoubleInvertible> {
    diagram.require_surjective(2, "glue invertibles")?;
    let image = conjugate(s2.apply_hom(diagram.j2())?.matrix(), u)?;
    require_equal("glue invertibles", s1.apply_hom(diagram.j1())?.matrix(), &image)?;
    let n = s1.size();
    let lift = lift_o_map(u, diagram.j2())?;
    let second = lift.compose(&s2.pad_one(n))?.compose(&lift.inv())?;
    DoubleInvertible::from_legs(s1.pad_one(n), second, diagram)
}

/// Lift of an O-shaped `xi = diag(a, a^-1)` through a surjective leg.
#[derive(Clone, Debug)]
pub struct OLift {
    /// Invertible lift of `xi` itself, not O-shaped in general.
    pub half: InvertibleCert,
    /// `diag(half, half^-1)`, O-shaped, mapping to `diag(xi, xi^-1)`.
    pub lift: InvertibleCert,
    /// Permutation conjugating `diag(xi, xi^-1)` to `xi + xi`.
    pub permutation: InvertibleCert,
}

impl OLift {
    /// Re-checks the forward image and the permutation conjugacy.
    pub fn verify(&self, xi: &InvertibleCert, leg: &FilteredHom) -> Result<()> {
        self.lift.verify()?;
        let image = self.lift.apply_hom(leg)?;
        require_equal("forward image", image.matrix(), o_map(xi).matrix())?;
        let doubled = xi.direct_sum(xi)?;
        require_equal("permutation conjugacy", &conjugate(image.matrix(), &self.permutation)?, doubled.matrix())
    }
}

/// Lifts an O-shaped element through `leg` via the four-factor formula.
pub fn lift_o_element(xi: &InvertibleCert, leg: &FilteredHom) -> Result<OLift> {
    let (alpha, beta) = xi.o_blocks()?;
    if !leg.is_surjective() {
        return Err(Error::precondition("lift O element", "leg has no section"));
    }
    let (a, b) = (alpha.lift_through(leg)?, beta.lift_through(leg)?);
    let half = InvertibleCert::new(product(&whitehead_factors(&a, &b)), product(&whitehead_inverse_factors(&a, &b)))?;
    let lift = o_map(&half);
    let k = alpha.size();
    let permutation = block_permutation(xi.algebra(), &[k; 4], &[0, 1, 3, 2])?;
    Ok(OLift { half, lift, permutation })
}

/// Stable equality in `K1` of the overlap:
/// `j1(u1) + xi1 = u (j2(u2) + xi2) u^-1` with each `xi` a sum of O-shaped elements.
#[derive(Clone, Debug)]
pub struct K1Witness {
    pub xi1: Vec<InvertibleCert>,
    pub xi2: Vec<InvertibleCert>,
    pub u: InvertibleCert,
}

/// Glued `K1` representative `coefficient * [glued]`.
#[derive(Clone, Debug)]
pub struct GluedK1 {
    pub glued: DoubleInvertible,
    pub coefficient: Dyadic,
    /// Leg-wise inputs before the final stabilization, `u_k` or `u_k + u_k + lifts`.
    pub legs: (InvertibleCert, InvertibleCert),
    pub lifts: (Vec<OLift>, Vec<OLift>),
    /// Conjugator over the overlap used for the final gluing.
    pub transition: InvertibleCert,
}

fn sum_all(list: &[InvertibleCert]) -> Result<Option<InvertibleCert>> {
    let mut it = list.iter();
    let Some(first) = it.next() else { return Ok(None) };
    it.try_fold(first.clone(), |acc, x| acc.direct_sum(x)).map(Some)
}

/// Glues `coefficient * [u1]` and `coefficient * [u2]`. With nontrivial
/// O-summands the equation is doubled so that the lifts `diag(xi~, xi~^-1)`
/// absorb them, and the coefficient is halved.
pub fn glue_k1_classes(
    u1: &InvertibleCert,
    u2: &InvertibleCert,
    coefficient: &Dyadic,
    witness: &K1Witness,
    diagram: &MVDiagram,
) -> Result<GluedK1> {
    let image1 = u1.apply_hom(diagram.j1())?;
    let image2 = u2.apply_hom(diagram.j2())?;
    let lhs = match sum_all(&witness.xi1)? {
        Some(x) => image1.direct_sum(&x)?,
        None => image1.clone(),
    };
    let rhs = match sum_all(&witness.xi2)? {
        Some(x) => image2.direct_sum(&x)?,
        None => image2.clone(),
    };
    if lhs.size() != rhs.size() || lhs.size() != witness.u.size() {
        return Err(Error::precondition("glue k1 witness", "stabilized sizes disagree"));
    }
    require_equal("glue k1 witness", lhs.matrix(), &conjugate(rhs.matrix(), &witness.u)?)?;
    if witness.xi1.is_empty() && witness.xi2.is_empty() {
        let glued = glue_invertibles(u1, u2, &witness.u, diagram)?;
        let legs = (u1.clone(), u2.clone());
        return Ok(GluedK1 {
            glued,
            coefficient: coefficient.clone(),
            legs,
            lifts: (Vec::new(), Vec::new()),
            transition: witness.u.clone(),
        });
    }
    let mut lifts = (Vec::new(), Vec::new());
    let mut legs = Vec::new();
    let mut perms = Vec::new();
    for (k, u_k, xis) in [(1, u1, &witness.xi1), (2, u2, &witness.xi2)] {
        let leg = diagram.leg(k);
        let olifts = xis.iter().map(|xi| lift_o_element(xi, leg)).collect::<Result<Vec<_>>>()?;
        let mut s = u_k.direct_sum(u_k)?;
        let mut sizes = vec![u_k.size(), u_k.size()];
        let (mut first, mut second) = (vec![0], vec![1]);
        for (i, l) in olifts.iter().enumerate() {
            s = s.direct_sum(&l.lift)?;
            let half = l.half.size() / 2;
            sizes.extend([half; 4]);
            let base = 2 + 4 * i;
            first.extend([base, base + 1]);
            second.extend([base + 3, base + 2]);
        }
        first.extend(second);
        perms.push(block_permutation(diagram.lambda_prime(), &sizes, &first)?);
        legs.push(s);
        if k == 1 {
            lifts.0 = olifts;
        } else {
            lifts.1 = olifts;
        }
    }
    let conj = perms[0].inv().compose(&witness.u.direct_sum(&witness.u)?)?.compose(&perms[1])?;
    let glued = glue_invertibles(&legs[0], &legs[1], &conj, diagram)?;
    let mut legs = legs.into_iter();
    let legs = (legs.next().expect("two legs"), legs.next().expect("two legs"));
    Ok(GluedK1 { glued, coefficient: coefficient.half(), legs, lifts, transition: conj })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Value, DEFAULT_MAX_LEVEL};
    use crate::mayer_vietoris::{propagation_cover, quotient_diagram};
    use crate::scalars::{q, Poly};

    fn x_unit(alg: &crate::algebra::LocalizedAlgebra) -> InvertibleCert {
        let x = FilteredMatrix::diag(alg, &[Value::Poly(Poly::x())]).unwrap();
        InvertibleCert::new(x.clone(), x).unwrap()
    }

    fn one(alg: &crate::algebra::LocalizedAlgebra, n: usize) -> IdempotentCert {
        check_idempotent(&FilteredMatrix::identity(alg, n)).unwrap()
    }

    #[test]
    fn trivial_gluing_gives_projector() {
        let d = quotient_diagram(8, DEFAULT_MAX_LEVEL);
        let u = InvertibleCert::identity(d.lambda_prime(), 1);
        let g = glue_idempotents(&one(d.lambda1(), 1), &one(d.lambda2(), 1), &u, &d).unwrap();
        assert_eq!(g.double(), &DoubleMatrix::projector(&d, 0, 1).pad_zero(1));
        g.verify(&d).unwrap();
    }

    #[test]
    fn clutching_idempotent_certifies() {
        let d = quotient_diagram(8, DEFAULT_MAX_LEVEL);
        let g = glue_idempotents(&one(d.lambda1(), 1), &one(d.lambda2(), 1), &x_unit(d.lambda_prime()), &d).unwrap();
        g.verify(&d).unwrap();
        assert!(g.double().is_idempotent());
        assert!(g.level() + 4 >= DEFAULT_MAX_LEVEL.min(3));
    }

    #[test]
    fn precondition_reports_residual() {
        let d = quotient_diagram(8, DEFAULT_MAX_LEVEL);
        let zero = check_idempotent(&FilteredMatrix::zero(d.lambda2(), 1)).unwrap();
        let u = InvertibleCert::identity(d.lambda_prime(), 1);
        let err = glue_idempotents(&one(d.lambda1(), 1), &zero, &u, &d).unwrap_err();
        assert!(err.to_string().contains("residual [[[1]]]"), "{err}");
    }

    #[test]
    fn liftable_gluing_matches_unstabilized_components() {
        let d = quotient_diagram(8, DEFAULT_MAX_LEVEL);
        let alg = d.lambda2();
        let x = Value::Poly(Poly::x());
        let shear = crate::matrix::ElementaryMatrix::new(alg, 2, 0, 1, x.clone()).unwrap().expand();
        let p2 = check_idempotent(&FilteredMatrix::projector(alg, 1, 1)).unwrap();
        let p1 = p2.conjugate(&shear).unwrap();
        let glued = lemma28_glue(&p1, &p2, &shear, &d).unwrap();
        assert_eq!(glued.size(), 2);
        assert!(glued.is_idempotent());
        assert_eq!(glued.m1(), glued.m2());
        assert!(lemma28_glue(&p2, &p2, &shear, &d).is_err());
    }

    #[test]
    fn normalizing_against_identity_pads_zero() {
        let alg = crate::algebra::LocalizedAlgebra::rationals(DEFAULT_MAX_LEVEL);
        let p = check_idempotent(&FilteredMatrix::from_scalars(&alg, &[vec![q(1, 1), q(1, 1)], vec![q(0, 1), q(0, 1)]]))
            .unwrap();
        let (pn, n) = normalize_difference(&p, &one(&alg, 1)).unwrap();
        assert_eq!(n, 1);
        assert_eq!(pn.matrix(), &p.matrix().pad_zero(1));
        let t = trivializer(&p);
        let target = p.direct_sum(&p.complement()).unwrap();
        assert_eq!(&conjugate(&FilteredMatrix::projector(&alg, 0, 2).pad_zero(2), &t).unwrap(), target.matrix());
    }

    #[test]
    fn glued_invertible_of_two_along_x() {
        let d = quotient_diagram(8, DEFAULT_MAX_LEVEL);
        let two = |alg| InvertibleCert::scalar_diag(alg, &[q(2, 1)]).unwrap();
        let g = glue_invertibles(&two(d.lambda1()), &two(d.lambda2()), &x_unit(d.lambda_prime()), &d).unwrap();
        g.verify(&d).unwrap();
        assert!(g.level() + 4 >= 3);
    }

    #[test]
    fn o_lift_of_x_pair() {
        let d = quotient_diagram(8, DEFAULT_MAX_LEVEL);
        let xi = crate::matrix::o_map(&x_unit(d.lambda_prime()));
        let l = lift_o_element(&xi, d.j1()).unwrap();
        l.verify(&xi, d.j1()).unwrap();
        let ident = InvertibleCert::identity(d.lambda_prime(), 2);
        assert!(lift_o_element(&ident, d.j1()).unwrap().lift.matrix().is_identity());
        assert!(lift_o_element(&x_unit(d.lambda_prime()), d.j1()).is_err());
    }

    #[test]
    fn k1_gluing_halves_with_summands() {
        let d = quotient_diagram(8, DEFAULT_MAX_LEVEL);
        let u1 = InvertibleCert::identity(d.lambda1(), 1);
        let plain = K1Witness { xi1: vec![], xi2: vec![], u: InvertibleCert::identity(d.lambda_prime(), 1) };
        let g = glue_k1_classes(&u1, &u1, &Dyadic::one(), &plain, &d).unwrap();
        assert_eq!(g.coefficient, Dyadic::one());
        let xi = crate::matrix::o_map(&x_unit(d.lambda_prime()));
        let w = K1Witness { xi1: vec![xi.clone()], xi2: vec![xi], u: InvertibleCert::identity(d.lambda_prime(), 3) };
        let g = glue_k1_classes(&u1, &u1, &Dyadic::one(), &w, &d).unwrap();
        assert_eq!(g.coefficient, Dyadic::new(q(1, 2)).unwrap());
        g.glued.verify(&d).unwrap();
        let again = glue_k1_classes(&u1, &u1, &g.coefficient, &w, &d).unwrap();
        assert_eq!(again.coefficient, Dyadic::new(q(1, 4)).unwrap());
    }

    #[test]
    fn cover_gluing_with_a_point_transition() {
        let d = propagation_cover(DEFAULT_MAX_LEVEL);
        let p1 = one(d.lambda1(), 1);
        let p2 = one(d.lambda2(), 1);
        let u = InvertibleCert::scalar_diag(d.lambda_prime(), &[q(3, 1)]).unwrap();
        let g = glue_idempotents(&p1, &p2, &u, &d).unwrap();
        g.verify(&d).unwrap();
    }
}
