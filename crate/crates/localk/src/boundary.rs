//! The connecting map from `K1` of the overlap to `K0` of the pullback.

use crate::error::{Error, Result};
use crate::identities::{IdentityFailure, IdentityReport};
use crate::mayer_vietoris::{glue_idempotents, make_double, DoubleInvertible, DoubleMatrix, GluedIdempotent, MVDiagram};
use crate::matrix::{check_idempotent, conjugate, rotation, FilteredMatrix, IdempotentCert, InvertibleCert};

fn residual(stage: &str, lhs: &FilteredMatrix, rhs: &FilteredMatrix) -> Result<()> {
    if lhs == rhs {
        Ok(())
    } else {
        Err(Error::precondition(stage, format!("residual {}", lhs.try_sub(rhs)?.render())))
    }
}

/// Invertible `u` over the overlap with lifts `a`, `b` of `u`, `u^-1` over the
/// first leg, and a projector `e = diag(0_zeros, 1)` commuting with `u`.
#[derive(Clone, Debug)]
pub struct BoundaryInput {
    diagram: MVDiagram,
    u: InvertibleCert,
    zeros: usize,
    lift_a: FilteredMatrix,
    lift_b: FilteredMatrix,
}

impl BoundaryInput {
    /// Uses section lifts of `u` and `u^-1` through the first leg.
    pub fn new(diagram: &MVDiagram, u: &InvertibleCert, zeros: usize) -> Result<Self> {
        let a = u.matrix().lift_through(diagram.j1())?;
        let b = u.inverse().lift_through(diagram.j1())?;
        Self::with_lifts(diagram, u, zeros, a, b)
    }

    pub fn with_lifts(
        diagram: &MVDiagram,
        u: &InvertibleCert,
        zeros: usize,
        lift_a: FilteredMatrix,
        lift_b: FilteredMatrix,
    ) -> Result<Self> {
        u.algebra().check_same(diagram.lambda_prime())?;
        if zeros > u.size() {
            return Err(Error::SizeMismatch(format!("{zeros} zeros exceed size {}", u.size())));
        }
        residual("lift of u", &lift_a.apply_hom(diagram.j1())?, u.matrix())?;
        residual("lift of u^-1", &lift_b.apply_hom(diagram.j1())?, u.inverse())?;
        let input = BoundaryInput { diagram: diagram.clone(), u: u.clone(), zeros, lift_a, lift_b };
        if zeros > 0 {
            let e = input.projector(diagram.lambda_prime());
            residual("u commutes with e", &u.matrix().try_mul(&e)?, &e.try_mul(u.matrix())?)?;
        }
        Ok(input)
    }

    pub fn diagram(&self) -> &MVDiagram {
        &self.diagram
    }

    pub fn u(&self) -> &InvertibleCert {
        &self.u
    }

    pub fn zeros(&self) -> usize {
        self.zeros
    }

    pub fn lift_a(&self) -> &FilteredMatrix {
        &self.lift_a
    }

    pub fn lift_b(&self) -> &FilteredMatrix {
        &self.lift_b
    }

    pub fn size(&self) -> usize {
        self.u.size()
    }

    /// `diag(0_zeros, 1)` over `alg`.
    pub fn projector(&self, alg: &crate::algebra::LocalizedAlgebra) -> FilteredMatrix {
        FilteredMatrix::projector(alg, self.zeros, self.size() - self.zeros)
    }

    /// Same input with different lifts.
    pub fn relift(&self, lift_a: FilteredMatrix, lift_b: FilteredMatrix) -> Result<Self> {
        Self::with_lifts(&self.diagram, &self.u, self.zeros, lift_a, lift_b)
    }

    fn input_level(&self) -> u32 {
        self.lift_a.level().min(self.lift_b.level())
    }
}

/// Everything built along the way to `[P_U] - [(e2, e2)]`.
#[derive(Clone, Debug)]
pub struct BoundaryOutput {
    pub s0: FilteredMatrix,
    pub s1: FilteredMatrix,
    pub l: InvertibleCert,
    pub p: IdempotentCert,
    pub p_u: DoubleMatrix,
    pub e2: DoubleMatrix,
    pub input_level: u32,
}

impl BoundaryOutput {
    /// The formal difference `([P_U], [(e2, e2)])`.
    pub fn class(&self) -> (&DoubleMatrix, &DoubleMatrix) {
        (&self.p_u, &self.e2)
    }

    pub fn level(&self) -> u32 {
        self.p_u.level()
    }

    /// Both defects vanish, as for invertible lifts.
    pub fn is_trivial_lift(&self) -> bool {
        self.s0.is_zero() && self.s1.is_zero()
    }
}

/// `L = [[S0, -(1 + S0) B], [A, S1]]` with inverse `[[S0, (1 + S0) B], [-A, S1]]`.
pub fn clutching_matrix(a: &FilteredMatrix, b: &FilteredMatrix) -> Result<(FilteredMatrix, FilteredMatrix, InvertibleCert)> {
    let n = a.size();
    let one = FilteredMatrix::identity(a.algebra(), n);
    let s0 = one.try_sub(&b.try_mul(a)?)?;
    let s1 = one.try_sub(&a.try_mul(b)?)?;
    let top = one.try_add(&s0)?.try_mul(b)?;
    let l = FilteredMatrix::from_blocks(&[vec![s0.clone(), -&top], vec![a.clone(), s1.clone()]])?;
    let l_inv = FilteredMatrix::from_blocks(&[vec![s0.clone(), top], vec![-a, s1.clone()]])?;
    Ok((s0, s1, InvertibleCert::new(l, l_inv)?))
}

fn build(input: &BoundaryInput) -> Result<BoundaryOutput> {
    let d = &input.diagram;
    let (a, b) = (&input.lift_a, &input.lift_b);
    let (s0, s1, l) = clutching_matrix(a, b)?;
    let n = input.size();
    let e = input.projector(d.lambda1());
    let e1 = e.pad_zero(n);
    let p = check_idempotent(&conjugate(&e1, &l)?)?;
    let one = FilteredMatrix::identity(d.lambda1(), n);
    let tail = e.try_mul(&one.try_add(&s0)?)?.try_mul(b)?;
    let closed = FilteredMatrix::from_blocks(&[
        vec![s0.try_mul(&e)?.try_mul(&s0)?, s0.try_mul(&tail)?],
        vec![a.try_mul(&e)?.try_mul(&s0)?, a.try_mul(&tail)?],
    ])?;
    if let Some((r, c, x, y)) = p.matrix().first_difference(&closed) {
        return Err(Error::precondition("closed form", format!("entry ({r}, {c}): {x} vs {y}")));
    }
    let e2_second = FilteredMatrix::zero(d.lambda2(), n).direct_sum(&input.projector(d.lambda2()))?;
    let p_u = make_double(p.matrix().clone(), e2_second.clone(), d)?;
    let e2 = make_double(FilteredMatrix::zero(d.lambda1(), n).direct_sum(&e)?, e2_second, d)?;
    Ok(BoundaryOutput { s0, s1, l, p, p_u, e2, input_level: input.input_level() })
}

/// Connecting map with `e = 1`; rejects inputs with a nontrivial projector.
pub fn boundary_second_form(input: &BoundaryInput) -> Result<BoundaryOutput> {
    if input.zeros != 0 {
        return Err(Error::precondition("second form", "projector must be the identity"));
    }
    build(input)
}

/// Connecting map for `u` commuting with `diag(0_m, 1_n)`.
pub fn boundary_extended_form(input: &BoundaryInput) -> Result<BoundaryOutput> {
    build(input)
}

/// Gluing form `[p(1, 1, u)] - [(1 + 0, 1 + 0)]`.
#[derive(Clone, Debug)]
pub struct FirstForm {
    pub glued: GluedIdempotent,
    pub minus: DoubleMatrix,
}

pub fn boundary_first_form(diagram: &MVDiagram, u: &InvertibleCert) -> Result<FirstForm> {
    let n = u.size();
    let one1 = check_idempotent(&FilteredMatrix::identity(diagram.lambda1(), n))?;
    let one2 = check_idempotent(&FilteredMatrix::identity(diagram.lambda2(), n))?;
    let glued = glue_idempotents(&one1, &one2, u, diagram)?;
    Ok(FirstForm { glued, minus: DoubleMatrix::projector(diagram, 0, n).pad_zero(n) })
}

/// Lifts `target` invertibly through `leg`, preferring the unital lift.
fn invertible_lift(target: &InvertibleCert, diagram: &MVDiagram) -> Result<InvertibleCert> {
    let leg = diagram.j1();
    let lift = |m: &FilteredMatrix| -> Result<FilteredMatrix> {
        match m.unital_lift(leg)? {
            Some(x) => Ok(x),
            None => m.lift_through(leg),
        }
    };
    InvertibleCert::new(lift(target.matrix())?, lift(target.inverse())?)
        .map_err(|_| Error::precondition("relate forms", "u^2 has no invertible lift over the first leg"))
}

/// Double invertibles `g`, `h` with `g p(1,1,u) g^-1 = P_U` and
/// `h (1 + 0) h^-1 = (e2, e2)`, relating the gluing and clutching forms.
pub fn relate_first_and_second(
    first: &FirstForm,
    second: &BoundaryOutput,
    diagram: &MVDiagram,
) -> Result<(DoubleInvertible, DoubleInvertible)> {
    let u = first.glued.inputs().2;
    let n = u.size();
    let u2 = u.compose(u)?;
    let d = invertible_lift(&u2.inv(), diagram)?.direct_sum(&invertible_lift(&u2, diagram)?)?;
    let g1 = second.l.compose(&d)?;
    let g2 = rotation(diagram.lambda2(), n).compose(&first.glued.conjugator().inv())?;
    let g = DoubleInvertible::from_legs(g1, g2, diagram)?;
    residual("first to second", g.conjugate(first.glued.double())?.m1(), second.p_u.m1())?;
    residual("first to second", g.conjugate(first.glued.double())?.m2(), second.p_u.m2())?;
    let rot = DoubleInvertible::from_legs(rotation(diagram.lambda1(), n), rotation(diagram.lambda2(), n), diagram)?;
    residual("trivial classes", rot.conjugate(&first.minus)?.m1(), second.e2.m1())?;
    Ok((g, rot))
}

/// Conjugator `[[1 - BK, -BKB], [K, 1 + KB]]` for the change `A -> A + K`.
pub fn lift_change_conjugator_a(input: &BoundaryInput, k: &FilteredMatrix) -> Result<FilteredMatrix> {
    let b = &input.lift_b;
    let n = input.size();
    let one = FilteredMatrix::identity(k.algebra(), n);
    let bk = b.try_mul(k)?;
    let kb = k.try_mul(b)?;
    FilteredMatrix::from_blocks(&[
        vec![one.try_sub(&bk)?, -&bk.try_mul(b)?],
        vec![k.clone(), one.try_add(&kb)?],
    ])
}

/// The displayed blocks `1 + D` for the change `B -> B + H`.
pub fn lift_change_conjugator_b(input: &BoundaryInput, h: &FilteredMatrix) -> Result<FilteredMatrix> {
    let (a, b) = (&input.lift_a, &input.lift_b);
    let m = |xs: &[&FilteredMatrix]| -> Result<FilteredMatrix> {
        xs[1..].iter().try_fold(xs[0].clone(), |acc, x| acc.try_mul(x))
    };
    let one = FilteredMatrix::identity(h.algebra(), input.size());
    let d11 = m(&[h, a])?.try_sub(&m(&[h, a, h, a])?)?.try_sub(&m(&[b, a, h, a])?)?;
    let d12 = h
        .scale(&crate::scalars::Rational::from_int(-2))
        .try_add(&m(&[h, a, b])?)?
        .try_add(&m(&[h, a, h])?)?
        .try_add(&m(&[b, a, h])?)?
        .try_sub(&m(&[b, a, h, a, b])?)?
        .try_sub(&m(&[h, a, h, a, b])?)?;
    let d21 = m(&[a, h, a])?;
    let d22 = m(&[a, h, a, b])?.try_sub(&m(&[a, h])?)?;
    FilteredMatrix::from_blocks(&[vec![one.try_add(&d11)?, d12], vec![d21, one.try_add(&d22)?]])
}

fn kernel_check(diagram: &MVDiagram, k: &FilteredMatrix, what: &str) -> Result<()> {
    let image = k.apply_hom(diagram.j1())?;
    if image.is_zero() {
        Ok(())
    } else {
        Err(Error::precondition(what, format!("perturbation has nonzero image {}", image.render())))
    }
}

struct Checks {
    failures: Vec<IdentityFailure>,
    checked: usize,
}

impl Checks {
    fn new() -> Self {
        Checks { failures: Vec::new(), checked: 0 }
    }

    fn eq(&mut self, reason: &str, inputs: &[String], lhs: &FilteredMatrix, rhs: &FilteredMatrix) {
        self.checked += 1;
        if lhs != rhs {
            self.failures.push(IdentityFailure {
                sample: self.checked - 1,
                reason: reason.into(),
                inputs: inputs.to_vec(),
                lhs: lhs.render(),
                rhs: rhs.render(),
            });
        }
    }

    fn finish(self, id: &str) -> IdentityReport {
        IdentityReport { id: id.into(), samples: self.checked, failures: self.failures, min_level_margin: None }
    }
}

/// Shared tail: `C L = L'`, `C` is double with `1`, and `(C, 1)` carries
/// `P_U` to the perturbed `P'_U`.
fn conjugator_checks(
    checks: &mut Checks,
    inputs: &[String],
    c: &FilteredMatrix,
    base: &BoundaryOutput,
    moved: &BoundaryOutput,
    diagram: &MVDiagram,
) -> Result<()> {
    checks.eq("conjugator times L", inputs, &c.try_mul(base.l.matrix())?, moved.l.matrix());
    let c_inv = base.l.matrix().try_mul(moved.l.inverse())?;
    let cert = InvertibleCert::new(c.clone(), c_inv)?;
    let n = c.size();
    let double = DoubleInvertible::from_legs(cert.clone(), InvertibleCert::identity(diagram.lambda2(), n), diagram)?;
    checks.eq("conjugated idempotent", inputs, &conjugate(base.p.matrix(), &cert)?, moved.p.matrix());
    let moved_pu = double.conjugate(&base.p_u)?;
    checks.eq("conjugated double idempotent", inputs, moved_pu.m1(), moved.p_u.m1());
    checks.eq("conjugated double idempotent", inputs, moved_pu.m2(), moved.p_u.m2());
    Ok(())
}

/// Re-lifts `A` as `A + K` with `j1(K) = 0` and checks the explicit conjugator.
pub fn verify_lift_independence_a(input: &BoundaryInput, k: &FilteredMatrix) -> Result<IdentityReport> {
    kernel_check(&input.diagram, k, "lift independence A")?;
    let base = build(input)?;
    let moved = build(&input.relift(input.lift_a.try_add(k)?, input.lift_b.clone())?)?;
    let c = lift_change_conjugator_a(input, k)?;
    let mut checks = Checks::new();
    conjugator_checks(&mut checks, &[k.render()], &c, &base, &moved, &input.diagram)?;
    Ok(checks.finish("lift_independence_a"))
}

/// Re-lifts `B` as `B + H` with `j1(H) = 0`; checks the block formula against
/// `L'' L^-1` and the conjugation of the idempotents.
pub fn verify_lift_independence_b(input: &BoundaryInput, h: &FilteredMatrix) -> Result<IdentityReport> {
    kernel_check(&input.diagram, h, "lift independence B")?;
    let base = build(input)?;
    let moved = build(&input.relift(input.lift_a.clone(), input.lift_b.try_add(h)?)?)?;
    let c = lift_change_conjugator_b(input, h)?;
    let mut checks = Checks::new();
    let inputs = [h.render()];
    checks.eq("block formula", &inputs, &moved.l.matrix().try_mul(base.l.inverse())?, &c);
    conjugator_checks(&mut checks, &inputs, &c, &base, &moved, &input.diagram)?;
    Ok(checks.finish("lift_independence_b"))
}

/// Clutching with an arbitrary invertible lift of `[[0, -u^-1], [u, 0]]`.
#[derive(Clone, Debug)]
pub struct AltLifting {
    pub p: IdempotentCert,
    pub p_u: DoubleMatrix,
    /// `(L_any L^-1, 1)`, carrying the canonical `P_U` to `p_u`.
    pub conjugator: DoubleInvertible,
}

pub fn boundary_alt_lifting(input: &BoundaryInput, l_any: &InvertibleCert) -> Result<AltLifting> {
    let d = &input.diagram;
    let base = build(input)?;
    residual(
        "alternative lift",
        &l_any.matrix().apply_hom(d.j1())?,
        &base.l.matrix().apply_hom(d.j1())?,
    )?;
    let n = input.size();
    let e1 = input.projector(d.lambda1()).pad_zero(n);
    let p = check_idempotent(&conjugate(&e1, l_any)?)?;
    let p_u = make_double(p.matrix().clone(), base.p_u.m2().clone(), d)?;
    let c = l_any.compose(&base.l.inv())?;
    let conjugator = DoubleInvertible::from_legs(c, InvertibleCert::identity(d.lambda2(), 2 * n), d)?;
    residual("alternative conjugacy", conjugator.conjugate(&base.p_u)?.m1(), p_u.m1())?;
    Ok(AltLifting { p, p_u, conjugator })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Value, DEFAULT_MAX_LEVEL};
    use crate::mayer_vietoris::{propagation_cover, quotient_diagram};
    use crate::scalars::{q, Poly};

    fn poly(alg: &crate::algebra::LocalizedAlgebra, c: &[i64]) -> FilteredMatrix {
        FilteredMatrix::diag(alg, &[Value::Poly(Poly::from_ints(c))]).unwrap()
    }

    fn x_input() -> BoundaryInput {
        let d = quotient_diagram(8, DEFAULT_MAX_LEVEL);
        let x = poly(d.lambda_prime(), &[0, 1]);
        BoundaryInput::new(&d, &InvertibleCert::new(x.clone(), x).unwrap(), 0).unwrap()
    }

    #[test]
    fn clutching_defects_are_one_minus_x_squared() {
        let input = x_input();
        let out = boundary_second_form(&input).unwrap();
        let alg = input.diagram().lambda1();
        assert_eq!(out.s0, poly(alg, &[1, 0, -1]));
        assert_eq!(out.s1, poly(alg, &[1, 0, -1]));
        assert!(out.p_u.is_idempotent());
        assert!(out.l.level() + 2 >= out.input_level);
    }

    #[test]
    fn rational_unit_has_zero_boundary() {
        let alg = crate::algebra::LocalizedAlgebra::rationals(DEFAULT_MAX_LEVEL);
        let id = crate::algebra::FilteredHom::new(alg.clone(), alg.clone(), crate::algebra::HomKind::Identity, true)
            .unwrap();
        let d = MVDiagram::new(id.clone(), id).unwrap();
        let u = InvertibleCert::scalar_diag(&alg, &[q(2, 1)]).unwrap();
        let out = boundary_second_form(&BoundaryInput::new(&d, &u, 0).unwrap()).unwrap();
        assert!(out.is_trivial_lift());
        assert_eq!(out.p_u, out.e2);
    }

    #[test]
    fn extended_form_rejects_noncommuting_u() {
        let d = quotient_diagram(8, DEFAULT_MAX_LEVEL);
        let alg = d.lambda_prime();
        let e = crate::matrix::ElementaryMatrix::new(alg, 2, 0, 1, alg.one()).unwrap().expand();
        assert!(BoundaryInput::new(&d, &e, 1).is_err());
        let diag = poly(alg, &[0, 1]).direct_sum(&poly(alg, &[0, 1])).unwrap();
        let u = InvertibleCert::new(diag.clone(), diag).unwrap();
        let out = boundary_extended_form(&BoundaryInput::new(&d, &u, 1).unwrap()).unwrap();
        assert!(out.p_u.is_idempotent());
        assert!(boundary_second_form(&BoundaryInput::new(&d, &u, 1).unwrap()).is_err());
    }

    #[test]
    fn first_and_second_forms_are_conjugate_for_x() {
        let input = x_input();
        let first = boundary_first_form(input.diagram(), input.u()).unwrap();
        let second = boundary_second_form(&input).unwrap();
        relate_first_and_second(&first, &second, input.diagram()).unwrap();
    }

    #[test]
    fn quotient_perturbations_conjugate() {
        let input = x_input();
        let k = poly(input.diagram().lambda1(), &[-1, 0, 1]);
        assert!(verify_lift_independence_a(&input, &k).unwrap().passed());
        assert!(verify_lift_independence_b(&input, &k).unwrap().passed());
        let zero = FilteredMatrix::zero(input.diagram().lambda1(), 1);
        let c = lift_change_conjugator_a(&input, &zero).unwrap();
        assert!(c.is_identity());
        assert!(verify_lift_independence_a(&input, &poly(input.diagram().lambda1(), &[1])).is_err());
    }

    #[test]
    fn alt_lifting_with_canonical_l_is_trivial() {
        let input = x_input();
        let l = boundary_second_form(&input).unwrap().l;
        let alt = boundary_alt_lifting(&input, &l).unwrap();
        assert!(alt.conjugator.matrix().m1().is_identity());
    }

    #[test]
    fn cover_boundary_of_point_unit() {
        let d = propagation_cover(DEFAULT_MAX_LEVEL);
        let u = InvertibleCert::scalar_diag(d.lambda_prime(), &[q(3, 1)]).unwrap();
        let input = BoundaryInput::new(&d, &u, 0).unwrap();
        let out = boundary_second_form(&input).unwrap();
        assert!(!out.is_trivial_lift());
        let first = boundary_first_form(&d, &u).unwrap();
        relate_first_and_second(&first, &out, &d).unwrap();
    }
}
