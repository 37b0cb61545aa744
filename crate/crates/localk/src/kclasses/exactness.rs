//! Certified exactness of the six-term sequence at each position.
//!
//! Each function takes the data of one position, builds the preimage or the
//! null-homotopy, and re-checks every relation exactly. Failed relations are
//! reported with their residual rather than raised.

use super::{
    check_certificate, check_double_certificate, CertificateCheck, DoubleCertificate, EquivalenceCertificate, Fill,
};
use crate::boundary::{boundary_extended_form, BoundaryInput, BoundaryOutput};
use crate::error::{Error, Result};
use crate::mayer_vietoris::{
    glue_k0_classes, glue_k1_classes, lift_o_element, lift_o_map, DoubleInvertible, DoubleMatrix, K0Witness,
    K1Witness, MVDiagram,
};
use crate::matrix::{
    block_permutation, check_idempotent, conjugate, o_map, rotation, FilteredMatrix, IdempotentCert, InvertibleCert,
};
use crate::mayer_vietoris::trivializer;
use crate::scalars::Dyadic;

/// One re-checked relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckLine {
    pub name: String,
    pub residual: Option<String>,
}

impl CheckLine {
    pub fn passed(&self) -> bool {
        self.residual.is_none()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExactnessReport {
    pub segment: String,
    /// Rendered witnesses, by name.
    pub witnesses: Vec<(String, String)>,
    pub checks: Vec<CheckLine>,
}

impl ExactnessReport {
    fn new(segment: &str) -> Self {
        ExactnessReport { segment: segment.into(), ..Default::default() }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckLine::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckLine> {
        self.checks.iter().filter(|c| !c.passed())
    }

    fn witness(&mut self, name: &str, m: &FilteredMatrix) {
        self.witnesses.push((name.into(), m.render()));
    }

    fn cert(&mut self, name: &str, check: CertificateCheck) {
        self.checks.push(CheckLine { name: name.into(), residual: check.residual });
    }

    fn compare(&mut self, name: &str, lhs: &FilteredMatrix, rhs: &FilteredMatrix) {
        let residual = if lhs.size() != rhs.size() {
            Some(format!("sizes {} and {}", lhs.size(), rhs.size()))
        } else {
            lhs.first_difference(rhs).map(|(i, j, a, b)| format!("entry ({i}, {j}): {a} vs {b}"))
        };
        self.checks.push(CheckLine { name: name.into(), residual });
    }

    fn result(&mut self, name: &str, r: Result<()>) {
        self.checks.push(CheckLine { name: name.into(), residual: r.err().map(|e| e.to_string()) });
    }
}

/// `[[0, -v^-1], [v, 0]]`.
fn anti_diagonal(v: &InvertibleCert) -> Result<InvertibleCert> {
    let z = FilteredMatrix::zero(v.algebra(), v.size());
    let m = FilteredMatrix::from_blocks(&[vec![z.clone(), -v.inverse()], vec![v.matrix().clone(), z.clone()]])?;
    let inv = FilteredMatrix::from_blocks(&[vec![z.clone(), v.inverse().clone()], vec![-v.matrix(), z]])?;
    InvertibleCert::new(m, inv)
}

/// For `u = j1(lift)`, the double invertible `(L L'^-1, 1)` with
/// `L' = [[0, -lift^-1], [lift, 0]]`; it conjugates `(0 + e, 0 + e)` to `P_U`
/// whenever `lift` commutes with `e`.
pub fn trivializing_witness(input: &BoundaryInput, lift: &InvertibleCert) -> Result<DoubleInvertible> {
    let d = input.diagram();
    let image = lift.apply_hom(d.j1())?;
    if image.matrix() != input.u().matrix() {
        return Err(Error::precondition("trivializing witness", "lift does not map to u"));
    }
    let out = boundary_extended_form(input)?;
    let w1 = out.l.compose(&anti_diagonal(lift)?.inv())?;
    DoubleInvertible::from_legs(w1, InvertibleCert::identity(d.lambda2(), 2 * input.size()), d)
}

/// `∂ j1*[lift] = 0`: the boundary of a liftable invertible is trivial.
pub fn exactness_boundary_zero(diagram: &MVDiagram, lift: &InvertibleCert, zeros: usize) -> Result<ExactnessReport> {
    let u = lift.apply_hom(diagram.j1())?;
    let input = BoundaryInput::new(diagram, &u, zeros)?;
    let out = boundary_extended_form(&input)?;
    let w = trivializing_witness(&input, lift)?;
    let mut report = ExactnessReport::new("boundary_after_restriction");
    report.witness("first leg conjugator", w.leg(1).matrix());
    let cert = DoubleCertificate { lhs_padding: 0, rhs_padding: 0, conjugator: Some(w) };
    report.cert("boundary class is trivial", check_double_certificate(&cert, &out.p_u, &out.e2, diagram));
    Ok(report)
}

/// `∂[xi] = 0` for O-shaped `xi`, through the invertible lift of `xi` itself.
pub fn exactness_boundary_zero_o(diagram: &MVDiagram, xi: &InvertibleCert) -> Result<ExactnessReport> {
    let lift = lift_o_element(xi, diagram.j1())?;
    let mut report = exactness_boundary_zero(diagram, &lift.half, 0)?;
    report.segment = "boundary_of_o_element".into();
    report.result("lift of the O element", lift.verify(xi, diagram.j1()));
    report.compare("half maps to xi", lift.half.apply_hom(diagram.j1())?.matrix(), xi.matrix());
    Ok(report)
}

/// `(i1*, i2*) ∂ = 0`: on the first leg `P` is conjugate to `0 + e` by
/// `L` composed with the inverse rotation; the second leg is literal.
pub fn exactness_i_after_boundary(input: &BoundaryInput) -> Result<ExactnessReport> {
    let d = input.diagram();
    let out = boundary_extended_form(input)?;
    let g = out.l.compose(&rotation(d.lambda1(), input.size()).inv())?;
    let mut report = ExactnessReport::new("restriction_after_boundary");
    report.witness("first leg conjugator", g.matrix());
    let first = EquivalenceCertificate::conjugate(g);
    report.cert("first leg", check_certificate(&first, out.p_u.m1(), out.e2.m1(), Fill::Zero));
    let second = EquivalenceCertificate::stabilize(0, 0);
    report.cert("second leg", check_certificate(&second, out.p_u.m2(), out.e2.m2(), Fill::Zero));
    Ok(report)
}

/// Preimage of a boundary-trivial invertible: `u = j2(second) j1(first)`.
#[derive(Clone, Debug)]
pub struct KernelBoundary {
    pub report: ExactnessReport,
    /// `(first, second)`; absent when the witness fails to trivialize.
    pub factors: Option<(InvertibleCert, InvertibleCert)>,
}

fn diagonal_blocks(m: &InvertibleCert, n: usize, what: &str) -> Result<(InvertibleCert, InvertibleCert)> {
    let (a, b) = (m.matrix(), m.inverse());
    for x in [a, b] {
        if !x.block(0, n, n).is_zero() || !x.block(n, 0, n).is_zero() {
            return Err(Error::precondition(what, "off-diagonal blocks are nonzero"));
        }
    }
    Ok((
        InvertibleCert::new(a.block(0, 0, n), b.block(0, 0, n))?,
        InvertibleCert::new(a.block(n, n, n), b.block(n, n, n))?,
    ))
}

/// Kernel of the boundary map: from a double invertible `w` with
/// `P_U = w (0 + 1, 0 + 1) w^-1`, factors `u` through the two legs.
pub fn exactness_kernel_boundary(input: &BoundaryInput, w: &DoubleInvertible) -> Result<KernelBoundary> {
    if input.zeros() != 0 {
        return Err(Error::precondition("kernel of boundary", "projector must be the identity"));
    }
    let d = input.diagram();
    let n = input.size();
    let out = boundary_extended_form(input)?;
    let mut report = ExactnessReport::new("kernel_of_boundary");
    let cert = DoubleCertificate { lhs_padding: 0, rhs_padding: 0, conjugator: Some(w.clone()) };
    report.cert("witness trivializes the boundary", check_double_certificate(&cert, &out.p_u, &out.e2, d));
    if !report.passed() {
        return Ok(KernelBoundary { report, factors: None });
    }
    let (_, b) = diagonal_blocks(&w.leg(2), n, "second leg of the witness")?;
    let g = rotation(d.lambda1(), n).inv().compose(&w.leg(1).inv())?.compose(&out.l)?;
    let (first, _) = diagonal_blocks(&g, n, "rotated first leg")?;
    report.witness("first factor", first.matrix());
    report.witness("second factor", b.matrix());
    let i1 = first.apply_hom(d.j1())?;
    let i2 = b.apply_hom(d.j2())?;
    report.compare("factorization", &i2.matrix().try_mul(i1.matrix())?, input.u().matrix());
    let bridge_lhs = i2.direct_sum(&i1)?;
    let bridge_rhs = input.u().pad_one(n).compose(&o_map(&i1.inv()))?;
    report.compare("sum equals product", bridge_lhs.matrix(), bridge_rhs.matrix());
    if d.legs_identical() {
        let (w1, w2) = (w.leg(1), w.leg(2));
        let v = w1.inv().compose(&w2)?;
        let back = DoubleInvertible::from_legs(w1.inv(), w1.inv(), d)?;
        let normal = back.conjugate(&out.p_u)?;
        report.compare("normal form first leg", normal.m1(), out.e2.m1());
        report.compare("normal form second leg", normal.m2(), &conjugate(out.e2.m2(), &v)?);
        report.compare("normal form transition is trivial", v.apply_hom(d.j1())?.matrix(), &FilteredMatrix::identity(d.lambda_prime(), 2 * n));
    }
    Ok(KernelBoundary { report, factors: Some((first, b)) })
}

/// Preimage under the boundary of `[p] - [(e, e)]` whose legs are trivial.
#[derive(Clone, Debug)]
pub struct KernelI {
    pub report: ExactnessReport,
    /// Recovered invertible over the overlap, commuting with `e`.
    pub u: InvertibleCert,
    pub boundary: BoundaryOutput,
    /// Certifies `P_U + (e, e) ~ p + (0 + e, 0 + e)`.
    pub certificate: DoubleCertificate,
}

/// Invertible `t` over the first leg with `j1(t) = j2(target)`.
fn transport(target: &InvertibleCert, diagram: &MVDiagram) -> Result<InvertibleCert> {
    if diagram.legs_identical() {
        return Ok(target.clone());
    }
    let image = target.apply_hom(diagram.j2())?;
    let leg = diagram.j1();
    let lift = |m: &FilteredMatrix| -> Result<FilteredMatrix> {
        match m.unital_lift(leg)? {
            Some(x) => Ok(x),
            None => m.lift_through(leg),
        }
    };
    InvertibleCert::new(lift(image.matrix())?, lift(image.inverse())?)
        .map_err(|_| Error::precondition("transport", "no invertible lift over the first leg"))
}

/// Kernel of the restriction: `p` is a double idempotent with
/// `p_k = u_k e u_k^-1`, `e = diag(0_zeros, 1)`.
pub fn exactness_kernel_i(
    p: &DoubleMatrix,
    zeros: usize,
    u1: &InvertibleCert,
    u2: &InvertibleCert,
    diagram: &MVDiagram,
) -> Result<KernelI> {
    p.verify(diagram)?;
    let n = p.size();
    if zeros > n || u1.size() != n || u2.size() != n {
        return Err(Error::SizeMismatch(format!("idempotent of size {n} with {zeros} zeros")));
    }
    for (k, u) in [(1, u1), (2, u2)] {
        let alg = diagram.leg(k).source();
        let e = FilteredMatrix::projector(alg, zeros, n - zeros);
        let moved = conjugate(&e, u)?;
        if let Some((i, j, a, b)) = p.leg(k).first_difference(&moved) {
            return Err(Error::precondition("kernel of restriction", format!("leg {k} entry ({i}, {j}): {a} vs {b}")));
        }
    }
    let t = transport(u2, diagram)?;
    let w = t.inv().compose(u1)?;
    let u = w.apply_hom(diagram.j1())?;
    let input = BoundaryInput::with_lifts(diagram, &u, zeros, w.matrix().clone(), w.inverse().clone())?;
    let boundary = boundary_extended_form(&input)?;
    let mut report = ExactnessReport::new("kernel_of_restriction");
    report.witness("recovered invertible", u.matrix());
    let straighten = DoubleInvertible::from_legs(t.inv(), u2.inv(), diagram)?;
    let e_double = DoubleMatrix::projector(diagram, zeros, n - zeros);
    let e1 = FilteredMatrix::projector(diagram.lambda1(), zeros, n - zeros);
    let straight = straighten.conjugate(p)?;
    report.compare("straightened first leg", straight.m1(), &conjugate(&e1, &w)?);
    report.compare("straightened second leg", straight.m2(), e_double.m2());
    let perm = |alg| block_permutation(alg, &[n, n, n], &[1, 0, 2]);
    let pm = DoubleInvertible::from_legs(perm(diagram.lambda1())?, perm(diagram.lambda2())?, diagram)?;
    let g = pm.compose(&straighten.pad_one(2 * n))?;
    let certificate = DoubleCertificate { lhs_padding: 0, rhs_padding: 0, conjugator: Some(g) };
    let lhs = boundary.p_u.direct_sum(&e_double)?;
    let rhs = p.direct_sum(&boundary.e2)?;
    report.cert("boundary of recovered class", check_double_certificate(&certificate, &lhs, &rhs, diagram));
    Ok(KernelI { report, u, boundary, certificate })
}

/// Certificate for `plus + b ~ a + 1_minus` on one leg, where
/// `plus = conj (a + (1 - b) + 1_N + 0_N + 0_q) conj^-1`.
fn k0_leg_certificate(
    a: &IdempotentCert,
    b: &IdempotentCert,
    padding: usize,
    conj: Option<&InvertibleCert>,
) -> Result<EquivalenceCertificate> {
    let alg = a.algebra();
    let (m, n, big) = (a.size(), b.size(), padding);
    let q = m + n + 2 * big;
    let p0 = block_permutation(alg, &[m, n, big, big, q, n], &[0, 1, 5, 2, 3, 4])?;
    let mid = InvertibleCert::identity(alg, m).direct_sum(&trivializer(&b.complement()))?.pad_one(2 * big + q);
    let p2 = block_permutation(alg, &[m, n, big, n, big, q], &[0, 1, 3, 2, 4, 5])?;
    let mut g = InvertibleCert::product([&p0.inv(), &mid, &p2])?;
    if let Some(c) = conj {
        g = c.pad_one(n).compose(&g)?;
    }
    Ok(EquivalenceCertificate { conjugator: Some(g), ..EquivalenceCertificate::stabilize(0, q + n + big) })
}

/// Exactness at the middle `K0` term: the glued class restricts to the inputs.
pub fn exactness_k0_middle(
    d1: (&IdempotentCert, &IdempotentCert),
    d2: (&IdempotentCert, &IdempotentCert),
    witness: &K0Witness,
    diagram: &MVDiagram,
) -> Result<ExactnessReport> {
    let glued = glue_k0_classes(d1, d2, witness, diagram)?;
    let mut report = ExactnessReport::new("glued_k0_restricts");
    report.result("glued idempotent", glued.plus.verify(diagram));
    let plus = glued.plus.double();
    report.witness("glued first leg", plus.m1());
    report.witness("glued second leg", plus.m2());
    for (k, (a, b)) in [(1, d1), (2, d2)] {
        let conj = (k == 2).then(|| glued.plus.conjugator());
        let cert = k0_leg_certificate(a, b, glued.padding, conj)?;
        let alg = a.algebra();
        let lhs = check_idempotent(plus.leg(k))?.direct_sum(b)?;
        let ones = check_idempotent(&FilteredMatrix::identity(alg, glued.minus))?;
        let rhs = a.direct_sum(&ones)?;
        report.cert(&format!("leg {k} restriction"), check_certificate(&cert, lhs.matrix(), rhs.matrix(), Fill::Zero));
    }
    Ok(report)
}

/// Certificate for `s + 1 ~ (u + ... + u) + 1` absorbing the O-shaped lifts.
fn k1_leg_certificate(
    u: &InvertibleCert,
    copies: usize,
    lifts: &[InvertibleCert],
    conj: Option<&InvertibleCert>,
) -> Result<EquivalenceCertificate> {
    let core = copies * u.size();
    let extra: usize = lifts.iter().map(InvertibleCert::size).sum();
    let s = core + extra;
    let mut sizes = vec![core, s];
    sizes.extend(lifts.iter().map(InvertibleCert::size));
    let mut order = vec![0];
    order.extend(2..sizes.len());
    order.push(1);
    let mut g = block_permutation(u.algebra(), &sizes, &order)?;
    if let Some(c) = conj {
        g = c.compose(&g)?;
    }
    Ok(EquivalenceCertificate {
        lhs_padding: 0,
        rhs_padding: s,
        conjugator: Some(g),
        lhs_summands: Vec::new(),
        rhs_summands: lifts.to_vec(),
    })
}

/// Exactness at the middle `K1` term: the glued class restricts to the inputs,
/// with coefficients tracked through the doubling.
pub fn exactness_k1_glue(
    u1: &InvertibleCert,
    u2: &InvertibleCert,
    coefficient: &Dyadic,
    witness: &K1Witness,
    diagram: &MVDiagram,
) -> Result<ExactnessReport> {
    let glued = glue_k1_classes(u1, u2, coefficient, witness, diagram)?;
    let mut report = ExactnessReport::new("glued_k1_restricts");
    report.result("glued invertible", glued.glued.verify(diagram));
    let copies = if glued.coefficient == *coefficient { 1 } else { 2 };
    let restored = if copies == 2 { &glued.coefficient + &glued.coefficient } else { glued.coefficient.clone() };
    let residual = (restored != *coefficient).then(|| format!("{restored} vs {coefficient}"));
    report.checks.push(CheckLine { name: "coefficient bookkeeping".into(), residual });
    let lift2 = lift_o_map(&glued.transition, diagram.j2())?;
    for (k, u, lifts) in [(1, u1, &glued.lifts.0), (2, u2, &glued.lifts.1)] {
        let lifts: Vec<InvertibleCert> = lifts.iter().map(|l| l.lift.clone()).collect();
        let conj = (k == 2).then_some(&lift2);
        let cert = k1_leg_certificate(u, copies, &lifts, conj)?;
        let rep = (1..copies).try_fold(u.clone(), |acc, _| acc.direct_sum(u))?;
        let lhs = glued.glued.leg(k);
        report.cert(&format!("leg {k} restriction"), check_certificate(&cert, lhs.matrix(), rep.matrix(), Fill::One));
    }
    Ok(report)
}
