use localk::algebra::{FilteredHom, HomKind, LocalizedAlgebra, PropagationSpace, Value};
use localk::boundary::{boundary_second_form, BoundaryInput};
use localk::kclasses::{check_certificate, exactness_boundary_zero, EquivalenceCertificate, Fill};
use localk::matrix::{conjugate, o_map, rotation, ElementaryMatrix, FilteredMatrix, InvertibleCert};
use localk::mayer_vietoris::{quotient_diagram, DoubleMatrix, MVDiagram};
use localk::sample::{random_element, rng_for};
use localk::scalars::{q, Poly, Rational};

fn trivial_diagram() -> MVDiagram {
    let alg = LocalizedAlgebra::rationals(16);
    let id = FilteredHom::new(alg.clone(), alg, HomKind::Identity, true).unwrap();
    MVDiagram::new(id.clone(), id).unwrap()
}

fn scalars(alg: &LocalizedAlgebra, c: i64, d: i64) -> FilteredMatrix {
    FilteredMatrix::scalar_diag(alg, &[q(c, d)])
}

#[test]
fn unit_two_over_the_rationals_has_trivial_boundary() {
    let d = trivial_diagram();
    let u = InvertibleCert::scalar_diag(d.lambda_prime(), &[q(2, 1)]).unwrap();
    let input = BoundaryInput::with_lifts(&d, &u, 0, scalars(d.lambda1(), 2, 1), scalars(d.lambda1(), 1, 2)).unwrap();
    let out = boundary_second_form(&input).unwrap();
    assert!(out.s0.is_zero() && out.s1.is_zero());
    assert!(out.is_trivial_lift());
    let e2 = DoubleMatrix::projector(&d, 1, 1);
    assert_eq!(out.e2, e2);
    assert_eq!(out.p_u, e2);
    let lift = InvertibleCert::scalar_diag(d.lambda1(), &[q(2, 1)]).unwrap();
    assert!(exactness_boundary_zero(&d, &lift, 0).unwrap().passed());
}

#[test]
fn inverse_lifts_give_the_displayed_idempotent() {
    let d = quotient_diagram(8, 16);
    let u = InvertibleCert::scalar_diag(d.lambda_prime(), &[q(-3, 2), q(5, 1)]).unwrap();
    let (a, b) = (u.matrix().lift_through(d.j1()).unwrap(), u.inverse().lift_through(d.j1()).unwrap());
    let input = BoundaryInput::with_lifts(&d, &u, 0, a.clone(), b).unwrap();
    let out = boundary_second_form(&input).unwrap();
    assert!(out.s0.is_zero() && out.s1.is_zero());
    assert_eq!(out.p.matrix(), &FilteredMatrix::projector(d.lambda1(), 2, 2));
    assert_eq!(out.p_u, out.e2);
}

#[test]
fn clutching_defects_are_one_minus_x_squared() {
    let d = quotient_diagram(8, 16);
    let x = |alg: &LocalizedAlgebra| FilteredMatrix::diag(alg, &[Value::Poly(Poly::x())]).unwrap();
    let u = InvertibleCert::new(x(d.lambda_prime()), x(d.lambda_prime())).unwrap();
    let input = BoundaryInput::with_lifts(&d, &u, 0, x(d.lambda1()), x(d.lambda1())).unwrap();
    let out = boundary_second_form(&input).unwrap();
    let defect = FilteredMatrix::diag(d.lambda1(), &[Value::Poly(Poly::from_ints(&[1, 0, -1]))]).unwrap();
    assert_eq!(out.s0, defect);
    assert_eq!(out.s1, defect);
    assert!(!out.is_trivial_lift());
    let expected_p = [[vec![1, 0, -2, 0, 1], vec![0, 2, 0, -3, 0, 1]], [vec![0, 1, 0, -1], vec![0, 0, 2, 0, -1]]];
    for (i, row) in expected_p.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            assert_eq!(out.p.matrix().get(i, j), &Value::Poly(Poly::from_ints(c)));
        }
    }
}

#[test]
fn elementary_matrices_add_and_cancel() {
    let alg = LocalizedAlgebra::polynomial(8, 16);
    let mut rng = rng_for(9, 0, 0);
    for _ in 0..20 {
        let (a, b) = (random_element(&alg, &mut rng), random_element(&alg, &mut rng));
        let e = |v: Value| ElementaryMatrix::new(&alg, 3, 0, 2, v).unwrap().to_matrix();
        assert_eq!(&e(a.clone()) * &e(b.clone()), e(alg.add(&a, &b)));
        assert!((&e(a.clone()) * &e(alg.neg(&a))).is_identity());
    }
}

#[test]
fn scalars_sit_at_the_top_level() {
    for alg in [
        LocalizedAlgebra::rationals(16),
        LocalizedAlgebra::polynomial(8, 16),
        LocalizedAlgebra::propagation(PropagationSpace::line(3, q(4, 1)).unwrap(), true, 16),
    ] {
        assert_eq!(alg.degree(&alg.one()), 16);
        assert_eq!(alg.degree(&alg.scalar(&q(-7, 3))), 16);
    }
}

/// Largest distance between points joined by a nonzero kernel entry.
fn propagation(space: &PropagationSpace, v: &Value) -> Rational {
    let Value::Kernel(k) = v else { panic!("not a kernel") };
    let n = space.len();
    (0..n * n)
        .filter(|&ij| !k[ij].is_zero())
        .map(|ij| space.dist(ij / n, ij % n).clone())
        .max()
        .unwrap_or_default()
}

#[test]
fn kernel_supports_add_under_composition() {
    let space = PropagationSpace::line(5, q(4, 1)).unwrap();
    let alg = LocalizedAlgebra::propagation(space.clone(), false, 16);
    let mut rng = rng_for(10, 0, 0);
    for _ in 0..200 {
        let (a, b) = (random_element(&alg, &mut rng), random_element(&alg, &mut rng));
        let ab = alg.mul(&a, &b);
        assert!(propagation(&space, &ab) <= &propagation(&space, &a) + &propagation(&space, &b));
        let (Value::Kernel(ka), Value::Kernel(kb), Value::Kernel(kab)) = (&a, &b, &ab) else { unreachable!() };
        for i in 0..5 {
            for j in 0..5 {
                let direct: Rational = (0..5).map(|k| &ka[i * 5 + k] * &kb[k * 5 + j]).sum();
                assert_eq!(kab[i * 5 + j], direct);
            }
        }
    }
}

#[test]
fn rotation_swaps_direct_summands() {
    let alg = LocalizedAlgebra::rationals(16);
    let a = FilteredMatrix::from_scalars(&alg, &[vec![q(1, 1), q(2, 1)], vec![q(0, 1), q(3, 1)]]);
    let b = FilteredMatrix::from_scalars(&alg, &[vec![q(-1, 2), q(0, 1)], vec![q(5, 1), q(1, 1)]]);
    let r = rotation(&alg, 2);
    let ab = a.direct_sum(&b).unwrap();
    let ba = b.direct_sum(&a).unwrap();
    assert_eq!(conjugate(&ab, &r).unwrap(), ba);
    let cert = EquivalenceCertificate::conjugate(r);
    assert!(check_certificate(&cert, &ab, &ba, Fill::Zero).passed());
}

#[test]
fn o_map_is_not_multiplicative_on_non_commuting_pairs() {
    let alg = LocalizedAlgebra::rationals(16);
    let e = |i, j| ElementaryMatrix::new(&alg, 2, i, j, alg.one()).unwrap().expand();
    let (u1, u2) = (e(0, 1), e(1, 0));
    let whole = o_map(&u1.compose(&u2).unwrap());
    let split = o_map(&u1).matrix() * o_map(&u2).matrix();
    assert_ne!(whole.matrix(), &split);
    assert_eq!(whole.matrix().block(0, 0, 2), split.block(0, 0, 2));
    let (a, b) = (
        InvertibleCert::scalar_diag(&alg, &[q(2, 1)]).unwrap(),
        InvertibleCert::scalar_diag(&alg, &[q(3, 1)]).unwrap(),
    );
    assert_eq!(o_map(&a.compose(&b).unwrap()).matrix(), &(o_map(&a).matrix() * o_map(&b).matrix()));
}
