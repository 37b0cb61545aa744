use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use localk::algebra::{LocalizedAlgebra, PropagationSpace, Value};
use localk::boundary::{boundary_extended_form, BoundaryInput};
use localk::identities::{check_whitehead, run_identity, IdentityId};
use localk::kclasses::{
    check_certificate, exactness_i_after_boundary, k1_add, k1_negate, swap_certificate, Fill, K1Rep,
};
use localk::matrix::{check_idempotent, o_map, FilteredMatrix, InvertibleCert};
use localk::mayer_vietoris::{propagation_cover, quotient_diagram, DoubleMatrix, MVDiagram};
use localk::par::Execution;
use localk::sample::{random_element, random_idempotent, random_invertible, random_matrix, rng_for};
use localk::scalars::{q, quot_invert, quot_reduce, Poly, Rational};

fn rational() -> impl Strategy<Value = Rational> {
    prop_oneof![
        (-50i64..50, 1i64..50).prop_map(|(n, d)| q(n, d)),
        (any::<i64>(), 1i64..i64::MAX).prop_map(|(n, d)| q(n, d)),
    ]
}

fn big(r: &Rational) -> BigRational {
    BigRational::new(r.numer(), r.denom())
}

fn poly(max_len: usize) -> impl Strategy<Value = Poly> {
    prop::collection::vec(-5i64..5, 0..max_len).prop_map(|c| Poly::from_ints(&c))
}

fn instances() -> Vec<LocalizedAlgebra> {
    vec![
        LocalizedAlgebra::rationals(16),
        LocalizedAlgebra::propagation(PropagationSpace::line(4, q(4, 1)).unwrap(), true, 16),
        LocalizedAlgebra::propagation(PropagationSpace::line(3, q(2, 1)).unwrap(), false, 16),
        LocalizedAlgebra::polynomial(8, 16),
        LocalizedAlgebra::quotient(Poly::from_ints(&[-1, 0, 1]), 8, 16).unwrap(),
    ]
}

fn diagram(which: bool) -> MVDiagram {
    if which {
        quotient_diagram(8, 16)
    } else {
        propagation_cover(16)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn rational_ops_agree_with_big_rationals(a in rational(), b in rational()) {
        prop_assert_eq!(big(&(&a + &b)), big(&a) + big(&b));
        prop_assert_eq!(big(&(&a - &b)), big(&a) - big(&b));
        prop_assert_eq!(big(&(&a * &b)), big(&a) * big(&b));
        if !b.is_zero() {
            prop_assert_eq!(big(&a.checked_div(&b).unwrap()), big(&a) / big(&b));
        }
    }

    #[test]
    fn rational_text_round_trips(a in rational()) {
        let back: Rational = a.to_string().parse().unwrap();
        prop_assert_eq!(&back, &a);
        prop_assert_eq!(a.denom() > BigInt::from(0), true);
    }

    #[test]
    fn polynomial_division_reconstructs(a in poly(7), b in poly(4)) {
        prop_assume!(!b.is_zero());
        let (quo, rem) = a.div_rem(&b).unwrap();
        prop_assert_eq!(quo.mul(&b).add(&rem), a);
        prop_assert!(rem.is_zero() || rem.degree() < b.degree());
    }

    #[test]
    fn extended_gcd_is_a_bezout_identity(a in poly(5), b in poly(5)) {
        let (g, s, t) = a.ext_gcd(&b);
        prop_assert_eq!(s.mul(&a).add(&t.mul(&b)), g.clone());
        if !g.is_zero() {
            prop_assert!(a.rem(&g).unwrap().is_zero());
            prop_assert!(b.rem(&g).unwrap().is_zero());
        }
    }

    #[test]
    fn quotient_inverse_multiplies_to_one(p in poly(6)) {
        let m = Poly::from_ints(&[2, 0, -3, 1]);
        let e = quot_reduce(&p, &m).unwrap();
        if let Ok(inv) = quot_invert(&e) {
            prop_assert!(e.mul(&inv).unwrap().is_one());
        }
    }

    #[test]
    fn product_degree_drops_at_most_one(seed in any::<u64>(), which in 0usize..5) {
        let alg = &instances()[which];
        let mut rng = rng_for(seed, 0, 0);
        let (a, b) = (random_element(alg, &mut rng), random_element(alg, &mut rng));
        let bound = alg.degree(&a).min(alg.degree(&b)).saturating_sub(1);
        prop_assert!(alg.degree(&alg.mul(&a, &b)) >= bound);
        prop_assert_eq!(alg.degree(&alg.one()), alg.max_level());
    }

    #[test]
    fn addition_never_loses_a_level(seed in any::<u64>(), which in 0usize..5) {
        let alg = &instances()[which];
        let mut rng = rng_for(seed, 9, 0);
        let (a, b) = (random_element(alg, &mut rng), random_element(alg, &mut rng));
        prop_assert!(alg.degree(&alg.add(&a, &b)) >= alg.degree(&a).min(alg.degree(&b)));
    }

    #[test]
    fn sections_split_the_legs(seed in any::<u64>(), which in any::<bool>(), leg in 1usize..3) {
        let d = diagram(which);
        let h = d.leg(leg);
        let v = random_element(h.target(), &mut rng_for(seed, 10, 0));
        let back = h.section(&v).unwrap();
        prop_assert_eq!(h.apply(&back), v);
    }

    #[test]
    fn multiplication_is_associative(seed in any::<u64>(), which in 0usize..5) {
        let alg = &instances()[which];
        let mut rng = rng_for(seed, 1, 0);
        let (a, b, c) = (random_element(alg, &mut rng), random_element(alg, &mut rng), random_element(alg, &mut rng));
        prop_assert_eq!(alg.mul(&alg.mul(&a, &b), &c), alg.mul(&a, &alg.mul(&b, &c)));
        prop_assert_eq!(alg.mul(&a, &alg.add(&b, &c)), alg.add(&alg.mul(&a, &b), &alg.mul(&a, &c)));
    }

    #[test]
    fn invertibles_carry_true_inverses(seed in any::<u64>(), which in 0usize..5, n in 1usize..4) {
        let alg = &instances()[which];
        let u = random_invertible(alg, n, &mut rng_for(seed, 2, 0));
        prop_assert!(u.verify().is_ok());
        prop_assert!((u.matrix() * u.inverse()).is_identity());
        prop_assert!(check_whitehead(&u).passed());
        prop_assert!(o_map(&u).is_o_shaped());
    }

    #[test]
    fn conjugated_idempotents_stay_idempotent(seed in any::<u64>(), which in 0usize..5, n in 1usize..4) {
        let alg = &instances()[which];
        let mut rng = rng_for(seed, 3, 0);
        let p = random_idempotent(alg, n, &mut rng);
        let u = random_invertible(alg, n, &mut rng);
        let moved = p.conjugate(&u).unwrap();
        prop_assert!(check_idempotent(moved.matrix()).is_ok());
        let c = p.complement();
        prop_assert!((p.matrix() * c.matrix()).is_zero());
    }

    #[test]
    fn swap_certificates_validate(seed in any::<u64>(), which in 0usize..5, n in 1usize..3, m in 1usize..3) {
        let alg = &instances()[which];
        let mut rng = rng_for(seed, 4, 0);
        let (a, b) = (random_matrix(alg, n, &mut rng), random_matrix(alg, m, &mut rng));
        let cert = swap_certificate(&a, &b).unwrap();
        let (ab, ba) = (a.direct_sum(&b).unwrap(), b.direct_sum(&a).unwrap());
        prop_assert!(check_certificate(&cert, &ab, &ba, Fill::Zero).passed());
        prop_assert!(check_certificate(&cert.reverse(), &ba, &ab, Fill::Zero).passed());
    }

    #[test]
    fn double_matrices_are_closed_under_ring_operations(seed in any::<u64>(), which in any::<bool>(), n in 1usize..3) {
        let d = diagram(which);
        let mut rng = rng_for(seed, 5, 0);
        let mut double = || {
            let m1 = random_matrix(d.lambda1(), n, &mut rng);
            let m2 = m1.apply_hom(d.j1()).unwrap().lift_through(d.j2()).unwrap();
            localk::mayer_vietoris::make_double(m1, m2, &d).unwrap()
        };
        let (x, y): (DoubleMatrix, DoubleMatrix) = (double(), double());
        for z in [x.mul(&y).unwrap(), x.add(&y).unwrap(), x.sub(&y).unwrap(), x.direct_sum(&y).unwrap()] {
            prop_assert!(z.verify(&d).is_ok());
        }
    }

    #[test]
    fn boundary_of_random_units_is_certified(seed in any::<u64>(), which in any::<bool>(), n in 1usize..3) {
        let d = diagram(which);
        let u = random_invertible(d.lambda_prime(), n, &mut rng_for(seed, 6, 0));
        let input = BoundaryInput::new(&d, &u, 0).unwrap();
        let out = boundary_extended_form(&input).unwrap();
        prop_assert!(out.p_u.is_idempotent());
        prop_assert!(out.p_u.verify(&d).is_ok());
        prop_assert!((out.l.matrix() * out.l.inverse()).is_identity());
        prop_assert!(exactness_i_after_boundary(&input).unwrap().passed());
    }

    #[test]
    fn k1_ledger_cancels_against_its_negation(seed in any::<u64>(), n in 1usize..3) {
        let alg = LocalizedAlgebra::rationals(16);
        let u = random_invertible(&alg, n, &mut rng_for(seed, 7, 0));
        let x = K1Rep::single(u.clone());
        let y = k1_add(&x, &K1Rep::single(u));
        prop_assert_eq!(y.terms.len(), 1);
        prop_assert!(k1_add(&x, &K1Rep::zero()) == x);
        prop_assert!(k1_negate(&k1_negate(&x)) == x);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn suites_do_not_depend_on_scheduling(seed in any::<u64>(), which in 0usize..5) {
        let alg = &instances()[which];
        for id in [IdentityId::SumProduct, IdentityId::OMapAdditive] {
            let par = run_identity(id, alg, 3, 8, seed, Execution::Parallel);
            let seq = run_identity(id, alg, 3, 8, seed, Execution::Sequential);
            prop_assert!(par.passed());
            prop_assert_eq!(par, seq);
        }
    }
}

#[test]
fn identity_units_are_neutral() {
    for alg in instances() {
        let one = InvertibleCert::identity(&alg, 2);
        let m = random_matrix(&alg, 2, &mut rng_for(1, 8, 0));
        assert_eq!(&m * one.matrix(), m);
        assert!(FilteredMatrix::identity(&alg, 2).is_identity());
        assert!(matches!(alg.one(), Value::Scalar(_) | Value::Kernel(_) | Value::Poly(_)));
    }
}
