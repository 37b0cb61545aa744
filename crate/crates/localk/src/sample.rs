//! Deterministic random generation of elements, invertibles and idempotents.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{Carrier, FilteredHom, LocalizedAlgebra, Value};
use crate::matrix::{check_idempotent, ElementaryMatrix, FilteredMatrix, IdempotentCert, InvertibleCert};
use crate::scalars::{quot_invert, quot_reduce, Poly, Rational};

pub type SampleRng = ChaCha8Rng;

/// Independent stream for sample `index` of task `task` under `seed`.
pub fn rng_for(seed: u64, task: u64, index: u64) -> SampleRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ task.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(index);
    rng
}

/// Rational with numerator in `[-3, 3]` and denominator in `[1, 3]`.
pub fn random_rational(rng: &mut SampleRng) -> Rational {
    Rational::new(rng.random_range(-3..=3), rng.random_range(1..=3)).expect("nonzero denominator")
}

pub fn random_nonzero_rational(rng: &mut SampleRng) -> Rational {
    let num = rng.random_range(1..=3) * if rng.random_bool(0.5) { -1 } else { 1 };
    Rational::new(num, rng.random_range(1..=3)).expect("nonzero denominator")
}

fn random_poly(rng: &mut SampleRng, max_degree: usize) -> Poly {
    let d = rng.random_range(0..=max_degree);
    Poly::new((0..=d).map(|_| random_rational(rng)).collect())
}

/// Random element spread across filtration levels.
pub fn random_element(alg: &LocalizedAlgebra, rng: &mut SampleRng) -> Value {
    match alg.carrier() {
        Carrier::Rationals => Value::Scalar(random_rational(rng)),
        Carrier::Propagation { space, causal } => {
            let n = space.len();
            let reach = space.dist(0, rng.random_range(0..n)).clone();
            let mut k = vec![Rational::zero(); n * n];
            for i in 0..n {
                for j in 0..n {
                    if (!causal || i <= j) && space.dist(i, j) <= &reach && rng.random_bool(0.5) {
                        k[i * n + j] = random_rational(rng);
                    }
                }
            }
            Value::Kernel(k)
        }
        Carrier::Polynomial { modulus, .. } => {
            let cap = modulus.as_ref().and_then(Poly::degree).map_or(2, |d| d.saturating_sub(1).min(2));
            Value::Poly(random_poly(rng, cap))
        }
    }
}

/// Random unit with its inverse.
pub fn random_unit(alg: &LocalizedAlgebra, rng: &mut SampleRng) -> (Value, Value) {
    if let Carrier::Polynomial { modulus: Some(m), .. } = alg.carrier() {
        for _ in 0..4 {
            let p = random_poly(rng, m.degree().unwrap_or(1) - 1);
            let e = quot_reduce(&p, m).expect("monic modulus");
            if let Ok(inv) = quot_invert(&e) {
                return (Value::Poly(e.into_rep()), Value::Poly(inv.into_rep()));
            }
        }
    }
    if let Carrier::Propagation { space, .. } = alg.carrier() {
        let n = space.len();
        let diag: Vec<Rational> = (0..n).map(|_| random_nonzero_rational(rng)).collect();
        let mut k = vec![Rational::zero(); n * n];
        let mut kinv = k.clone();
        for (i, c) in diag.iter().enumerate() {
            k[i * n + i] = c.clone();
            kinv[i * n + i] = c.recip().expect("nonzero");
        }
        return (Value::Kernel(k), Value::Kernel(kinv));
    }
    let c = random_nonzero_rational(rng);
    (alg.scalar(&c), alg.scalar(&c.recip().expect("nonzero")))
}

pub fn random_matrix(alg: &LocalizedAlgebra, n: usize, rng: &mut SampleRng) -> FilteredMatrix {
    let entries = (0..n * n).map(|_| random_element(alg, rng)).collect();
    FilteredMatrix::new(alg, n, entries).expect("sampled entries are valid")
}

/// Product of a diagonal of units and up to four elementary matrices.
pub fn random_invertible(alg: &LocalizedAlgebra, n: usize, rng: &mut SampleRng) -> InvertibleCert {
    let (units, inverses): (Vec<Value>, Vec<Value>) = (0..n).map(|_| random_unit(alg, rng)).unzip();
    let d = FilteredMatrix::diag(alg, &units).expect("valid units");
    let dinv = FilteredMatrix::diag(alg, &inverses).expect("valid units");
    let mut u = InvertibleCert::trusted(d, dinv);
    if n >= 2 {
        for _ in 0..rng.random_range(0..=4) {
            let i = rng.random_range(0..n);
            let j = (i + rng.random_range(1..n)) % n;
            let e = random_elementary(alg, n, i, j, rng);
            u = u.compose(&e.expand()).expect("same shape");
        }
    }
    u
}

/// Elementary matrix with a random entry.
pub fn random_elementary(
    alg: &LocalizedAlgebra,
    n: usize,
    i: usize,
    j: usize,
    rng: &mut SampleRng,
) -> ElementaryMatrix {
    ElementaryMatrix::new(alg, n, i, j, random_element(alg, rng)).expect("valid indices")
}

/// Random conjugate of a 0/1 diagonal.
pub fn random_idempotent(alg: &LocalizedAlgebra, n: usize, rng: &mut SampleRng) -> IdempotentCert {
    let diag: Vec<Rational> = (0..n).map(|_| Rational::from_int(rng.random_range(0..=1))).collect();
    let e = check_idempotent(&FilteredMatrix::scalar_diag(alg, &diag)).expect("0/1 diagonal");
    e.conjugate(&random_invertible(alg, n, rng)).expect("conjugate of an idempotent")
}

/// Random matrix in the kernel of `h`: `M - section(h(M))`.
pub fn random_kernel_matrix(h: &FilteredHom, n: usize, rng: &mut SampleRng) -> FilteredMatrix {
    let src = h.source();
    let m = random_matrix(src, n, rng);
    let back = m.apply_hom(h).and_then(|img| img.lift_through(&h.with_section()));
    &m - &back.expect("hom matches its source")
}
