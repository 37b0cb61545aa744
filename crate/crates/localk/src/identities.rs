//! Executable checks of the elementary-matrix and O-map identities.

use rand::Rng;

use crate::algebra::{LocalizedAlgebra, Value};
use crate::error::{Error, Result};
use crate::matrix::{
    block_permutation, conjugate, o_map, rotation, swap, ElementaryMatrix, FilteredMatrix, InvertibleCert,
};
use crate::par::Execution;
use crate::sample::{random_element, random_invertible, random_matrix, rng_for, SampleRng};

/// The identities exercised by [`run_identity_suite`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IdentityId {
    /// Rotation conjugation turns `A + B` into `B + A`.
    RotationSwap,
    /// `O(u1 + u2)` is a block permutation of `O(u1) + O(u2)`.
    OMapAdditive,
    /// `O(l u l^-1) = (l + l) O(u) (l + l)^-1`.
    OMapConjugation,
    /// `O(u^-1)` is the block-swap conjugate of `O(u)`.
    OMapInverseSwap,
    /// `O(u1 u2) = O(u1) O(u2)` exactly when `u1` and `u2` commute.
    OMapProductDefect,
    /// `A + B = (AB + 1)(B^-1 + B) = (B^-1 + B)(BA + 1)`.
    SumProduct,
    /// The four-factor elementary decomposition of `diag(u, u^-1)`.
    Whitehead,
    /// `E_ij(a) E_ij(b) = E_ij(a + b)`.
    ElementaryAdditive,
    /// `E_ij(a) E_ij(-a) = 1`.
    ElementaryInverse,
    /// `E_ij(a) = [E_ik(a), E_kj(1)]`.
    ElementaryCommutator,
    /// `diag(ABA^-1B^-1, 1) = O(A) O(B) O((BA)^-1)`.
    CommutatorFactorization,
    /// `diag(ABA^-1, 1) = O(A) diag(B, 1) O(A)^-1`.
    ConjugationFactorization,
}

impl IdentityId {
    pub const ALL: [IdentityId; 12] = [
        IdentityId::RotationSwap,
        IdentityId::OMapAdditive,
        IdentityId::OMapConjugation,
        IdentityId::OMapInverseSwap,
        IdentityId::OMapProductDefect,
        IdentityId::SumProduct,
        IdentityId::Whitehead,
        IdentityId::ElementaryAdditive,
        IdentityId::ElementaryInverse,
        IdentityId::ElementaryCommutator,
        IdentityId::CommutatorFactorization,
        IdentityId::ConjugationFactorization,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IdentityId::RotationSwap => "rotation_swap",
            IdentityId::OMapAdditive => "o_map_additive",
            IdentityId::OMapConjugation => "o_map_conjugation",
            IdentityId::OMapInverseSwap => "o_map_inverse_swap",
            IdentityId::OMapProductDefect => "o_map_product_defect",
            IdentityId::SumProduct => "sum_product",
            IdentityId::Whitehead => "whitehead",
            IdentityId::ElementaryAdditive => "elementary_additive",
            IdentityId::ElementaryInverse => "elementary_inverse",
            IdentityId::ElementaryCommutator => "elementary_commutator",
            IdentityId::CommutatorFactorization => "commutator_factorization",
            IdentityId::ConjugationFactorization => "conjugation_factorization",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|id| id.name() == name)
    }

    /// Matrix multiplications along the constructed side; its level may drop by at most this much.
    pub fn multiplications(self) -> u32 {
        match self {
            IdentityId::ElementaryAdditive | IdentityId::ElementaryInverse | IdentityId::OMapProductDefect => 1,
            IdentityId::Whitehead | IdentityId::ElementaryCommutator | IdentityId::CommutatorFactorization => 3,
            _ => 2,
        }
    }

    fn min_size(self) -> usize {
        match self {
            IdentityId::ElementaryAdditive | IdentityId::ElementaryInverse => 2,
            IdentityId::ElementaryCommutator => 3,
            _ => 1,
        }
    }
}

/// A sample on which an identity failed, with canonical encodings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityFailure {
    pub sample: usize,
    pub reason: String,
    pub inputs: Vec<String>,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityReport {
    pub id: String,
    pub samples: usize,
    pub failures: Vec<IdentityFailure>,
    /// Smallest observed `constructed level - (input level - multiplications)`.
    pub min_level_margin: Option<i64>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn from_outcomes(id: &str, outcomes: Vec<Outcome>) -> Self {
        let samples = outcomes.len();
        let min_level_margin = outcomes.iter().map(|o| o.margin).min();
        let failures = outcomes
            .into_iter()
            .enumerate()
            .filter_map(|(i, o)| o.failure.map(|mut f| {
                f.sample = i;
                f
            }))
            .collect();
        IdentityReport { id: id.into(), samples, failures, min_level_margin }
    }
}

/// Result of evaluating one identity on one input.
struct Outcome {
    margin: i64,
    failure: Option<IdentityFailure>,
}

struct Evaluation {
    inputs: Vec<String>,
    lhs: FilteredMatrix,
    rhs: FilteredMatrix,
    input_level: u32,
    constructed_level: u32,
    multiplications: u32,
}

impl Evaluation {
    fn outcome(self) -> Outcome {
        let floor = self.input_level.saturating_sub(self.multiplications);
        let margin = self.constructed_level as i64 - floor as i64;
        let reason = if self.lhs != self.rhs {
            Some(match self.lhs.first_difference(&self.rhs) {
                Some((r, c, a, b)) => format!("sides differ at ({r}, {c}): {a} vs {b}"),
                None => "sides differ".into(),
            })
        } else if margin < 0 {
            Some(format!("level {} below bound {floor}", self.constructed_level))
        } else {
            None
        };
        let failure = reason.map(|reason| IdentityFailure {
            sample: 0,
            reason,
            inputs: self.inputs,
            lhs: self.lhs.render(),
            rhs: self.rhs.render(),
        });
        Outcome { margin, failure }
    }
}

fn describe(u: &InvertibleCert) -> String {
    format!("{} (inverse {})", u.matrix().render(), u.inverse().render())
}

/// The four block factors `[[1,u],[0,1]]`, `[[1,0],[-u^-1,1]]`, `[[1,u],[0,1]]`,
/// `[[0,-1],[1,0]]`, whose product is `diag(u, u^-1)`.
pub fn whitehead_decompose(u: &InvertibleCert) -> [FilteredMatrix; 4] {
    whitehead_factors(u.matrix(), u.inverse())
}

/// Four factors built from arbitrary blocks `a` (in place of `u`) and `b`
/// (in place of `u^-1`); used with lifted, possibly non-invertible blocks.
pub fn whitehead_factors(a: &FilteredMatrix, b: &FilteredMatrix) -> [FilteredMatrix; 4] {
    let alg = a.algebra();
    let n = a.size();
    let one = FilteredMatrix::identity(alg, n);
    let zero = FilteredMatrix::zero(alg, n);
    let upper = FilteredMatrix::from_blocks(&[vec![one.clone(), a.clone()], vec![zero.clone(), one.clone()]])
        .expect("uniform blocks");
    let lower = FilteredMatrix::from_blocks(&[vec![one.clone(), zero.clone()], vec![-b, one.clone()]])
        .expect("uniform blocks");
    [upper.clone(), lower, upper, rotation(alg, n).matrix().clone()]
}

/// Inverses of [`whitehead_factors`] in reverse order, so that their product
/// inverts the product of the factors.
pub fn whitehead_inverse_factors(a: &FilteredMatrix, b: &FilteredMatrix) -> [FilteredMatrix; 4] {
    let alg = a.algebra();
    let n = a.size();
    let [upper, lower, _, _] = whitehead_factors(&-a, &-b);
    [rotation(alg, n).inverse().clone(), upper.clone(), lower, upper]
}

fn product(factors: &[FilteredMatrix]) -> FilteredMatrix {
    factors[1..].iter().fold(factors[0].clone(), |acc, f| &acc * f)
}

pub fn check_whitehead(u: &InvertibleCert) -> IdentityReport {
    IdentityReport::from_outcomes(IdentityId::Whitehead.name(), vec![eval_whitehead(u).outcome()])
}

fn eval_whitehead(u: &InvertibleCert) -> Evaluation {
    let lhs = product(&whitehead_decompose(u));
    Evaluation {
        inputs: vec![describe(u)],
        constructed_level: lhs.level(),
        rhs: o_map(u).matrix().clone(),
        lhs,
        input_level: u.level(),
        multiplications: IdentityId::Whitehead.multiplications(),
    }
}

/// Checks `diag(ABA^-1B^-1, 1) = O(A) O(B) O((BA)^-1)`.
pub fn check_commutator_factorization(a: &InvertibleCert, b: &InvertibleCert) -> Result<IdentityReport> {
    let e = eval_commutator(a, b)?;
    Ok(IdentityReport::from_outcomes(IdentityId::CommutatorFactorization.name(), vec![e.outcome()]))
}

fn eval_commutator(a: &InvertibleCert, b: &InvertibleCert) -> Result<Evaluation> {
    let n = a.size();
    let comm = a.compose(b)?.compose(&a.inv())?.compose(&b.inv())?;
    let lhs = comm.matrix().pad_one(n);
    let ba_inv = b.compose(a)?.inv();
    let rhs = &(o_map(a).matrix() * o_map(b).matrix()) * o_map(&ba_inv).matrix();
    Ok(Evaluation {
        inputs: vec![describe(a), describe(b)],
        constructed_level: lhs.level().min(rhs.level()),
        lhs,
        rhs,
        input_level: a.level().min(b.level()),
        multiplications: IdentityId::CommutatorFactorization.multiplications(),
    })
}

/// Checks both factorizations `A + B = (AB + 1)(B^-1 + B) = (B^-1 + B)(BA + 1)`.
pub fn check_sum_product_identity(a: &InvertibleCert, b: &InvertibleCert) -> Result<IdentityReport> {
    let outcomes = eval_sum_product(a, b)?.into_iter().map(Evaluation::outcome).collect();
    Ok(IdentityReport::from_outcomes(IdentityId::SumProduct.name(), outcomes))
}

fn eval_sum_product(a: &InvertibleCert, b: &InvertibleCert) -> Result<[Evaluation; 2]> {
    let n = a.size();
    let sum = a.matrix().direct_sum(b.matrix())?;
    let twist = b.inverse().direct_sum(b.matrix())?;
    let ab = a.matrix().try_mul(b.matrix())?.pad_one(n);
    let ba = b.matrix().try_mul(a.matrix())?.pad_one(n);
    let make = |rhs: FilteredMatrix| Evaluation {
        inputs: vec![describe(a), describe(b)],
        constructed_level: rhs.level(),
        lhs: sum.clone(),
        rhs,
        input_level: a.level().min(b.level()),
        multiplications: IdentityId::SumProduct.multiplications(),
    };
    Ok([make(&ab * &twist), make(&twist * &ba)])
}

/// Checks `diag(ABA^-1, 1) = O(A) diag(B, 1) O(A)^-1`.
pub fn check_conjugation_identity(a: &InvertibleCert, b: &InvertibleCert) -> Result<IdentityReport> {
    let e = eval_conjugation(a, b)?;
    Ok(IdentityReport::from_outcomes(IdentityId::ConjugationFactorization.name(), vec![e.outcome()]))
}

fn eval_conjugation(a: &InvertibleCert, b: &InvertibleCert) -> Result<Evaluation> {
    let n = a.size();
    let lhs = a.compose(b)?.compose(&a.inv())?.matrix().pad_one(n);
    let rhs = conjugate(&b.matrix().pad_one(n), &o_map(a))?;
    Ok(Evaluation {
        inputs: vec![describe(a), describe(b)],
        constructed_level: rhs.level(),
        lhs,
        rhs,
        input_level: a.level().min(b.level()),
        multiplications: IdentityId::ConjugationFactorization.multiplications(),
    })
}

/// Checks `E_ij(a) = E_ik(a) E_kj(1) E_ik(-a) E_kj(-1)` in size `n`.
pub fn check_elementary_commutator(
    n: usize,
    (i, j, k): (usize, usize, usize),
    a: &Value,
    alg: &LocalizedAlgebra,
) -> Result<IdentityReport> {
    let e = eval_elementary_commutator(n, (i, j, k), a, alg)?;
    Ok(IdentityReport::from_outcomes(IdentityId::ElementaryCommutator.name(), vec![e.outcome()]))
}

fn eval_elementary_commutator(
    n: usize,
    (i, j, k): (usize, usize, usize),
    a: &Value,
    alg: &LocalizedAlgebra,
) -> Result<Evaluation> {
    if i == j || j == k || i == k {
        return Err(Error::InvalidIndices(format!("({i}, {j}, {k}) are not distinct")));
    }
    let eik = ElementaryMatrix::new(alg, n, i, k, a.clone())?.expand();
    let ekj = ElementaryMatrix::new(alg, n, k, j, alg.one())?.expand();
    let lhs = ElementaryMatrix::new(alg, n, i, j, a.clone())?.to_matrix();
    let rhs = product(&[eik.matrix().clone(), ekj.matrix().clone(), eik.inverse().clone(), ekj.inverse().clone()]);
    Ok(Evaluation {
        inputs: vec![alg.encode(a), format!("({i}, {j}, {k}) in size {n}")],
        constructed_level: rhs.level(),
        lhs,
        rhs,
        input_level: alg.degree(a),
        multiplications: IdentityId::ElementaryCommutator.multiplications(),
    })
}

fn distinct_pair(n: usize, rng: &mut SampleRng) -> (usize, usize) {
    let i = rng.random_range(0..n);
    (i, (i + rng.random_range(1..n)) % n)
}

fn evaluate(id: IdentityId, alg: &LocalizedAlgebra, n: usize, rng: &mut SampleRng) -> Result<Vec<Evaluation>> {
    let inv = |rng: &mut SampleRng| random_invertible(alg, n, rng);
    let two = |rng: &mut SampleRng| (inv(rng), inv(rng));
    Ok(match id {
        IdentityId::RotationSwap => {
            let (a, b) = (random_matrix(alg, n, rng), random_matrix(alg, n, rng));
            let lhs = conjugate(&a.direct_sum(&b)?, &rotation(alg, n))?;
            vec![Evaluation {
                inputs: vec![a.render(), b.render()],
                constructed_level: lhs.level(),
                lhs,
                rhs: b.direct_sum(&a)?,
                input_level: a.level().min(b.level()),
                multiplications: id.multiplications(),
            }]
        }
        IdentityId::OMapAdditive => {
            let (u1, u2) = two(rng);
            let parts = o_map(&u1).matrix().direct_sum(o_map(&u2).matrix())?;
            let perm = block_permutation(alg, &[n, n, n, n], &[0, 2, 1, 3])?;
            let lhs = conjugate(&parts, &perm)?;
            vec![Evaluation {
                inputs: vec![describe(&u1), describe(&u2)],
                constructed_level: lhs.level(),
                lhs,
                rhs: o_map(&u1.direct_sum(&u2)?).matrix().clone(),
                input_level: u1.level().min(u2.level()),
                multiplications: id.multiplications(),
            }]
        }
        IdentityId::OMapConjugation => {
            let (lambda, u) = two(rng);
            let inner = lambda.compose(&u)?.compose(&lambda.inv())?;
            let lhs = o_map(&inner).matrix().clone();
            let rhs = conjugate(o_map(&u).matrix(), &lambda.direct_sum(&lambda)?)?;
            vec![Evaluation {
                inputs: vec![describe(&lambda), describe(&u)],
                constructed_level: rhs.level().min(lhs.level()),
                lhs,
                rhs,
                input_level: lambda.level().min(u.level()),
                multiplications: id.multiplications(),
            }]
        }
        IdentityId::OMapInverseSwap => {
            let u = inv(rng);
            let lhs = conjugate(o_map(&u).matrix(), &swap(alg, n))?;
            vec![Evaluation {
                inputs: vec![describe(&u)],
                constructed_level: lhs.level(),
                lhs,
                rhs: o_map(&u.inv()).matrix().clone(),
                input_level: u.level(),
                multiplications: id.multiplications(),
            }]
        }
        IdentityId::OMapProductDefect => {
            let (u1, u2) = two(rng);
            let whole = o_map(&u1.compose(&u2)?).matrix().clone();
            let split = o_map(&u1).matrix() * o_map(&u2).matrix();
            let commute = u1.matrix() * u2.matrix() == u2.matrix() * u1.matrix();
            // Encode the biconditional as a comparison of two flags.
            let flag = |b: bool| FilteredMatrix::scalar_diag(alg, &[crate::scalars::Rational::from_int(b as i64)]);
            let inputs = vec![describe(&u1), describe(&u2)];
            let mut evals = vec![Evaluation {
                inputs: inputs.clone(),
                constructed_level: split.level(),
                lhs: flag(whole == split),
                rhs: flag(commute),
                input_level: u1.level().min(u2.level()),
                multiplications: id.multiplications(),
            }];
            if commute {
                evals.push(Evaluation {
                    inputs,
                    constructed_level: split.level(),
                    lhs: whole,
                    rhs: split,
                    input_level: u1.level().min(u2.level()),
                    multiplications: id.multiplications(),
                });
            }
            evals
        }
        IdentityId::SumProduct => {
            let (a, b) = two(rng);
            eval_sum_product(&a, &b)?.into()
        }
        IdentityId::Whitehead => vec![eval_whitehead(&inv(rng))],
        IdentityId::ElementaryAdditive | IdentityId::ElementaryInverse => {
            let (i, j) = distinct_pair(n, rng);
            let a = random_element(alg, rng);
            let b = if id == IdentityId::ElementaryInverse { alg.neg(&a) } else { random_element(alg, rng) };
            let ea = ElementaryMatrix::new(alg, n, i, j, a.clone())?.expand();
            let eb = ElementaryMatrix::new(alg, n, i, j, b.clone())?.expand();
            let lhs = ea.matrix() * eb.matrix();
            let rhs = ElementaryMatrix::new(alg, n, i, j, alg.add(&a, &b))?.to_matrix();
            vec![Evaluation {
                inputs: vec![alg.encode(&a), alg.encode(&b), format!("({i}, {j}) in size {n}")],
                constructed_level: lhs.level(),
                lhs,
                rhs,
                input_level: alg.degree(&a).min(alg.degree(&b)),
                multiplications: id.multiplications(),
            }]
        }
        IdentityId::ElementaryCommutator => {
            let (i, j) = distinct_pair(n, rng);
            let k = (0..n).filter(|&k| k != i && k != j).nth(rng.random_range(0..n - 2)).expect("n >= 3");
            vec![eval_elementary_commutator(n, (i, j, k), &random_element(alg, rng), alg)?]
        }
        IdentityId::CommutatorFactorization => {
            let (a, b) = two(rng);
            vec![eval_commutator(&a, &b)?]
        }
        IdentityId::ConjugationFactorization => {
            let (a, b) = two(rng);
            vec![eval_conjugation(&a, &b)?]
        }
    })
}

/// Runs one identity on `samples` random inputs of size up to `max_size`.
pub fn run_identity(
    id: IdentityId,
    alg: &LocalizedAlgebra,
    max_size: usize,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> IdentityReport {
    let lo = id.min_size();
    if max_size < lo {
        return IdentityReport { id: id.name().into(), samples: 0, failures: Vec::new(), min_level_margin: None };
    }
    let task = IdentityId::ALL.iter().position(|&x| x == id).expect("listed") as u64;
    let outcomes = exec.map(samples, |s| {
        let mut rng = rng_for(seed, task, s as u64);
        let n = rng.random_range(lo..=max_size);
        match evaluate(id, alg, n, &mut rng) {
            Ok(evals) => {
                let outs: Vec<Outcome> = evals.into_iter().map(Evaluation::outcome).collect();
                let margin = outs.iter().map(|o| o.margin).min().unwrap_or(0);
                let failure = outs.into_iter().find_map(|o| o.failure);
                Outcome { margin, failure }
            }
            Err(e) => Outcome {
                margin: 0,
                failure: Some(IdentityFailure {
                    sample: s,
                    reason: e.to_string(),
                    inputs: Vec::new(),
                    lhs: String::new(),
                    rhs: String::new(),
                }),
            },
        }
    });
    IdentityReport::from_outcomes(id.name(), outcomes)
}

/// Runs every identity; deterministic in `seed` regardless of `exec`.
pub fn run_identity_suite(
    alg: &LocalizedAlgebra,
    max_size: usize,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Vec<IdentityReport> {
    IdentityId::ALL.iter().map(|&id| run_identity(id, alg, max_size, samples, seed, exec)).collect()
}
