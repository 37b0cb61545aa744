//! Randomized exactness runs over a diagram.

use rand::Rng;

use super::exactness::{
    exactness_boundary_zero, exactness_boundary_zero_o, exactness_i_after_boundary, exactness_k0_middle,
    exactness_k1_glue, exactness_kernel_boundary, exactness_kernel_i, trivializing_witness, CheckLine,
    ExactnessReport,
};
use crate::boundary::{boundary_extended_form, BoundaryInput};
use crate::error::Result;
use crate::mayer_vietoris::{lift_o_element, K0Witness, K1Witness, MVDiagram};
use crate::matrix::{check_idempotent, o_map, swap, FilteredMatrix, IdempotentCert, InvertibleCert};
use crate::par::Execution;
use crate::sample::{random_idempotent, random_invertible, rng_for, SampleRng};
use crate::scalars::Dyadic;

/// Segments run by [`run_exactness_suite`], in report order.
pub const SEGMENTS: [&str; 7] = [
    "boundary_after_restriction",
    "restriction_after_boundary",
    "boundary_of_o_element",
    "kernel_of_boundary",
    "kernel_of_restriction",
    "glued_k0_restricts",
    "glued_k1_restricts",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegmentFailure {
    pub sample: usize,
    pub check: String,
    pub residual: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegmentSummary {
    pub segment: String,
    pub samples: usize,
    pub checks: usize,
    pub failures: Vec<SegmentFailure>,
}

impl SegmentSummary {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Carries a matrix over the second leg to one over the first leg with the
/// same image: itself for identical legs, else the multiplicative lift.
fn across(m: &FilteredMatrix, d: &MVDiagram) -> Result<Option<FilteredMatrix>> {
    if d.legs_identical() {
        return Ok(Some(m.clone()));
    }
    m.apply_hom(d.j2())?.unital_lift(d.j1())
}

fn across_invertible(u: &InvertibleCert, d: &MVDiagram) -> Result<Option<InvertibleCert>> {
    match (across(u.matrix(), d)?, across(u.inverse(), d)?) {
        (Some(a), Some(b)) => InvertibleCert::new(a, b).map(Some),
        _ => Ok(None),
    }
}

fn missing_lift() -> crate::Error {
    crate::Error::precondition("exactness sample", "second leg has no multiplicative transport to the first")
}

fn kernel_of_boundary(d: &MVDiagram, n: usize, rng: &mut SampleRng, o_shaped: bool) -> Result<ExactnessReport> {
    let (u, lift) = if o_shaped {
        let xi = o_map(&random_invertible(d.lambda_prime(), n, rng));
        let half = lift_o_element(&xi, d.j1())?.half;
        (xi, half)
    } else {
        let lift = random_invertible(d.lambda1(), n, rng);
        (lift.apply_hom(d.j1())?, lift)
    };
    let input = BoundaryInput::new(d, &u, 0)?;
    let w = trivializing_witness(&input, &lift)?;
    Ok(exactness_kernel_boundary(&input, &w)?.report)
}

fn kernel_of_restriction(d: &MVDiagram, n: usize, rng: &mut SampleRng) -> Result<ExactnessReport> {
    let u = random_invertible(d.lambda_prime(), n, rng);
    let out = boundary_extended_form(&BoundaryInput::new(d, &u, 0)?)?;
    let u1 = out.l.compose(&swap(d.lambda1(), n))?;
    let u2 = InvertibleCert::identity(d.lambda2(), 2 * n);
    let k = exactness_kernel_i(&out.p_u, n, &u1, &u2, d)?;
    let mut report = k.report;
    let block = k.u.matrix().block(n, n, n);
    let residual = block.first_difference(u.matrix()).map(|(i, j, a, b)| format!("entry ({i}, {j}): {a} vs {b}"));
    report.checks.push(CheckLine { name: "recovered block".into(), residual });
    Ok(report)
}

/// `[a] - [b]` over the second leg and a conjugated transport over the first.
fn k0_pair(
    d: &MVDiagram,
    n: usize,
    rng: &mut SampleRng,
) -> Result<((IdempotentCert, IdempotentCert), (IdempotentCert, IdempotentCert), InvertibleCert)> {
    let a2 = random_idempotent(d.lambda2(), n, rng);
    let b2 = random_idempotent(d.lambda2(), rng.random_range(1..=n), rng);
    let carry = |p: &IdempotentCert| -> Result<IdempotentCert> {
        check_idempotent(&across(p.matrix(), d)?.ok_or_else(missing_lift)?)
    };
    let (a1, b1) = (carry(&a2)?, carry(&b2)?);
    let g = random_invertible(d.lambda1(), n, rng);
    let h = random_invertible(d.lambda1(), b1.size(), rng);
    let u = g.direct_sum(&h)?.apply_hom(d.j1())?;
    Ok(((a1.conjugate(&g)?, b1.conjugate(&h)?), (a2, b2), u))
}

fn glued_k0(d: &MVDiagram, n: usize, rng: &mut SampleRng, stabilized: bool) -> Result<ExactnessReport> {
    let ((a1, b1), (a2, b2), u) = k0_pair(d, n, rng)?;
    let witness = if stabilized {
        let xi = random_idempotent(d.lambda_prime(), rng.random_range(1..=2), rng);
        let u = u.pad_one(xi.size());
        K0Witness { xi: Some(xi), u }
    } else {
        K0Witness { xi: None, u }
    };
    exactness_k0_middle((&a1, &b1), (&a2, &b2), &witness, d)
}

fn glued_k1(d: &MVDiagram, n: usize, rng: &mut SampleRng, stabilized: bool) -> Result<ExactnessReport> {
    let u2 = random_invertible(d.lambda2(), n, rng);
    let g = random_invertible(d.lambda1(), n, rng);
    let base = across_invertible(&u2, d)?.ok_or_else(missing_lift)?;
    let u1 = g.compose(&base)?.compose(&g.inv())?;
    let t = g.apply_hom(d.j1())?;
    let coefficient = Dyadic::one();
    let witness = if stabilized {
        let xi = o_map(&random_invertible(d.lambda_prime(), 1, rng));
        K1Witness { xi1: vec![xi.clone()], xi2: vec![xi.clone()], u: t.pad_one(xi.size()) }
    } else {
        K1Witness { xi1: Vec::new(), xi2: Vec::new(), u: t }
    };
    exactness_k1_glue(&u1, &u2, &coefficient, &witness, d)
}

fn run_segment(index: usize, d: &MVDiagram, n: usize, rng: &mut SampleRng, sample: usize) -> Result<ExactnessReport> {
    let odd = sample % 2 == 1;
    match index {
        0 => exactness_boundary_zero(d, &random_invertible(d.lambda1(), n, rng), 0),
        1 => exactness_i_after_boundary(&BoundaryInput::new(d, &random_invertible(d.lambda_prime(), n, rng), 0)?),
        2 => exactness_boundary_zero_o(d, &o_map(&random_invertible(d.lambda_prime(), n, rng))),
        3 => kernel_of_boundary(d, n, rng, odd),
        4 => kernel_of_restriction(d, n, rng),
        5 => glued_k0(d, n, rng, odd),
        _ => glued_k1(d, n, rng, odd),
    }
}

/// Runs every segment on `samples` random inputs of size up to `max_size`.
pub fn run_exactness_suite(
    d: &MVDiagram,
    max_size: usize,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Vec<SegmentSummary> {
    let max_size = max_size.max(1);
    SEGMENTS
        .iter()
        .enumerate()
        .map(|(index, name)| {
            let outcomes = exec.map(samples, |s| {
                let mut rng = rng_for(seed, 100 + index as u64, s as u64);
                let n = rng.random_range(1..=max_size);
                match run_segment(index, d, n, &mut rng, s) {
                    Ok(report) => {
                        let failures = report
                            .failures()
                            .map(|c| SegmentFailure {
                                sample: s,
                                check: c.name.clone(),
                                residual: c.residual.clone().unwrap_or_default(),
                            })
                            .collect();
                        (report.checks.len(), failures)
                    }
                    Err(e) => {
                        (1, vec![SegmentFailure { sample: s, check: "construction".into(), residual: e.to_string() }])
                    }
                }
            });
            let checks = outcomes.iter().map(|o| o.0).sum();
            let failures = outcomes.into_iter().flat_map(|o| o.1).collect();
            SegmentSummary { segment: (*name).into(), samples, checks, failures }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::DEFAULT_MAX_LEVEL;
    use crate::mayer_vietoris::{propagation_cover, quotient_diagram};

    fn assert_all(summaries: &[SegmentSummary]) {
        for s in summaries {
            assert!(s.passed(), "{}: {:?}", s.segment, s.failures);
        }
    }

    #[test]
    fn quotient_diagram_is_exact() {
        assert_all(&run_exactness_suite(&quotient_diagram(8, DEFAULT_MAX_LEVEL), 2, 6, 1, Execution::Sequential));
    }

    #[test]
    fn cover_is_exact() {
        assert_all(&run_exactness_suite(&propagation_cover(DEFAULT_MAX_LEVEL), 2, 6, 2, Execution::Sequential));
    }

    #[test]
    fn parallel_matches_sequential() {
        let d = quotient_diagram(8, DEFAULT_MAX_LEVEL);
        assert_eq!(
            run_exactness_suite(&d, 2, 4, 3, Execution::Sequential),
            run_exactness_suite(&d, 2, 4, 3, Execution::Parallel)
        );
    }
}
