//! The `verify`, `boundary` and `exactness` commands.

use localk::boundary::{
    boundary_extended_form, verify_lift_independence_a, verify_lift_independence_b, BoundaryInput, BoundaryOutput,
};
use localk::identities::{run_identity_suite, IdentityReport};
use localk::kclasses::{
    check_double_certificate, exactness_i_after_boundary, exactness_kernel_boundary, run_exactness_suite,
    trivializing_witness, DoubleCertificate, ExactnessReport,
};
use localk::matrix::{FilteredMatrix, InvertibleCert};
use localk::mayer_vietoris::{DoubleInvertible, MVDiagram};
use localk::par::Execution;
use localk::sample::{random_kernel_matrix, rng_for};

use crate::report::{Report, Section};
use crate::spec::{LoadedSpec, Over};
use crate::CliError;

/// Parameters after flags override the spec's command section.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Params {
    pub seed: u64,
    pub samples: usize,
    pub max_size: usize,
}

fn failed(e: localk::Error) -> CliError {
    CliError::Failed(e.to_string())
}

fn identity_section(r: &IdentityReport) -> Section {
    let mut s = Section::new(format!("identity {}", r.id));
    s.value("samples", r.samples);
    if let Some(m) = r.min_level_margin {
        s.value("min_level_margin", m);
    }
    let residual = r.failures.first().map(|f| {
        format!(
            "{} of {} samples failed; sample {}: {} (lhs {}, rhs {})",
            r.failures.len(),
            r.samples,
            f.sample,
            f.reason,
            f.lhs,
            f.rhs
        )
    });
    s.check("holds on every sample", residual);
    s
}

pub fn verify(spec: &LoadedSpec, p: Params) -> Result<Report, CliError> {
    let alg = spec.require_algebra()?;
    let mut report = Report::new("verify");
    report.param("algebra", alg.name());
    report.param("seed", p.seed);
    report.param("samples", p.samples);
    report.param("max_size", p.max_size);
    for r in run_identity_suite(alg, p.max_size, p.samples, p.seed, Execution::Parallel) {
        report.push(identity_section(&r));
    }
    Ok(report.finish())
}

fn compare(lhs: &FilteredMatrix, rhs: &FilteredMatrix) -> Option<String> {
    lhs.first_difference(rhs).map(|(i, j, a, b)| format!("entry ({i}, {j}): {a} vs {b}"))
}

/// `[[S0^2, S0 (1 + S0) B], [S1 A, 1 - S1^2]]`.
fn closed_form(out: &BoundaryOutput, a: &FilteredMatrix, b: &FilteredMatrix) -> localk::Result<FilteredMatrix> {
    let one = FilteredMatrix::identity(a.algebra(), a.size());
    let (s0, s1) = (&out.s0, &out.s1);
    FilteredMatrix::from_blocks(&[
        vec![s0.try_mul(s0)?, s0.try_mul(&one.try_add(s0)?)?.try_mul(b)?],
        vec![s1.try_mul(a)?, one.try_sub(&s1.try_mul(s1)?)?],
    ])
}

/// Invertible lift through the first leg, preferring the multiplicative lift.
fn invertible_lift(u: &InvertibleCert, d: &MVDiagram) -> Option<InvertibleCert> {
    let lift = |m: &FilteredMatrix| match m.unital_lift(d.j1()).ok()? {
        Some(x) => Some(x),
        None => m.lift_through(d.j1()).ok(),
    };
    InvertibleCert::new(lift(u.matrix())?, lift(u.inverse())?).ok()
}

fn exactness_section(r: &ExactnessReport) -> Section {
    let mut s = Section::new(r.segment.clone());
    for (k, v) in &r.witnesses {
        s.value(k.clone(), v);
    }
    for c in &r.checks {
        s.check(c.name.clone(), c.residual.clone());
    }
    s
}

pub fn boundary(spec: &LoadedSpec, p: Params) -> Result<Report, CliError> {
    let d = spec.require_diagram()?;
    let cmd = &spec.doc.command;
    let name = cmd.u.clone().unwrap_or_else(|| "U".into());
    if spec.over(&name)? != Over::Overlap {
        return Err(CliError::Spec(format!("matrix {name:?} must live over the overlap")));
    }
    let u = spec.invertible(&name)?;
    let zeros = cmd.zeros.unwrap_or(0);
    let input = match (&cmd.lift_a, &cmd.lift_b) {
        (Some(a), Some(b)) => {
            BoundaryInput::with_lifts(d, &u, zeros, spec.matrix(a)?, spec.matrix(b)?).map_err(failed)?
        }
        (None, None) => BoundaryInput::new(d, &u, zeros).map_err(failed)?,
        _ => return Err(CliError::Spec("give both lifts or neither".into())),
    };
    let out = boundary_extended_form(&input).map_err(failed)?;
    let mut report = Report::new("boundary");
    report.param("diagram", format!("{} -> {} <- {}", d.lambda1().name(), d.lambda_prime().name(), d.lambda2().name()));
    report.param("u", u.matrix().render());
    report.param("zeros", zeros);
    report.param("seed", p.seed);
    report.param("samples", p.samples);

    let mut s = Section::new("clutching");
    s.value("lift_a", input.lift_a().render())
        .value("lift_b", input.lift_b().render())
        .value("s0", out.s0.render())
        .value("s1", out.s1.render())
        .value("l", out.l.matrix().render())
        .value("l_inverse", out.l.inverse().render())
        .value("p", out.p.matrix().render());
    s.check("l times l_inverse is the identity", out.l.verify().err().map(|e| e.to_string()));
    let pp = out.p.matrix().try_mul(out.p.matrix()).map_err(failed)?;
    s.check("p is idempotent", compare(&pp, out.p.matrix()));
    if zeros == 0 {
        let closed = closed_form(&out, input.lift_a(), input.lift_b()).map_err(failed)?;
        s.check("closed form matches p", compare(out.p.matrix(), &closed));
    }
    report.push(s);

    let mut s = Section::new("class");
    s.value("p_u_first", out.p_u.m1().render())
        .value("p_u_second", out.p_u.m2().render())
        .value("minus_first", out.e2.m1().render())
        .value("minus_second", out.e2.m2().render())
        .value("input_level", out.input_level)
        .value("l_level", out.l.level())
        .value("p_u_level", out.level());
    s.check("p_u agrees on the overlap", out.p_u.verify(d).err().map(|e| e.to_string()));
    s.check("p_u is idempotent on both legs", (!out.p_u.is_idempotent()).then(|| "p_u^2 != p_u".to_string()));
    match invertible_lift(&u, d) {
        Some(lift) if zeros == 0 => {
            let w = trivializing_witness(&input, &lift).map_err(failed)?;
            let cert = DoubleCertificate { lhs_padding: 0, rhs_padding: 0, conjugator: Some(w) };
            s.value("class", "trivial");
            s.check("zero certificate", check_double_certificate(&cert, &out.p_u, &out.e2, d).residual);
        }
        _ => {
            s.value("class", "[p_u] - [minus]");
        }
    }
    report.push(s);
    report.push(exactness_section(&exactness_i_after_boundary(&input).map_err(failed)?));

    if p.samples > 0 {
        let n = input.size();
        let runs = Execution::Parallel.map(p.samples, |i| {
            let mut rng = rng_for(p.seed, 300, i as u64);
            let k = random_kernel_matrix(d.j1(), n, &mut rng);
            let h = random_kernel_matrix(d.j1(), n, &mut rng);
            let a = verify_lift_independence_a(&input, &k);
            let b = verify_lift_independence_b(&input, &h);
            (a, b)
        });
        let mut s = Section::new("lift independence");
        s.value("perturbations", p.samples);
        for (label, pick) in [("change of lift_a", 0), ("change of lift_b", 1)] {
            let mut failures = Vec::new();
            for (i, (a, b)) in runs.iter().enumerate() {
                match if pick == 0 { a } else { b } {
                    Ok(r) => failures.extend(r.failures.iter().map(|f| format!("sample {i}: {}", f.reason))),
                    Err(e) => failures.push(format!("sample {i}: {e}")),
                }
            }
            let residual = failures.first().map(|f| format!("{} failures; first {f}", failures.len()));
            s.check(label, residual);
        }
        report.push(s);
    }
    Ok(report.finish())
}

pub fn exactness(spec: &LoadedSpec, p: Params) -> Result<Report, CliError> {
    let d = spec.require_diagram()?;
    let mut report = Report::new("exactness");
    report.param("diagram", format!("{} -> {} <- {}", d.lambda1().name(), d.lambda_prime().name(), d.lambda2().name()));
    report.param("seed", p.seed);
    report.param("samples", p.samples);
    report.param("max_size", p.max_size);
    for summary in run_exactness_suite(d, p.max_size, p.samples, p.seed, Execution::Parallel) {
        let mut s = Section::new(summary.segment.clone());
        s.value("samples", summary.samples).value("checks", summary.checks);
        let residual = summary.failures.first().map(|f| {
            format!("{} failures; sample {} {}: {}", summary.failures.len(), f.sample, f.check, f.residual)
        });
        s.check("every sample certifies", residual);
        report.push(s);
    }
    if let Some(w) = &spec.doc.command.witness {
        report.push(supplied_witness(spec, d, &w.u, &w.conjugator)?);
    }
    Ok(report.finish())
}

fn supplied_witness(spec: &LoadedSpec, d: &MVDiagram, u: &str, conjugator: &str) -> Result<Section, CliError> {
    if spec.over(u)? != Over::Overlap || spec.over(conjugator)? != Over::First {
        return Err(CliError::Spec("witness needs u over the overlap and a conjugator over the first leg".into()));
    }
    let u = spec.invertible(u)?;
    let w1 = spec.invertible(conjugator)?;
    let input = BoundaryInput::new(d, &u, 0).map_err(failed)?;
    let w = DoubleInvertible::from_legs(w1, InvertibleCert::identity(d.lambda2(), 2 * u.size()), d);
    let report = w.and_then(|w| exactness_kernel_boundary(&input, &w));
    Ok(match report {
        Ok(k) => {
            let mut s = exactness_section(&k.report);
            s.name = "supplied witness".into();
            s
        }
        Err(e) => {
            let mut s = Section::new("supplied witness");
            s.check("witness trivializes the boundary", Some(e.to_string()));
            s
        }
    })
}
