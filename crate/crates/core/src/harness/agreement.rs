use std::collections::BTreeMap;

use super::sampling::{choose, nonzero_rational, par_samples, poly, rational, sample_rng};
use super::{validate, LemmaReport, SampleRecord, SampleSpec};
use crate::arith::{format_rational, rational_support, Place, Rational};
use crate::error::Result;
use crate::heights::{canonical_height_local_breakdown, canonical_height_naive_method, OrbitStatus};
use crate::poly::{bad_places, conjugate_to_normal_form, PolyQ};
use crate::roots::DEFAULT_ROOT_TOL;

/// Iterations for the naive method in [`check_method_agreement`].
pub const NAIVE_STEPS: usize = 24;
/// Both enclosures must be at most this wide for a sample to count as
/// decided.
const DECIDED_RADIUS: f64 = 1e-4;
const MAX_UNDECIDED_RATE: f64 = 0.05;

/// `ĥ_φ(α)` against `ĥ_ψ(μ^{−1}(α))` for `ψ = μ^{−1}∘φ∘μ`, `μ(z) = az + b`
/// rational. Also checks that the exact normal form of `φ`, when there is
/// one, is bad only at bad primes of `φ` and primes dividing `d`.
pub fn check_conjugation_invariance(spec: &SampleSpec) -> Result<LemmaReport> {
    validate(spec)?;
    let rows = par_samples(spec.samples, |i| {
        let mut rng = sample_rng(spec.rng_seed, i);
        let d = *choose(&mut rng, &spec.degrees);
        let phi = poly(&mut rng, d, spec.coefficient_height_bound);
        let alpha = rational(&mut rng, spec.point_height_bound);
        let a = nonzero_rational(&mut rng, spec.coefficient_height_bound);
        let b = rational(&mut rng, spec.coefficient_height_bound);
        let inputs = format!(
            "phi={phi} alpha={} mu=({})z+({})",
            format_rational(&alpha),
            format_rational(&a),
            format_rational(&b)
        );
        conjugation_one(spec, i, &phi, &alpha, &a, &b, inputs.clone())
            .unwrap_or_else(|e| SampleRecord::skipped(i, inputs, e.to_string()))
    });
    Ok(LemmaReport::from_records(
        "conjugation-invariance",
        "local-method enclosures of h_phi(alpha) and h_psi(mu^-1 alpha) intersect; bad(f_c) within bad(phi) and primes dividing d",
        rows,
        BTreeMap::new(),
        true,
    ))
}

fn conjugation_one(
    spec: &SampleSpec,
    i: usize,
    phi: &PolyQ,
    alpha: &Rational,
    a: &Rational,
    b: &Rational,
    inputs: String,
) -> Result<SampleRecord> {
    let psi = phi.affine_conjugate(a, b)?;
    let beta = (alpha - b) / a;
    let h1 = canonical_height_local_breakdown(phi, alpha, spec.target_error, &spec.caps)?.total;
    let h2 = canonical_height_local_breakdown(&psi, &beta, spec.target_error, &spec.caps)?.total;
    let bookkeeping = bookkeeping_ok(phi)?;
    Ok(SampleRecord::new(i, inputs)
        .sides(h1.value, h2.value)
        .defect((h1.value - h2.value).abs())
        .ok_if(h1.intersects(&h2) && bookkeeping != Some(false))
        .note(format!(
            "{h1} vs {h2}; normal-form bad places {}",
            match bookkeeping {
                Some(true) => "ok",
                Some(false) => "NOT covered",
                None => "n/a (no exact normal form)",
            }
        )))
}

fn bookkeeping_ok(phi: &PolyQ) -> Result<Option<bool>> {
    let Some(fc) = conjugate_to_normal_form(phi, DEFAULT_ROOT_TOL)?.exact_poly else {
        return Ok(None);
    };
    let mut allowed = bad_places(phi)?;
    let d = Rational::from_integer(phi.degree().into());
    allowed.extend(rational_support(&d)?.into_iter().map(Place::Prime));
    Ok(Some(bad_places(&fc)?.is_subset(&allowed)))
}

/// Local and naive canonical heights of random `(φ, α)` must intersect. A
/// sample is undecided when either enclosure is wider than `1e-4`; the
/// undecided share must stay below 5%.
pub fn check_method_agreement(spec: &SampleSpec) -> Result<LemmaReport> {
    validate(spec)?;
    let rows = par_samples(spec.samples, |i| {
        let mut rng = sample_rng(spec.rng_seed, i);
        let d = *choose(&mut rng, &spec.degrees);
        let phi = poly(&mut rng, d, spec.coefficient_height_bound);
        let alpha = rational(&mut rng, spec.point_height_bound);
        let inputs = format!("phi={phi} alpha={}", format_rational(&alpha));
        match agreement_one(spec, &phi, &alpha) {
            Ok((local, naive, undecided_orbit)) => {
                let decided = local.error <= DECIDED_RADIUS && naive.error <= DECIDED_RADIUS;
                let rec = SampleRecord::new(i, inputs)
                    .sides(local.value, naive.value)
                    .defect((local.value - naive.value).abs())
                    .ok_if(local.intersects(&naive))
                    .note(format!(
                        "{}local {local}; naive {naive}{}",
                        if decided { "" } else { "undecided: " },
                        if undecided_orbit { "; an orbit was not certified" } else { "" }
                    ));
                (rec, Some(decided))
            }
            Err(e) => (SampleRecord::skipped(i, inputs, e.to_string()), None),
        }
    });
    let total = rows.iter().filter(|r| r.1.is_some()).count();
    let undecided = rows.iter().filter(|r| r.1 == Some(false)).count();
    let rate = if total == 0 { 1.0 } else { undecided as f64 / total as f64 };
    let mut constants = BTreeMap::new();
    constants.insert("undecided_rate".into(), rate);
    Ok(LemmaReport::from_records(
        "method-agreement",
        "local and naive enclosures intersect on every sample; undecided rate < 5%",
        rows.into_iter().map(|r| r.0).collect(),
        constants,
        rate < MAX_UNDECIDED_RATE,
    ))
}

fn agreement_one(
    spec: &SampleSpec,
    phi: &PolyQ,
    alpha: &Rational,
) -> Result<(crate::heights::BoundedValue, crate::heights::BoundedValue, bool)> {
    let local = canonical_height_local_breakdown(phi, alpha, spec.target_error, &spec.caps)?;
    let naive = canonical_height_naive_method(phi, alpha, NAIVE_STEPS)?;
    let undecided = local.places.iter().any(|c| c.record.status == OrbitStatus::Undecided);
    Ok((local.total, naive, undecided))
}
