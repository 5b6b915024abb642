use std::collections::BTreeMap;
use std::f64::consts::LN_2;

use num::{BigInt, Zero};

use super::sampling::{choose, escaping_point, par_samples, poly, rational, sample_rng};
use super::{to_f64, validate, LemmaReport, SampleRecord, SampleSpec};
use crate::arith::{format_rational, ln_abs, valuation, Place, Rational};
use crate::error::Result;
use crate::heights::bounds::PadicData;
use crate::heights::{green_arch_with, green_nonarch_exact};
use crate::poly::{bad_places, in_escape_region, PolyQ};

/// Where a finite-place sample sits relative to the two radii.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Band {
    /// `C_p < |z|_p ≤ R_p`, only possible when `p | 2d`.
    Between,
    /// `|z|_p > R_p`.
    Beyond,
}

struct EpsOutcome {
    record: SampleRecord,
    arch: Option<(f64, f64)>,
    finite_violation: Option<Band>,
}

/// `ε(φ,v,z) = G_{φ,v}(z) − log|z|_v − log|a_d|_v/(d−1)` on points of the
/// escape region: at ∞ the enclosure must meet `[−log 2, log 3/2]`, at a
/// prime it must be exactly 0.
pub fn check_epsilon_bounds(spec: &SampleSpec) -> Result<LemmaReport> {
    validate(spec)?;
    let out = par_samples(spec.samples, |i| epsilon_sample(spec, i));
    let mut constants = BTreeMap::new();
    let arch: Vec<(f64, f64)> = out.iter().filter_map(|o| o.arch).collect();
    if !arch.is_empty() {
        constants.insert("eps_inf_min_lower".into(), arch.iter().map(|a| a.0).fold(f64::INFINITY, f64::min));
        constants.insert("eps_inf_max_upper".into(), arch.iter().map(|a| a.1).fold(f64::NEG_INFINITY, f64::max));
    }
    let count = |b| out.iter().filter(|o| o.finite_violation == Some(b)).count() as f64;
    constants.insert("finite_violations_between_radii".into(), count(Band::Between));
    constants.insert("finite_violations_beyond_radius".into(), count(Band::Beyond));
    Ok(LemmaReport::from_records(
        "eps-bounds",
        "for |z|_v > C: arch enclosure of eps meets [-log 2, log 3/2]; finite eps = 0 exactly",
        out.into_iter().map(|o| o.record).collect(),
        constants,
        true,
    ))
}

fn epsilon_sample(spec: &SampleSpec, i: usize) -> EpsOutcome {
    let mut rng = sample_rng(spec.rng_seed, i);
    let d = *choose(&mut rng, &spec.degrees);
    let v = *choose(&mut rng, &spec.places);
    let phi = poly(&mut rng, d, spec.coefficient_height_bound);
    let skip = |inputs: String, why: String| EpsOutcome {
        record: SampleRecord::skipped(i, inputs, why),
        arch: None,
        finite_violation: None,
    };
    let z = match escaping_point(&mut rng, &phi, v, spec.point_height_bound) {
        Ok(z) => z,
        Err(e) => return skip(format!("phi={phi} v={v}"), e.to_string()),
    };
    let inputs = format!("phi={phi} z={} v={v}", format_rational(&z));
    match epsilon_one(spec, i, &phi, &z, v, inputs.clone()) {
        Ok(o) => o,
        Err(e) => skip(inputs, e.to_string()),
    }
}

fn epsilon_one(spec: &SampleSpec, i: usize, phi: &PolyQ, z: &Rational, v: Place, inputs: String) -> Result<EpsOutcome> {
    if !in_escape_region(phi, z, v)? {
        return Ok(EpsOutcome {
            record: SampleRecord::skipped(i, inputs, "|z|_v <= C: outside the strict escape region"),
            arch: None,
            finite_violation: None,
        });
    }
    let d = phi.degree();
    match v {
        Place::Infinite => {
            let (g, _) = green_arch_with(phi, z, spec.target_error, &spec.caps)?;
            let base = ln_abs(z) + ln_abs(&phi.leading()) / (d - 1) as f64;
            let slack = 16.0 * f64::EPSILON * (1.0 + base.abs());
            let (lo, hi) = (g.lower() - base - slack, g.upper() - base + slack);
            let (min, max) = (-LN_2, 1.5f64.ln());
            let gap = (min - hi).max(lo - max).max(0.0);
            let record = SampleRecord::new(i, inputs)
                .sides(g.value - base, 0.0)
                .defect(gap)
                .ok_if(gap == 0.0)
                .note(format!("eps in [{lo:.6e}, {hi:.6e}]"));
            Ok(EpsOutcome { record, arch: Some((lo, hi)), finite_violation: None })
        }
        Place::Prime(p) => {
            let (enc, _) = green_nonarch_exact(phi, z, p, spec.caps.padic)?;
            let data = PadicData::new(phi, p)?;
            let minus_vz = Rational::from_integer((-valuation(z, p)?).into());
            let base = &minus_vz - Rational::new(data.vd.into(), BigInt::from(d - 1));
            let (lo, hi) = (&enc.lo - &base, &enc.hi - &base);
            let ok = lo.is_zero() && hi.is_zero();
            let lp = (p as f64).ln();
            let band = if minus_vz > data.log_r { Band::Beyond } else { Band::Between };
            let label = match band {
                Band::Beyond => "|z|_p > R_p",
                Band::Between => "C_p < |z|_p <= R_p",
            };
            let record = SampleRecord::new(i, inputs)
                .sides(to_f64(&lo) * lp, 0.0)
                .defect(to_f64(&lo).abs().max(to_f64(&hi).abs()) * lp)
                .ok_if(ok)
                .note(format!("eps in [{}, {}]·log {p}; {label}", format_rational(&lo), format_rational(&hi)));
            Ok(EpsOutcome { record, arch: None, finite_violation: (!ok).then_some(band) })
        }
    }
}

/// `G_{φ,v}(φ(z))` against `d·G_{φ,v}(z)`: the enclosures must meet.
pub fn check_transformation_rule(spec: &SampleSpec) -> Result<LemmaReport> {
    validate(spec)?;
    let rows = par_samples(spec.samples, |i| {
        let mut rng = sample_rng(spec.rng_seed, i);
        let d = *choose(&mut rng, &spec.degrees);
        let v = *choose(&mut rng, &spec.places);
        let phi = poly(&mut rng, d, spec.coefficient_height_bound);
        let z = rational(&mut rng, spec.point_height_bound);
        let inputs = format!("phi={phi} z={} v={v}", format_rational(&z));
        transformation_one(spec, i, &phi, &z, v, inputs.clone())
            .unwrap_or_else(|e| SampleRecord::skipped(i, inputs, e.to_string()))
    });
    Ok(LemmaReport::from_records(
        "transformation-rule",
        "enclosures of G(phi(z)) and d*G(z) intersect",
        rows,
        BTreeMap::new(),
        true,
    ))
}

fn transformation_one(
    spec: &SampleSpec,
    i: usize,
    phi: &PolyQ,
    z: &Rational,
    v: Place,
    inputs: String,
) -> Result<SampleRecord> {
    let d = phi.degree();
    let w = phi.evaluate(z);
    let (lhs, rhs, ok) = match v {
        Place::Infinite => {
            let (gw, _) = green_arch_with(phi, &w, spec.target_error, &spec.caps)?;
            let (gz, _) = green_arch_with(phi, z, spec.target_error, &spec.caps)?;
            let rhs = gz.scale(d as f64);
            (gw, rhs, gw.intersects(&rhs))
        }
        Place::Prime(p) => {
            let (ew, _) = green_nonarch_exact(phi, &w, p, spec.caps.padic)?;
            let (ez, _) = green_nonarch_exact(phi, z, p, spec.caps.padic)?;
            let rhs = ez.scale(&Rational::from_integer(d.into()));
            let ok = ew.intersects(&rhs);
            (ew.to_bounded(), rhs.to_bounded(), ok)
        }
    };
    Ok(SampleRecord::new(i, inputs)
        .sides(lhs.value, rhs.value)
        .defect((lhs.value - rhs.value).abs())
        .ok_if(ok)
        .note(format!("lhs {lhs}; rhs {rhs}")))
}

/// Largest `j` in the good-reduction inequality.
const GOOD_REDUCTION_MAX_J: usize = 6;

/// At a prime of good reduction: `λ̂_p(α) = log max{1, |α|_p}` exactly, and
/// `λ_p(φ) + d(d−1)·log|φ^i(α) − φ^j(α)|_p ≤ (d−1)·d^{j+1}·λ̂_p(α)` for
/// `0 ≤ i < j ≤ 6`, both in exact multiples of `log p`.
pub fn check_good_reduction(spec: &SampleSpec) -> Result<LemmaReport> {
    validate(spec)?;
    let primes = spec.finite_places();
    let rows = par_samples(spec.samples, |i| {
        let mut rng = sample_rng(spec.rng_seed, i);
        let d = *choose(&mut rng, &spec.degrees);
        let phi = poly(&mut rng, d, spec.coefficient_height_bound);
        let alpha = rational(&mut rng, spec.point_height_bound);
        let bad = match bad_places(&phi) {
            Ok(b) => b,
            Err(e) => return SampleRecord::skipped(i, format!("phi={phi}"), e.to_string()),
        };
        let good: Vec<u64> = primes.iter().copied().filter(|p| !bad.contains(&Place::Prime(*p))).collect();
        if good.is_empty() {
            return SampleRecord::skipped(i, format!("phi={phi}"), "no sampled prime has good reduction");
        }
        let p = *choose(&mut rng, &good);
        let inputs = format!("phi={phi} alpha={} v={p}", format_rational(&alpha));
        good_reduction_one(spec, i, &phi, &alpha, p, inputs.clone())
            .unwrap_or_else(|e| SampleRecord::skipped(i, inputs, e.to_string()))
    });
    Ok(LemmaReport::from_records(
        "good-reduction",
        "at good p: G_p(alpha) = log+|alpha|_p exactly, and the pair inequality holds exactly for i < j <= 6",
        rows,
        BTreeMap::new(),
        true,
    ))
}

fn good_reduction_one(
    spec: &SampleSpec,
    i: usize,
    phi: &PolyQ,
    alpha: &Rational,
    p: u64,
    inputs: String,
) -> Result<SampleRecord> {
    let d = phi.degree();
    let q = |n: i64| Rational::from_integer(n.into());
    let (enc, _) = green_nonarch_exact(phi, alpha, p, spec.caps.padic)?;
    let lambda_plus = if alpha.is_zero() { q(0) } else { q((-valuation(alpha, p)?).max(0)) };
    let height_ok = enc.is_exact() && enc.lo == lambda_plus;
    let mut lambda_phi = q(0);
    for a in phi.coeffs().iter().filter(|a| !a.is_zero()) {
        lambda_phi = lambda_phi.max(q(-valuation(a, p)?));
    }
    let orbit = phi.iterate(alpha, GOOD_REDUCTION_MAX_J, spec.caps.exact_bits.max(1 << 16))?;
    let dd = d as i64;
    // Worst (LHS − RHS) over all pairs, in units of log p.
    let mut worst: Option<Rational> = None;
    for j in 1..=GOOD_REDUCTION_MAX_J {
        for ii in 0..j {
            let diff = &orbit[ii] - &orbit[j];
            if diff.is_zero() {
                continue;
            }
            let lhs = &lambda_phi + q(dd * (dd - 1) * -valuation(&diff, p)?);
            let rhs = &enc.hi * q((dd - 1) * dd.pow(j as u32 + 1));
            let gap = lhs - rhs;
            if worst.as_ref().is_none_or(|w| gap > *w) {
                worst = Some(gap);
            }
        }
    }
    let pairs_ok = worst.as_ref().is_none_or(|w| *w <= q(0));
    let lp = (p as f64).ln();
    let mut rec = SampleRecord::new(i, inputs).sides(enc.to_bounded().value, to_f64(&lambda_plus) * lp);
    if let Some(w) = &worst {
        rec = rec.defect(to_f64(w) * lp);
    }
    let note = format!(
        "G_p = [{}, {}], log+ = {}; worst pair gap {}",
        format_rational(&enc.lo),
        format_rational(&enc.hi),
        format_rational(&lambda_plus),
        worst.as_ref().map_or("none".into(), format_rational)
    );
    Ok(rec.ok_if(height_ok && pairs_ok).note(note))
}

#[cfg(test)]
fn arch_eps(phi: &PolyQ, z: &Rational) -> crate::heights::BoundedValue {
    let (g, _) = green_arch_with(phi, z, 1e-12, &Default::default()).unwrap();
    let d = phi.degree();
    g - crate::heights::BoundedValue::exact(ln_abs(z) + ln_abs(&phi.leading()) / (d - 1) as f64)
}
