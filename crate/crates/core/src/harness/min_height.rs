use std::collections::BTreeMap;

use num::BigInt;
use rand::Rng;

use super::sampling::{choose, par_samples, rational, sample_rng};
use super::{validate, LemmaReport, SampleRecord, SampleSpec};
use crate::arith::{format_rational, Rational};
use crate::error::Result;
use crate::heights::{canonical_height_local_method, is_preperiodic, Preperiodicity};
use crate::poly::{bad_places, coefficient_height_global, NormalForm};

/// Largest relative change of a bucket minimum when the sample count
/// doubles.
const STABILITY: f64 = 0.10;

/// Ratios `ĥ_{f_c}(α) / max{h(f_c), 1}` (lower enclosure of `ĥ`) over wandering
/// `α`, with dyadic parameters `c_i = m/2^k`, `k ≤ 3`. Each draw first picks
/// its own height bound uniformly up to the configured one, so small heights
/// are well covered. Draws `2·samples` rows and reports the minimum per bucket
/// `(d, #bad places)` over the first `samples` and over all of them; passes
/// iff every minimum is positive and moves by less than 10% on doubling.
pub fn min_height_experiment(spec: &SampleSpec) -> Result<LemmaReport> {
    validate(spec)?;
    let rows = par_samples(2 * spec.samples, |i| {
        let mut rng = sample_rng(spec.rng_seed, i);
        let d = *choose(&mut rng, &spec.degrees);
        let c: Vec<Rational> = (1..d)
            .map(|_| {
                let b = rng.gen_range(1..=spec.coefficient_height_bound.max(1));
                let m = rng.gen_range(-b..=b);
                Rational::new(BigInt::from(m), BigInt::from(1i64 << rng.gen_range(0..=3)))
            })
            .collect();
        let nf = NormalForm::exact(c).expect("d ≥ 2");
        let b = rng.gen_range(1..=spec.point_height_bound.max(1));
        let alpha = rational(&mut rng, b);
        let inputs = format!("c=({nf}) alpha={}", format_rational(&alpha));
        match ratio_one(spec, &nf, &alpha) {
            Ok(Ok((ratio, h, hf, s))) => {
                let rec = SampleRecord::new(i, inputs).sides(h, hf).note(format!("ratio {ratio:.9}; s={s}"));
                (rec, Some(((d, s), ratio)))
            }
            Ok(Err(why)) => (SampleRecord::skipped(i, inputs, why), None),
            Err(e) => (SampleRecord::skipped(i, inputs, e.to_string()), None),
        }
    });
    let first_n = spec.samples;
    let mut full: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut first: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (rec, r) in &rows {
        if let Some((key, ratio)) = r {
            let e = full.entry(*key).or_insert(f64::INFINITY);
            *e = e.min(*ratio);
            if rec.index < first_n {
                let e = first.entry(*key).or_insert(f64::INFINITY);
                *e = e.min(*ratio);
            }
        }
    }
    let mut constants = BTreeMap::new();
    let mut ok = !full.is_empty();
    for (key @ (d, s), m) in &full {
        constants.insert(format!("min_ratio[d={d},s={s}]"), *m);
        match first.get(key) {
            Some(h) => {
                constants.insert(format!("min_ratio_first[d={d},s={s}]"), *h);
                ok &= *m > 0.0 && (h - m) / h <= STABILITY;
            }
            None => ok = false,
        }
    }
    Ok(LemmaReport::from_records(
        "min-height",
        "per (d, s) bucket: min ratio > 0 and changes by < 10% when the sample count doubles",
        rows.into_iter().map(|r| r.0).collect(),
        constants,
        ok,
    ))
}

/// `(ratio, ĥ lower, max{h(f), 1}, #bad places)`, or why the sample is
/// excluded.
fn ratio_one(
    spec: &SampleSpec,
    nf: &NormalForm,
    alpha: &Rational,
) -> Result<std::result::Result<(f64, f64, f64, usize), String>> {
    let f = nf.to_poly()?;
    match is_preperiodic(&f, alpha)? {
        Preperiodicity::Preperiodic => return Ok(Err("preperiodic".into())),
        Preperiodicity::Undecided => return Ok(Err("preperiodicity undecided".into())),
        Preperiodicity::Wandering => {}
    }
    let s = bad_places(&f)?.len();
    let h = canonical_height_local_method(&f, alpha, spec.target_error)?.lower().max(0.0);
    let hf = coefficient_height_global(&f)?.max(1.0);
    Ok(Ok((h / hf, h, hf, s)))
}
