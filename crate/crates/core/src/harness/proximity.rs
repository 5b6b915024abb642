use std::collections::BTreeMap;

use num::complex::Complex64;

use super::{fit_line, validate, LemmaReport, SampleRecord, SampleSpec};
use crate::arith::{Place, Rational};
use crate::error::Result;
use crate::heights::critical_escape_with;
use crate::poly::{escape_radius_c, in_escape_region_c, NormalForm, PolyC};
use crate::roots::{fixed_points, proximity_statistic, DEFAULT_ROOT_TOL, PROXIMITY_FLOOR};

/// Iterations an `α` candidate must survive without entering the escape
/// region.
const SURVIVAL_STEPS: usize = 5;

/// Non-escaping starting points: a square grid over the escape disk, kept
/// when the first few iterates stay inside, plus the fixed points.
pub(crate) fn alpha_candidates(f: &PolyC, per_axis: usize) -> Result<Vec<Complex64>> {
    let r = escape_radius_c(f);
    let n = per_axis.max(2);
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            let z = Complex64::new(
                r * (2.0 * a as f64 / (n - 1) as f64 - 1.0),
                r * (2.0 * b as f64 / (n - 1) as f64 - 1.0),
            );
            if z.norm() > r {
                continue;
            }
            let mut w = z;
            let survives = (0..=SURVIVAL_STEPS).all(|_| {
                let inside = !in_escape_region_c(f, w);
                w = f.evaluate(w);
                inside
            });
            if survives {
                out.push(z);
            }
        }
    }
    out.extend(fixed_points(f, DEFAULT_ROOT_TOL)?.with_multiplicity().iter().map(|(z, _)| *z));
    Ok(out)
}

/// `S(t) = max_α proximity(f_c, α)` over non-escaping `α` for the family
/// `c = (t, 0, …, 0)`, fitted as `S ≈ a·M(f_c) + b` over the grid points
/// with `M ≥ m_threshold`. Passes iff `a ≤ −1/(d−1) + tol` for every degree;
/// `δ̂ = max (S + M/(d−1))` is reported.
pub fn check_preimage_proximity(spec: &SampleSpec) -> Result<LemmaReport> {
    validate(spec)?;
    let grid = spec.grid()?;
    let jobs: Vec<(usize, Rational)> =
        spec.degrees.iter().flat_map(|&d| grid.iter().map(move |t| (d, t.clone()))).collect();
    let rows = super::sampling::par_samples(jobs.len(), |i| {
        let (d, t) = &jobs[i];
        let mut c = vec![t.clone()];
        c.resize(*d - 1, Rational::from_integer(0.into()));
        let nf = NormalForm::exact(c).expect("d ≥ 2");
        let inputs = format!("c=({nf})");
        let rec = match proximity_one(spec, &nf) {
            Ok(Some((s, m, n_alpha))) => {
                let rhs = -m / (*d - 1) as f64;
                let rec = SampleRecord::new(i, inputs).sides(s, rhs).note(format!("M {m:.9}; {n_alpha} alphas"));
                if m < spec.m_threshold {
                    rec.status(super::SampleStatus::Skipped).note(format!("M {m:.6} below threshold"))
                } else {
                    rec
                }
            }
            Ok(None) => SampleRecord::skipped(i, inputs, "no non-escaping alpha off the floor"),
            Err(e) => SampleRecord::skipped(i, inputs, e.to_string()),
        };
        (*d, rec)
    });
    let mut constants = BTreeMap::new();
    let mut ok = true;
    for &d in &spec.degrees {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|(dd, r)| *dd == d && r.status != super::SampleStatus::Skipped)
            .map(|(_, r)| (-r.rhs.expect("set") * (d - 1) as f64, r.lhs.expect("set")))
            .collect();
        let target = -1.0 / (d - 1) as f64;
        match fit_line(&pts) {
            Some((a, b)) => {
                constants.insert(format!("slope[d={d}]"), a);
                constants.insert(format!("intercept[d={d}]"), b);
                ok &= a <= target + spec.slope_tolerance;
            }
            None => ok = false,
        }
        if let Some(delta) = pts.iter().map(|(m, s)| s - target * m).reduce(f64::max) {
            constants.insert(format!("delta_hat[d={d}]"), delta);
        }
    }
    Ok(LemmaReport::from_records(
        "preimage-proximity",
        "per degree: least-squares slope of S(t) against M(f_c) <= -1/(d-1) + tol",
        rows.into_iter().map(|r| r.1).collect(),
        constants,
        ok,
    ))
}

/// `(S, M, #α)`, or `None` when every candidate sits at the floor.
fn proximity_one(spec: &SampleSpec, nf: &NormalForm) -> Result<Option<(f64, f64, usize)>> {
    let m = critical_escape_with(nf, Place::Infinite, spec.target_error, &spec.caps)?.value;
    let f = nf.to_polyc();
    let alphas = alpha_candidates(&f, spec.alpha_grid)?;
    let mut best: Option<f64> = None;
    let mut used = 0;
    for a in &alphas {
        let s = proximity_statistic(&f, *a, DEFAULT_ROOT_TOL)?;
        if s.value > PROXIMITY_FLOOR {
            used += 1;
            best = Some(best.map_or(s.value, |b: f64| b.max(s.value)));
        }
    }
    Ok(best.map(|s| (s, m, used)))
}
