use std::collections::BTreeMap;

use super::sampling::{choose, escaping_point, nonzero_rational, normal_form, par_samples, rational, sample_rng};
use super::{max_slope, to_f64, validate, LemmaReport, SampleRecord, SampleSpec};
use crate::arith::{format_rational, ln_abs, valuation, Place, Rational};
use crate::error::Result;
use crate::heights::{critical_escape_padic_with, critical_escape_with, green_arch_with, green_nonarch_exact};
use crate::poly::{
    coefficient_height_local, in_escape_region, log_escape_radius, padic_log_escape_radius, NormalForm, PolyQ,
};

type Group = (usize, Place);

fn group_name(stat: &str, (d, v): &Group) -> String {
    format!("{stat}[d={d},v={v}]")
}

/// Per-group, per-scale maxima: `scale index → (ln scale, max defect)`.
#[derive(Default)]
struct ScaleMaxima(BTreeMap<Group, BTreeMap<usize, (f64, f64)>>);

impl ScaleMaxima {
    fn add(&mut self, g: Group, scale: usize, ln_scale: f64, defect: f64) {
        let e = self.0.entry(g).or_default().entry(scale).or_insert((ln_scale, f64::NEG_INFINITY));
        e.1 = e.1.max(defect);
    }

    /// Records `stat_hat` (overall max) and `slope` per group; true iff every
    /// fitted slope is at most `tol`.
    fn slopes(&self, stat: &str, tol: f64, out: &mut BTreeMap<String, f64>) -> bool {
        let mut ok = true;
        for (g, per_scale) in &self.0 {
            let max = per_scale.values().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
            out.insert(group_name(stat, g), max);
            if let Some(a) = max_slope(per_scale) {
                out.insert(group_name(&format!("{stat}_slope"), g), a);
                ok &= a <= tol;
            }
        }
        ok
    }
}

/// One parameter draw `u`, reused across every scale `t` of the grid as
/// `c = t·u`.
struct FamilyDraw {
    d: usize,
    v: Place,
    u: Vec<Rational>,
    rng: rand_chacha::ChaCha8Rng,
}

fn family_draw(spec: &SampleSpec, j: usize) -> FamilyDraw {
    let mut rng = sample_rng(spec.rng_seed, j);
    let d = *choose(&mut rng, &spec.degrees);
    let v = *choose(&mut rng, &spec.places);
    let b = spec.coefficient_height_bound;
    let mut u = vec![nonzero_rational(&mut rng, b)];
    u.extend((2..d).map(|_| rational(&mut rng, b)));
    FamilyDraw { d, v, u, rng }
}

fn scaled(u: &[Rational], t: &Rational) -> NormalForm {
    NormalForm::exact(u.iter().map(|x| x * t).collect()).expect("d ≥ 2")
}

/// The grid scale as seen from `v`, with `log|scale|_v`. At a prime the
/// grid value `t` becomes `p^{−k}`, `k = round(log|t| / log p) ≥ 1`, so the
/// parameter grows `p`-adically.
fn scale_at(t: &Rational, v: Place) -> (Rational, f64) {
    let lt = to_f64(t).abs().ln();
    match v {
        Place::Infinite => (t.clone(), lt),
        Place::Prime(p) => {
            let lp = (p as f64).ln();
            let k = ((lt / lp).round() as i32).max(1);
            let s = Rational::new(1.into(), num::pow(num::BigInt::from(p), k as usize));
            (s, k as f64 * lp)
        }
    }
}

/// Runs `one` on every (draw, scale) pair; row indices are
/// `draw·#grid + scale`.
fn over_family(
    spec: &SampleSpec,
    one: impl Fn(&FamilyDraw, &NormalForm) -> Result<Option<(f64, String)>> + Sync + Send,
) -> Result<(Vec<SampleRecord>, ScaleMaxima)> {
    let grid = spec.grid()?;
    let n = grid.len();
    let rows = par_samples(spec.samples, |j| {
        let draw = family_draw(spec, j);
        grid.iter()
            .enumerate()
            .map(|(ti, t)| {
                let (t, _) = scale_at(t, draw.v);
                let nf = scaled(&draw.u, &t);
                let inputs = format!("c=({nf}) v={}", draw.v);
                let rec = match one(&draw, &nf) {
                    Ok(Some((defect, note))) => SampleRecord::new(j * n + ti, inputs).defect(defect).note(note),
                    Ok(None) => SampleRecord::skipped(j * n + ti, inputs, "precondition failed"),
                    Err(e) => SampleRecord::skipped(j * n + ti, inputs, e.to_string()),
                };
                (draw.d, draw.v, ti, rec)
            })
            .collect::<Vec<_>>()
    });
    let mut maxima = ScaleMaxima::default();
    let mut records = Vec::new();
    for (d, v, ti, rec) in rows.into_iter().flatten() {
        if rec.status != super::SampleStatus::Skipped {
            maxima.add((d, v), ti, scale_at(&grid[ti], v).1, rec.defect.expect("set"));
        }
        records.push(rec);
    }
    Ok((records, maxima))
}

/// Number of times the parameter height bound is doubled.
const XI_DOUBLINGS: usize = 6;

/// `ξ_v = log C_{f_c,v} − M_v(f_c)`, using the upper enclosure of `M_v`,
/// with `samples` parameters per `(d, v)` at each bound `B·2^k`, `k ≤ 6`. Passes iff the running maximum over bounds
/// grows by at most the tolerance over the last doubling; `ξ_p > 0` at a
/// prime `p > d` is a violation.
pub fn check_escape_radius_vs_m(spec: &SampleSpec) -> Result<LemmaReport> {
    validate(spec)?;
    let bounds: Vec<i64> = (0..=XI_DOUBLINGS).map(|k| spec.coefficient_height_bound << k).collect();
    let cells: Vec<Group> = spec.degrees.iter().flat_map(|&d| spec.places.iter().map(move |&v| (d, v))).collect();
    let mut maxima = ScaleMaxima::default();
    let mut records = Vec::new();
    for (si, &b) in bounds.iter().enumerate() {
        let per_bound = spec.samples * cells.len();
        let rows = par_samples(per_bound, |j| {
            let index = si * per_bound + j;
            let (d, v) = cells[j % cells.len()];
            let mut rng = sample_rng(spec.rng_seed, index);
            let nf = normal_form(&mut rng, d, b);
            let inputs = format!("c=({nf}) v={v} bound={b}");
            let rec = match xi_one(spec, &nf, v) {
                Ok((xi, violation)) => SampleRecord::new(index, inputs).defect(xi).ok_if(!violation),
                Err(e) => SampleRecord::skipped(index, inputs, e.to_string()),
            };
            (d, v, rec)
        });
        for (d, v, rec) in rows {
            if rec.status != super::SampleStatus::Skipped {
                maxima.add((d, v), si, (b as f64).ln(), rec.defect.expect("set"));
            }
            records.push(rec);
        }
    }
    let mut constants = BTreeMap::new();
    let mut ok = true;
    for (g, per_bound) in &maxima.0 {
        let mut running = f64::NEG_INFINITY;
        let mut last = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for (_, x) in per_bound.values() {
            running = running.max(*x);
            last = (last.1, running);
        }
        constants.insert(group_name("xi_hat", g), running);
        if last.0.is_finite() {
            constants.insert(group_name("xi_hat_last_growth", g), last.1 - last.0);
            ok &= last.1 - last.0 <= spec.slope_tolerance;
        }
    }
    Ok(LemmaReport::from_records(
        "escape-radius-vs-m",
        "running max of xi_v over bounds up to B grows by <= tol over the last doubling of B; xi_p <= 0 at primes p > d",
        records,
        constants,
        ok,
    ))
}

/// `(ξ, violates)`: a violation is `ξ_p > 0` at a prime `p > d`.
fn xi_one(spec: &SampleSpec, nf: &NormalForm, v: Place) -> Result<(f64, bool)> {
    let f = nf.to_poly()?;
    match v {
        Place::Infinite => {
            let m = critical_escape_with(nf, v, spec.target_error, &spec.caps)?;
            Ok((log_escape_radius(&f, v)? - m.upper(), false))
        }
        Place::Prime(p) => {
            let m = critical_escape_padic_with(nf, p, &spec.caps)?;
            let xi = padic_log_escape_radius(&f, p)? - &m.hi;
            let violation = p as usize > nf.degree() && xi > Rational::from_integer(0.into());
            Ok((to_f64(&xi) * (p as f64).ln(), violation))
        }
    }
}

/// `η_v = λ_v(f_c) − d·M_v(f_c)` with the lower enclosure of `M_v`, along
/// `c = t·u`. Passes iff the per-scale maximum has slope at most the
/// tolerance against `ln t`.
pub fn check_coeff_vs_escape(spec: &SampleSpec) -> Result<LemmaReport> {
    validate(spec)?;
    let (records, maxima) = over_family(spec, |draw, nf| {
        let f = nf.to_poly()?;
        let lambda = coefficient_height_local(&f, draw.v);
        let m = critical_escape_with(nf, draw.v, spec.target_error, &spec.caps)?;
        let eta = lambda - draw.d as f64 * m.lower();
        Ok(Some((eta, format!("lambda {lambda:.6}; M {m}"))))
    })?;
    let mut constants = BTreeMap::new();
    let ok = maxima.slopes("eta_hat", spec.slope_tolerance, &mut constants);
    Ok(LemmaReport::from_records(
        "coeff-vs-escape",
        "slope of max_t (lambda_v(f) - d*M_v lower) against ln t is <= tol",
        records,
        constants,
        ok,
    ))
}

/// Pairs `1 ≤ i < j ≤ BASIN_MAX_J` in the basin inequality.
const BASIN_MAX_J: usize = 3;

/// For `α` in the escape region:
/// `C_1 ≥ λ_v(f) + d(d−1)·log|f^i(α) − f^j(α)|_v − d^{j+3}·λ̂_v(α)`, with
/// the upper enclosure of `λ̂_v`. Passes iff the per-scale maximum of the
/// right side has slope at most the tolerance against `ln t`.
pub fn check_basin_inequality(spec: &SampleSpec) -> Result<LemmaReport> {
    validate(spec)?;
    let (records, maxima) = over_family(spec, |draw, nf| {
        let f = nf.to_poly()?;
        let mut rng = draw.rng.clone();
        let alpha = escaping_point(&mut rng, &f, draw.v, spec.point_height_bound)?;
        basin_one(spec, &f, &alpha, draw.v)
    })?;
    let mut constants = BTreeMap::new();
    let ok = maxima.slopes("c1_hat", spec.slope_tolerance, &mut constants);
    Ok(LemmaReport::from_records(
        "basin-inequality",
        "slope of max_t C1 estimate against ln t is <= tol",
        records,
        constants,
        ok,
    ))
}

/// Largest `LHS − d^{j+3}·λ̂` over the pairs, or `None` if `α` is not in
/// the escape region.
fn basin_one(spec: &SampleSpec, f: &PolyQ, alpha: &Rational, v: Place) -> Result<Option<(f64, String)>> {
    if !in_escape_region(f, alpha, v)? {
        return Ok(None);
    }
    let d = f.degree();
    let g_hi = match v {
        Place::Infinite => green_arch_with(f, alpha, spec.target_error, &spec.caps)?.0.upper(),
        Place::Prime(p) => to_f64(&green_nonarch_exact(f, alpha, p, spec.caps.padic)?.0.hi) * (p as f64).ln(),
    };
    let lambda = coefficient_height_local(f, v);
    let orbit = f.iterate(alpha, BASIN_MAX_J, 1 << 20)?;
    let mut worst = f64::NEG_INFINITY;
    let mut at = (0, 0);
    for j in 2..=BASIN_MAX_J {
        for i in 1..j {
            let diff = &orbit[i] - &orbit[j];
            if num::Zero::is_zero(&diff) {
                continue;
            }
            let log_diff = match v {
                Place::Infinite => ln_abs(&diff),
                Place::Prime(p) => -(valuation(&diff, p)? as f64) * (p as f64).ln(),
            };
            let gap = lambda + (d * (d - 1)) as f64 * log_diff - (d as f64).powi(j as i32 + 3) * g_hi;
            if gap > worst {
                worst = gap;
                at = (i, j);
            }
        }
    }
    let note = format!("alpha={} worst pair {:?}; G upper {g_hi:.6}", format_rational(alpha), at);
    Ok(worst.is_finite().then_some((worst, note)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::SampleStatus;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn quick() -> SampleSpec {
        SampleSpec { samples: 24, ..SampleSpec::default() }
    }

    #[test]
    fn xi_examples() {
        let spec = quick();
        let (xi, bad) = xi_one(&spec, &NormalForm::from_i64(&[0]), Place::Infinite).unwrap();
        assert!((xi - 8f64.ln()).abs() < 1e-9 && !bad);
        assert_eq!(xi_one(&spec, &NormalForm::from_i64(&[1]), Place::Prime(5)).unwrap(), (0.0, false));
        let (large, _) = xi_one(&spec, &NormalForm::from_i64(&[100]), Place::Infinite).unwrap();
        assert!(large < 16f64.ln() + 1e-6, "{large}");
    }

    #[test]
    fn coeff_vs_escape_examples() {
        let spec = quick();
        let nf = NormalForm::from_i64(&[0, 0]);
        let f = nf.to_poly().unwrap();
        assert!((coefficient_height_local(&f, Place::Prime(3)) - 3f64.ln()).abs() < 1e-15);
        let m = critical_escape_with(&nf, Place::Prime(3), 1e-9, &spec.caps).unwrap();
        assert_eq!(m.value, 0.0);
        let r = check_coeff_vs_escape(&spec).unwrap();
        assert!(r.pass, "{}", r.summary());
    }

    #[test]
    fn basin_examples() {
        let spec = quick();
        let f = NormalForm::from_i64(&[0]).to_poly().unwrap();
        // Orbit 3, 9/2, 81/8 under z²/2; 3 < C = 8 so the precondition fails.
        assert_eq!(basin_one(&spec, &f, &q(3, 1), Place::Infinite).unwrap(), None);
        let (gap, _) = basin_one(&spec, &f, &q(9, 1), Place::Infinite).unwrap().unwrap();
        // λ = 0, G(9) = log(9/2), pairs dominated by (1, 2): |f(9) − f²(9)|.
        let f1: f64 = 81.0 / 2.0;
        let f2 = f1 * f1 / 2.0;
        let want = 2.0 * (f2 - f1).ln() - 32.0 * 4.5f64.ln();
        assert!((gap - want).abs() < 1e-6, "{gap} vs {want}");
        let g = NormalForm::from_i64(&[1]).to_poly().unwrap();
        assert!(basin_one(&spec, &g, &q(1, 32), Place::Prime(2)).unwrap().is_some());
        let r = check_basin_inequality(&spec).unwrap();
        assert!(r.pass, "{}", r.summary());
        assert!(r.details.iter().any(|x| x.status == SampleStatus::Ok));
    }
}
