use std::collections::BTreeMap;

use num::complex::Complex64;
use num::Zero;
use serde::Serialize;

use super::sampling::{choose, normal_form, par_samples, rational, sample_rng};
use super::{to_f64, validate, LemmaReport, SampleRecord, SampleSpec};
use crate::arith::{bit_length, format_rational, ln_abs, to_complex, valuation, Place, Rational};
use crate::error::{Error, Result};
use crate::heights::bounds::PadicData;
use crate::heights::{green_arch, green_nonarch_exact, is_preperiodic, Preperiodicity};
use crate::poly::{
    coefficient_height_local, in_escape_region, log_escape_radius, padic_log_escape_radius, NormalForm, PolyC, PolyQ,
};
use crate::roots::{periodic_points, preimages, DEFAULT_ROOT_TOL};

/// Exact iterates are abandoned past this many bits.
const EXACT_BITS: u64 = 1 << 12;
/// Relative margin for deciding escape from a floating-point iterate.
const NUMERIC_MARGIN: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PigeonholeCase {
    /// Enough `k ∈ X` have `f^k(α)` in the escape region.
    Escaping,
    /// Largest cluster of non-escaping iterates around a point of period
    /// dividing 3.
    Grouped,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairValue {
    pub i: usize,
    pub j: usize,
    /// `λ_v(f) + d(d−1)·log|f^i(α) − f^j(α)|_v − d^{j+3}·λ̂_v(α)`; `None`
    /// when the iterates coincide or their difference was not tracked.
    pub value: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PigeonholeCertificate {
    pub x_len: usize,
    /// `⌈(#X − 3)/(d³ + 1)⌉`, or 0 when `#X ≤ 3`.
    pub threshold: usize,
    /// `#{k ∈ X : f^k(α) ∈ B(∞)}`.
    pub escaping: usize,
    pub case: PigeonholeCase,
    pub y_len: usize,
    pub pair_values: Vec<PairValue>,
    pub max_pair_value: Option<f64>,
    /// Grouped case only: whether grouping by `f^{−3}(0)` instead of by
    /// period-3 points picks a different largest group.
    pub alt_grouping_differs: Option<bool>,
    /// First index whose iterate was carried in floating point.
    pub numeric_from: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PigeonholeResult {
    pub y: Vec<usize>,
    pub certificate: PigeonholeCertificate,
}

/// How an iterate is known.
#[derive(Clone, Debug)]
enum Iterate {
    Exact(Rational),
    /// `log|w|` at ∞, past the escape radius.
    LogAbs(f64),
    /// `v_p(w)`, past the `p`-adic dominance radius.
    Val(i64),
    /// Inside a forward-invariant `p`-adic disk within the escape radius.
    Trapped,
    Numeric(Complex64),
}

struct Orbit {
    f: PolyQ,
    fc: PolyC,
    v: Place,
    log_c: f64,
    states: Vec<Iterate>,
    numeric_from: Option<usize>,
}

impl Orbit {
    fn new(f: &PolyQ, alpha: &Rational, n: usize, v: Place) -> Result<Self> {
        let d = f.degree();
        let la = ln_abs(&f.leading());
        let padic = v.as_prime().map(|p| PadicData::new(f, p)).transpose()?;
        let fc = f.to_polyc();
        let mut states = vec![Iterate::Exact(alpha.clone())];
        let mut numeric_from = None;
        for k in 1..=n {
            let prev = states.last().expect("nonempty").clone();
            let prev = match (prev, &padic, v) {
                (Iterate::Exact(w), Some(data), Place::Prime(p)) if !w.is_zero() => {
                    let val = valuation(&w, p)?;
                    if Rational::from_integer((-val).into()) > data.log_r {
                        Iterate::Val(val)
                    } else if bit_length(&w) > EXACT_BITS {
                        if data.invariant_disk(val, &padic_log_escape_radius(f, p)?) {
                            Iterate::Trapped
                        } else {
                            return Err(Error::Undecided(format!(
                                "{p}-adic orbit outgrew {EXACT_BITS} bits before escaping"
                            )));
                        }
                    } else {
                        Iterate::Exact(w)
                    }
                }
                (Iterate::Exact(w), None, _) if bit_length(&w) > EXACT_BITS => {
                    if in_escape_region(f, &w, v)? {
                        Iterate::LogAbs(ln_abs(&w))
                    } else {
                        numeric_from.get_or_insert(k - 1);
                        Iterate::Numeric(to_complex(&w))
                    }
                }
                (other, ..) => other,
            };
            let next = match prev {
                Iterate::Exact(w) => Iterate::Exact(f.evaluate(&w)),
                Iterate::LogAbs(l) => Iterate::LogAbs(d as f64 * l + la),
                Iterate::Val(val) => Iterate::Val(d as i64 * val + padic.as_ref().expect("finite").vd),
                Iterate::Trapped => Iterate::Trapped,
                Iterate::Numeric(z) => {
                    let w = fc.evaluate(z);
                    if !(w.re.is_finite() && w.im.is_finite()) {
                        return Err(Error::Numeric { message: "orbit overflowed".into(), residual: f64::INFINITY });
                    }
                    Iterate::Numeric(w)
                }
            };
            states.push(next);
        }
        Ok(Self {
            log_c: if v.is_archimedean() { log_escape_radius(f, v)? } else { 0.0 },
            f: f.clone(),
            fc,
            v,
            states,
            numeric_from,
        })
    }

    fn escaped(&self, k: usize) -> Result<bool> {
        match &self.states[k] {
            Iterate::Exact(w) => in_escape_region(&self.f, w, self.v),
            Iterate::LogAbs(_) | Iterate::Val(_) => Ok(true),
            Iterate::Trapped => Ok(false),
            Iterate::Numeric(z) => {
                let l = z.norm().ln();
                if l > self.log_c + NUMERIC_MARGIN {
                    Ok(true)
                } else if l < self.log_c - NUMERIC_MARGIN {
                    Ok(false)
                } else {
                    Err(Error::Undecided(format!("iterate {k} is within rounding of the escape radius")))
                }
            }
        }
    }

    fn complex(&self, k: usize) -> Option<Complex64> {
        match &self.states[k] {
            Iterate::Exact(w) => Some(to_complex(w)),
            Iterate::Numeric(z) => Some(*z),
            _ => None,
        }
    }

    fn log_abs(&self, k: usize) -> Option<f64> {
        match &self.states[k] {
            Iterate::Exact(w) if !w.is_zero() => Some(ln_abs(w)),
            Iterate::LogAbs(l) => Some(*l),
            Iterate::Numeric(z) => Some(z.norm().ln()),
            _ => None,
        }
    }

    /// `log|f^i(α) − f^j(α)|_v`, when it can be read off.
    fn log_diff(&self, i: usize, j: usize) -> Option<f64> {
        use Iterate::*;
        match (&self.states[i], &self.states[j], self.v) {
            (Exact(a), Exact(b), v) => {
                let diff = a - b;
                if diff.is_zero() {
                    None
                } else {
                    match v {
                        Place::Infinite => Some(ln_abs(&diff)),
                        Place::Prime(p) => Some(-(valuation(&diff, p).ok()? as f64) * (p as f64).ln()),
                    }
                }
            }
            (_, _, Place::Prime(p)) => {
                let val = |s: &Iterate| match s {
                    Exact(w) if !w.is_zero() => valuation(w, p).ok(),
                    Val(x) => Some(*x),
                    _ => None,
                };
                let (a, b) = (val(&self.states[i])?, val(&self.states[j])?);
                (a != b).then(|| -(a.min(b) as f64) * (p as f64).ln())
            }
            (LogAbs(_), _, _) | (_, LogAbs(_), _) => {
                let (a, b) = (self.log_abs(i)?, self.log_abs(j)?);
                // The smaller term is below double precision of the larger.
                ((a - b).abs() > 40.0).then(|| a.max(b))
            }
            _ => Some((self.complex(i)? - self.complex(j)?).norm().ln()).filter(|x| x.is_finite()),
        }
    }
}

/// Chooses `Y ⊂ X` with `#Y ≥ ⌈(#X − 3)/(d³ + 1)⌉`.
///
/// If enough iterates `f^k(α)`, `k ∈ X`, lie in the escape region those are
/// returned. Otherwise the `k` with `f^{k+3}(α)` outside the region are
/// grouped by the nearest root of `f³(y) = y` (at ∞ only) and the largest
/// group is returned. The certificate carries the pair values of the basin
/// inequality for every `i < j` in `Y`.
pub fn pigeonhole_select(nf: &NormalForm, alpha: &Rational, xs: &[usize], v: Place) -> Result<PigeonholeResult> {
    let f = nf.to_poly()?;
    let d = f.degree();
    let mut xs: Vec<usize> = xs.to_vec();
    xs.sort_unstable();
    xs.dedup();
    if xs.first() == Some(&0) {
        return Err(Error::Domain("X must contain positive integers".into()));
    }
    match is_preperiodic(&f, alpha)? {
        Preperiodicity::Preperiodic => return Err(Error::Domain(format!("{} is preperiodic", format_rational(alpha)))),
        Preperiodicity::Undecided => {
            return Err(Error::Undecided(format!("cannot certify that {} wanders", format_rational(alpha))))
        }
        Preperiodicity::Wandering => {}
    }
    let n = xs.len();
    let d3 = d.pow(3);
    let threshold = if n <= 3 { 0 } else { (n - 3).div_ceil(d3 + 1) };
    let kmax = xs.last().map_or(0, |k| k + 3);
    let orbit = Orbit::new(&f, alpha, kmax, v)?;
    let mut escaping = Vec::new();
    for &k in &xs {
        if orbit.escaped(k)? {
            escaping.push(k);
        }
    }
    let n_escaping = escaping.len();
    let (y, case, alt_grouping_differs) = if n_escaping >= threshold {
        (escaping, PigeonholeCase::Escaping, None)
    } else {
        if !v.is_archimedean() {
            return Err(Error::Unsupported("grouping by periodic points needs p-adic root finding".into()));
        }
        let mut pending = Vec::new();
        for &k in &xs {
            if !orbit.escaped(k + 3)? {
                pending.push(k);
            }
        }
        let points: Vec<(usize, Complex64)> = pending
            .iter()
            .map(|&k| {
                orbit.complex(k).map(|z| (k, z)).ok_or_else(|| Error::Undecided(format!("iterate {k} not tracked")))
            })
            .collect::<Result<_>>()?;
        let cycles = periodic_points(&orbit.fc, 3, DEFAULT_ROOT_TOL)?;
        let y = largest_group(&points, cycles.with_multiplicity());
        let zeros = preimages(&orbit.fc, Complex64::new(0.0, 0.0), 3, DEFAULT_ROOT_TOL)?;
        let alt = largest_group(&points, zeros.with_multiplicity());
        if y.len() < threshold {
            return Err(Error::Numeric {
                message: format!("largest group has {} < {threshold} elements", y.len()),
                residual: cycles.residual(),
            });
        }
        let differs = alt != y;
        (y, PigeonholeCase::Grouped, Some(differs))
    };
    let pair_values = pair_values(&orbit, alpha, &y)?;
    let max_pair_value = pair_values.iter().filter_map(|p| p.value).reduce(f64::max);
    Ok(PigeonholeResult {
        certificate: PigeonholeCertificate {
            x_len: n,
            threshold,
            escaping: n_escaping,
            case,
            y_len: y.len(),
            pair_values,
            max_pair_value,
            alt_grouping_differs,
            numeric_from: orbit.numeric_from,
        },
        y,
    })
}

/// Members of the largest cluster by nearest centre; ties go to the
/// earlier centre.
fn largest_group(points: &[(usize, Complex64)], centres: &[(Complex64, usize)]) -> Vec<usize> {
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (k, z) in points {
        let nearest = centres
            .iter()
            .enumerate()
            .map(|(i, (c, _))| (i, (c - z).norm()))
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
            .0;
        groups.entry(nearest).or_default().push(*k);
    }
    let mut best: Vec<usize> = Vec::new();
    for g in groups.into_values() {
        if g.len() > best.len() {
            best = g;
        }
    }
    best
}

fn pair_values(orbit: &Orbit, alpha: &Rational, y: &[usize]) -> Result<Vec<PairValue>> {
    if y.len() < 2 {
        return Ok(Vec::new());
    }
    let d = orbit.f.degree() as f64;
    let lambda = coefficient_height_local(&orbit.f, orbit.v);
    let g = match orbit.v {
        Place::Infinite => green_arch(&orbit.f, alpha, 1e-9)?.0.value,
        Place::Prime(p) => {
            let (enc, _) = green_nonarch_exact(&orbit.f, alpha, p, 32)?;
            to_f64(&enc.hi) * (p as f64).ln()
        }
    };
    let mut out = Vec::new();
    for (a, &i) in y.iter().enumerate() {
        for &j in &y[a + 1..] {
            let value = orbit.log_diff(i, j).map(|l| lambda + d * (d - 1.0) * l - d.powi(j as i32 + 3) * g);
            out.push(PairValue { i, j, value });
        }
    }
    Ok(out)
}

/// Runs [`pigeonhole_select`] on seeded instances and checks the size
/// bound on every completed run. Every tenth instance uses `X = {1, 2, 3}`.
pub fn check_pigeonhole(spec: &SampleSpec) -> Result<LemmaReport> {
    validate(spec)?;
    let out = par_samples(spec.samples, |i| {
        let mut rng = sample_rng(spec.rng_seed, i);
        let d = *choose(&mut rng, &spec.degrees);
        let v = *choose(&mut rng, &spec.places);
        let nf = normal_form(&mut rng, d, spec.coefficient_height_bound);
        let alpha = rational(&mut rng, spec.point_height_bound);
        let xs: Vec<usize> = if i % 10 == 0 { vec![1, 2, 3] } else { (1..=spec.x_size).collect() };
        let inputs = format!("c=({nf}) alpha={} #X={} v={v}", format_rational(&alpha), xs.len());
        match pigeonhole_select(&nf, &alpha, &xs, v) {
            Ok(r) => {
                let c = &r.certificate;
                let rec = SampleRecord::new(i, inputs)
                    .sides(c.y_len as f64, c.threshold as f64)
                    .ok_if(c.y_len >= c.threshold && r.y.iter().all(|k| xs.contains(k)))
                    .note(format!("{:?}; max pair value {:?}", c.case, c.max_pair_value));
                (rec, Some(c.case), c.alt_grouping_differs)
            }
            Err(e) => (SampleRecord::skipped(i, inputs, e.to_string()), None, None),
        }
    });
    let mut constants = BTreeMap::new();
    let count = |c| out.iter().filter(|o| o.1 == Some(c)).count() as f64;
    constants.insert("escaping_cases".into(), count(PigeonholeCase::Escaping));
    constants.insert("grouped_cases".into(), count(PigeonholeCase::Grouped));
    constants.insert("alt_grouping_differs".into(), out.iter().filter(|o| o.2 == Some(true)).count() as f64);
    Ok(LemmaReport::from_records(
        "pigeonhole",
        "|Y| >= ceil((#X - 3)/(d^3 + 1)) and Y is a subset of X on every completed run",
        out.into_iter().map(|o| o.0).collect(),
        constants,
        true,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn escaping_example() {
        // 3 ↦ 9/2 stays inside C = 8; from 81/8 on every iterate escapes.
        let r =
            pigeonhole_select(&NormalForm::from_i64(&[0]), &q(3, 1), &(1..=12).collect::<Vec<_>>(), Place::Infinite)
                .unwrap();
        assert_eq!(r.y, (2..=12).collect::<Vec<_>>());
        assert_eq!(r.certificate.threshold, 1);
        assert_eq!(r.certificate.case, PigeonholeCase::Escaping);
        assert_eq!(r.certificate.pair_values.len(), 55);
        assert!(r.certificate.max_pair_value.unwrap() < 0.0);
    }

    #[test]
    fn degenerate_x_allows_empty_y() {
        let r = pigeonhole_select(&NormalForm::from_i64(&[0]), &q(1, 1), &[1, 2, 3], Place::Infinite).unwrap();
        assert_eq!(r.certificate.threshold, 0);
        assert!(r.y.is_empty());
    }

    #[test]
    fn grouped_case_clusters_at_the_attracting_fixed_point() {
        let r =
            pigeonhole_select(&NormalForm::from_i64(&[0]), &q(1, 1), &(1..=12).collect::<Vec<_>>(), Place::Infinite)
                .unwrap();
        assert_eq!(r.certificate.case, PigeonholeCase::Grouped);
        assert_eq!(r.y, (1..=12).collect::<Vec<_>>());
        assert_eq!(r.certificate.alt_grouping_differs, Some(false));
    }

    #[test]
    fn refusals() {
        let nf = NormalForm::from_i64(&[0]);
        assert!(matches!(pigeonhole_select(&nf, &q(0, 1), &[1, 2, 3, 4], Place::Infinite), Err(Error::Domain(_))));
        assert!(matches!(
            pigeonhole_select(&nf, &q(4, 1), &(1..=12).collect::<Vec<_>>(), Place::Prime(2)),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(pigeonhole_select(&nf, &q(3, 1), &[0, 1], Place::Infinite), Err(Error::Domain(_))));
    }

    #[test]
    fn inside_start_for_large_parameter() {
        let r =
            pigeonhole_select(&NormalForm::from_i64(&[10]), &q(1, 2), &(1..=21).collect::<Vec<_>>(), Place::Infinite)
                .unwrap();
        assert!(r.y.len() >= 2 && r.certificate.threshold == 2, "{:?}", r.certificate);
        assert!(r.certificate.pair_values.iter().all(|p| p.value.is_none_or(f64::is_finite)));
    }

    #[test]
    fn seeded_instances_satisfy_the_bound() {
        let spec = SampleSpec { samples: 40, places: vec![Place::Infinite], ..SampleSpec::default() };
        let r = check_pigeonhole(&spec).unwrap();
        assert!(r.pass && r.samples >= 20, "{}", r.summary());
    }
}
