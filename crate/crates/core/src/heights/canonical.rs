use std::collections::{BTreeSet, HashSet};

use num::{ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{bit_length, rational_support, weil_height, Place, Rational};
use crate::error::{Error, Result};
use crate::heights::arch::{green_arch_c, green_arch_with, Tracker};
use crate::heights::bounded::{down, up};
use crate::heights::bounds::{height_defect_bound, ArchData, PadicData};
use crate::heights::padic::{green_nonarch_exact, track, PadicEnclosure};
use crate::heights::{BoundedValue, IterationCaps, OrbitRecord};
use crate::poly::{bad_places, in_escape_region, NormalForm, NormalFormParams, PolyQ};

/// Exact iterates used by the naive method stay below this many bits.
const NAIVE_EXACT_BITS: u64 = 1 << 12;

/// One place's share of `ĥ_φ(α)`.
#[derive(Clone, Debug, Serialize)]
pub struct LocalContribution {
    pub place: Place,
    pub value: BoundedValue,
    pub record: OrbitRecord,
    /// Exact form of finite-place contributions.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<PadicEnclosure>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalHeight {
    pub total: BoundedValue,
    pub places: Vec<LocalContribution>,
}

/// Primes where `G_{φ,p}(α)` can differ from 0: bad primes and primes in the
/// denominator of `α`.
pub fn relevant_primes(phi: &PolyQ, alpha: &Rational) -> Result<BTreeSet<u64>> {
    let mut primes: BTreeSet<u64> = bad_places(phi)?.iter().filter_map(Place::as_prime).collect();
    primes.extend(rational_support(&Rational::from_integer(alpha.denom().clone()))?);
    Ok(primes)
}

/// `ĥ_φ(α) = Σ_v λ̂_v(α)`, with every local term from its Green's function.
pub fn canonical_height_local_method(phi: &PolyQ, alpha: &Rational, target_error: f64) -> Result<BoundedValue> {
    Ok(canonical_height_local_breakdown(phi, alpha, target_error, &IterationCaps::default())?.total)
}

pub fn canonical_height_local_breakdown(
    phi: &PolyQ,
    alpha: &Rational,
    target_error: f64,
    caps: &IterationCaps,
) -> Result<LocalHeight> {
    let (g, rec) = green_arch_with(phi, alpha, target_error, caps)?;
    let mut places = vec![LocalContribution { place: Place::Infinite, value: g, record: rec, exact: None }];
    for p in relevant_primes(phi, alpha)? {
        let (enc, rec) = green_nonarch_exact(phi, alpha, p, caps.padic)?;
        places.push(LocalContribution {
            place: Place::Prime(p),
            value: enc.to_bounded(),
            record: rec,
            exact: Some(enc),
        });
    }
    let total: BoundedValue = places.iter().map(|c| c.value).sum();
    // Every local term is nonnegative; the clamp only removes rounding.
    let total = if total.value < total.error { BoundedValue::from_interval(0.0, total.upper()) } else { total };
    Ok(LocalHeight { total, places })
}

/// `d^{−n}·h(φⁿ(α))`, radius `d^{−n}·B(φ)`.
///
/// When `φⁿ(α)` is too long to write down, its height is assembled place by
/// place from orbit enclosures. Where those lose precision, the largest
/// `m ≤ n` giving the tightest total enclosure is used instead.
pub fn canonical_height_naive_method(phi: &PolyQ, alpha: &Rational, n: usize) -> Result<BoundedValue> {
    if n == 0 {
        return Err(Error::Domain("naive method needs n ≥ 1".into()));
    }
    let d = phi.require_dynamical()?;
    let b = height_defect_bound(phi)?;
    if let Ok(orbit) = phi.iterate(alpha, n, NAIVE_EXACT_BITS) {
        let h = weil_height(orbit.last().expect("nonempty"));
        let s = (d as f64).powi(-(n as i32));
        let v = h * s;
        return Ok(BoundedValue::new(v, up(b * s) + 8.0 * f64::EPSILON * v));
    }
    let per_step = place_sums(phi, alpha, n)?;
    let mut best: Option<BoundedValue> = None;
    for (m, (lo, hi)) in per_step.into_iter().enumerate() {
        let s = (d as f64).powi(-(m as i32));
        let tail = up(b * s * (1.0 + (m as f64 + 4.0) * f64::EPSILON));
        let cand = BoundedValue::from_interval(down(lo - tail), up(hi + tail));
        if best.is_none_or(|x| cand.error < x.error) {
            best = Some(cand);
        }
    }
    best.ok_or_else(|| Error::Resource("no orbit step could be enclosed".into()))
}

/// Enclosures of `d^{−m}·h(φᵐ(α)) = Σ_v d^{−m}λ⁺_v(φᵐ(α))` for `m = 0..=n`,
/// stopping where any place lost track.
fn place_sums(phi: &PolyQ, alpha: &Rational, n: usize) -> Result<Vec<(f64, f64)>> {
    let arch = ArchData::from_q(phi)?;
    let mut tracker = Tracker::exact(&arch, phi, alpha, 4096, false)?;
    while tracker.steps() < n && !tracker.is_done() {
        tracker.step()?;
    }
    let run = tracker.into_run();
    let mut sums: Vec<(f64, f64)> = run.scaled_lambda.clone();
    for p in relevant_primes(phi, alpha)? {
        let data = PadicData::new(phi, p)?;
        let prun = track(phi, &data, alpha, n, true, false);
        let lp = (p as f64).ln();
        let len = sums.len();
        for (m, slot) in sums.iter_mut().enumerate().take(len) {
            let (lo, hi) = prun.scaled_lambda_at(m, &data).expect("tracked or escaped");
            slot.0 = down(slot.0 + down(lo.to_f64().expect("finite") * lp));
            slot.1 = up(slot.1 + up(hi.to_f64().expect("finite") * lp));
        }
    }
    Ok(sums)
}

/// Three-way answer of [`is_preperiodic`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preperiodicity {
    Preperiodic,
    Wandering,
    Undecided,
}

/// Step budget for [`is_preperiodic`].
pub const PREPERIODIC_STEP_CAP: usize = 10_000;

/// Decides whether the orbit of `α` is finite.
///
/// Exact iteration with cycle detection, stopped as soon as some iterate
/// escapes at ∞ or at a relevant prime (escape is permanent, so the height
/// is positive). If the iterates outgrow the bit cap, a positive lower
/// enclosure of `ĥ` still settles the question.
pub fn is_preperiodic(phi: &PolyQ, alpha: &Rational) -> Result<Preperiodicity> {
    phi.require_dynamical()?;
    let primes: Vec<(u64, PadicData)> = relevant_primes(phi, alpha)?
        .into_iter()
        .map(|p| PadicData::new(phi, p).map(|d| (p, d)))
        .collect::<Result<_>>()?;
    let mut seen = HashSet::new();
    let mut w = alpha.clone();
    for _ in 0..PREPERIODIC_STEP_CAP {
        if !seen.insert(w.clone()) {
            return Ok(Preperiodicity::Preperiodic);
        }
        if in_escape_region(phi, &w, Place::Infinite)? || escapes_padically(&w, &primes) {
            return Ok(Preperiodicity::Wandering);
        }
        if bit_length(&w) > 1 << 14 {
            break;
        }
        w = phi.evaluate(&w);
    }
    let h = canonical_height_local_method(phi, alpha, 1e-6)?;
    Ok(if h.lower() > 0.0 { Preperiodicity::Wandering } else { Preperiodicity::Undecided })
}

fn escapes_padically(w: &Rational, primes: &[(u64, PadicData)]) -> bool {
    !w.is_zero()
        && primes.iter().any(|(p, data)| {
            let v = crate::arith::valuation(w, *p).expect("nonzero");
            Rational::from_integer((-v).into()) > data.log_r
        })
}

/// `M_v(f_c) = max_i G_{f_c,v}(c_i)`.
pub fn critical_escape(nf: &NormalForm, v: Place, target_error: f64) -> Result<BoundedValue> {
    critical_escape_with(nf, v, target_error, &IterationCaps::default())
}

pub fn critical_escape_with(
    nf: &NormalForm,
    v: Place,
    target_error: f64,
    caps: &IterationCaps,
) -> Result<BoundedValue> {
    let values: Vec<BoundedValue> = match (v, nf.params()) {
        (Place::Infinite, NormalFormParams::Exact(cs)) => {
            let f = nf.to_poly()?;
            cs.iter().map(|c| green_arch_with(&f, c, target_error, caps).map(|x| x.0)).collect::<Result<_>>()?
        }
        (Place::Infinite, NormalFormParams::Numeric(cs)) => {
            let f = nf.to_polyc();
            cs.iter().map(|c| green_arch_c(&f, *c, target_error, caps).map(|x| x.0)).collect::<Result<_>>()?
        }
        (Place::Prime(p), _) => return Ok(critical_escape_padic_with(nf, p, caps)?.to_bounded()),
    };
    Ok(BoundedValue::max_of(&values).expect("degree ≥ 2 has a critical point"))
}

/// Exact `M_p(f_c)`; needs rational critical points.
pub fn critical_escape_padic(nf: &NormalForm, p: u64) -> Result<PadicEnclosure> {
    critical_escape_padic_with(nf, p, &IterationCaps::default())
}

pub fn critical_escape_padic_with(nf: &NormalForm, p: u64, caps: &IterationCaps) -> Result<PadicEnclosure> {
    let Some(cs) = nf.exact_params() else {
        return Err(Error::Unsupported("finite-place escape rates need rational critical points".into()));
    };
    let f = nf.to_poly()?;
    let encs = cs.iter().map(|c| green_nonarch_exact(&f, c, p, caps.padic).map(|x| x.0)).collect::<Result<Vec<_>>>()?;
    Ok(PadicEnclosure::max_of(&encs).expect("degree ≥ 2 has a critical point"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn half_square() -> PolyQ {
        PolyQ::new(vec![q(0, 1), q(0, 1), q(1, 2)])
    }

    #[test]
    fn local_method_examples() {
        let h = canonical_height_local_method(&PolyQ::from_i64(&[0, 0, 1]), &q(2, 1), 1e-12).unwrap();
        assert!(h.contains(LN_2) && h.error <= 1e-9, "{h}");
        let h = canonical_height_local_method(&half_square(), &q(4, 1), 1e-12).unwrap();
        assert!(h.contains(LN_2) && h.error <= 1e-9, "{h}");
        let h = canonical_height_local_method(&PolyQ::from_i64(&[-1, 0, 1]), &q(0, 1), 1e-12).unwrap();
        assert_eq!(h, BoundedValue::exact(0.0));
    }

    #[test]
    fn naive_method_examples() {
        let h = canonical_height_naive_method(&PolyQ::from_i64(&[0, 0, 1]), &q(2, 1), 5).unwrap();
        assert_eq!(h.value, LN_2);
        let h = canonical_height_naive_method(&half_square(), &q(4, 1), 6).unwrap();
        assert!((h.value - 65.0 / 64.0 * LN_2).abs() < 1e-14);
        let h = canonical_height_naive_method(&PolyQ::from_i64(&[-1, 0, 1]), &q(0, 1), 4).unwrap();
        assert_eq!(h.value, 0.0);
    }

    #[test]
    fn naive_method_deep_orbits() {
        for (phi, a) in [(PolyQ::from_i64(&[0, 0, 1]), q(2, 1)), (half_square(), q(4, 1))] {
            let h = canonical_height_naive_method(&phi, &a, 40).unwrap();
            assert!(h.contains(LN_2) && h.error <= 1e-9, "{h}");
        }
    }

    #[test]
    fn preperiodicity_examples() {
        assert_eq!(is_preperiodic(&PolyQ::from_i64(&[-1, 0, 1]), &q(0, 1)).unwrap(), Preperiodicity::Preperiodic);
        assert_eq!(is_preperiodic(&PolyQ::from_i64(&[0, 0, 1]), &q(2, 1)).unwrap(), Preperiodicity::Wandering);
        assert_eq!(is_preperiodic(&PolyQ::from_i64(&[0, 0, 1]), &q(1, 1)).unwrap(), Preperiodicity::Preperiodic);
        // Escapes only 3-adically.
        assert_eq!(is_preperiodic(&PolyQ::from_i64(&[0, 0, 1]), &q(1, 3)).unwrap(), Preperiodicity::Wandering);
        // −2 ↦ 2 ↦ 2 under z² − 2.
        assert_eq!(is_preperiodic(&PolyQ::from_i64(&[-2, 0, 1]), &q(-2, 1)).unwrap(), Preperiodicity::Preperiodic);
    }

    #[test]
    fn critical_escape_examples() {
        let m = critical_escape(&NormalForm::from_i64(&[0]), Place::Infinite, 1e-9).unwrap();
        assert_eq!(m, BoundedValue::exact(0.0));
        let m = critical_escape(&NormalForm::from_i64(&[4]), Place::Infinite, 1e-9).unwrap();
        assert!(m.lower() > 0.0, "{m}");
        let m = critical_escape(&NormalForm::from_i64(&[0, 0]), Place::Infinite, 1e-9).unwrap();
        assert_eq!(m, BoundedValue::exact(0.0));
        // z³/3 at 3: critical point 0 is fixed.
        let e = critical_escape_padic(&NormalForm::from_i64(&[0, 0]), 3).unwrap();
        assert!(e.is_exact() && e.lo == q(0, 1));
    }
}
