//! Non-archimedean escape rates, computed exactly.
//!
//! The orbit is followed as a rational approximation `w̃` with a guaranteed
//! `v_p(w − w̃) ≥ E`. Exact iteration has no error term; once iterates grow
//! long they are cut down to a `p`-adic window of fixed size, and the
//! Lipschitz bound
//! `v(φ(w) − φ(w̃)) ≥ E + min_{i≥1} (v(a_i) + (i−1)·min{v(w̃), E})`
//! carries the error forward. Past the dominance radius `R_p` every later
//! valuation follows `v' = d·v + v(a_d)` and the Green's function is exact.

use std::collections::HashSet;

use num::{BigInt, Integer, One, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{bit_length, format_rational, valuation, Place, Rational};
use crate::error::Result;
use crate::heights::bounds::PadicData;
use crate::heights::{BoundedValue, IterationCaps, OrbitPoint, OrbitRecord, OrbitStatus};
use crate::poly::PolyQ;

/// Approximations longer than this are cut back to a `p`-adic window.
const TRUNCATE_BITS: u64 = 2048;
/// Valuations at or past this are forgotten: the iterate is replaced by 0.
const MAX_PRECISION: i64 = 1024;

/// An exact enclosure `[lo, hi]·log p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PadicEnclosure {
    pub p: u64,
    pub lo: Rational,
    pub hi: Rational,
}

impl PadicEnclosure {
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn to_bounded(&self) -> BoundedValue {
        let lp = (self.p as f64).ln();
        let lo = self.lo.to_f64().expect("finite") * lp;
        let hi = self.hi.to_f64().expect("finite") * lp;
        if self.is_exact() {
            BoundedValue::exact(lo)
        } else {
            BoundedValue::from_interval(lo, hi)
        }
    }

    pub fn scale(&self, k: &Rational) -> Self {
        let (a, b) = (&self.lo * k, &self.hi * k);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        Self { p: self.p, lo, hi }
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.p == other.p && self.lo <= other.hi && other.lo <= self.hi
    }

    /// Enclosure of the maximum of the enclosed values.
    pub fn max_of(items: &[Self]) -> Option<Self> {
        let first = items.first()?;
        Some(Self {
            p: first.p,
            lo: items.iter().map(|e| e.lo.clone()).max()?,
            hi: items.iter().map(|e| e.hi.clone()).max()?,
        })
    }
}

impl Serialize for PadicEnclosure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(3))?;
        m.serialize_entry("p", &self.p)?;
        m.serialize_entry("lo", &format_rational(&self.lo))?;
        m.serialize_entry("hi", &format_rational(&self.hi))?;
        m.end()
    }
}

fn frac(n: i64, d: usize) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn d_pow_inv(d: usize, k: usize) -> Rational {
    Rational::new(BigInt::one(), num::pow(BigInt::from(d), k))
}

/// Valuation, `None` for zero.
fn val(x: &Rational, p: u64) -> Option<i64> {
    (!x.is_zero()).then(|| valuation(x, p).expect("nonzero"))
}

/// Some `r` with `v_p(x − r) ≥ prec` and small height.
fn truncate(x: &Rational, p: u64, prec: i64) -> Rational {
    let Some(k) = val(x, p) else { return Rational::zero() };
    if k >= prec {
        return Rational::zero();
    }
    let pb = BigInt::from(p);
    let modulus = num::pow(pb.clone(), (prec - k) as usize);
    let unit = x / pow_p(p, k);
    let inv = mod_inverse(unit.denom(), &modulus);
    let digits = (unit.numer() * inv).mod_floor(&modulus);
    Rational::from_integer(digits) * pow_p(p, k)
}

fn pow_p(p: u64, k: i64) -> Rational {
    let base = num::pow(BigInt::from(p), k.unsigned_abs() as usize);
    if k >= 0 {
        Rational::from_integer(base)
    } else {
        Rational::new(BigInt::one(), base)
    }
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.extended_gcd(m);
    debug_assert!(e.gcd.is_one());
    e.x.mod_floor(m)
}

/// What is known about `|φᵏ(z)|_p` at one step.
#[derive(Clone, Debug)]
enum Knowledge {
    /// `φᵏ(z) = 0`.
    Zero,
    Valuation(i64),
    /// Only `v ≥ bound`.
    AtLeast(i64),
}

#[derive(Clone, Debug)]
pub(crate) struct PadicRun {
    /// `d^{−k}·λ⁺_p(φᵏ(z))` in units of `log p`, for each completed step.
    pub scaled_lambda: Vec<(Rational, Rational)>,
    /// `(k, v_p(φᵏ(z)))` at certified escape.
    pub escape: Option<(usize, i64)>,
    pub cycle: bool,
    /// Some iterate landed in a forward-invariant disk.
    pub trapped: bool,
}

impl PadicRun {
    /// Extends the escaped orbit's scaled `λ⁺` to step `m` via the exact
    /// recursion `v' = d·v + v(a_d)`.
    pub fn scaled_lambda_at(&self, m: usize, data: &PadicData) -> Option<(Rational, Rational)> {
        if let Some(x) = self.scaled_lambda.get(m) {
            return Some(x.clone());
        }
        let (k, v) = self.escape?;
        let shift = frac(data.vd, data.d - 1);
        let base = (Rational::from_integer((-v).into()) - &shift) * d_pow_inv(data.d, k);
        let s = base + shift * d_pow_inv(data.d, m);
        Some((s.clone(), s))
    }
}

pub(crate) fn track(
    phi: &PolyQ,
    data: &PadicData,
    z: &Rational,
    steps: usize,
    stop_on_escape: bool,
    stop_when_trapped: bool,
) -> PadicRun {
    let p = data.p;
    let d = data.d;
    // Digits kept after truncation: p^window ≥ 2^128.
    let window = (128.0 / (p as f64).log2()).ceil() as i64 + 4;
    let mut approx = z.clone();
    let mut err: Option<i64> = None;
    let mut seen = HashSet::from([z.clone()]);
    let mut run = PadicRun { scaled_lambda: Vec::new(), escape: None, cycle: false, trapped: false };
    let mut k = 0;
    loop {
        let know = match (val(&approx, p), err) {
            (None, None) => Knowledge::Zero,
            (Some(v), None) => Knowledge::Valuation(v),
            (Some(v), Some(e)) if v < e => Knowledge::Valuation(v),
            (v, Some(e)) => Knowledge::AtLeast(v.map_or(e, |v| v.min(e))),
        };
        let scale = d_pow_inv(d, k);
        let (lo, hi) = match know {
            Knowledge::Zero => (0, 0),
            Knowledge::Valuation(v) => ((-v).max(0), (-v).max(0)),
            Knowledge::AtLeast(b) => (0, (-b).max(0)),
        };
        run.scaled_lambda
            .push((Rational::from_integer(lo.into()) * &scale, Rational::from_integer(hi.into()) * &scale));
        if let Knowledge::Valuation(v) = know {
            if run.escape.is_none() && Rational::from_integer((-v).into()) > data.log_r {
                run.escape = Some((k, v));
                if stop_on_escape {
                    break;
                }
            }
        }
        let floor = match know {
            Knowledge::Zero => None,
            Knowledge::Valuation(v) | Knowledge::AtLeast(v) => Some(v),
        };
        if run.escape.is_none() && !run.trapped && floor.is_some_and(|v| data.invariant_disk(v, &data.log_r)) {
            run.trapped = true;
            if stop_when_trapped {
                break;
            }
        }
        if k >= steps {
            break;
        }
        let next = phi.evaluate(&approx);
        let mut next_err = err.map(|e| {
            let vr = val(&approx, p).map_or(e, |v| v.min(e));
            data.vals[1..]
                .iter()
                .enumerate()
                .filter_map(|(i, v)| v.map(|v| v.saturating_add(e).saturating_add((i as i64).saturating_mul(vr))))
                .min()
                .unwrap_or(i64::MAX)
                .min(MAX_PRECISION)
        });
        approx = next;
        if next_err.is_none() && !seen.insert(approx.clone()) {
            run.cycle = true;
            k += 1;
            run.scaled_lambda.push(lambda_exact(&approx, p, d, k));
            break;
        }
        let deep = val(&approx, p).is_some_and(|v| v >= MAX_PRECISION);
        if deep || bit_length(&approx) > TRUNCATE_BITS {
            let base = val(&approx, p).unwrap_or(0);
            let prec = next_err.map_or(base + window, |e| e.min(base + window)).min(MAX_PRECISION);
            approx = truncate(&approx, p, prec);
            next_err = Some(prec);
        }
        err = next_err;
        k += 1;
    }
    run
}

fn lambda_exact(w: &Rational, p: u64, d: usize, k: usize) -> (Rational, Rational) {
    let lam = val(w, p).map_or(0, |v| (-v).max(0));
    let s = Rational::from_integer(lam.into()) * d_pow_inv(d, k);
    (s.clone(), s)
}

pub(crate) fn enclosure_from_run(run: &PadicRun, data: &PadicData) -> (PadicEnclosure, OrbitStatus) {
    let p = data.p;
    if run.cycle || run.trapped {
        let z = Rational::zero();
        return (PadicEnclosure { p, lo: z.clone(), hi: z }, OrbitStatus::BoundedCertified);
    }
    if let Some((k, v)) = run.escape {
        let g = (Rational::from_integer((-v).into()) - frac(data.vd, data.d - 1)) * d_pow_inv(data.d, k);
        return (PadicEnclosure { p, lo: g.clone(), hi: g }, OrbitStatus::Escaped);
    }
    let mut lo = Rational::zero();
    let mut hi: Option<Rational> = None;
    for (k, (sl, sh)) in run.scaled_lambda.iter().enumerate() {
        let scale = d_pow_inv(data.d, k);
        lo = lo.max(sl - data.lower() * &scale);
        let h = sh + &data.upper * &scale;
        hi = Some(match hi {
            Some(x) if x <= h => x,
            _ => h,
        });
    }
    let hi = hi.expect("at least one step").max(lo.clone());
    let status = if hi.is_zero() { OrbitStatus::BoundedCertified } else { OrbitStatus::Undecided };
    (PadicEnclosure { p, lo, hi }, status)
}

/// `G_{φ,p}(z)` as an exact enclosure, following at most `max_iter` steps.
pub fn green_nonarch_exact(
    phi: &PolyQ,
    z: &Rational,
    p: u64,
    max_iter: usize,
) -> Result<(PadicEnclosure, OrbitRecord)> {
    let place = Place::prime(p)?;
    let data = PadicData::new(phi, p)?;
    let run = track(phi, &data, z, max_iter, true, true);
    let (enc, status) = enclosure_from_run(&run, &data);
    let used = run.scaled_lambda.len() - 1;
    let escape_index = (status == OrbitStatus::Escaped).then(|| run.escape.expect("escaped").0);
    let record = OrbitRecord::new(OrbitPoint::Exact(z.clone()), place, used, status, escape_index);
    Ok((enc, record))
}

pub fn green_nonarch(phi: &PolyQ, z: &Rational, p: u64, max_iter: usize) -> Result<(BoundedValue, OrbitRecord)> {
    let (enc, rec) = green_nonarch_exact(phi, z, p, max_iter)?;
    Ok((enc.to_bounded(), rec))
}

pub fn green_nonarch_default(phi: &PolyQ, z: &Rational, p: u64) -> Result<(BoundedValue, OrbitRecord)> {
    green_nonarch(phi, z, p, IterationCaps::default().padic)
}
