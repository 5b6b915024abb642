//! Archimedean escape-rate tracking.
//!
//! An orbit is followed through three representations. Exact rationals come
//! first, with cycle detection. Once they get too long the iterate becomes a
//! complex disk `D(c, r)` pushed forward with a Taylor bound. After escape is
//! certified only `log|w|` matters, tracked through the normalised
//! quantity `g_k = d^{−k}(log|φᵏ(z)| + log|a_d|/(d−1))`, which changes by
//! `d^{−k−1}·log|1 + Σ_{i<d} (a_i/a_d) w^{i−d}|` per step.

use std::collections::HashSet;
use std::f64::consts::LN_2;

use num::complex::Complex64;

use crate::arith::{bit_length, ln_abs, to_complex, Place, Rational};
use crate::error::Result;
use crate::heights::bounded::{down, up};
use crate::heights::bounds::ArchData;
use crate::heights::{BoundedValue, IterationCaps, OrbitPoint, OrbitRecord, OrbitStatus};
use crate::poly::{in_escape_region, PolyC, PolyQ};

const EPS: f64 = f64::EPSILON;
const LN_3_2: f64 = 0.405_465_108_108_164_4;

#[derive(Clone, Debug)]
enum State {
    Exact(Rational),
    Ball {
        c: Complex64,
        r: f64,
    },
    /// `g_k ∈ [glo, ghi]`; `carrier` keeps the iterate itself while it is
    /// still representable, which keeps `g_k` sharp.
    Escaped {
        glo: f64,
        ghi: f64,
        carrier: Option<Carrier>,
    },
    Lost,
}

#[derive(Clone, Debug)]
enum Carrier {
    Exact(Rational),
    Ball { c: Complex64, r: f64 },
}

/// Per-step record of the orbit, all scaled by `d^{−k}`.
#[derive(Clone, Debug)]
pub(crate) struct ArchRun {
    pub d: usize,
    /// Enclosures of `d^{−k}·λ⁺(φᵏ(z))`, one per completed step.
    pub scaled_lambda: Vec<(f64, f64)>,
    pub escape_index: Option<usize>,
    pub cycle: bool,
}

fn inv_pow(d: usize, k: usize) -> f64 {
    (d as f64).powi(-(k as i32))
}

/// `x·d^{−k}` rounded down, allowing for the error in `d^{−k}` itself.
fn scale_down(x: f64, d: usize, k: usize) -> f64 {
    let y = x * inv_pow(d, k);
    y - (y.abs() * (k as f64 + 4.0) * EPS + f64::MIN_POSITIVE)
}

fn scale_up(x: f64, d: usize, k: usize) -> f64 {
    let y = x * inv_pow(d, k);
    y + (y.abs() * (k as f64 + 4.0) * EPS + f64::MIN_POSITIVE)
}

fn ln_lo(x: f64) -> f64 {
    let l = x.ln();
    l - 4.0 * EPS * (l.abs() + 1.0)
}

fn ln_hi(x: f64) -> f64 {
    let l = x.ln();
    l + 4.0 * EPS * (l.abs() + 1.0)
}

pub(crate) struct Tracker<'a> {
    data: &'a ArchData,
    exact: Option<&'a PolyQ>,
    exact_bits: u64,
    state: State,
    seen: Option<HashSet<Rational>>,
    k: usize,
    stalled: bool,
    run: ArchRun,
}

impl<'a> Tracker<'a> {
    pub fn exact(
        data: &'a ArchData,
        phi: &'a PolyQ,
        z: &Rational,
        exact_bits: u64,
        detect_cycles: bool,
    ) -> Result<Self> {
        let mut t = Self::blank(data, Some(phi), exact_bits, State::Exact(z.clone()));
        if detect_cycles {
            t.seen = Some(HashSet::from([z.clone()]));
        }
        t.settle()?;
        Ok(t)
    }

    pub fn ball(data: &'a ArchData, z: Complex64) -> Result<Self> {
        let mut t = Self::blank(data, None, 0, State::Ball { c: z, r: 0.0 });
        t.settle()?;
        Ok(t)
    }

    fn blank(data: &'a ArchData, exact: Option<&'a PolyQ>, exact_bits: u64, state: State) -> Self {
        Self {
            data,
            exact,
            exact_bits,
            state,
            seen: None,
            k: 0,
            stalled: false,
            run: ArchRun { d: data.d, scaled_lambda: Vec::new(), escape_index: None, cycle: false },
        }
    }

    /// Classifies the current state (escape test, representation change)
    /// and records its `λ⁺` enclosure.
    fn settle(&mut self) -> Result<()> {
        let (d, k) = (self.data.d, self.k);
        let dm1 = (d - 1) as f64;
        match &self.state {
            State::Exact(w) => {
                let phi = self.exact.expect("exact state needs an exact map");
                if in_escape_region(phi, w, Place::Infinite)? {
                    self.enter_escaped(Carrier::Exact(w.clone()));
                } else if bit_length(w) > self.exact_bits {
                    let c = to_complex(w);
                    if c.re.is_finite() {
                        self.state = State::Ball { c, r: 2.0 * EPS * c.norm() };
                        return self.settle();
                    }
                    self.state = State::Lost;
                } else {
                    let lam = if w.numer().magnitude() > w.denom().magnitude() { ln_abs(w) } else { 0.0 };
                    let slack = 16.0 * EPS * (lam.abs() + 1.0);
                    self.push(down((lam - slack).max(0.0)), up(lam + slack));
                    return Ok(());
                }
            }
            State::Ball { c, r } => {
                let (c, r) = (*c, *r);
                let inner = (c.norm() - r) * (1.0 - 4.0 * EPS);
                if inner > 0.0 && ln_lo(inner) > self.data.log_c_hi {
                    self.enter_escaped(Carrier::Ball { c, r });
                } else {
                    let outer = (c.norm() + r) * (1.0 + 4.0 * EPS);
                    let lo = if inner > 1.0 { ln_lo(inner) } else { 0.0 };
                    let hi = if outer > 1.0 { ln_hi(outer) } else { 0.0 };
                    self.push(lo.max(0.0), hi);
                    return Ok(());
                }
            }
            State::Escaped { .. } => {}
            State::Lost => return Ok(()),
        }
        if let State::Escaped { glo, ghi, .. } = self.state {
            // Escape radius is at least 2d > 1, so λ⁺ = log|w| here.
            let lo = glo - scale_up(self.data.la_hi / dm1, d, k);
            let hi = ghi - scale_down(self.data.la_lo / dm1, d, k);
            self.push_scaled(down(lo), up(hi));
        }
        Ok(())
    }

    fn enter_escaped(&mut self, carrier: Carrier) {
        let (glo, ghi) = self.carried_g(&carrier);
        self.state = State::Escaped { glo, ghi, carrier: Some(carrier) };
        self.run.escape_index = Some(self.k);
    }

    fn push(&mut self, lam_lo: f64, lam_hi: f64) {
        let (d, k) = (self.data.d, self.k);
        self.push_scaled(scale_down(lam_lo, d, k).max(0.0), scale_up(lam_hi, d, k));
    }

    fn push_scaled(&mut self, lo: f64, hi: f64) {
        debug_assert_eq!(self.run.scaled_lambda.len(), self.k);
        self.run.scaled_lambda.push((lo, hi));
    }

    pub fn is_done(&self) -> bool {
        self.stalled || matches!(self.state, State::Lost) || self.run.cycle
    }

    /// Current escaped enclosure of `G(z)` with its radius.
    ///
    /// `G(z) − g_k = d^{−k}·ε(φᵏ(z))` with `ε ∈ [−log 2, log 3/2]`. Since `|w|`
    /// grows past the escape radius, also
    /// `G(z) − g_k ∈ d^{−k}/(d−1)·[log(1−ρ_k), log(1+ρ_k)]` whenever `ρ_k < 1`.
    pub fn escaped_green(&self) -> Option<(f64, f64)> {
        match self.state {
            State::Escaped { glo, ghi, .. } => {
                let (d, k) = (self.data.d, self.k);
                let mut lo = down(glo - scale_up(LN_2, d, k));
                let mut hi = up(ghi + scale_up(LN_3_2, d, k));
                let rho = self.rho(glo);
                if rho < 1.0 {
                    let dm1 = (d - 1) as f64;
                    let tlo = down((-rho).ln_1p() * (1.0 + 4.0 * EPS) / dm1);
                    let thi = up(rho.ln_1p() * (1.0 + 4.0 * EPS) / dm1);
                    lo = lo.max(down(glo + scale_down(tlo, d, k)));
                    hi = hi.min(up(ghi + scale_up(thi, d, k)));
                }
                Some((lo, hi))
            }
            _ => None,
        }
    }

    /// Upper bound on `ρ_k = Σ_{i<d} |a_i/a_d|·|w_k|^{i−d}` from `g_k ≥ glo`.
    fn rho(&self, glo: f64) -> f64 {
        let (d, k) = (self.data.d, self.k);
        let dm1 = (d - 1) as f64;
        let log_w = down(glo / inv_pow(d, k) * (1.0 - (k as f64 + 4.0) * EPS)) - up(self.data.la_hi / dm1);
        let mut rho = 0.0;
        for (i, ratio) in self.data.ratios.iter().enumerate() {
            if *ratio > 0.0 {
                rho += ratio * (-((d - i) as f64) * log_w).exp();
            }
        }
        up(rho * (1.0 + 4.0 * (d as f64) * EPS))
    }

    /// Next carried iterate, or `None` once it no longer fits.
    fn advance(&self, carrier: Carrier) -> Option<Carrier> {
        let next = match carrier {
            Carrier::Exact(w) => {
                let next = self.exact.expect("exact map").evaluate(&w);
                if bit_length(&next) <= self.exact_bits {
                    return Some(Carrier::Exact(next));
                }
                let c = to_complex(&next);
                Carrier::Ball { c, r: 2.0 * EPS * c.norm() }
            }
            Carrier::Ball { c, r } => match self.ball_step(c, r) {
                State::Ball { c, r } => Carrier::Ball { c, r },
                _ => return None,
            },
        };
        match next {
            Carrier::Ball { c, r } if c.norm().is_finite() && r.is_finite() && c.norm() > 2.0 * r => Some(next),
            _ => None,
        }
    }

    /// Enclosure of `g_k` read off a carried iterate.
    fn carried_g(&self, carrier: &Carrier) -> (f64, f64) {
        let (lo, hi) = match carrier {
            Carrier::Exact(w) => {
                let l = ln_abs(w);
                let slack = 16.0 * EPS * (l.abs() + 1.0);
                (l - slack, l + slack)
            }
            Carrier::Ball { c, r } => {
                (ln_lo((c.norm() - r) * (1.0 - 4.0 * EPS)), ln_hi((c.norm() + r) * (1.0 + 4.0 * EPS)))
            }
        };
        self.scaled_g(lo, hi)
    }

    /// `d^{−k}(log|w| + log|a_d|/(d−1))` for `log|w| ∈ [lo, hi]`.
    fn scaled_g(&self, lo: f64, hi: f64) -> (f64, f64) {
        let (d, k) = (self.data.d, self.k);
        let dm1 = (d - 1) as f64;
        (scale_down(down(lo + down(self.data.la_lo / dm1)), d, k), scale_up(up(hi + up(self.data.la_hi / dm1)), d, k))
    }

    pub fn step(&mut self) -> Result<()> {
        if self.is_done() {
            return Ok(());
        }
        let (d, k) = (self.data.d, self.k);
        self.state = match std::mem::replace(&mut self.state, State::Lost) {
            State::Exact(w) => {
                let next = self.exact.expect("exact map").evaluate(&w);
                if let Some(seen) = &mut self.seen {
                    if !seen.insert(next.clone()) {
                        self.run.cycle = true;
                    }
                }
                State::Exact(next)
            }
            State::Ball { c, r } => self.ball_step(c, r),
            State::Escaped { glo, ghi, carrier } => {
                let rho = self.rho(glo);
                if rho >= 0.5 {
                    // ρ < 1/2 holds past the escape radius.
                    self.stalled = true;
                    self.state = State::Escaped { glo, ghi, carrier };
                    return Ok(());
                }
                let dlo = down((-rho).ln_1p() * (1.0 + 4.0 * EPS));
                let dhi = up(rho.ln_1p() * (1.0 + 4.0 * EPS));
                let mut glo = down(glo + scale_down(dlo, d, k + 1));
                let mut ghi = up(ghi + scale_up(dhi, d, k + 1));
                let carrier = carrier.and_then(|c| self.advance(c));
                if let Some(c) = &carrier {
                    self.k += 1;
                    let (lo, hi) = self.carried_g(c);
                    self.k -= 1;
                    glo = glo.max(lo);
                    ghi = ghi.min(hi).max(glo);
                }
                State::Escaped { glo, ghi, carrier }
            }
            State::Lost => State::Lost,
        };
        if matches!(self.state, State::Lost) {
            return Ok(());
        }
        self.k += 1;
        self.settle()
    }

    fn ball_step(&self, c: Complex64, r: f64) -> State {
        let d = self.data.d;
        let a = &self.data.coeffs;
        // Taylor coefficients at c and majorants of their rounding error.
        let mut b = a.clone();
        let mut m: Vec<f64> = a.iter().map(|x| x.norm()).collect();
        let cn = c.norm();
        for j in 0..d {
            for i in (j..d).rev() {
                let t = b[i + 1] * c;
                b[i] += t;
                m[i] += m[i + 1] * cn;
            }
        }
        let gamma = (4 * d + 4) as f64 * EPS;
        let mut rad = gamma * m[0];
        let mut rk = 1.0;
        for k in 1..=d {
            rk *= r;
            rad += (b[k].norm() + gamma * m[k]) * rk;
        }
        let outer = cn + r;
        let mut pow = 1.0;
        for e in &self.data.coeff_err {
            rad += e * pow;
            pow *= outer;
        }
        let rad = up(rad * (1.0 + (2 * d + 4) as f64 * EPS));
        let c2 = b[0];
        let big = 1e3 * (1.0 + self.data.log_c_hi.exp());
        if !c2.re.is_finite() || !c2.im.is_finite() || !rad.is_finite() || rad > big {
            State::Lost
        } else {
            State::Ball { c: c2, r: rad }
        }
    }

    pub fn steps(&self) -> usize {
        self.k
    }

    pub fn into_run(self) -> ArchRun {
        self.run
    }
}

/// Enclosure of `G` from a finished run.
///
/// A cycle gives 0. An escaped run gives the tracked `g` widened by the
/// escape estimate. Otherwise `G` is squeezed between
/// `max_k d^{−k}(λ⁺_lo − L)` and `min_k d^{−k}(λ⁺_hi + U)`.
pub(crate) fn green_from_run(run: &ArchRun, data: &ArchData, escaped: Option<(f64, f64)>) -> (f64, f64, OrbitStatus) {
    if run.cycle {
        return (0.0, 0.0, OrbitStatus::BoundedCertified);
    }
    if let Some((lo, hi)) = escaped {
        return (lo.max(0.0), hi, OrbitStatus::Escaped);
    }
    let d = run.d;
    let mut lo = 0.0f64;
    let mut hi = f64::INFINITY;
    for (k, &(sl, sh)) in run.scaled_lambda.iter().enumerate() {
        lo = lo.max(down(sl - scale_up(data.lower, d, k)));
        hi = hi.min(up(sh + scale_up(data.upper, d, k)));
    }
    let status = if hi <= 0.0 { OrbitStatus::BoundedCertified } else { OrbitStatus::Undecided };
    (lo, hi.max(lo), status)
}

fn finish(
    mut tracker: Tracker<'_>,
    data: &ArchData,
    point: OrbitPoint,
    target_error: f64,
    max_iter: usize,
) -> Result<(BoundedValue, OrbitRecord)> {
    while tracker.steps() < max_iter && !tracker.is_done() {
        if let Some((lo, hi)) = tracker.escaped_green() {
            if 0.5 * (hi - lo) <= target_error {
                break;
            }
        }
        tracker.step()?;
    }
    let escaped = tracker.escaped_green();
    let used = tracker.steps();
    let run = tracker.into_run();
    let (lo, hi, status) = green_from_run(&run, data, escaped);
    let escape_index = (status == OrbitStatus::Escaped).then(|| run.escape_index.expect("escaped"));
    let record = OrbitRecord::new(point, Place::Infinite, used, status, escape_index);
    Ok((BoundedValue::from_interval(lo, hi), record))
}

/// `G_{φ,∞}(z)` for rational `φ` and `z`, refined until the radius is at most
/// `target_error` or the iteration cap is hit.
pub fn green_arch(phi: &PolyQ, z: &Rational, target_error: f64) -> Result<(BoundedValue, OrbitRecord)> {
    green_arch_with(phi, z, target_error, &IterationCaps::default())
}

pub fn green_arch_with(
    phi: &PolyQ,
    z: &Rational,
    target_error: f64,
    caps: &IterationCaps,
) -> Result<(BoundedValue, OrbitRecord)> {
    check_target(target_error)?;
    let data = ArchData::from_q(phi)?;
    let tracker = Tracker::exact(&data, phi, z, caps.exact_bits, true)?;
    finish(tracker, &data, OrbitPoint::Exact(z.clone()), target_error, caps.arch)
}

/// `G_{φ,∞}(z)` for complex coefficients and a complex point, both taken as
/// exact doubles.
pub fn green_arch_c(
    phi: &PolyC,
    z: Complex64,
    target_error: f64,
    caps: &IterationCaps,
) -> Result<(BoundedValue, OrbitRecord)> {
    check_target(target_error)?;
    let data = ArchData::from_c(phi)?;
    let tracker = Tracker::ball(&data, z)?;
    finish(tracker, &data, OrbitPoint::Approx(z), target_error, caps.arch)
}

fn check_target(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(crate::error::Error::Domain(format!("target error must be positive, got {t}")))
    }
}
