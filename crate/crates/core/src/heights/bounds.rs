//! One-step constants relating `G_{φ,v}` to `λ⁺_v`.
//!
//! For every `w`, `λ⁺_v(w) − L_v ≤ G_{φ,v}(w) ≤ λ⁺_v(w) + U_v` with
//!
//! * `U_v = log max{1, m_v·max_i |a_i|_v} / (d−1)`, `m_∞ = d+1`, `m_p = 1`,
//!   from `λ⁺(φ(w)) ≤ d·λ⁺(w) + log max{1, m_v max|a_i|}` summed over the
//!   orbit;
//! * `L_∞ = max{0, log⁺C_∞, log 2 − log|a_d|/(d−1)}`: inside the escape disk
//!   `G ≥ 0 ≥ λ⁺ − log⁺C`, outside it the escape estimate gives
//!   `G ≥ log|w| + log|a_d|/(d−1) − log 2`;
//! * `L_p = log R_p` with `R_p = max{1, |a_i/a_d|^{1/(d−i)}, |a_d|^{−1/(d−1)}}`,
//!   the radius past which the leading term strictly dominates so that
//!   `G = log|w| + log|a_d|/(d−1)` exactly.

use num::{BigInt, Signed, ToPrimitive, Zero};

use crate::arith::{ln_abs, to_complex, valuation, Rational};
use crate::error::{Error, Result};
use crate::heights::bounded::up;
use crate::poly::{log_escape_radius, log_escape_radius_c, PolyC, PolyQ};

const EPS: f64 = f64::EPSILON;

/// Floating-point coefficient data at ∞, with rigorous error bars.
#[derive(Clone, Debug)]
pub(crate) struct ArchData {
    pub d: usize,
    pub coeffs: Vec<num::complex::Complex64>,
    pub coeff_err: Vec<f64>,
    pub la_lo: f64,
    pub la_hi: f64,
    /// Upper bound on `log C_{φ,∞}`.
    pub log_c_hi: f64,
    /// Upper bounds on `|a_i/a_d|`, `i < d`.
    pub ratios: Vec<f64>,
    pub upper: f64,
    pub lower: f64,
}

fn ln_slack(x: f64) -> f64 {
    16.0 * EPS * (x.abs() + 1.0)
}

impl ArchData {
    pub fn from_q(phi: &PolyQ) -> Result<Self> {
        let d = phi.require_dynamical()?;
        let mut coeffs = Vec::with_capacity(d + 1);
        let mut coeff_err = Vec::with_capacity(d + 1);
        for a in phi.coeffs() {
            let c = to_complex(a);
            if !c.re.is_finite() || (!a.is_zero() && c.re == 0.0) {
                return Err(Error::Resource("coefficient outside double range".into()));
            }
            coeffs.push(c);
            coeff_err.push(2.0 * EPS * c.norm());
        }
        let lead = phi.leading();
        let la = ln_abs(&lead);
        let ratios = phi.coeffs()[..d]
            .iter()
            .map(|a| (a / &lead).abs().to_f64().unwrap_or(f64::INFINITY) * (1.0 + 8.0 * EPS))
            .collect();
        let log_c = log_escape_radius(phi, crate::arith::Place::Infinite)?;
        let max_abs = phi.coeffs().iter().map(|a| a.abs()).max().expect("nonempty");
        let log_max = ln_abs(&max_abs);
        Ok(Self::finish(d, coeffs, coeff_err, la, log_c, log_max, ratios))
    }

    pub fn from_c(phi: &PolyC) -> Result<Self> {
        let d = phi.degree();
        if d < 2 || phi.is_zero() {
            return Err(Error::Domain(format!("degree {d} map has no escape-rate theory")));
        }
        let lead = phi.leading();
        let la = lead.norm().ln();
        let ratios = phi.coeffs()[..d].iter().map(|a| a.norm() / lead.norm() * (1.0 + 8.0 * EPS)).collect();
        let log_max = phi.coeffs().iter().map(|a| a.norm()).fold(0.0, f64::max).ln();
        let coeffs = phi.coeffs().to_vec();
        let coeff_err = vec![0.0; d + 1];
        Ok(Self::finish(d, coeffs, coeff_err, la, log_escape_radius_c(phi), log_max, ratios))
    }

    fn finish(
        d: usize,
        coeffs: Vec<num::complex::Complex64>,
        coeff_err: Vec<f64>,
        la: f64,
        log_c: f64,
        log_max: f64,
        ratios: Vec<f64>,
    ) -> Self {
        let dm1 = (d - 1) as f64;
        let upper = up(up(((d + 1) as f64).ln() + log_max + ln_slack(log_max)).max(0.0) / dm1);
        let log_c_hi = up(log_c + 1e-12 * (1.0 + log_c.abs()));
        let la_lo = la - ln_slack(la);
        let la_hi = la + ln_slack(la);
        let lower = up(log_c_hi.max(std::f64::consts::LN_2 - la_lo / dm1).max(0.0));
        Self { d, coeffs, coeff_err, la_lo, la_hi, log_c_hi, ratios, upper, lower }
    }
}

/// Exact valuation data at a prime, logs in units of `log p`.
#[derive(Clone, Debug)]
pub(crate) struct PadicData {
    pub p: u64,
    pub d: usize,
    /// `v_p(a_i)`, `None` for zero coefficients.
    pub vals: Vec<Option<i64>>,
    pub vd: i64,
    /// `log_p R_p ≥ 0`.
    pub log_r: Rational,
    pub upper: Rational,
}

impl PadicData {
    pub fn new(phi: &PolyQ, p: u64) -> Result<Self> {
        let d = phi.require_dynamical()?;
        let vals = phi
            .coeffs()
            .iter()
            .map(|a| if a.is_zero() { Ok(None) } else { valuation(a, p).map(Some) })
            .collect::<Result<Vec<_>>>()?;
        let vd = vals[d].expect("leading coefficient is nonzero");
        let frac = |n: i64, k: usize| Rational::new(BigInt::from(n), BigInt::from(k));
        let mut log_r = frac(vd, d - 1).max(Rational::zero());
        for (i, v) in vals[..d].iter().enumerate() {
            if let Some(v) = v {
                log_r = log_r.max(frac(vd - v, d - i));
            }
        }
        let min_v = vals.iter().flatten().copied().min().expect("nonzero polynomial");
        let upper = frac((-min_v).max(0), d - 1);
        Ok(Self { p, d, vals, vd, log_r, upper })
    }

    pub fn lower(&self) -> &Rational {
        &self.log_r
    }

    /// Whether some disk `|z|_p ≤ p^e` with `−v ≤ e ≤ top` maps into itself.
    /// An iterate of valuation `≥ v` then has a bounded orbit that never
    /// leaves `|z|_p ≤ p^top`.
    pub fn invariant_disk(&self, v: i64, top: &Rational) -> bool {
        let top = top.floor().to_integer().to_i64().unwrap_or(i64::MAX);
        (-v..=top).any(|e| self.vals.iter().enumerate().all(|(i, va)| va.is_none_or(|va| -va + (i as i64) * e <= e)))
    }
}

/// `B(φ) = Σ_v max{U_v, L_v}` over ∞ and the bad primes.
///
/// Summing the per-place bounds gives `|ĥ_φ(x) − h(x)| ≤ B(φ)` for every
/// rational `x`, because `G_v = λ⁺_v` at the good primes. Applied to `φⁿ(x)`
/// this is the naive-method radius `d^{−n}B(φ)`.
pub fn height_defect_bound(phi: &PolyQ) -> Result<f64> {
    let arch = ArchData::from_q(phi)?;
    let mut b = arch.upper.max(arch.lower);
    for v in crate::poly::bad_places(phi)? {
        let p = v.as_prime().expect("finite place");
        let data = PadicData::new(phi, p)?;
        let k = data.upper.clone().max(data.log_r.clone());
        b = up(b + up(k.to_f64().expect("small") * (p as f64).ln()));
    }
    Ok(b)
}
