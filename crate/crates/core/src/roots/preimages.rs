use num::complex::Complex64;
use serde::Serialize;

use super::aberth::{all_roots, relative_residual, RootSet};
use crate::error::{Error, Result};
use crate::poly::{in_escape_region_c, PolyC, PolyQ, DEFAULT_DEGREE_CAP};

/// Log-distances below this are reported as this value.
pub const PROXIMITY_FLOOR: f64 = -80.0;

/// Roots of `φ(z) − z`.
pub fn fixed_points(phi: &PolyC, tol: f64) -> Result<RootSet> {
    if phi.degree() < 2 {
        return Err(Error::Domain("fixed points need degree >= 2".into()));
    }
    let shifted = phi.add(&PolyC::from_real(&[0.0, -1.0]));
    all_roots(&shifted, tol)
}

pub fn fixed_points_q(phi: &PolyQ, tol: f64) -> Result<RootSet> {
    phi.require_dynamical()?;
    fixed_points(&phi.to_polyc(), tol)
}

/// Roots of `φⁿ(z) − z` from the expanded iterate.
pub fn periodic_points(phi: &PolyC, n: usize, tol: f64) -> Result<RootSet> {
    if phi.degree() < 2 {
        return Err(Error::Domain("periodic points need degree >= 2".into()));
    }
    let mut iter = phi.clone();
    for _ in 1..n {
        iter = phi.compose(&iter);
    }
    fixed_points(&iter, tol)
}

/// `φ^{−k}(target)`: all `d^k` solutions of `φ^k(z) = target`.
///
/// Solved one level at a time (`d^{k−1}` degree-`d` solves) instead of
/// expanding `φ^k`, whose coefficients lose all precision once the
/// parameters are large. The reported residual is the worst per-level
/// relative residual.
pub fn preimages(phi: &PolyC, target: Complex64, k: usize, tol: f64) -> Result<RootSet> {
    let d = phi.degree();
    if d < 1 || k == 0 {
        return Err(Error::Domain("preimages need degree >= 1 and k >= 1".into()));
    }
    if (d as f64).powi(k as i32) > DEFAULT_DEGREE_CAP as f64 {
        return Err(Error::Resource(format!("{d}^{k} pre-images exceed degree cap {DEFAULT_DEGREE_CAP}")));
    }
    let mut level = vec![target];
    let mut residual: f64 = 0.0;
    for _ in 0..k {
        let mut next = Vec::with_capacity(level.len() * d);
        for w in &level {
            let shifted = phi.sub_constant(*w);
            let rs = all_roots(&shifted, tol)?;
            for z in rs.values() {
                residual = residual.max(relative_residual(&shifted, z));
                next.push(z);
            }
        }
        level = next;
    }
    level.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut roots: Vec<(Complex64, usize)> = Vec::new();
    for z in level {
        match roots.last_mut() {
            Some((prev, m)) if *prev == z => *m += 1,
            _ => roots.push((z, 1)),
        }
    }
    Ok(RootSet::new(roots, residual))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Proximity {
    /// `max_{y ∈ f^{−3}(α)} min_{β ∈ f^{−3}(0)} log|y − β|`, floored.
    pub value: f64,
    /// Set when the precondition `α ∉ B(∞)` fails; the value is still
    /// computed.
    pub alpha_escapes: bool,
}

/// The worst-case distance (in log scale) from a third pre-image of `α` to
/// the nearest third pre-image of 0.
pub fn proximity_statistic(f: &PolyC, alpha: Complex64, tol: f64) -> Result<Proximity> {
    if f.degree() < 2 {
        return Err(Error::Domain("proximity statistic needs degree >= 2".into()));
    }
    let ys = preimages(f, alpha, 3, tol)?.values();
    let betas = preimages(f, Complex64::new(0.0, 0.0), 3, tol)?.values();
    let mut worst = f64::NEG_INFINITY;
    for y in &ys {
        let nearest = betas.iter().map(|b| (y - b).norm()).fold(f64::INFINITY, f64::min);
        let l = if nearest > 0.0 { nearest.ln() } else { f64::NEG_INFINITY };
        worst = worst.max(l.max(PROXIMITY_FLOOR));
    }
    Ok(Proximity { value: worst, alpha_escapes: in_escape_region_c(f, alpha) })
}
