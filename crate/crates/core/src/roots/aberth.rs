use std::f64::consts::PI;

use num::complex::Complex64;
use num::Zero;
use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::poly::PolyC;

/// Default relative residual tolerance for returned roots.
pub const DEFAULT_ROOT_TOL: f64 = 1e-10;

const MAX_ITER: usize = 2000;

/// Roots with multiplicity and the worst relative residual
/// `|p(r)| / Σ|a_i||r|^i` over them.
#[derive(Clone, Debug, PartialEq)]
pub struct RootSet {
    roots: Vec<(Complex64, usize)>,
    residual: f64,
}

impl RootSet {
    pub(crate) fn new(roots: Vec<(Complex64, usize)>, residual: f64) -> Self {
        RootSet { roots, residual }
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Distinct roots with their multiplicities.
    pub fn with_multiplicity(&self) -> &[(Complex64, usize)] {
        &self.roots
    }

    /// Every root repeated by multiplicity.
    pub fn values(&self) -> Vec<Complex64> {
        self.roots.iter().flat_map(|(z, m)| std::iter::repeat_n(*z, *m)).collect()
    }

    pub fn count(&self) -> usize {
        self.roots.iter().map(|(_, m)| m).sum()
    }

    /// Index into [`values`](Self::values) of the root nearest to `z`.
    pub fn nearest(&self, z: Complex64) -> (usize, f64) {
        self.values().iter().enumerate().map(|(i, r)| (i, (r - z).norm())).fold((0, f64::INFINITY), |best, cur| {
            if cur.1 < best.1 {
                cur
            } else {
                best
            }
        })
    }
}

struct RootEntry<'a>(&'a Complex64, usize);

impl Serialize for RootEntry<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(3))?;
        m.serialize_entry("re", &self.0.re)?;
        m.serialize_entry("im", &self.0.im)?;
        m.serialize_entry("multiplicity", &self.1)?;
        m.end()
    }
}

struct RootList<'a>(&'a [(Complex64, usize)]);

impl Serialize for RootList<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.len()))?;
        for (z, m) in self.0 {
            seq.serialize_element(&RootEntry(z, *m))?;
        }
        seq.end()
    }
}

impl Serialize for RootSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(2))?;
        m.serialize_entry("roots", &RootList(&self.roots))?;
        m.serialize_entry("residual", &self.residual)?;
        m.end()
    }
}

pub(crate) fn relative_residual(p: &PolyC, z: Complex64) -> f64 {
    let scale = p.majorant(z.norm());
    if scale == 0.0 {
        0.0
    } else {
        p.evaluate(z).norm() / scale
    }
}

/// Fujiwara's bound on root moduli.
fn fujiwara_radius(p: &PolyC) -> f64 {
    let n = p.degree();
    let lead = p.leading().norm();
    let mut r: f64 = 0.0;
    for k in 1..=n {
        let mut a = p.coeff(n - k).norm() / lead;
        if k == n {
            a /= 2.0;
        }
        r = r.max(a.powf(1.0 / k as f64));
    }
    2.0 * r
}

/// All complex roots of `p` by Aberth–Ehrlich simultaneous iteration.
///
/// Seeds sit on the Fujiwara circle with a fixed angular offset, so the
/// output is deterministic. Errors if any root's relative residual stays
/// above `tol`.
pub fn all_roots(p: &PolyC, tol: f64) -> Result<RootSet> {
    if p.is_zero() || p.degree() == 0 {
        return Err(Error::Domain("root finding needs degree >= 1".into()));
    }
    if p.leading().norm() < f64::MIN_POSITIVE {
        return Err(Error::Domain("leading coefficient underflows".into()));
    }
    let zeros = p.coeffs().iter().take_while(|c| c.is_zero()).count();
    let q = PolyC::new(p.coeffs()[zeros..].to_vec());
    let mut roots: Vec<(Complex64, usize)> = Vec::new();
    if zeros > 0 {
        roots.push((Complex64::zero(), zeros));
    }
    let m = q.degree();
    let mut found: Vec<Complex64> = match m {
        0 => vec![],
        1 => vec![-q.coeff(0) / q.coeff(1)],
        _ => aberth(&q),
    };
    found.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut residual: f64 = 0.0;
    for z in &found {
        residual = residual.max(relative_residual(&q, *z));
    }
    if residual.is_nan() || residual > tol {
        return Err(Error::Numeric {
            message: format!("Aberth iteration on degree {m} did not reach tolerance {tol:e}"),
            residual,
        });
    }
    for z in found {
        match roots.last_mut() {
            Some((prev, k)) if *prev == z => *k += 1,
            _ => roots.push((z, 1)),
        }
    }
    Ok(RootSet::new(roots, residual))
}

fn aberth(q: &PolyC) -> Vec<Complex64> {
    let m = q.degree();
    let radius = fujiwara_radius(q).max(f64::MIN_POSITIVE);
    let mut z: Vec<Complex64> = (0..m)
        .map(|k| {
            let theta = 2.0 * PI * k as f64 / m as f64 + 0.4 + 0.01 * k as f64;
            Complex64::from_polar(radius, theta)
        })
        .collect();
    let mut done = vec![false; m];
    let eps = f64::EPSILON;
    for _ in 0..MAX_ITER {
        let mut all_done = true;
        for i in 0..m {
            if done[i] {
                continue;
            }
            let (pv, dpv) = q.evaluate_with_derivative(z[i]);
            if pv.norm() <= 4.0 * m as f64 * eps * q.majorant(z[i].norm()) {
                done[i] = true;
                continue;
            }
            all_done = false;
            let ratio = pv / dpv;
            let mut sum = Complex64::zero();
            for j in 0..m {
                if j != i {
                    let diff = z[i] - z[j];
                    if diff.norm() > 0.0 {
                        sum += diff.inv();
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - ratio * sum;
            let step = if denom.norm() > 0.0 && ratio.is_finite() { ratio / denom } else { ratio };
            if !step.is_finite() {
                // Derivative vanished: nudge off the critical point.
                let nudge = eps.sqrt() * (1.0 + z[i].norm());
                z[i] += Complex64::new(nudge, 0.0);
                continue;
            }
            z[i] -= step;
            if step.norm() <= eps * z[i].norm() {
                done[i] = true;
            }
        }
        if all_done {
            break;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_re(rs: &RootSet) -> Vec<f64> {
        let mut v: Vec<f64> = rs.values().iter().map(|z| z.re).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn roots_of_z2_minus_1() {
        let rs = all_roots(&PolyC::from_real(&[-1.0, 0.0, 1.0]), DEFAULT_ROOT_TOL).unwrap();
        let v = sorted_re(&rs);
        assert!((v[0] + 1.0).abs() < 1e-12 && (v[1] - 1.0).abs() < 1e-12);
        assert!(rs.values().iter().all(|z| z.im.abs() < 1e-12));
    }

    #[test]
    fn double_root_at_zero() {
        let rs = all_roots(&PolyC::from_real(&[0.0, 0.0, 0.5]), DEFAULT_ROOT_TOL).unwrap();
        assert_eq!(rs.with_multiplicity(), &[(Complex64::zero(), 2)]);
        assert_eq!(rs.count(), 2);
    }

    #[test]
    fn cubic_with_sqrt3_roots() {
        let rs = all_roots(&PolyC::from_real(&[0.0, -1.0, 0.0, 1.0 / 3.0]), DEFAULT_ROOT_TOL).unwrap();
        let v = sorted_re(&rs);
        let s3 = 3f64.sqrt();
        assert!((v[0] + s3).abs() < 1e-12 && v[1].abs() < 1e-12 && (v[2] - s3).abs() < 1e-12);
    }

    #[test]
    fn counts_match_degree_for_wide_spread() {
        // Roots of very different scales, as produced by large-|c| normal forms.
        let roots: Vec<Complex64> = [1e-4, -3.0, 2e4, 2e4 + 2.0, 7.5].iter().map(|&r| Complex64::new(r, 0.0)).collect();
        let p = PolyC::from_roots(&roots);
        let rs = all_roots(&p, DEFAULT_ROOT_TOL).unwrap();
        assert_eq!(rs.count(), 5);
        for r in &roots {
            let (_, dist) = rs.nearest(*r);
            assert!(dist < 1e-6 * (1.0 + r.norm()), "missed root {r}");
        }
    }

    #[test]
    fn serializes_with_multiplicity() {
        let rs = all_roots(&PolyC::from_real(&[0.0, 0.0, 0.5]), DEFAULT_ROOT_TOL).unwrap();
        let json = serde_json::to_string(&rs).unwrap();
        assert_eq!(json, r#"{"roots":[{"re":0.0,"im":0.0,"multiplicity":2}],"residual":0.0}"#);
    }

    #[test]
    fn rejects_constants() {
        assert!(all_roots(&PolyC::from_real(&[3.0]), DEFAULT_ROOT_TOL).is_err());
    }
}
