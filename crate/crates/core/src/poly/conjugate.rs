use std::f64::consts::PI;

use num::complex::Complex64;
use num::{BigInt, Integer, One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{factorize, format_rational, to_complex, Rational};
use crate::error::{Error, Result};
use crate::poly::{NormalForm, PolyC, PolyQ};
use crate::roots::{all_roots, fixed_points};

/// Numeric affine map `z ↦ scale·z + shift`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AffineMap {
    pub scale: Complex64,
    pub shift: Complex64,
}

impl AffineMap {
    pub fn apply(&self, z: Complex64) -> Complex64 {
        self.scale * z + self.shift
    }

    pub fn invert(&self, w: Complex64) -> Complex64 {
        (w - self.shift) / self.scale
    }
}

/// Exact affine map over ℚ.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactAffine {
    pub scale: Rational,
    pub shift: Rational,
}

impl Serialize for ExactAffine {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(2))?;
        m.serialize_entry("scale", &format_rational(&self.scale))?;
        m.serialize_entry("shift", &format_rational(&self.shift))?;
        m.end()
    }
}

/// Result of conjugating `φ` into normal form: `f_c = μ⁻¹ ∘ φ ∘ μ`.
#[derive(Clone, Debug)]
pub struct NormalFormConjugation {
    pub normal_form: NormalForm,
    pub map: AffineMap,
    /// `f_c ∈ ℚ[z]` when the fixed point and the scale are rational.
    pub exact_poly: Option<PolyQ>,
    /// Exact parameters, when additionally every critical point is rational.
    pub exact: Option<(NormalForm, ExactAffine)>,
}

/// Conjugates `φ` to a normal form with
/// `μ(z) = (a_d·d)^{−1/(d−1)} z + γ`, `γ` a fixed point of `φ`.
///
/// Prefers an exact conjugation: the smallest rational fixed point together
/// with a rational `(d−1)`-th root of `a_d·d` (the real root when the radicand
/// is negative and `d−1` is odd). Otherwise uses the fixed point of smallest
/// modulus (ties: smallest argument in `[0, 2π)`) and the principal root.
pub fn conjugate_to_normal_form(phi: &PolyQ, tol: f64) -> Result<NormalFormConjugation> {
    let d = phi.require_dynamical()?;
    let lead_d = phi.leading() * Rational::from_integer(d.into());
    let fixed_poly = phi - &PolyQ::identity();

    let exact_gamma = rational_roots(&fixed_poly, tol)?.into_iter().min_by(|a, b| a.abs().cmp(&b.abs()).then(b.cmp(a)));
    let exact_root = rational_nth_root(&lead_d, (d - 1) as u32);

    if let (Some(gamma), Some(root)) = (exact_gamma, exact_root) {
        let scale = root.recip();
        let g = phi.affine_conjugate(&scale, &gamma)?;
        debug_assert!(g.evaluate(&Rational::zero()).is_zero());
        debug_assert!(g.derivative().leading().is_one());
        let map = AffineMap { scale: to_complex(&scale), shift: to_complex(&gamma) };
        let crit = rational_roots(&g.derivative(), tol)?;
        let (normal_form, exact) = if crit.len() == d - 1 {
            let nf = NormalForm::exact(crit)?;
            let numeric = NormalForm::numeric(nf.critical_points())?;
            (numeric, Some((nf, ExactAffine { scale, shift: gamma })))
        } else {
            let c = sorted(roots_with_multiplicity(&g.derivative(), tol)?);
            (NormalForm::numeric(c)?, None)
        };
        return Ok(NormalFormConjugation { normal_form, map, exact_poly: Some(g), exact });
    }

    let phic = phi.to_polyc();
    let fps = fixed_points(&phic, tol)?.values();
    let gamma = smallest_fixed_point(&fps);
    let t = to_complex(&lead_d);
    let scale = (-(t.ln()) / (d - 1) as f64).exp();
    let map = AffineMap { scale, shift: gamma };
    let g = phic.compose(&PolyC::new(vec![gamma, scale])).sub_constant(gamma).scale(scale.inv());
    let gp = g.derivative();
    let monic_err = (gp.leading() - 1.0).norm();
    let zero_err = g.coeff(0).norm() / g.majorant(1.0).max(1.0);
    if monic_err > 1e-8 || zero_err > 1e-8 {
        return Err(Error::Numeric {
            message: "conjugate is not in normal form".into(),
            residual: monic_err.max(zero_err),
        });
    }
    let c = sorted(roots_with_multiplicity(&phi.derivative(), tol)?.into_iter().map(|w| map.invert(w)).collect());
    Ok(NormalFormConjugation { normal_form: NormalForm::numeric(c)?, map, exact_poly: None, exact: None })
}

/// Complex roots of `p` with multiplicity, found on the square-free parts of
/// `p` so that repeated roots are located to full precision.
fn roots_with_multiplicity(p: &PolyQ, tol: f64) -> Result<Vec<Complex64>> {
    let mut out = Vec::with_capacity(p.degree());
    for (factor, mult) in square_free_decomposition(p) {
        for z in all_roots(&factor.to_polyc(), tol)?.values() {
            out.extend(std::iter::repeat_n(z, mult));
        }
    }
    Ok(out)
}

/// Yun's algorithm: monic square-free `a_i` of positive degree with
/// `p = lc(p)·∏ a_i^i`.
fn square_free_decomposition(p: &PolyQ) -> Vec<(PolyQ, usize)> {
    let mut out = Vec::new();
    if p.degree() == 0 {
        return out;
    }
    let dp = p.derivative();
    let a0 = gcd(p, &dp);
    let mut b = div_rem(p, &a0).0;
    let c = div_rem(&dp, &a0).0;
    let mut d = &c - &b.derivative();
    let mut i = 1;
    while b.degree() > 0 {
        let a = gcd(&b, &d);
        let (next_b, _) = div_rem(&b, &a);
        let (c, _) = div_rem(&d, &a);
        d = &c - &next_b.derivative();
        if a.degree() > 0 {
            out.push((a, i));
        }
        b = next_b;
        i += 1;
    }
    out
}

fn monic(p: &PolyQ) -> PolyQ {
    p.scale(&p.leading().recip())
}

/// Monic greatest common divisor; `b` may be zero.
fn gcd(a: &PolyQ, b: &PolyQ) -> PolyQ {
    let (mut x, mut y) = (a.clone(), b.clone());
    while !y.is_zero() {
        let r = div_rem(&x, &y).1;
        x = y;
        y = if r.is_zero() { r } else { monic(&r) };
    }
    monic(&x)
}

/// Quotient and remainder over ℚ; `b` must be nonzero.
fn div_rem(a: &PolyQ, b: &PolyQ) -> (PolyQ, PolyQ) {
    let db = b.degree();
    let inv = b.leading().recip();
    let mut r = a.coeffs().to_vec();
    if r.len() <= db {
        return (PolyQ::zero(), a.clone());
    }
    let mut q = vec![Rational::zero(); r.len() - db];
    for k in (0..q.len()).rev() {
        let t = &r[k + db] * &inv;
        if !t.is_zero() {
            for (j, bc) in b.coeffs().iter().enumerate() {
                r[k + j] -= &t * bc;
            }
        }
        q[k] = t;
    }
    r.truncate(db);
    (PolyQ::new(q), PolyQ::new(r))
}

fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v
}

fn positive_arg(z: Complex64) -> f64 {
    let a = z.arg();
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

fn smallest_fixed_point(fps: &[Complex64]) -> Complex64 {
    let mut best = fps[0];
    for &z in &fps[1..] {
        let (nz, nb) = (z.norm(), best.norm());
        let tie = (nz - nb).abs() <= 1e-9 * (1.0 + nb);
        if (!tie && nz < nb) || (tie && positive_arg(z) < positive_arg(best)) {
            best = z;
        }
    }
    best
}

/// Exact `r` with `r^n = t`, the real root for odd `n` and negative `t`.
fn rational_nth_root(t: &Rational, n: u32) -> Option<Rational> {
    if n == 1 {
        return Some(t.clone());
    }
    if t.is_negative() && n.is_multiple_of(2) {
        return None;
    }
    let root = |x: &BigInt| -> Option<BigInt> {
        let r = x.abs().nth_root(n);
        (num::pow(r.clone(), n as usize) == x.abs()).then_some(r)
    };
    let r = Rational::new(root(t.numer())?, root(t.denom())?);
    Some(if t.is_negative() { -r } else { r })
}

/// All rational roots of `p`, with multiplicity.
///
/// Candidates come from the rational root theorem: denominators run over the
/// divisors of the cleared leading coefficient, numerators are located from
/// floating-point roots and confirmed by exact evaluation and deflation.
pub(crate) fn rational_roots(p: &PolyQ, tol: f64) -> Result<Vec<Rational>> {
    let mut cur = p.clone();
    let mut out = Vec::new();
    // Exact zeros first.
    while !cur.is_zero() && cur.coeff(0).is_zero() && cur.degree() >= 1 {
        out.push(Rational::zero());
        cur = PolyQ::new(cur.coeffs()[1..].to_vec());
    }
    if cur.degree() == 0 {
        return Ok(out);
    }
    let lcm = cur.coeffs().iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let lead = (cur.leading() * Rational::from_integer(lcm)).to_integer().abs();
    let Some(dens) = divisors(&lead)? else {
        return Ok(out);
    };
    loop {
        if cur.degree() == 0 {
            break;
        }
        let approx = all_roots(&cur.to_polyc(), tol.max(1e-12)).map(|r| r.values()).unwrap_or_default();
        let mut hit = None;
        'search: for z in approx {
            if z.im.abs() > 1e-6 * (1.0 + z.re.abs()) {
                continue;
            }
            for b in &dens {
                let Some(bf) = b.to_f64() else { continue };
                let centre = (z.re * bf).round();
                if !centre.is_finite() || centre.abs() > 1e15 {
                    continue;
                }
                for off in [-1.0, 0.0, 1.0] {
                    let cand = Rational::new(BigInt::from((centre + off) as i64), b.clone());
                    if cur.evaluate(&cand).is_zero() {
                        hit = Some(cand);
                        break 'search;
                    }
                }
            }
        }
        match hit {
            Some(r) => {
                cur = deflate(&cur, &r);
                out.push(r);
            }
            None => break,
        }
    }
    Ok(out)
}

/// Exact quotient of `p` by `(z − r)`; `r` must be a root.
fn deflate(p: &PolyQ, r: &Rational) -> PolyQ {
    let n = p.degree();
    let mut q = vec![Rational::zero(); n];
    let mut carry = Rational::zero();
    for i in (1..=n).rev() {
        carry = carry * r + p.coeff(i);
        q[i - 1] = carry.clone();
    }
    PolyQ::new(q)
}

/// Positive divisors, or `None` if there are too many to enumerate.
fn divisors(n: &BigInt) -> Result<Option<Vec<BigInt>>> {
    let f = factorize(&n.to_biguint().expect("positive"))?;
    let count: u64 = f.values().map(|&e| e as u64 + 1).product();
    if count > 4096 {
        return Ok(None);
    }
    let mut divs = vec![BigInt::one()];
    for (p, e) in f {
        let mut next = Vec::with_capacity(divs.len() * (e as usize + 1));
        for dv in &divs {
            let mut m = dv.clone();
            for _ in 0..=e {
                next.push(m.clone());
                m *= p;
            }
        }
        divs = next;
    }
    divs.sort();
    Ok(Some(divs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roots::DEFAULT_ROOT_TOL;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn two_z_squared_is_exact() {
        let phi = PolyQ::from_i64(&[0, 0, 2]);
        let r = conjugate_to_normal_form(&phi, DEFAULT_ROOT_TOL).unwrap();
        let (nf, mu) = r.exact.unwrap();
        assert_eq!(nf, NormalForm::from_i64(&[0]));
        assert_eq!(mu, ExactAffine { scale: q(1, 4), shift: q(0, 1) });
        assert_eq!(r.exact_poly.unwrap(), PolyQ::new(vec![q(0, 1), q(0, 1), q(1, 2)]));
    }

    #[test]
    fn normal_form_input_stays_put() {
        let phi = NormalForm::from_i64(&[1]).to_poly().unwrap();
        let r = conjugate_to_normal_form(&phi, DEFAULT_ROOT_TOL).unwrap();
        let (nf, mu) = r.exact.unwrap();
        assert_eq!(nf, NormalForm::from_i64(&[1]));
        assert_eq!(mu.scale, q(1, 1));
        assert_eq!(mu.shift, q(0, 1));
    }

    #[test]
    fn z_squared_plus_z() {
        // γ = 0, μ(z) = z/2, conjugate z²/2 + z with critical point −1.
        let phi = PolyQ::from_i64(&[0, 1, 1]);
        let r = conjugate_to_normal_form(&phi, DEFAULT_ROOT_TOL).unwrap();
        let (nf, mu) = r.exact.unwrap();
        assert_eq!(mu.scale, q(1, 2));
        assert_eq!(nf, NormalForm::from_i64(&[-1]));
        let oracle = phi.affine_conjugate(&q(1, 2), &q(0, 1)).unwrap();
        assert_eq!(oracle, nf.to_poly().unwrap());
    }

    #[test]
    fn numeric_branch_for_irrational_fixed_points() {
        // z² − 2z − 1 has no rational fixed points: z² − 3z − 1 = 0.
        let phi = PolyQ::from_i64(&[-1, -2, 1]);
        let r = conjugate_to_normal_form(&phi, DEFAULT_ROOT_TOL).unwrap();
        assert!(r.exact.is_none() && r.exact_poly.is_none());
        let f = r.normal_form.to_polyc();
        let phic = phi.to_polyc();
        for k in 0..10 {
            let z = Complex64::new(0.3 * k as f64 - 1.0, 0.7 - 0.1 * k as f64);
            let lhs = r.map.invert(phic.evaluate(r.map.apply(z)));
            let err = (lhs - f.evaluate(z)).norm();
            assert!(err < 1e-8 * (1.0 + z.norm().powi(2)), "err {err}");
        }
    }

    #[test]
    fn rational_root_search_with_multiplicity() {
        let p = PolyQ::from_roots(&[q(2, 3), q(2, 3), q(-5, 1), q(0, 1)]);
        let mut r = rational_roots(&p, DEFAULT_ROOT_TOL).unwrap();
        r.sort();
        assert_eq!(r, vec![q(-5, 1), q(0, 1), q(2, 3), q(2, 3)]);
        assert!(rational_roots(&PolyQ::from_i64(&[-2, 0, 1]), DEFAULT_ROOT_TOL).unwrap().is_empty());
    }

    #[test]
    fn square_free_parts_carry_multiplicity() {
        let p = &PolyQ::from_i64(&[0, 0, 3]) * &PolyQ::from_roots(&[q(1, 2), q(1, 2), q(1, 2)]);
        let parts = square_free_decomposition(&p);
        assert_eq!(parts, vec![(PolyQ::identity(), 2), (PolyQ::from_roots(&[q(1, 2)]), 3)]);
    }

    #[test]
    fn double_critical_point_is_accurate() {
        let phi = PolyQ::from_i64(&[-1, 0, 0, -1]);
        let r = conjugate_to_normal_form(&phi, DEFAULT_ROOT_TOL).unwrap();
        let c = r.normal_form.critical_points();
        assert_eq!(c.len(), 2);
        assert!((c[0] - c[1]).norm() < 1e-14, "{c:?}");
        let w = r.map.invert(Complex64::new(0.0, 0.0));
        assert!((c[0] - w).norm() < 1e-14);
    }

    #[test]
    fn nth_roots() {
        assert_eq!(rational_nth_root(&q(8, 27), 3), Some(q(2, 3)));
        assert_eq!(rational_nth_root(&q(-8, 1), 3), Some(q(-2, 1)));
        assert_eq!(rational_nth_root(&q(-4, 1), 2), None);
        assert_eq!(rational_nth_root(&q(2, 1), 2), None);
    }
}
