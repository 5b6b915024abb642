use std::collections::BTreeSet;

use num::complex::Complex64;
use num::{BigInt, One, Signed, Zero};

use crate::arith::{lambda_plus, ln_abs, prime_support, valuation, Place, Rational};
use crate::error::Result;
use crate::poly::{PolyC, PolyQ};

/// `log C_{φ,v}` where
/// `C_{φ,v} = |2d|_v · max{1, |a_i/a_d|_v^{1/(d−i)}, |a_d|_v^{−1/(d−1)}}`.
pub fn log_escape_radius(phi: &PolyQ, v: Place) -> Result<f64> {
    let d = phi.require_dynamical()?;
    Ok(match v {
        Place::Infinite => {
            let lead = ln_abs(&phi.leading());
            let mut m = -lead / (d - 1) as f64;
            m = m.max(0.0);
            for (i, a) in phi.coeffs()[..d].iter().enumerate() {
                if !a.is_zero() {
                    m = m.max((ln_abs(a) - lead) / (d - i) as f64);
                }
            }
            ((2 * d) as f64).ln() + m
        }
        Place::Prime(p) => {
            let e = padic_log_escape_radius(phi, p)?;
            num::ToPrimitive::to_f64(&e).expect("finite") * (p as f64).ln()
        }
    })
}

/// The exponent `e` with `C_{φ,p} = p^e`, exactly.
pub fn padic_log_escape_radius(phi: &PolyQ, p: u64) -> Result<Rational> {
    let d = phi.require_dynamical()?;
    let vd = valuation(&phi.leading(), p)?;
    let two_d = Rational::from_integer(BigInt::from(2 * d));
    let mut m = Rational::new(vd.into(), ((d - 1) as i64).into()).max(Rational::zero());
    for (i, a) in phi.coeffs()[..d].iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        let e = Rational::new((vd - valuation(a, p)?).into(), ((d - i) as i64).into());
        m = m.max(e);
    }
    Ok(m - Rational::from_integer(valuation(&two_d, p)?.into()))
}

pub fn escape_radius(phi: &PolyQ, v: Place) -> Result<f64> {
    Ok(log_escape_radius(phi, v)?.exp())
}

/// Archimedean `log C_φ` for complex coefficients.
pub fn log_escape_radius_c(phi: &PolyC) -> f64 {
    let d = phi.degree();
    assert!(d >= 2, "dynamics needs degree >= 2");
    let lead = phi.leading().norm().ln();
    let mut m = (-lead / (d - 1) as f64).max(0.0);
    for (i, a) in phi.coeffs()[..d].iter().enumerate() {
        if a.norm() > 0.0 {
            m = m.max((a.norm().ln() - lead) / (d - i) as f64);
        }
    }
    ((2 * d) as f64).ln() + m
}

pub fn escape_radius_c(phi: &PolyC) -> f64 {
    log_escape_radius_c(phi).exp()
}

/// Whether `|z|_v > C_{φ,v}`, decided exactly.
pub fn in_escape_region(phi: &PolyQ, z: &Rational, v: Place) -> Result<bool> {
    let d = phi.require_dynamical()?;
    if z.is_zero() {
        return Ok(false);
    }
    match v {
        Place::Infinite => {
            let u = z.abs() / Rational::from_integer(BigInt::from(2 * d));
            if u <= Rational::one() {
                return Ok(false);
            }
            let lead = phi.leading().abs();
            if num::pow(u.clone(), d - 1) * &lead <= Rational::one() {
                return Ok(false);
            }
            for (i, a) in phi.coeffs()[..d].iter().enumerate() {
                if !a.is_zero() && num::pow(u.clone(), d - i) * &lead <= a.abs() {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Place::Prime(p) => {
            let e = padic_log_escape_radius(phi, p)?;
            Ok(Rational::from_integer((-valuation(z, p)?).into()) > e)
        }
    }
}

pub fn in_escape_region_c(phi: &PolyC, z: Complex64) -> bool {
    z.norm() > 0.0 && z.norm().ln() > log_escape_radius_c(phi)
}

/// Primes `p` with `|a_d|_p ≠ 1` or `|a_i|_p > 1` for some `i < d`.
pub fn bad_places(phi: &PolyQ) -> Result<BTreeSet<Place>> {
    let d = phi.require_dynamical()?;
    let mut primes = BTreeSet::new();
    for a in &phi.coeffs()[..d] {
        if !a.is_zero() {
            primes.extend(prime_support(a.denom())?);
        }
    }
    let lead = phi.leading();
    primes.extend(prime_support(lead.numer())?);
    primes.extend(prime_support(lead.denom())?);
    Ok(primes.into_iter().map(Place::Prime).collect())
}

/// `λ_v(φ) = max_i log max{1, |a_i|_v}`.
pub fn coefficient_height_local(phi: &PolyQ, v: Place) -> f64 {
    phi.coeffs().iter().map(|a| lambda_plus(a, v)).fold(0.0, f64::max)
}

/// `h(φ) = Σ_v n_v λ_v(φ)`; only ∞ and primes in coefficient denominators
/// contribute.
pub fn coefficient_height_global(phi: &PolyQ) -> Result<f64> {
    let mut primes = BTreeSet::new();
    for a in phi.coeffs() {
        primes.extend(prime_support(a.denom())?);
    }
    let mut h = coefficient_height_local(phi, Place::Infinite);
    for p in primes {
        let v = Place::Prime(p);
        h += v.local_degree() as f64 * coefficient_height_local(phi, v);
    }
    Ok(h)
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
    fn escape_radius_examples() {
        let sq = PolyQ::from_i64(&[0, 0, 1]);
        assert!((escape_radius(&sq, Place::Infinite).unwrap() - 4.0).abs() < 1e-12);
        assert!((escape_radius(&half_square(), Place::Infinite).unwrap() - 8.0).abs() < 1e-12);
        assert!((escape_radius(&half_square(), Place::Prime(2)).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(padic_log_escape_radius(&half_square(), 2).unwrap(), q(-2, 1));
    }

    #[test]
    fn escape_region_examples() {
        let sq = PolyQ::from_i64(&[0, 0, 1]);
        assert!(in_escape_region(&sq, &q(5, 1), Place::Infinite).unwrap());
        assert!(!in_escape_region(&sq, &q(4, 1), Place::Infinite).unwrap());
        assert!(!in_escape_region(&half_square(), &q(4, 1), Place::Prime(2)).unwrap());
        assert!(in_escape_region(&half_square(), &q(1, 2), Place::Prime(2)).unwrap());
        assert!(!in_escape_region(&half_square(), &q(8, 1), Place::Infinite).unwrap());
        assert!(in_escape_region(&half_square(), &q(-17, 2), Place::Infinite).unwrap());
    }

    #[test]
    fn bad_places_examples() {
        assert!(bad_places(&PolyQ::from_i64(&[1, 0, 1])).unwrap().is_empty());
        assert_eq!(bad_places(&half_square()).unwrap(), BTreeSet::from([Place::Prime(2)]));
        let p = PolyQ::new(vec![q(1, 5), q(0, 1), q(3, 1)]);
        assert_eq!(bad_places(&p).unwrap(), BTreeSet::from([Place::Prime(3), Place::Prime(5)]));
    }

    #[test]
    fn coefficient_height_examples() {
        assert!((coefficient_height_local(&half_square(), Place::Prime(2)) - LN_2).abs() < 1e-15);
        let p = PolyQ::from_i64(&[8, 0, 1]);
        assert!((coefficient_height_local(&p, Place::Infinite) - 8f64.ln()).abs() < 1e-15);
        assert_eq!(coefficient_height_local(&PolyQ::from_i64(&[1, 0, 1]), Place::Prime(3)), 0.0);
        assert_eq!(coefficient_height_global(&PolyQ::from_i64(&[0, 0, 1])).unwrap(), 0.0);
        assert!((coefficient_height_global(&half_square()).unwrap() - LN_2).abs() < 1e-15);
        let p = PolyQ::new(vec![q(0, 1), q(-3, 1), q(1, 2)]);
        let want = 3f64.ln() + LN_2;
        assert!((coefficient_height_global(&p).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn log_radius_at_least_log_two_d() {
        for coeffs in [[0, 0, 1], [5, -3, 7], [1, 1, -1]] {
            let p = PolyQ::from_i64(&coeffs);
            assert!(log_escape_radius(&p, Place::Infinite).unwrap() >= 4f64.ln());
        }
    }
}
