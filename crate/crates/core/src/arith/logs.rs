use std::collections::BTreeMap;
use std::fmt;

use num::{BigInt, One, Signed, Zero};

use super::factor::{factorize, valuation};
use super::{ln_abs, ln_bigint, Place, Rational};
use crate::error::{Error, Result};

/// An exact real number `Σ q_p · log p` with rational `q_p`.
///
/// Logarithms of distinct primes are linearly independent over ℚ, so two
/// combinations are equal as reals iff their coefficient maps agree. This is
/// what lets the product formula and the height identities be checked with
/// zero tolerance.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct LogCombination {
    terms: BTreeMap<u64, Rational>,
}

impl LogCombination {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `q · log p`.
    pub fn single(p: u64, q: Rational) -> Self {
        let mut c = Self::zero();
        c.add_term(p, q);
        c
    }

    /// `log |n|` for nonzero `n`; needs a factorisation of `n`.
    pub fn log_of_integer(n: &BigInt) -> Result<Self> {
        if n.is_zero() {
            return Err(Error::Domain("log of zero".into()));
        }
        let mut c = Self::zero();
        for (p, e) in factorize(&n.abs().to_biguint().expect("nonnegative"))? {
            c.add_term(p, Rational::from_integer(e.into()));
        }
        Ok(c)
    }

    pub fn add_term(&mut self, p: u64, q: Rational) {
        if q.is_zero() {
            return;
        }
        let slot = self.terms.entry(p).or_insert_with(Rational::zero);
        *slot += q;
        if slot.is_zero() {
            self.terms.remove(&p);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, p: u64) -> Rational {
        self.terms.get(&p).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, &Rational)> {
        self.terms.iter().map(|(p, q)| (*p, q))
    }

    pub fn scale(&self, k: &Rational) -> Self {
        let mut out = Self::zero();
        for (p, q) in &self.terms {
            out.add_term(*p, q * k);
        }
        out
    }

    pub fn to_f64(&self) -> f64 {
        self.terms.iter().map(|(p, q)| num::ToPrimitive::to_f64(q).unwrap_or(f64::NAN) * (*p as f64).ln()).sum()
    }
}

impl std::ops::Add<&LogCombination> for &LogCombination {
    type Output = LogCombination;
    fn add(self, rhs: &LogCombination) -> LogCombination {
        let mut out = self.clone();
        for (p, q) in &rhs.terms {
            out.add_term(*p, q.clone());
        }
        out
    }
}

impl std::ops::Sub<&LogCombination> for &LogCombination {
    type Output = LogCombination;
    fn sub(self, rhs: &LogCombination) -> LogCombination {
        let mut out = self.clone();
        for (p, q) in &rhs.terms {
            out.add_term(*p, -q.clone());
        }
        out
    }
}

impl fmt::Display for LogCombination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(p, q)| format!("({q})*log({p})")).collect();
        f.write_str(&parts.join(" + "))
    }
}

fn nonzero(x: &Rational) -> Result<()> {
    if x.is_zero() {
        Err(Error::Domain("absolute value of zero has no logarithm".into()))
    } else {
        Ok(())
    }
}

/// `log |x|_v` in floating point.
///
/// For finite `p` this is `-v_p(x) · log p` with the valuation exact.
pub fn log_abs(x: &Rational, v: Place) -> Result<f64> {
    nonzero(x)?;
    Ok(match v {
        Place::Infinite => ln_abs(x),
        Place::Prime(p) => -(valuation(x, p)? as f64) * (p as f64).ln(),
    })
}

/// `log |x|_v` as an exact combination of prime logarithms.
///
/// The archimedean case factors numerator and denominator.
pub fn log_abs_exact(x: &Rational, v: Place) -> Result<LogCombination> {
    nonzero(x)?;
    Ok(match v {
        Place::Infinite => &LogCombination::log_of_integer(x.numer())? - &LogCombination::log_of_integer(x.denom())?,
        Place::Prime(p) => LogCombination::single(p, Rational::from_integer((-valuation(x, p)?).into())),
    })
}

/// `λ⁺_v(x) = log max{1, |x|_v}`; zero for `x = 0`.
pub fn lambda_plus(x: &Rational, v: Place) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    match v {
        Place::Infinite => {
            if x.numer().abs() > *x.denom() {
                ln_abs(x)
            } else {
                0.0
            }
        }
        Place::Prime(p) => {
            let e = valuation(x, p).expect("nonzero");
            if e < 0 {
                (-e) as f64 * (p as f64).ln()
            } else {
                0.0
            }
        }
    }
}

pub fn lambda_plus_exact(x: &Rational, v: Place) -> Result<LogCombination> {
    if x.is_zero() {
        return Ok(LogCombination::zero());
    }
    match v {
        Place::Infinite => {
            if x.numer().abs() > *x.denom() {
                log_abs_exact(x, v)
            } else {
                Ok(LogCombination::zero())
            }
        }
        Place::Prime(p) => {
            let e = valuation(x, p)?;
            Ok(LogCombination::single(p, Rational::from_integer(e.min(0).abs().into())))
        }
    }
}

/// `h(x) = log max{|num|, den}`.
pub fn weil_height(x: &Rational) -> f64 {
    let n = x.numer().abs();
    let d = x.denom();
    if n.is_zero() {
        return 0.0;
    }
    ln_bigint(if n > *d { &n } else { d })
}

pub fn weil_height_exact(x: &Rational) -> Result<LogCombination> {
    let n = x.numer().abs();
    let d = x.denom().clone();
    if n.is_zero() || (n.is_one() && d.is_one()) {
        return Ok(LogCombination::zero());
    }
    LogCombination::log_of_integer(if n > d { &n } else { &d })
}

/// `Σ_{v ∈ places} n_v log|x|_v`, exactly.
///
/// Zero exactly when `places` covers ∞ and every prime in the support of
/// `x`; otherwise the nonzero remainder is the diagnostic.
pub fn product_formula_defect_exact(x: &Rational, places: &[Place]) -> Result<LogCombination> {
    nonzero(x)?;
    let mut total = LogCombination::zero();
    for v in places {
        let term = log_abs_exact(x, *v)?.scale(&Rational::from_integer(v.local_degree().into()));
        total = &total + &term;
    }
    Ok(total)
}

pub fn product_formula_defect(x: &Rational, places: &[Place]) -> Result<f64> {
    Ok(product_formula_defect_exact(x, places)?.to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn log_abs_examples() {
        assert!((log_abs(&q(3, 2), Place::Infinite).unwrap() - 1.5f64.ln()).abs() < 1e-15);
        assert!((log_abs(&q(1, 4), Place::Prime(2)).unwrap() - 4f64.ln()).abs() < 1e-15);
        assert_eq!(log_abs(&q(5, 1), Place::Prime(2)).unwrap(), 0.0);
        assert!(matches!(log_abs(&q(0, 1), Place::Infinite), Err(Error::Domain(_))));
    }

    #[test]
    fn lambda_plus_examples() {
        assert!((lambda_plus(&q(3, 2), Place::Infinite) - 1.5f64.ln()).abs() < 1e-15);
        assert_eq!(lambda_plus(&q(5, 1), Place::Prime(2)), 0.0);
        assert!((lambda_plus(&q(1, 4), Place::Prime(2)) - 4f64.ln()).abs() < 1e-15);
        assert_eq!(lambda_plus(&q(0, 1), Place::Prime(2)), 0.0);
        assert_eq!(lambda_plus(&q(1, 3), Place::Infinite), 0.0);
    }

    #[test]
    fn weil_height_examples() {
        assert!((weil_height(&q(3, 2)) - 3f64.ln()).abs() < 1e-15);
        assert_eq!(weil_height(&q(0, 1)), 0.0);
        assert!((weil_height(&q(1 << 17, 1)) - 17.0 * LN_2).abs() < 1e-12);
        assert_eq!(weil_height_exact(&q(1 << 17, 1)).unwrap(), LogCombination::single(2, q(17, 1)));
    }

    #[test]
    fn product_formula_examples() {
        let all = [Place::Infinite, Place::Prime(2), Place::Prime(3), Place::Prime(5)];
        assert!(product_formula_defect_exact(&q(6, 5), &all).unwrap().is_zero());
        assert!(product_formula_defect_exact(&q(1, 1), &[Place::Infinite]).unwrap().is_zero());
        let d = product_formula_defect_exact(&q(8, 1), &[Place::Infinite]).unwrap();
        assert_eq!(d, LogCombination::single(2, q(3, 1)));
        assert!((product_formula_defect(&q(8, 1), &[Place::Infinite]).unwrap() - 3.0 * LN_2).abs() < 1e-15);
    }
}
