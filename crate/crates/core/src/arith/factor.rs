use std::collections::{BTreeMap, BTreeSet};

use num::bigint::BigUint;
use num::{BigInt, Integer, One, Signed, ToPrimitive, Zero};

use super::Rational;
use crate::error::{Error, Result};

/// Multiplicity of `p` in the nonzero integer `n`, by repeated exact division.
pub fn valuation_int(n: &BigInt, p: u64) -> u64 {
    debug_assert!(!n.is_zero() && p >= 2);
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

/// `v_p(x)` for nonzero rational `x`.
pub fn valuation(x: &Rational, p: u64) -> Result<i64> {
    if x.is_zero() {
        return Err(Error::Domain("valuation of zero".into()));
    }
    Ok(valuation_int(x.numer(), p) as i64 - valuation_int(x.denom(), p) as i64)
}

/// Prime factorisation of a positive integer, primes restricted to `u64`.
pub fn factorize(n: &BigUint) -> Result<BTreeMap<u64, u32>> {
    if n.is_zero() {
        return Err(Error::Domain("factorisation of zero".into()));
    }
    let mut out = BTreeMap::new();
    if n.is_one() {
        return Ok(out);
    }
    if let Some(small) = n.to_u128() {
        for (p, e) in num_prime::nt_funcs::factorize128(small) {
            let p = u64::try_from(p).map_err(|_| Error::Factorization { bits: n.bits() })?;
            out.insert(p, e as u32);
        }
        return Ok(out);
    }
    let (found, rest) = num_prime::nt_funcs::factors(n.clone(), None);
    if rest.is_some() {
        return Err(Error::Factorization { bits: n.bits() });
    }
    for (p, e) in found {
        let p = p.to_u64().ok_or(Error::Factorization { bits: n.bits() })?;
        out.insert(p, e as u32);
    }
    Ok(out)
}

/// Primes dividing the nonzero integer `n`.
pub fn prime_support(n: &BigInt) -> Result<BTreeSet<u64>> {
    Ok(factorize(&n.abs().to_biguint().expect("abs is nonnegative"))?.into_keys().collect())
}

/// Primes dividing numerator or denominator of `x`; empty for zero.
pub fn rational_support(x: &Rational) -> Result<BTreeSet<u64>> {
    if x.is_zero() {
        return Ok(BTreeSet::new());
    }
    let mut s = prime_support(x.numer())?;
    s.extend(prime_support(x.denom())?);
    Ok(s)
}
