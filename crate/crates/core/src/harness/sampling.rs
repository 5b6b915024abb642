use num::{BigInt, Integer, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::arith::{Place, Rational};
use crate::error::Result;
use crate::poly::{escape_radius, padic_log_escape_radius, NormalForm, PolyQ};

/// Independent generator for sample `index`: one ChaCha stream per sample,
/// so samples can be drawn in any order or in parallel.
pub fn sample_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Evaluates `f` on sample indices `0..n` in parallel, results in index
/// order.
pub fn par_samples<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..n).into_par_iter().map(f).collect()
}

/// Uniform `n/d` with `|n| ≤ b`, `1 ≤ d ≤ b`, in lowest terms.
pub fn rational(rng: &mut impl Rng, b: i64) -> Rational {
    let n = rng.gen_range(-b..=b);
    let d = rng.gen_range(1..=b.max(1));
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn nonzero_rational(rng: &mut impl Rng, b: i64) -> Rational {
    loop {
        let x = rational(rng, b);
        if !x.is_zero() {
            return x;
        }
    }
}

/// Degree-`d` polynomial with coefficients of height at most `b`.
pub fn poly(rng: &mut impl Rng, d: usize, b: i64) -> PolyQ {
    let mut coeffs: Vec<Rational> = (0..d).map(|_| rational(rng, b)).collect();
    coeffs.push(nonzero_rational(rng, b));
    PolyQ::new(coeffs)
}

pub fn normal_form(rng: &mut impl Rng, d: usize, b: i64) -> NormalForm {
    NormalForm::exact((1..d).map(|_| rational(rng, b)).collect()).expect("d ≥ 2")
}

/// A point just outside the escape disk at `v`: `|z|_v` lies one to four
/// steps (integers at ∞, powers of `p` at a prime) past `C_{φ,v}`.
pub fn escaping_point(rng: &mut impl Rng, phi: &PolyQ, v: Place, b: i64) -> Result<Rational> {
    match v {
        Place::Infinite => {
            let c = escape_radius(phi, v)?;
            let n0 = c.floor() as i64 + 1 + rng.gen_range(0..4);
            let den = rng.gen_range(1..=b.max(1));
            let frac = Rational::new(rng.gen_range(0..den).into(), den.into());
            let z = Rational::from_integer(n0.into()) + frac;
            Ok(if rng.gen_bool(0.5) { -z } else { z })
        }
        Place::Prime(p) => {
            let e = padic_log_escape_radius(phi, p)?;
            let k = e.floor().to_integer().to_i64().expect("small exponent") + 1 + rng.gen_range(0..4);
            let u = Rational::new(unit(rng, p, b).into(), unit(rng, p, b).into());
            let u = if rng.gen_bool(0.5) { -u } else { u };
            Ok(u * Rational::from_integer(BigInt::from(p)).pow(-(k as i32)))
        }
    }
}

/// A `p`-adic unit integer in `1..=b` (or 1).
fn unit(rng: &mut impl Rng, p: u64, b: i64) -> i64 {
    for _ in 0..64 {
        let n = rng.gen_range(1..=b.max(1));
        if n.gcd(&(p as i64)) == 1 {
            return n;
        }
    }
    1
}

pub fn choose<'a, T>(rng: &mut impl Rng, items: &'a [T]) -> &'a T {
    &items[rng.gen_range(0..items.len())]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u32> = (0..4).map(|_| sample_rng(7, 3).gen()).collect();
        let b: Vec<u32> = (0..4).map(|_| sample_rng(7, 3).gen()).collect();
        assert_eq!(a, b);
        assert_ne!(sample_rng(7, 3).gen::<u64>(), sample_rng(7, 4).gen::<u64>());
    }

    #[test]
    fn heights_respect_bound() {
        let mut rng = sample_rng(1, 0);
        for _ in 0..500 {
            let x = rational(&mut rng, 8);
            assert!(x.numer().magnitude() <= &8u32.into() && x.denom() <= &8.into());
        }
        let p = poly(&mut rng, 3, 8);
        assert_eq!(p.degree(), 3);
    }

    #[test]
    fn escaping_points_escape() {
        use crate::poly::in_escape_region;
        let mut rng = sample_rng(2, 0);
        for _ in 0..50 {
            let phi = poly(&mut rng, 2, 8);
            for v in [Place::Infinite, Place::Prime(2), Place::Prime(5)] {
                let z = escaping_point(&mut rng, &phi, v, 8).unwrap();
                assert!(in_escape_region(&phi, &z, v).unwrap(), "{phi} {z} {v}");
            }
        }
    }
}
