use num::bigint::Sign;
use num::complex::Complex64;
use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always in lowest terms with positive
/// denominator; zero is `0/1`.
pub type Rational = BigRational;

/// Parses `"num/den"` or a bare integer. Surrounding whitespace is ignored.
pub fn parse_rational(input: &str) -> Result<Rational> {
    let lead = input.len() - input.trim_start().len();
    let s = input.trim();
    if s.is_empty() {
        return Err(Error::parse(input, lead, "empty rational"));
    }
    let (num_str, den_str, den_pos) = match s.find('/') {
        Some(i) => (&s[..i], Some(&s[i + 1..]), lead + i + 1),
        None => (s, None, 0),
    };
    let num = parse_int(input, num_str.trim(), lead)?;
    let den = match den_str {
        Some(d) => parse_int(input, d.trim(), den_pos)?,
        None => BigInt::one(),
    };
    if den.is_zero() {
        return Err(Error::parse(input, den_pos, "zero denominator"));
    }
    Ok(Rational::new(num, den))
}

fn parse_int(input: &str, s: &str, offset: usize) -> Result<BigInt> {
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    if digits.is_empty() {
        return Err(Error::parse(input, offset, "expected digits"));
    }
    if let Some(bad) = digits.find(|c: char| !c.is_ascii_digit()) {
        let pos = offset + (s.len() - digits.len()) + bad;
        return Err(Error::parse(input, pos, "unexpected character"));
    }
    s.parse::<BigInt>().map_err(|e| Error::parse(input, offset, e.to_string()))
}

/// Always renders as `num/den`, including integers (`5/1`).
pub fn format_rational(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Total bit length of numerator and denominator.
pub fn bit_length(x: &Rational) -> u64 {
    x.numer().bits() + x.denom().bits()
}

/// Natural log of `|n|` for `n != 0`, without overflowing on huge inputs.
pub fn ln_bigint(n: &BigInt) -> f64 {
    debug_assert!(!n.is_zero());
    let bits = n.bits();
    if bits <= 1000 {
        return n.abs().to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top: BigInt = n.abs() >> shift;
    top.to_f64().unwrap_or(f64::INFINITY).ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural log of `|x|` for nonzero `x`.
pub fn ln_abs(x: &Rational) -> f64 {
    ln_bigint(x.numer()) - ln_bigint(x.denom())
}

/// Nearest complex double; may be infinite for astronomically large inputs.
pub fn to_complex(x: &Rational) -> Complex64 {
    let re = x.to_f64().unwrap_or_else(|| {
        let v = ln_abs(x).exp();
        if x.numer().sign() == Sign::Minus {
            -v
        } else {
            v
        }
    });
    Complex64::new(re, 0.0)
}

/// Serde adapter writing rationals as `"num/den"` strings.
pub mod rational_serde {
    use super::{format_rational, parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(xs: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(xs.len()))?;
            for x in xs {
                seq.serialize_element(&format_rational(x))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            let v = Vec::<String>::deserialize(d)?;
            v.iter().map(|s| parse_rational(s).map_err(serde::de::Error::custom)).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("3/2").unwrap(), q(3, 2));
        assert_eq!(parse_rational(" -6/4 ").unwrap(), q(-3, 2));
        assert_eq!(parse_rational("5").unwrap(), q(5, 1));
        assert_eq!(parse_rational("0/7").unwrap(), q(0, 1));
        assert_eq!(parse_rational("4/-2").unwrap(), q(-2, 1));
    }

    #[test]
    fn parse_errors_carry_position() {
        match parse_rational("12x/3") {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 2),
            other => panic!("{other:?}"),
        }
        match parse_rational("1/0") {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 2),
            other => panic!("{other:?}"),
        }
        assert!(parse_rational("").is_err());
        assert!(parse_rational("/3").is_err());
    }

    #[test]
    fn zero_is_canonical() {
        let z = parse_rational("0/-5").unwrap();
        assert_eq!(format_rational(&z), "0/1");
    }

    #[test]
    fn ln_of_huge_integer() {
        let n = BigInt::one() << 5000u32;
        let got = ln_bigint(&n);
        let want = 5000.0 * std::f64::consts::LN_2;
        assert!((got - want).abs() < 1e-9 * want);
    }
}
