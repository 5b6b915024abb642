use std::fmt;
use std::str::FromStr;

use num::complex::Complex64;
use num::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{format_rational, parse_rational, to_complex, Rational};
use crate::error::{Error, Result};
use crate::poly::{PolyC, PolyQ};

/// Critical points `c_1, …, c_{d−1}` of a normal form, exact or numeric.
#[derive(Clone, Debug, PartialEq)]
pub enum NormalFormParams {
    Exact(Vec<Rational>),
    Numeric(Vec<Complex64>),
}

/// The polynomial `f_c` of degree `d` with `f_c(0) = 0` and
/// `f_c'(z) = Π (z − c_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalForm {
    degree: usize,
    params: NormalFormParams,
}

impl NormalForm {
    pub fn exact(c: Vec<Rational>) -> Result<Self> {
        Self::check(c.len())?;
        Ok(NormalForm { degree: c.len() + 1, params: NormalFormParams::Exact(c) })
    }

    pub fn numeric(c: Vec<Complex64>) -> Result<Self> {
        Self::check(c.len())?;
        Ok(NormalForm { degree: c.len() + 1, params: NormalFormParams::Numeric(c) })
    }

    /// Convenience for integer parameters.
    pub fn from_i64(c: &[i64]) -> Self {
        Self::exact(c.iter().map(|&x| Rational::from_integer(x.into())).collect()).expect("at least one parameter")
    }

    fn check(n: usize) -> Result<()> {
        if n == 0 {
            Err(Error::Domain("normal form needs degree >= 2".into()))
        } else {
            Ok(())
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn params(&self) -> &NormalFormParams {
        &self.params
    }

    pub fn exact_params(&self) -> Option<&[Rational]> {
        match &self.params {
            NormalFormParams::Exact(c) => Some(c),
            NormalFormParams::Numeric(_) => None,
        }
    }

    /// Critical points as complex numbers.
    pub fn critical_points(&self) -> Vec<Complex64> {
        match &self.params {
            NormalFormParams::Exact(c) => c.iter().map(to_complex).collect(),
            NormalFormParams::Numeric(c) => c.clone(),
        }
    }

    /// `f_c ∈ ℚ[z]` as the antiderivative of `Π (z − c_i)` vanishing at 0.
    pub fn to_poly(&self) -> Result<PolyQ> {
        let c =
            self.exact_params().ok_or_else(|| Error::Domain("numeric normal form has no exact polynomial".into()))?;
        let f = PolyQ::from_roots(c).antiderivative();
        debug_assert!(f.evaluate(&Rational::zero()).is_zero());
        debug_assert!(f.leading() == Rational::new(One::one(), (self.degree as i64).into()));
        Ok(f)
    }

    pub fn to_polyc(&self) -> PolyC {
        match &self.params {
            NormalFormParams::Exact(_) => self.to_poly().expect("exact").to_polyc(),
            NormalFormParams::Numeric(c) => PolyC::from_roots(c).antiderivative(),
        }
    }
}

/// `"d; c_1,…,c_{d−1}"`; numeric parameters render as `re+imi`.
impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = match &self.params {
            NormalFormParams::Exact(c) => c.iter().map(format_rational).collect(),
            NormalFormParams::Numeric(c) => c.iter().map(|z| format!("{}{:+}i", z.re, z.im)).collect(),
        };
        write!(f, "{}; {}", self.degree, parts.join(","))
    }
}

impl FromStr for NormalForm {
    type Err = Error;

    /// Parses the exact form only.
    fn from_str(s: &str) -> Result<Self> {
        let (d_str, rest) = s.split_once(';').ok_or_else(|| Error::parse(s, 0, "expected \"d; c1,...\""))?;
        let d: usize = d_str.trim().parse().map_err(|_| Error::parse(s, 0, "bad degree"))?;
        let mut c = Vec::new();
        let mut offset = d_str.len() + 1;
        for piece in rest.split(',') {
            c.push(parse_rational(piece).map_err(|e| match e {
                Error::Parse { position, message, .. } => Error::parse(s, offset + position, message),
                other => other,
            })?);
            offset += piece.len() + 1;
        }
        if c.len() + 1 != d {
            return Err(Error::parse(
                s,
                d_str.len() + 1,
                format!("degree {d} needs {} parameters, got {}", d.saturating_sub(1), c.len()),
            ));
        }
        NormalForm::exact(c)
    }
}

impl Serialize for NormalForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for NormalForm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
