use std::fmt;
use std::str::FromStr;

use num::{One, Signed, Zero};

use crate::arith::{bit_length, format_rational, parse_rational, to_complex, Rational};
use crate::error::{Error, Result};
use crate::poly::PolyC;

/// Default cap on numerator plus denominator bits during exact iteration.
pub const DEFAULT_BIT_CAP: u64 = 1_000_000;
/// Default cap on the degree produced by [`PolyQ::compose_power`].
pub const DEFAULT_DEGREE_CAP: usize = 256;

/// Dense polynomial with exact rational coefficients `a_0, …, a_d`.
///
/// The coefficient vector never has trailing zeros; the zero polynomial has
/// no coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyQ {
    coeffs: Vec<Rational>,
}

impl PolyQ {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        PolyQ { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Rational::from_integer(c.into())).collect())
    }

    pub fn zero() -> Self {
        PolyQ { coeffs: vec![] }
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    /// The polynomial `z`.
    pub fn identity() -> Self {
        Self::new(vec![Rational::zero(), Rational::one()])
    }

    /// `Π (z − r)` over the given roots.
    pub fn from_roots(roots: &[Rational]) -> Self {
        roots
            .iter()
            .fold(Self::constant(Rational::one()), |acc, r| &acc * &Self::new(vec![-r.clone(), Rational::one()]))
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    /// Errors unless the degree is at least 2.
    pub fn require_dynamical(&self) -> Result<usize> {
        let d = self.degree();
        if self.is_zero() || d < 2 {
            Err(Error::Domain(format!("dynamics needs degree >= 2, got {d}")))
        } else {
            Ok(d)
        }
    }

    /// Horner evaluation.
    pub fn evaluate(&self, z: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// The orbit `[z, φ(z), …, φⁿ(z)]`, by repeated exact evaluation.
    pub fn iterate(&self, z: &Rational, n: usize, bit_cap: u64) -> Result<Vec<Rational>> {
        let mut orbit = Vec::with_capacity(n + 1);
        orbit.push(z.clone());
        for step in 1..=n {
            let next = self.evaluate(orbit.last().expect("nonempty"));
            let bits = bit_length(&next);
            if bits > bit_cap {
                return Err(Error::Resource(format!("iterate {step} has {bits} bits, cap is {bit_cap}")));
            }
            orbit.push(next);
        }
        Ok(orbit)
    }

    pub fn derivative(&self) -> Self {
        Self::new(self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c * Rational::from_integer(i.into())).collect())
    }

    /// Antiderivative with zero constant term.
    pub fn antiderivative(&self) -> Self {
        let mut out = vec![Rational::zero()];
        out.extend(self.coeffs.iter().enumerate().map(|(i, c)| c / Rational::from_integer((i + 1).into())));
        Self::new(out)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &PolyQ) -> PolyQ {
        let mut acc = PolyQ::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * inner) + &PolyQ::constant(c.clone());
        }
        acc
    }

    /// Coefficient form of the `k`-fold iterate `φ^k`.
    pub fn compose_power(&self, k: usize, degree_cap: usize) -> Result<PolyQ> {
        if k == 0 {
            return Err(Error::Domain("compose_power needs k >= 1".into()));
        }
        let d = self.degree().max(1);
        let target = (d as f64).powi(k as i32);
        if target > degree_cap as f64 {
            return Err(Error::Resource(format!("degree {d}^{k} exceeds degree cap {degree_cap}")));
        }
        let mut acc = self.clone();
        for _ in 1..k {
            acc = self.compose(&acc);
        }
        Ok(acc)
    }

    /// `μ⁻¹ ∘ φ ∘ μ` for `μ(z) = a z + b`, `a ≠ 0`.
    pub fn affine_conjugate(&self, a: &Rational, b: &Rational) -> Result<PolyQ> {
        if a.is_zero() {
            return Err(Error::Domain("affine map with zero scale".into()));
        }
        let mu = PolyQ::new(vec![b.clone(), a.clone()]);
        let inner = &self.compose(&mu) - &PolyQ::constant(b.clone());
        Ok(inner.scale(&a.recip()))
    }

    pub fn scale(&self, k: &Rational) -> PolyQ {
        PolyQ::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn to_polyc(&self) -> PolyC {
        PolyC::new(self.coeffs.iter().map(to_complex).collect())
    }

    /// Largest coefficient magnitude as a rational.
    pub fn max_abs_coeff(&self) -> Rational {
        self.coeffs.iter().map(|c| c.abs()).max().unwrap_or_else(Rational::zero)
    }
}

impl std::ops::Add<&PolyQ> for &PolyQ {
    type Output = PolyQ;
    fn add(self, rhs: &PolyQ) -> PolyQ {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        PolyQ::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl std::ops::Sub<&PolyQ> for &PolyQ {
    type Output = PolyQ;
    fn sub(self, rhs: &PolyQ) -> PolyQ {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        PolyQ::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl std::ops::Mul<&PolyQ> for &PolyQ {
    type Output = PolyQ;
    fn mul(self, rhs: &PolyQ) -> PolyQ {
        if self.is_zero() || rhs.is_zero() {
            return PolyQ::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        PolyQ::new(out)
    }
}

/// Comma-separated `a_0,…,a_d` in `num/den` form, lowest degree first.
impl fmt::Display for PolyQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0/1");
        }
        let parts: Vec<String> = self.coeffs.iter().map(format_rational).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for PolyQ {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut coeffs = Vec::new();
        let mut offset = 0;
        for piece in s.split(',') {
            let c = parse_rational(piece).map_err(|e| match e {
                Error::Parse { position, message, .. } => Error::parse(s, offset + position, message),
                other => other,
            })?;
            coeffs.push(c);
            offset += piece.len() + 1;
        }
        Ok(PolyQ::new(coeffs))
    }
}

impl serde::Serialize for PolyQ {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for PolyQ {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn half_square() -> PolyQ {
        PolyQ::new(vec![q(0, 1), q(0, 1), q(1, 2)])
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(half_square().evaluate(&q(4, 1)), q(8, 1));
        assert_eq!(PolyQ::from_i64(&[-1, 0, 1]).evaluate(&q(0, 1)), q(-1, 1));
        assert_eq!(PolyQ::from_i64(&[0, 0, 1]).evaluate(&q(3, 2)), q(9, 4));
    }

    #[test]
    fn iterate_examples() {
        let orbit = half_square().iterate(&q(4, 1), 3, DEFAULT_BIT_CAP).unwrap();
        assert_eq!(orbit, vec![q(4, 1), q(8, 1), q(32, 1), q(512, 1)]);
        let orbit = PolyQ::from_i64(&[-1, 0, 1]).iterate(&q(0, 1), 2, DEFAULT_BIT_CAP).unwrap();
        assert_eq!(orbit, vec![q(0, 1), q(-1, 1), q(0, 1)]);
        assert_eq!(half_square().iterate(&q(7, 3), 0, 10).unwrap(), vec![q(7, 3)]);
    }

    #[test]
    fn iterate_hits_bit_cap() {
        let r = PolyQ::from_i64(&[0, 0, 1]).iterate(&q(3, 1), 20, 64);
        assert!(matches!(r, Err(Error::Resource(_))));
    }

    #[test]
    fn compose_power_examples() {
        let sq = PolyQ::from_i64(&[0, 0, 1]);
        let mut z8 = vec![0; 9];
        z8[8] = 1;
        assert_eq!(sq.compose_power(3, 256).unwrap(), PolyQ::from_i64(&z8));
        let expect = PolyQ::new(vec![q(0, 1), q(0, 1), q(0, 1), q(0, 1), q(1, 8)]);
        assert_eq!(half_square().compose_power(2, 256).unwrap(), expect);
        assert!(matches!(sq.compose_power(9, 256), Err(Error::Resource(_))));
    }

    #[test]
    fn derivative_examples() {
        let f = PolyQ::new(vec![q(0, 1), q(-1, 1), q(1, 2)]);
        assert_eq!(f.derivative(), PolyQ::from_i64(&[-1, 1]));
        let g = PolyQ::new(vec![q(0, 1), q(0, 1), q(0, 1), q(1, 3)]);
        assert_eq!(g.derivative(), PolyQ::from_i64(&[0, 0, 1]));
        assert!(PolyQ::from_i64(&[5]).derivative().is_zero());
    }

    #[test]
    fn text_format() {
        let p: PolyQ = "0,0,1/2".parse().unwrap();
        assert_eq!(p, half_square());
        assert_eq!(p.to_string(), "0/1,0/1,1/2");
        match "1,2,x".parse::<PolyQ>() {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn affine_conjugate_matches_hand_computation() {
        // μ(z) = z/4 takes 2z² to z²/2.
        let phi = PolyQ::from_i64(&[0, 0, 2]);
        assert_eq!(phi.affine_conjugate(&q(1, 4), &q(0, 1)).unwrap(), half_square());
        // μ(z) = z + 1 takes z² to z² + 2z.
        let psi = PolyQ::from_i64(&[0, 0, 1]).affine_conjugate(&q(1, 1), &q(1, 1)).unwrap();
        assert_eq!(psi, PolyQ::from_i64(&[0, 2, 1]));
    }
}
