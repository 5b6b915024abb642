use num::complex::Complex64;
use num::Zero;

/// Dense polynomial with complex double coefficients `a_0, …, a_d`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyC {
    coeffs: Vec<Complex64>,
}

impl PolyC {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        PolyC { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Complex64 {
        self.coeffs.get(i).copied().unwrap_or_default()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or_default()
    }

    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::zero(), |acc, c| acc * z + c)
    }

    /// Value and first derivative in one Horner pass.
    pub fn evaluate_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::zero();
        let mut dp = Complex64::zero();
        for c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// `Σ |a_i| r^i`, the majorant used for residual scaling.
    pub fn majorant(&self, r: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    pub fn derivative(&self) -> PolyC {
        PolyC::new(self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c * i as f64).collect())
    }

    pub fn sub_constant(&self, w: Complex64) -> PolyC {
        let mut c = self.coeffs.clone();
        if c.is_empty() {
            c.push(Complex64::zero());
        }
        c[0] -= w;
        PolyC::new(c)
    }

    pub fn scale(&self, k: Complex64) -> PolyC {
        PolyC::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn mul(&self, other: &PolyC) -> PolyC {
        if self.is_zero() || other.is_zero() {
            return PolyC::new(vec![]);
        }
        let mut out = vec![Complex64::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        PolyC::new(out)
    }

    pub fn add(&self, other: &PolyC) -> PolyC {
        let n = self.coeffs.len().max(other.coeffs.len());
        PolyC::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &PolyC) -> PolyC {
        let mut acc = PolyC::new(vec![]);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(inner).add(&PolyC::new(vec![*c]));
        }
        acc
    }

    /// `Π (z − r)`.
    pub fn from_roots(roots: &[Complex64]) -> PolyC {
        roots.iter().fold(PolyC::new(vec![Complex64::new(1.0, 0.0)]), |acc, r| {
            acc.mul(&PolyC::new(vec![-r, Complex64::new(1.0, 0.0)]))
        })
    }

    /// Antiderivative with zero constant term.
    pub fn antiderivative(&self) -> PolyC {
        let mut out = vec![Complex64::zero()];
        out.extend(self.coeffs.iter().enumerate().map(|(i, c)| c / (i + 1) as f64));
        PolyC::new(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluate_and_derivative() {
        let p = PolyC::from_real(&[-1.0, 0.0, 1.0]);
        let (v, dv) = p.evaluate_with_derivative(Complex64::new(3.0, 0.0));
        assert_eq!(v, Complex64::new(8.0, 0.0));
        assert_eq!(dv, Complex64::new(6.0, 0.0));
        assert_eq!(p.derivative(), PolyC::from_real(&[0.0, 2.0]));
    }

    #[test]
    fn compose_squares() {
        let sq = PolyC::from_real(&[0.0, 0.0, 1.0]);
        let z4 = sq.compose(&sq);
        assert_eq!(z4, PolyC::from_real(&[0.0, 0.0, 0.0, 0.0, 1.0]));
    }
}
