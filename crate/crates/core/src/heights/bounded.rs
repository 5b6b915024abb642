use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

const EPS: f64 = f64::EPSILON;

/// A real number known to lie in `[value − error, value + error]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundedValue {
    pub value: f64,
    pub error: f64,
}

/// Rounds `x` one notch towards −∞ with a little headroom for the rounding
/// of whatever produced it.
pub(crate) fn down(x: f64) -> f64 {
    x - (x.abs() * 4.0 * EPS + f64::MIN_POSITIVE)
}

pub(crate) fn up(x: f64) -> f64 {
    x + (x.abs() * 4.0 * EPS + f64::MIN_POSITIVE)
}

impl BoundedValue {
    pub fn new(value: f64, error: f64) -> Self {
        assert!(value.is_finite(), "enclosure centre must be finite");
        assert!(error >= 0.0 && error.is_finite(), "radius must be finite and nonnegative");
        Self { value, error }
    }

    pub fn exact(value: f64) -> Self {
        Self::new(value, 0.0)
    }

    /// Smallest enclosure of `[lo, hi]`, rounded outwards.
    pub fn from_interval(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "empty interval [{lo}, {hi}]");
        let mid = 0.5 * (lo + hi);
        let r = (hi - mid).max(mid - lo);
        Self::new(mid, if r > 0.0 { up(r) } else { 0.0 })
    }

    pub fn lower(&self) -> f64 {
        down(self.value - self.error)
    }

    pub fn upper(&self) -> f64 {
        up(self.value + self.error)
    }

    pub fn scale(&self, k: f64) -> Self {
        let e = self.error * k.abs();
        Self::new(self.value * k, e + e * 2.0 * EPS + (self.value * k).abs() * EPS)
    }

    /// Whether the two enclosures share a point.
    ///
    /// Endpoints carry a few ulps of slack: exact values are rendered to the
    /// nearest double and may sit on either side of a shared endpoint.
    pub fn intersects(&self, other: &Self) -> bool {
        self.lower() <= other.upper() && other.lower() <= self.upper()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower() <= x && x <= self.upper()
    }

    /// Enclosure of `max_i x_i` given enclosures of each `x_i`.
    pub fn max_of(items: &[Self]) -> Option<Self> {
        let lo = items.iter().map(|b| b.value - b.error).reduce(f64::max)?;
        let hi = items.iter().map(|b| b.value + b.error).reduce(f64::max)?;
        Some(Self::from_interval(lo, hi))
    }

    pub fn width(&self) -> f64 {
        2.0 * self.error
    }
}

impl Add for BoundedValue {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let v = self.value + rhs.value;
        let e = self.error + rhs.error;
        Self::new(v, e + e * 2.0 * EPS + v.abs() * EPS)
    }
}

impl Sub for BoundedValue {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for BoundedValue {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.value, self.error)
    }
}

impl std::iter::Sum for BoundedValue {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::exact(0.0), |a, b| a + b)
    }
}

impl std::fmt::Display for BoundedValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ± {:e}", self.value, self.error)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn serializes_as_value_error() {
        let b = BoundedValue::new(1.5, 0.25);
        assert_eq!(serde_json::to_string(&b).unwrap(), r#"{"value":1.5,"error":0.25}"#);
        let back: BoundedValue = serde_json::from_str(r#"{"value":1.5,"error":0.25}"#).unwrap();
        assert_eq!(back, b);
    }

    #[test]
    #[should_panic]
    fn rejects_negative_radius() {
        BoundedValue::new(0.0, -1.0);
    }

    #[test]
    fn max_widens_over_overlaps() {
        let a = BoundedValue::new(1.0, 0.5);
        let b = BoundedValue::new(1.2, 0.1);
        let m = BoundedValue::max_of(&[a, b]).unwrap();
        assert!(m.contains(1.1) && m.contains(1.5) && !m.contains(1.0));
        assert!(m.lower() <= 1.1 && m.lower() > 1.09);
    }

    proptest! {
        #[test]
        fn addition_encloses_sums(a in -1e6..1e6f64, ea in 0.0..10.0f64, b in -1e6..1e6f64,
                                  eb in 0.0..10.0f64, s in -1.0..1.0f64, t in -1.0..1.0f64) {
            let x = a + s * ea;
            let y = b + t * eb;
            let sum = BoundedValue::new(a, ea) + BoundedValue::new(b, eb);
            prop_assert!(sum.contains(x + y));
            prop_assert!(BoundedValue::new(a, ea).scale(-3.0).contains(-3.0 * x));
        }
    }
}
