use num::complex::Complex64;
use serde::Serialize;

use crate::arith::{format_rational, Place, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrbitStatus {
    Escaped,
    BoundedCertified,
    Undecided,
}

#[derive(Clone, Debug, PartialEq)]
pub enum OrbitPoint {
    Exact(Rational),
    Approx(Complex64),
}

impl Serialize for OrbitPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            OrbitPoint::Exact(x) => s.serialize_str(&format_rational(x)),
            OrbitPoint::Approx(z) => z.serialize(s),
        }
    }
}

/// Audit trail of one Green's function evaluation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitRecord {
    pub point: OrbitPoint,
    pub place: Place,
    /// First `n` at which escape of `φⁿ(z)` was certified.
    pub escape_index: Option<usize>,
    pub iterations_used: usize,
    pub status: OrbitStatus,
}

impl OrbitRecord {
    pub(crate) fn new(
        point: OrbitPoint,
        place: Place,
        iterations_used: usize,
        status: OrbitStatus,
        escape_index: Option<usize>,
    ) -> Self {
        debug_assert_eq!(escape_index.is_some(), status == OrbitStatus::Escaped);
        Self { point, place, escape_index, iterations_used, status }
    }
}
