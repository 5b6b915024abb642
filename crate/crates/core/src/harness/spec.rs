use serde::{Deserialize, Serialize};

use crate::arith::{parse_rational, Place, Rational};
use crate::error::Result;
use crate::heights::IterationCaps;

/// Sampling and tolerance settings shared by every harness check.
///
/// All fields default, so spec files only need the fields they change.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleSpec {
    pub degrees: Vec<usize>,
    /// Bound on `max(|num|, den)` for sampled coefficients and parameters.
    pub coefficient_height_bound: i64,
    /// Bound on `max(|num|, den)` for sampled points.
    pub point_height_bound: i64,
    /// Random samples per check (or per grid point for grid-based checks).
    pub samples: usize,
    /// Parameter scales `t` for the family checks, as rationals.
    pub c_grid: Vec<String>,
    pub places: Vec<Place>,
    pub rng_seed: u64,
    pub caps: IterationCaps,
    /// Requested radius for archimedean Green's function enclosures.
    pub target_error: f64,
    /// Absolute tolerance on fitted slopes.
    pub slope_tolerance: f64,
    /// Samples with `M(f_c)` below this are left out of slope fits.
    pub m_threshold: f64,
    /// Points per axis of the `α` grid in the proximity check.
    pub alpha_grid: usize,
    /// `#X` for pigeonhole instances.
    pub x_size: usize,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self {
            degrees: vec![2, 3],
            coefficient_height_bound: 8,
            point_height_bound: 8,
            samples: 200,
            c_grid: ["10", "100", "1000", "10000"].map(String::from).to_vec(),
            places: ["inf", "2", "3", "5", "7"].map(|s| s.parse().expect("valid place")).to_vec(),
            rng_seed: 0x5eed,
            caps: IterationCaps::default(),
            target_error: 1e-9,
            slope_tolerance: 0.05,
            m_threshold: 1.0,
            alpha_grid: 7,
            x_size: 12,
        }
    }
}

impl SampleSpec {
    pub fn grid(&self) -> Result<Vec<Rational>> {
        self.c_grid.iter().map(|s| parse_rational(s)).collect()
    }

    pub fn finite_places(&self) -> Vec<u64> {
        self.places.iter().filter_map(Place::as_prime).collect()
    }
}
