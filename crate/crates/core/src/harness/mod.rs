//! Numerical checks of the explicit inequalities behind the height lower
//! bound, and the experiments that estimate its non-explicit constants.
//!
//! Every check takes a [`SampleSpec`] and returns a [`LemmaReport`]. Samples
//! are drawn from per-index random streams and evaluated in parallel; rows
//! come back in index order, so a fixed seed gives a byte-identical report.

mod agreement;
mod family;
mod fit;
pub mod fixtures;
mod local;
mod min_height;
mod pigeonhole;
mod proximity;
mod report;
pub mod sampling;
mod spec;

use num::ToPrimitive;

pub use agreement::{check_conjugation_invariance, check_method_agreement, NAIVE_STEPS};
pub use family::{check_basin_inequality, check_coeff_vs_escape, check_escape_radius_vs_m};
pub use fit::fit_line;
pub use local::{check_epsilon_bounds, check_good_reduction, check_transformation_rule};
pub use min_height::min_height_experiment;
pub use pigeonhole::{
    check_pigeonhole, pigeonhole_select, PairValue, PigeonholeCase, PigeonholeCertificate, PigeonholeResult,
};
pub use proximity::check_preimage_proximity;
pub use report::{LemmaReport, SampleRecord, SampleStatus, REPORT_SCHEMA_VERSION};
pub use spec::SampleSpec;

use crate::arith::Rational;
use crate::error::{Error, Result};

/// Identifiers accepted by [`run_check`].
pub const LEMMA_IDS: &[&str] = &[
    "eps-bounds",
    "transformation-rule",
    "escape-radius-vs-m",
    "coeff-vs-escape",
    "good-reduction",
    "basin-inequality",
    "pigeonhole",
    "preimage-proximity",
    "min-height",
    "conjugation-invariance",
    "method-agreement",
];

pub fn run_check(lemma_id: &str, spec: &SampleSpec) -> Result<LemmaReport> {
    match lemma_id {
        "eps-bounds" => check_epsilon_bounds(spec),
        "transformation-rule" => check_transformation_rule(spec),
        "escape-radius-vs-m" => check_escape_radius_vs_m(spec),
        "coeff-vs-escape" => check_coeff_vs_escape(spec),
        "good-reduction" => check_good_reduction(spec),
        "basin-inequality" => check_basin_inequality(spec),
        "pigeonhole" => check_pigeonhole(spec),
        "preimage-proximity" => check_preimage_proximity(spec),
        "min-height" => min_height_experiment(spec),
        "conjugation-invariance" => check_conjugation_invariance(spec),
        "method-agreement" => check_method_agreement(spec),
        other => Err(Error::Domain(format!("unknown lemma id {other:?}; expected one of {}", LEMMA_IDS.join(", ")))),
    }
}

fn validate(spec: &SampleSpec) -> Result<()> {
    if spec.degrees.is_empty() || spec.degrees.iter().any(|&d| d < 2) {
        return Err(Error::Domain("degrees must be nonempty and at least 2".into()));
    }
    if spec.places.is_empty() {
        return Err(Error::Domain("places must be nonempty".into()));
    }
    if spec.coefficient_height_bound < 1 || spec.point_height_bound < 1 {
        return Err(Error::Domain("height bounds must be at least 1".into()));
    }
    Ok(())
}

fn to_f64(x: &Rational) -> f64 {
    x.to_f64().expect("finite rational")
}

/// Slope of per-scale maxima against `ln(scale)`.
fn max_slope(per_scale: &std::collections::BTreeMap<usize, (f64, f64)>) -> Option<f64> {
    let pts: Vec<(f64, f64)> = per_scale.values().copied().collect();
    fit_line(&pts).map(|(a, _)| a)
}
