//! Polynomials over ℚ and ℂ, the critical-point normal form, bad reduction
//! and escape radii.

mod conjugate;
mod escape;
mod normal_form;
mod polyc;
mod polyq;

pub use conjugate::{conjugate_to_normal_form, AffineMap, ExactAffine, NormalFormConjugation};
pub use escape::{
    bad_places, coefficient_height_global, coefficient_height_local, escape_radius, escape_radius_c, in_escape_region,
    in_escape_region_c, log_escape_radius, log_escape_radius_c, padic_log_escape_radius,
};
pub use normal_form::{NormalForm, NormalFormParams};
pub use polyc::PolyC;
pub use polyq::{PolyQ, DEFAULT_BIT_CAP, DEFAULT_DEGREE_CAP};
