//! Exact rational arithmetic, places of ℚ, absolute values and Weil heights.

mod factor;
mod logs;
mod place;
mod rational;

pub use factor::{factorize, prime_support, rational_support, valuation, valuation_int};
pub use logs::{
    lambda_plus, lambda_plus_exact, log_abs, log_abs_exact, product_formula_defect, product_formula_defect_exact,
    weil_height, weil_height_exact, LogCombination,
};
pub use place::Place;
pub use rational::{
    bit_length, format_rational, ln_abs, ln_bigint, parse_rational, rational_serde, to_complex, Rational,
};
