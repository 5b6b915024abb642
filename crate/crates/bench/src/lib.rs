//! Inputs shared by the criterion benchmarks in `benches/`.

use heightlab::{PolyQ, Rational};

/// `(name, φ, α)` triples spanning easy and slow cases of the height
/// computations.
pub fn height_cases() -> Vec<(&'static str, PolyQ, Rational)> {
    let q = |s: &str| heightlab::arith::parse_rational(s).expect("valid rational");
    let p = |s: &str| s.parse::<PolyQ>().expect("valid polynomial");
    vec![
        ("z2_at_2", p("0,0,1"), q("2")),
        ("half_z2_at_4", p("0,0,1/2"), q("4")),
        ("bad_primes_3_5", p("1/5,0,3"), q("7/2")),
        ("cubic_slow_escape", p("-2,0,0,1"), q("1/3")),
    ]
}

/// A degree-`d` polynomial with mixed-size rational coefficients.
pub fn dense_poly(d: usize) -> PolyQ {
    let coeffs: Vec<String> =
        (0..=d).map(|i| if i == d { "1".into() } else { format!("{}/{}", (i as i64 % 7) - 3, i + 1) }).collect();
    coeffs.join(",").parse().expect("valid polynomial")
}
