use heightlab::arith::{lambda_plus_exact, ln_abs, Place, Rational};
use heightlab::heights::{
    canonical_height_local_method, canonical_height_naive_method, green_arch, green_nonarch_exact, BoundedValue,
    OrbitStatus,
};
use heightlab::poly::{bad_places, in_escape_region, PolyQ};
use num::{One, Zero};
use proptest::prelude::*;

const LN_3_2: f64 = 0.405_465_108_108_164_4;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// Rationals of naive height at most `b`.
fn small_rational(b: i64) -> impl Strategy<Value = Rational> {
    (-b..=b, 1..=b).prop_map(|(n, d)| q(n, d))
}

fn small_poly() -> impl Strategy<Value = PolyQ> {
    (2usize..=3, proptest::collection::vec(small_rational(8), 4)).prop_filter_map("nonzero leading", |(d, cs)| {
        let coeffs = cs[..=d].to_vec();
        (!coeffs[d].is_zero()).then(|| PolyQ::new(coeffs))
    })
}

fn prime() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![2u64, 3, 5, 7])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transformation_rule_archimedean(phi in small_poly(), z in small_rational(8)) {
        let d = phi.degree() as f64;
        let (g, _) = green_arch(&phi, &z, 1e-10).unwrap();
        let (gf, _) = green_arch(&phi, &phi.evaluate(&z), 1e-10).unwrap();
        prop_assert!(gf.intersects(&g.scale(d)), "{gf} vs {d}·{g}");
    }

    #[test]
    fn epsilon_bounds_archimedean(phi in small_poly(), n in 1i64..10_000, m in 1i64..9) {
        let z = q(n, m);
        prop_assume!(in_escape_region(&phi, &z, Place::Infinite).unwrap());
        let d = phi.degree();
        let (g, rec) = green_arch(&phi, &z, 1e-10).unwrap();
        prop_assert_eq!(rec.status, OrbitStatus::Escaped);
        let shift = ln_abs(&z) + ln_abs(&phi.leading()) / (d - 1) as f64;
        let eps = g - BoundedValue::exact(shift);
        prop_assert!(eps.upper() >= -std::f64::consts::LN_2 && eps.lower() <= LN_3_2, "ε = {eps}");
    }

    #[test]
    fn good_reduction_is_lambda_plus(phi in small_poly(), z in small_rational(30), p in prime()) {
        prop_assume!(!bad_places(&phi).unwrap().contains(&Place::Prime(p)));
        let (enc, rec) = green_nonarch_exact(&phi, &z, p, 32).unwrap();
        let lam = lambda_plus_exact(&z, Place::Prime(p)).unwrap().coefficient(p);
        prop_assert_eq!(&enc.lo, &lam);
        prop_assert_eq!(&enc.hi, &lam);
        prop_assert_ne!(rec.status, OrbitStatus::Undecided);
    }

    #[test]
    fn homogeneity_and_nonnegativity(phi in small_poly(), a in small_rational(8)) {
        let d = phi.degree() as f64;
        let h = canonical_height_local_method(&phi, &a, 1e-9).unwrap();
        let hf = canonical_height_local_method(&phi, &phi.evaluate(&a), 1e-9).unwrap();
        prop_assert!(h.value + h.error >= 0.0);
        prop_assert!(hf.intersects(&h.scale(d)), "{hf} vs {d}·{h}");
    }

    #[test]
    fn methods_agree(phi in small_poly(), a in small_rational(8)) {
        let local = canonical_height_local_method(&phi, &a, 1e-9).unwrap();
        let naive = canonical_height_naive_method(&phi, &a, 24).unwrap();
        prop_assert!(local.intersects(&naive), "local {local} vs naive {naive}");
    }

    #[test]
    fn conjugation_invariance(phi in small_poly(), a in small_rational(8),
                              s in small_rational(4), t in small_rational(4)) {
        prop_assume!(!s.is_zero());
        // ψ = μ⁻¹ ∘ φ ∘ μ with μ(z) = s·z + t, so ĥ_φ(α) = ĥ_ψ(μ⁻¹(α)).
        let psi = phi.affine_conjugate(&s, &t).unwrap();
        let b = (&a - &t) / &s;
        let h1 = canonical_height_local_method(&phi, &a, 1e-9).unwrap();
        let h2 = canonical_height_local_method(&psi, &b, 1e-9).unwrap();
        prop_assert!(h1.intersects(&h2), "{h1} vs {h2}");
    }
}

#[test]
fn conjugation_closed_form() {
    let two_sq = PolyQ::from_i64(&[0, 0, 2]);
    let quarter = q(1, 4);
    let half_sq = two_sq.affine_conjugate(&quarter, &Rational::zero()).unwrap();
    assert_eq!(half_sq, PolyQ::new(vec![q(0, 1), q(0, 1), q(1, 2)]));
    let h1 = canonical_height_local_method(&two_sq, &Rational::one(), 1e-12).unwrap();
    let h2 = canonical_height_local_method(&half_sq, &q(4, 1), 1e-12).unwrap();
    assert!(h1.intersects(&h2));
    assert!(h1.contains(std::f64::consts::LN_2));
}
