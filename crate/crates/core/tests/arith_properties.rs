use heightlab::arith::{
    format_rational, lambda_plus, lambda_plus_exact, log_abs, parse_rational, product_formula_defect_exact,
    rational_support, weil_height, weil_height_exact, LogCombination, Place, Rational,
};
use num::{BigInt, Signed, Zero};
use proptest::prelude::*;

fn nonzero_rational() -> impl Strategy<Value = Rational> {
    (any::<i64>(), 1i64..i64::MAX)
        .prop_filter("nonzero", |(n, _)| *n != 0)
        .prop_map(|(n, d)| Rational::new(BigInt::from(n), BigInt::from(d)))
}

fn places_of(x: &Rational) -> Vec<Place> {
    let mut v = vec![Place::Infinite];
    v.extend(rational_support(x).unwrap().into_iter().map(Place::Prime));
    v
}

fn any_place() -> impl Strategy<Value = Place> {
    prop_oneof![Just(Place::Infinite), prop::sample::select(vec![2u64, 3, 5, 7, 11, 101]).prop_map(Place::Prime)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn lowest_terms_and_positive_denominator(n in any::<i64>(), d in any::<i64>()) {
        prop_assume!(d != 0);
        let x = Rational::new(BigInt::from(n), BigInt::from(d));
        prop_assert!(x.denom().is_positive());
        prop_assert_eq!(num::Integer::gcd(x.numer(), x.denom()), if x.is_zero() { x.denom().clone() } else { BigInt::from(1) });
        if x.is_zero() {
            prop_assert_eq!(x.denom(), &BigInt::from(1));
        }
        prop_assert_eq!(parse_rational(&format_rational(&x)).unwrap(), x);
    }

    #[test]
    fn product_formula_is_exact(x in nonzero_rational()) {
        prop_assert!(product_formula_defect_exact(&x, &places_of(&x)).unwrap().is_zero());
    }

    #[test]
    fn height_is_sum_of_local_heights(x in nonzero_rational()) {
        let sum = places_of(&x).iter().fold(LogCombination::zero(), |acc, v| &acc + &lambda_plus_exact(&x, *v).unwrap());
        prop_assert_eq!(&sum, &weil_height_exact(&x).unwrap());
        prop_assert!((sum.to_f64() - weil_height(&x)).abs() <= 1e-12 * (1.0 + weil_height(&x)));
    }

    #[test]
    fn log_abs_is_additive(x in nonzero_rational(), y in nonzero_rational(), v in any_place()) {
        let lhs = log_abs(&(&x * &y), v).unwrap();
        let rhs = log_abs(&x, v).unwrap() + log_abs(&y, v).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()), "{lhs} vs {rhs}");
    }

    #[test]
    fn lambda_plus_dominates_log_abs(x in nonzero_rational(), v in any_place()) {
        let l = lambda_plus(&x, v);
        prop_assert!(l >= 0.0);
        prop_assert!(l >= log_abs(&x, v).unwrap());
    }
}

#[test]
fn places_have_local_degree_one_and_prime_index() {
    assert_eq!(Place::Infinite.local_degree(), 1);
    assert_eq!(Place::prime(7).unwrap().local_degree(), 1);
    assert!(Place::prime(9).is_err());
    assert!("12".parse::<Place>().is_err());
    let x = Rational::new(BigInt::from(-12), BigInt::from(35));
    assert_eq!(x.numer().abs(), BigInt::from(12));
}
