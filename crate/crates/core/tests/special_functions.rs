mod common;

use bichroma::bessel::{bessel_j, jn, orders};
use bichroma::Error;
use common::{bessel_integral, bessel_series};
use proptest::prelude::*;

// high-precision reference values (40 significant digits, rounded)
const FROZEN: [(i32, f64, f64); 13] = [
    (0, 0.3, 0.977626246538296089),
    (1, 1.0, 0.440050585744933516),
    (2, 0.7, 0.0587869443641917059),
    (3, 2.5, 0.216600391039113525),
    (0, 4.0, -0.397149809863847372),
    (1, 5.5, -0.34143821542904335),
    (5, 7.3, 0.313706170897309077),
    (10, 3.0, 0.0000129283516457158838),
    (0, 12.0, 0.0476893107968335366),
    (7, 15.0, 0.0344636554189591649),
    (20, 18.0, 0.0673059474374059691),
    (1, 20.0, 0.0668331241758500456),
    (30, 10.0, 1.55109607825746701e-12),
];

#[test]
fn frozen_reference_values() {
    for &(n, z, want) in &FROZEN {
        let got = bessel_j(n, z).unwrap();
        let err = (got - want).abs();
        assert!(err <= 1e-13 * want.abs().max(1e-3), "J_{n}({z}) = {got}, want {want}");
    }
}

#[test]
fn j1_at_one_matches_series() {
    let s = bessel_series(1, 1.0);
    assert!((s - 0.4400505857449335).abs() < 1e-16);
    assert!((bessel_j(1, 1.0).unwrap() - 0.4400505857449335).abs() < 1e-15);
}

#[test]
fn trivial_values() {
    assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
    assert_eq!(bessel_j(3, 0.0).unwrap(), 0.0);
    assert_eq!(bessel_j(-2, 0.7).unwrap(), bessel_j(2, 0.7).unwrap());
    assert_eq!(bessel_j(-3, 0.7).unwrap(), -bessel_j(3, 0.7).unwrap());
}

#[test]
fn rejects_bad_arguments() {
    assert!(matches!(bessel_j(0, f64::NAN), Err(Error::NonFiniteArgument)));
    assert!(matches!(bessel_j(0, f64::INFINITY), Err(Error::NonFiniteArgument)));
    assert!(bessel_j(10_000, 1.0).is_err());
}

#[test]
fn agrees_with_integral_representation() {
    let mut worst = 0.0f64;
    for n in 0..25 {
        for k in 0..=80 {
            let z = 0.25 * k as f64;
            worst = worst.max((jn(n, z) - bessel_integral(n, z)).abs());
        }
    }
    assert!(worst < 1e-13, "{worst}");
}

#[test]
fn table_matches_pointwise() {
    let t = orders(15, 2.3);
    for (n, v) in t.iter().enumerate() {
        assert!((v - jn(n as i32, 2.3)).abs() < 1e-15);
    }
}

proptest! {
    #[test]
    fn recurrence(z in 0.1f64..10.0, n in 1i32..=30) {
        let lhs = jn(n - 1, z) + jn(n + 1, z);
        let rhs = 2.0 * n as f64 / z * jn(n, z);
        let scale = lhs.abs().max(rhs.abs()).max(jn(n - 1, z).abs()).max(1e-300);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * scale, "n={} z={} {} {}", n, z, lhs, rhs);
    }

    #[test]
    fn normalization(z in 0.0f64..=5.0) {
        let s: f64 = jn(0, z).powi(2) + 2.0 * (1..=40).map(|n| jn(n, z).powi(2)).sum::<f64>();
        prop_assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn parity(z in -10.0f64..10.0, n in -20i32..=20) {
        let a = jn(n, -z);
        let b = if n.rem_euclid(2) == 0 { jn(n, z) } else { -jn(n, z) };
        prop_assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn series_oracle_small_z(z in 0.0f64..3.0, n in 0u32..12) {
        prop_assert!((jn(n as i32, z) - bessel_series(n, z)).abs() < 1e-15);
    }
}
