//! Student-t CDF checked against closed forms and against numerical
//! integration of the density.

mod common;

use common::oracles::{gamma_half_integer, quadrature_cdf};
use proptest::prelude::*;
use rdsim_core::maturity::student_t_cdf;

fn z_grid() -> impl Iterator<Item = f64> {
    (-30..=30).map(|k| k as f64 / 10.0)
}

#[test]
fn oracle_reproduces_known_values() {
    assert!((quadrature_cdf(1.0, 1.0) - 0.75).abs() < 1e-12);
    assert!((quadrature_cdf(2f64.sqrt(), 2.0) - 0.853_553_390_593_273_8).abs() < 1e-12);
    assert!((gamma_half_integer(2.5) - 1.329_340_388_179_137).abs() < 1e-14);
}

#[test]
fn cauchy_closed_form() {
    for z in z_grid() {
        let exact = 0.5 + z.atan() / std::f64::consts::PI;
        assert!((student_t_cdf(z, 1.0) - exact).abs() < 1e-10, "z={z}");
    }
}

#[test]
fn two_degrees_closed_form() {
    for z in z_grid() {
        let exact = 0.5 + z / (2.0 * (2.0 + z * z).sqrt());
        assert!((student_t_cdf(z, 2.0) - exact).abs() < 1e-10, "z={z}");
    }
}

#[test]
fn matches_quadrature_at_five_and_thirty_degrees() {
    for nu in [5.0, 30.0] {
        for z in z_grid() {
            let got = student_t_cdf(z, nu);
            let want = quadrature_cdf(z, nu);
            assert!((got - want).abs() < 1e-8, "nu={nu} z={z}: {got} vs {want}");
        }
    }
}

#[test]
fn documented_points() {
    assert_eq!(student_t_cdf(0.0, 7.0), 0.5);
    assert!((student_t_cdf(1.0, 30.0) - 0.8413).abs() < 0.01);
    assert_eq!(student_t_cdf(f64::INFINITY, 3.0), 1.0);
    assert_eq!(student_t_cdf(f64::NEG_INFINITY, 3.0), 0.0);
}

proptest! {
    #[test]
    fn symmetric_and_monotone(z in -50.0f64..50.0, dz in 0.0f64..5.0, nu in 1.0f64..200.0) {
        let lo = student_t_cdf(z, nu);
        let hi = student_t_cdf(z + dz, nu);
        prop_assert!(hi >= lo);
        prop_assert!((lo + student_t_cdf(-z, nu) - 1.0).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&lo));
    }
}
