//! Log-t fit and maturity probability against independent recomputation.

mod common;

use common::oracles::welford;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rdsim_core::maturity::{clamp_for_log, fit_log_t, maturity_at};
use rdsim_core::SimError;

#[test]
fn fit_matches_brute_force_on_random_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..1000 {
        let n = 2 + (rng.next_u64() % 199) as usize;
        let samples: Vec<f64> = (0..n)
            .map(|_| {
                let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
                1.0 - u * 0.999
            })
            .collect();
        let fit = fit_log_t(&samples).unwrap();
        let (mu, sigma) = welford(&samples);
        assert!((fit.mu_hat - mu).abs() < 1e-12, "mu {} vs {mu}", fit.mu_hat);
        assert!((fit.sigma - sigma).abs() < 1e-12, "sigma {} vs {sigma}", fit.sigma);
        assert_eq!(fit.nu, (n - 1) as f64);
    }
}

#[test]
fn two_point_fit() {
    let fit = fit_log_t(&[1f64.exp() / 100.0, 3f64.exp() / 100.0]).unwrap();
    assert!((fit.mu_hat - (2.0 - 100f64.ln())).abs() < 1e-12);
    assert!((fit.sigma - 2f64.sqrt()).abs() < 1e-12);
    assert_eq!(fit.nu, 1.0);
}

#[test]
fn degenerate_and_invalid_samples() {
    let fit = fit_log_t(&[0.4; 6]).unwrap();
    assert_eq!((fit.mu_hat, fit.sigma, fit.nu), (0.4f64.ln(), 0.0, 5.0));
    assert!(matches!(fit_log_t(&[0.5]), Err(SimError::InsufficientData(1))));
    assert!(matches!(fit_log_t(&[0.5, 0.0]), Err(SimError::SampleOutOfRange(_))));
}

#[test]
fn maturity_examples() {
    assert_eq!(maturity_at(&[1.0; 10], 0.99).unwrap(), 1.0);
    assert_eq!(maturity_at(&[0.1; 10], 0.99).unwrap(), 0.0);

    let mu = (0.5f64.ln() + 0.9f64.ln()) / 2.0;
    let sigma = (0.9f64.ln() - 0.5f64.ln()).abs() / 2f64.sqrt();
    let z = (0.99f64.ln() - mu) / sigma;
    let cauchy = 0.5 + z.atan() / std::f64::consts::PI;
    assert!((maturity_at(&[0.5, 0.9], 0.99).unwrap() - (1.0 - cauchy)).abs() < 1e-12);
}

#[test]
fn zero_progress_is_clamped() {
    assert_eq!(clamp_for_log(0.0, 15), 1.0 / 30.0);
    assert_eq!(clamp_for_log(1.0, 15), 1.0);
    assert!((clamp_for_log(10.0 / 15.0, 15) - 0.6667).abs() < 1e-4);
}

#[test]
fn fitted_maturity_can_fall_when_a_run_advances() {
    // The lagging run moving forward shrinks the spread faster than it lifts
    // the mean, so the fitted upper tail loses mass.
    let before = maturity_at(&[0.2, 0.8, 0.8], 0.99).unwrap();
    let after = maturity_at(&[0.4, 0.8, 0.8], 0.99).unwrap();
    assert!((before - 0.243_855).abs() < 1e-5, "{before}");
    assert!((after - 0.191_319).abs() < 1e-5, "{after}");
    assert!(after < before);
}
