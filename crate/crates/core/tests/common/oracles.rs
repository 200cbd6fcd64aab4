//! Independent reference computations used as test oracles.

/// Gamma at positive integers and half-integers, by recursion from 1 and 1/2.
pub fn gamma_half_integer(x: f64) -> f64 {
    let twice = (2.0 * x).round() as i64;
    assert!(twice >= 1 && (2.0 * x - twice as f64).abs() < 1e-12);
    let (mut g, mut at) = if twice % 2 == 0 {
        (1.0, 1.0)
    } else {
        (std::f64::consts::PI.sqrt(), 0.5)
    };
    while at < x - 1e-12 {
        g *= at;
        at += 1.0;
    }
    g
}

pub fn t_density(t: f64, nu: f64) -> f64 {
    let c = gamma_half_integer((nu + 1.0) / 2.0) / ((nu * std::f64::consts::PI).sqrt() * gamma_half_integer(nu / 2.0));
    c * (1.0 + t * t / nu).powf(-(nu + 1.0) / 2.0)
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let m = 0.5 * (a + b);
    (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
}

fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let left = simpson(f, a, m);
    let right = simpson(f, m, b);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        adaptive(f, a, m, left, tol / 2.0, depth - 1) + adaptive(f, m, b, right, tol / 2.0, depth - 1)
    }
}

pub fn quadrature_cdf(z: f64, nu: f64) -> f64 {
    let f = |t: f64| t_density(t, nu);
    let area = adaptive(&f, 0.0, z, simpson(&f, 0.0, z), 1e-14, 50);
    0.5 + area
}

/// Welford mean and sample standard deviation of `ln x`.
pub fn welford(samples: &[f64]) -> (f64, f64) {
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (k, &x) in samples.iter().enumerate() {
        let v = x.ln();
        let d = v - mean;
        mean += d / (k + 1) as f64;
        m2 += d * (v - mean);
    }
    (mean, (m2 / (samples.len() - 1) as f64).sqrt())
}
