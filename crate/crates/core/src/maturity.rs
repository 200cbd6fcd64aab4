//! Probabilistic maturity from normalized progress across Monte-Carlo runs.
//!
//! Progress `x(t)` is the share of closed tasks. Across runs, `ln x` is fitted
//! with a Student-t location-scale model (sample mean, sample standard
//! deviation, `nu = n - 1`), and maturity at `t` is the fitted probability
//! that a run's progress meets or exceeds the target:
//!
//! ```text
//! maturity(t) = 1 - T_nu((ln x_target - mu_hat) / sigma)
//! ```

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::scenario::ScenarioConfig;
use crate::trace::RunTrace;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`; `y` must equal `1 - x` and is
/// passed separately so callers can supply it without cancellation.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64, y: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if y <= 0.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * y.ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, y) / b
    }
}

/// Student-t cumulative distribution with `nu` degrees of freedom.
pub fn student_t_cdf(z: f64, nu: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z.is_infinite() {
        return if z > 0.0 { 1.0 } else { 0.0 };
    }
    let z2 = z * z;
    let x = nu / (nu + z2);
    let y = z2 / (nu + z2);
    let tail = 0.5 * regularized_incomplete_beta(0.5 * nu, 0.5, x, y);
    if z >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Location, scale and degrees of freedom of `ln x` across runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogTFit {
    pub mu_hat: f64,
    pub sigma: f64,
    pub nu: f64,
}

pub fn fit_log_t(samples: &[f64]) -> Result<LogTFit> {
    if samples.len() < 2 {
        return Err(SimError::InsufficientData(samples.len()));
    }
    if let Some(&bad) = samples.iter().find(|&&x| !(x > 0.0 && x <= 1.0)) {
        return Err(SimError::SampleOutOfRange(bad));
    }
    let logs: Vec<f64> = samples.iter().map(|x| x.ln()).collect();
    let n = logs.len() as f64;
    let mu_hat = logs.iter().sum::<f64>() / n;
    let sigma = if logs.iter().all(|&l| l == logs[0]) {
        0.0
    } else {
        (logs.iter().map(|l| (l - mu_hat).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Ok(LogTFit {
        mu_hat,
        sigma,
        nu: n - 1.0,
    })
}

/// Maturity from a fit: survival probability at the target, or a step when
/// the runs do not vary.
pub fn maturity_from_fit(fit: &LogTFit, x_target: f64) -> f64 {
    let threshold = x_target.ln();
    if fit.sigma == 0.0 {
        return if fit.mu_hat >= threshold { 1.0 } else { 0.0 };
    }
    1.0 - student_t_cdf((threshold - fit.mu_hat) / fit.sigma, fit.nu)
}

/// Probability that a run's progress meets or exceeds `x_target`.
pub fn maturity_at(samples: &[f64], x_target: f64) -> Result<f64> {
    Ok(maturity_from_fit(&fit_log_t(samples)?, x_target))
}

/// Closed share of tasks at time `t`.
pub fn normalized_progress(trace: &RunTrace, t: f64) -> f64 {
    let n = trace.n_tasks();
    if n == 0 {
        return 1.0;
    }
    trace.closed_at(t) as f64 / n as f64
}

/// Progress floored at `1 / (2 N)` so it can be log-transformed.
pub fn clamp_for_log(x: f64, n_total: usize) -> f64 {
    x.max(1.0 / (2.0 * n_total as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaturityPoint {
    pub time: f64,
    pub maturity_raw: f64,
    pub maturity_smoothed: f64,
    pub mu_hat: f64,
    pub sigma: f64,
    pub nu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaturityCurve {
    pub points: Vec<MaturityPoint>,
    pub n_runs: usize,
    pub x_target: f64,
    pub smoothing_window: f64,
}

pub const CURVE_CSV_COLUMNS: [&str; 6] = ["time", "maturity_raw", "maturity_smoothed", "mu_hat", "sigma", "nu"];

impl MaturityCurve {
    /// First grid time where the smoothed curve reaches `level`.
    pub fn first_crossing(&self, level: f64) -> Option<f64> {
        self.points
            .iter()
            .find(|p| p.maturity_smoothed >= level)
            .map(|p| p.time)
    }

    /// Grid times where the raw curve drops relative to the previous point.
    pub fn raw_decreases(&self) -> Vec<(f64, f64)> {
        self.points
            .windows(2)
            .filter(|w| w[1].maturity_raw < w[0].maturity_raw)
            .map(|w| (w[1].time, w[0].maturity_raw - w[1].maturity_raw))
            .collect()
    }

    pub fn smoothed_at(&self, t: f64) -> Option<f64> {
        self.points
            .iter()
            .rev()
            .find(|p| p.time <= t + 1e-9)
            .map(|p| p.maturity_smoothed)
    }

    pub fn to_csv(&self) -> String {
        let mut out = CURVE_CSV_COLUMNS.join(",");
        out.push('\n');
        for p in &self.points {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                p.time, p.maturity_raw, p.maturity_smoothed, p.mu_hat, p.sigma, p.nu
            );
        }
        out
    }
}

/// Centered moving average over `2 * half + 1` points, truncated at the ends.
pub fn centered_moving_average(values: &[f64], half: usize) -> Vec<f64> {
    (0..values.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(values.len() - 1);
            values[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect()
}

/// Maturity over the grid `0, dt, ..., horizon`, raw and smoothed.
pub fn maturity_curve(traces: &[RunTrace], cfg: &ScenarioConfig) -> Result<MaturityCurve> {
    if traces.len() < 2 {
        return Err(SimError::InsufficientData(traces.len()));
    }
    let dt = cfg.timestep;
    let n_total = traces[0].n_tasks();
    let steps = (cfg.effective_horizon() / dt + 1e-9).floor() as usize;

    let mut points = Vec::with_capacity(steps + 1);
    let mut samples = vec![0.0; traces.len()];
    for k in 0..=steps {
        let t = k as f64 * dt;
        for (s, tr) in samples.iter_mut().zip(traces) {
            *s = clamp_for_log(normalized_progress(tr, t), n_total);
        }
        let fit = fit_log_t(&samples)?;
        points.push(MaturityPoint {
            time: t,
            maturity_raw: maturity_from_fit(&fit, cfg.maturity_threshold),
            maturity_smoothed: 0.0,
            mu_hat: fit.mu_hat,
            sigma: fit.sigma,
            nu: fit.nu,
        });
    }

    let half = (cfg.smoothing_window / dt / 2.0 + 1e-9).floor() as usize;
    let raw: Vec<f64> = points.iter().map(|p| p.maturity_raw).collect();
    for (p, s) in points.iter_mut().zip(centered_moving_average(&raw, half)) {
        p.maturity_smoothed = s;
    }
    Ok(MaturityCurve {
        points,
        n_runs: traces.len(),
        x_target: cfg.maturity_threshold,
        smoothing_window: cfg.smoothing_window,
    })
}
