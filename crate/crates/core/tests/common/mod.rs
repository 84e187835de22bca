//! Reference computations used by the integration tests. Each one takes a
//! different route from the library code it checks.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Gaussian tail `Q(x)` by composite Simpson quadrature of the normal
/// density over `[0, x]`.
pub fn q_by_quadrature(x: f64) -> f64 {
    if x == 0.0 {
        return 0.5;
    }
    let n = 40_000;
    let h = x / n as f64;
    let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * PI).sqrt();
    let mut acc = pdf(0.0) + pdf(x);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * pdf(i as f64 * h);
    }
    0.5 - acc * h / 3.0
}

/// Sightline height at `x` using the two-point form anchored at the receiver.
pub fn sightline_from_rx(x: f64, length: f64, tx_tip: f64, rx_tip: f64) -> f64 {
    rx_tip - (rx_tip - tx_tip) * (length - x) / length
}

/// Index and height of the interior point furthest above the sightline,
/// earliest index on ties.
pub fn brute_force_obstacle(
    distances: &[f64],
    elevations: &[f64],
    tx_height: f64,
    rx_height: f64,
) -> (usize, f64) {
    let n = distances.len();
    let length = distances[n - 1];
    let tx_tip = elevations[0] + tx_height;
    let rx_tip = elevations[n - 1] + rx_height;
    let mut best = (usize::MAX, f64::NEG_INFINITY);
    for i in 1..n - 1 {
        let h = elevations[i] - sightline_from_rx(distances[i], length, tx_tip, rx_tip);
        if h > best.1 {
            best = (i, h);
        }
    }
    best
}

/// Free-space loss in dB via natural logarithms.
pub fn free_space_db(wavelength: f64, distance: f64) -> f64 {
    let ratio = (4.0 * PI * distance / wavelength).powi(2);
    10.0 * ratio.ln() / std::f64::consts::LN_10
}

/// Direct plus reflected ray, `(λ/4π)² |e^{-jkr1}/r1 + R e^{-jkr2}/r2|²`,
/// expanded into real arithmetic.
pub fn two_ray_phasor(wavelength: f64, r1: f64, r2: f64, re: f64, im: f64) -> f64 {
    let k = 2.0 * PI / wavelength;
    let (a_re, a_im) = ((k * r1).cos() / r1, -(k * r1).sin() / r1);
    let (b_re0, b_im0) = ((k * r2).cos() / r2, -(k * r2).sin() / r2);
    let b_re = re * b_re0 - im * b_im0;
    let b_im = re * b_im0 + im * b_re0;
    let s = wavelength / (4.0 * PI);
    s * s * ((a_re + b_re).powi(2) + (a_im + b_im).powi(2))
}

/// Normalized autocorrelation of `x` at `lag`.
pub fn autocorrelation(x: &[f64], lag: usize) -> f64 {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let var: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
    let cov: f64 = (0..n - lag)
        .map(|i| (x[i] - mean) * (x[i + lag] - mean))
        .sum();
    cov / var
}

/// First lag at which the autocorrelation drops below one half.
pub fn half_decay_lag(x: &[f64], max_lag: usize) -> Option<usize> {
    (1..max_lag).find(|&k| autocorrelation(x, k) < 0.5)
}

/// Kolmogorov-Smirnov distance between a sample and the unit exponential.
pub fn ks_unit_exponential(mut samples: Vec<f64>) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let cdf = 1.0 - (-x).exp();
            let lo = (cdf - i as f64 / n).abs();
            let hi = ((i + 1) as f64 / n - cdf).abs();
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}
