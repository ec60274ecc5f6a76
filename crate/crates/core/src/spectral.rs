//! FFT helpers for periodic grid samples.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Normalized Fourier coefficients `ĉ_k = (1/N) Σ_j f_j e^{−2πikj/N}` in FFT
/// order (index `j` holds mode `j` for `j < N/2`, mode `j − N` otherwise).
pub fn forward(samples: &[Complex64]) -> Vec<Complex64> {
    let n = samples.len();
    let mut buf = samples.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let inv = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= inv);
    buf
}

/// Inverse of [`forward`].
pub fn inverse(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len();
    let mut buf = coeffs.to_vec();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    buf
}

pub fn forward_real(samples: &[f64]) -> Vec<Complex64> {
    let c: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    forward(&c)
}

/// Signed mode number of FFT index `j` for grid size `n`.
pub fn mode(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// FFT index of mode `k` (requires `|k| < n/2`).
pub fn index(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}

/// `order`-th derivative of periodic samples with the given period.
pub fn derivative(samples: &[f64], period: f64, order: u32) -> Vec<f64> {
    if order == 0 {
        return samples.to_vec();
    }
    let n = samples.len();
    let mut c = forward_real(samples);
    for (j, cj) in c.iter_mut().enumerate() {
        let k = mode(j, n);
        if n % 2 == 0 && j == n / 2 {
            *cj = Complex64::new(0.0, 0.0);
            continue;
        }
        let w = Complex64::new(0.0, 2.0 * PI * k as f64 / period);
        *cj *= w.powu(order);
    }
    inverse(&c).into_iter().map(|z| z.re).collect()
}

/// Evaluate the trigonometric interpolant of the samples at `t`.
pub fn interpolate(coeffs: &[Complex64], period: f64, t: f64) -> Complex64 {
    let n = coeffs.len();
    let mut acc = Complex64::new(0.0, 0.0);
    let base = Complex64::from_polar(1.0, 2.0 * PI * t / period);
    let half = n / 2;
    // positive modes
    let mut e = Complex64::new(1.0, 0.0);
    for cj in coeffs.iter().take(half) {
        acc += cj * e;
        e *= base;
    }
    // negative modes
    let inv = base.conj();
    let mut e = inv;
    for j in (half + 1..n).rev() {
        acc += coeffs[j] * e;
        e *= inv;
    }
    if n % 2 == 0 && n > 1 {
        // split the Nyquist mode symmetrically
        let ang = PI * n as f64 * t / period;
        acc += coeffs[half] * ang.cos();
    }
    acc
}

/// Periodic linear interpolation of equispaced samples on `[0, period)`.
pub fn linear_periodic<T>(samples: &[T], period: f64, t: f64) -> T
where
    T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
{
    let n = samples.len();
    let s = (t / period).rem_euclid(1.0) * n as f64;
    let j = (s.floor() as usize).min(n - 1);
    let w = s - j as f64;
    samples[j] * (1.0 - w) + samples[(j + 1) % n] * w
}

/// Trapezoid (equivalently rectangle) mean of periodic samples.
pub fn mean(samples: &[f64]) -> f64 {
    samples.iter().sum::<f64>() / samples.len() as f64
}
