//! Gamma-function helpers and a small FFT convolution cache.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// `1/Γ(x)`, exactly zero at the poles `x = 0, -1, -2, ...`.
pub fn rgamma(x: f64) -> f64 {
    if x == x.round() && x <= 0.0 {
        0.0
    } else if x == x.round() && x <= 21.0 {
        // Exact factorial: keeps 1/Γ(1) = 1 and friends bit-exact.
        1.0 / (2..x as u64).product::<u64>() as f64
    } else {
        1.0 / gamma(x)
    }
}

/// Linear convolution against a fixed real sequence through a cached FFT.
pub(crate) struct FftConvolver {
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    kernel_hat: Vec<Complex64>,
}

impl std::fmt::Debug for FftConvolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftConvolver").field("size", &self.size).finish()
    }
}

impl FftConvolver {
    /// Prepares `kernel * signal` for signals up to `max_signal` samples.
    pub fn new(kernel: &[f64], max_signal: usize) -> Self {
        let size = fft_size(kernel.len() + max_signal - 1);
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(size);
        let inverse = planner.plan_fft_inverse(size);
        let mut kernel_hat = vec![Complex64::new(0.0, 0.0); size];
        for (dst, &w) in kernel_hat.iter_mut().zip(kernel) {
            dst.re = w;
        }
        forward.process(&mut kernel_hat);
        let scale = 1.0 / size as f64;
        for k in kernel_hat.iter_mut() {
            *k *= scale;
        }
        FftConvolver {
            size,
            forward,
            inverse,
            kernel_hat,
        }
    }

    /// Full linear convolution; entry `m` is `sum_j kernel[m - j] * signal[j]`.
    pub fn convolve(&self, signal: &[f64]) -> Vec<f64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.size];
        for (dst, &s) in buf.iter_mut().zip(signal) {
            dst.re = s;
        }
        self.forward.process(&mut buf);
        for (b, k) in buf.iter_mut().zip(&self.kernel_hat) {
            *b *= k;
        }
        self.inverse.process(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }
}

/// Smallest 2^a 3^b 5^c at or above `n`.
pub(crate) fn fft_size(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}
