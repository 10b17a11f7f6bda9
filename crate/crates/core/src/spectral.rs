//! FFT helpers on uniform periodic grids.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

/// Forward and inverse plans for one transform length.
pub struct Transform {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    len: usize,
}

impl Transform {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn forward(&self, data: &mut [C64]) {
        self.forward.process(data);
    }

    /// Normalized inverse, so `inverse(forward(x)) = x`.
    pub fn inverse(&self, data: &mut [C64]) {
        self.inverse.process(data);
        let s = 1.0 / self.len as f64;
        data.iter_mut().for_each(|x| *x *= s);
    }
}

/// Signed integer frequency of FFT bin `k` (Nyquist bin counted as negative).
pub fn signed_index(k: usize, n: usize) -> i64 {
    if k < n.div_ceil(2) {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Angular frequencies `2πk/(n h)` of the FFT bins.
pub fn angular_frequencies(n: usize, h: f64) -> Vec<f64> {
    (0..n)
        .map(|k| 2.0 * PI * signed_index(k, n) as f64 / (n as f64 * h))
        .collect()
}

/// Fraction of spectral energy in bins with `|k| > cutoff·n/2`.
pub fn tail_energy_fraction(spectrum: &[C64], cutoff: f64) -> f64 {
    let n = spectrum.len();
    let limit = cutoff * n as f64 / 2.0;
    let (mut tail, mut total) = (0.0, 0.0);
    for (k, c) in spectrum.iter().enumerate() {
        let e = c.norm_sqr();
        total += e;
        if (signed_index(k, n).unsigned_abs() as f64) > limit {
            tail += e;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        tail / total
    }
}

/// Smooth step: 0 for `t ≤ 0`, 1 for `t ≥ 1`, `C^∞` in between.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}
