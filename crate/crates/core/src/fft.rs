//! Thin spectral layer over `rustfft`.
//!
//! Conventions used throughout the crate: for a signal `f` on the grid,
//! the normalized coefficient is `f̂(m) = (1/N) Σ_i f(x_i) e^{-2πi m x_i}`
//! and the inverse is the plain sum `Σ_m f̂(m) e^{2πi m x}`. A periodic
//! convolution `(k * f)(x) = ∫ k(x - y) f(y) dy` is then `Σ_m k̂(m) f̂(m) e^{2πi m x}`.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// Signed frequency of FFT bin `i` on an `n`-point grid. The Nyquist bin
/// `n/2` is reported as `+n/2`.
pub fn frequency(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Normalized forward transform `f̂(m)`, indexed by FFT bin.
pub fn spectrum(values: &[Complex64]) -> Vec<Complex64> {
    let n = values.len();
    let mut buf = values.to_vec();
    plan(n, false).process(&mut buf);
    let scale = 1.0 / n as f64;
    for v in &mut buf {
        *v *= scale;
    }
    buf
}

/// Unnormalized forward transform `Σ_i a_i e^{-2πi m x_i}`.
pub fn forward_unnormalized(values: &[Complex64]) -> Vec<Complex64> {
    let mut buf = values.to_vec();
    plan(buf.len(), false).process(&mut buf);
    buf
}

/// Plain inverse sum `Σ_m c_m e^{2πi m x_i}`.
pub fn inverse(coefficients: &[Complex64]) -> Vec<Complex64> {
    let mut buf = coefficients.to_vec();
    plan(buf.len(), true).process(&mut buf);
    buf
}
