//! Zero-padded linear convolution through the FFT.

use std::sync::Arc;

use num_complex::Complex;
use num_traits::Zero;
use rustfft::{Fft, FftPlanner};

use crate::scalar::Scalar;

/// Plans forward/inverse FFTs once for a fixed pair of input lengths and
/// computes full linear (non-circular) convolutions of length
/// `signal_len + kernel_len - 1`.
#[derive(Clone)]
pub struct LinearConvolver<T: Scalar> {
    signal_len: usize,
    kernel_len: usize,
    padded: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Scalar> LinearConvolver<T> {
    pub fn new(signal_len: usize, kernel_len: usize) -> Self {
        assert!(signal_len > 0 && kernel_len > 0, "convolution inputs must be non-empty");
        let padded = (signal_len + kernel_len - 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        Self {
            signal_len,
            kernel_len,
            padded,
            forward: planner.plan_fft_forward(padded),
            inverse: planner.plan_fft_inverse(padded),
        }
    }

    pub fn output_len(&self) -> usize {
        self.signal_len + self.kernel_len - 1
    }

    /// Spectrum of a zero-padded input. Reusable across calls with the same
    /// signal or kernel.
    pub fn spectrum(&self, input: &[Complex<T>]) -> Vec<Complex<T>> {
        assert!(input.len() <= self.padded);
        let mut buf = vec![Complex::zero(); self.padded];
        buf[..input.len()].copy_from_slice(input);
        self.forward.process(&mut buf);
        buf
    }

    /// Full linear convolution from two precomputed spectra.
    pub fn convolve_spectra(&self, a: &[Complex<T>], b: &[Complex<T>]) -> Vec<Complex<T>> {
        let scale = T::from_usize_lossy(self.padded).recip();
        let mut buf: Vec<Complex<T>> = a.iter().zip(b).map(|(x, y)| x * y * scale).collect();
        self.inverse.process(&mut buf);
        buf.truncate(self.output_len());
        buf
    }

    pub fn convolve(&self, signal: &[Complex<T>], kernel: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(signal.len(), self.signal_len);
        assert_eq!(kernel.len(), self.kernel_len);
        self.convolve_spectra(&self.spectrum(signal), &self.spectrum(kernel))
    }
}

/// Direct O(n m) linear convolution.
pub fn convolve_direct<T: Scalar>(signal: &[Complex<T>], kernel: &[Complex<T>]) -> Vec<Complex<T>> {
    let mut out = vec![Complex::zero(); signal.len() + kernel.len() - 1];
    for (i, &s) in signal.iter().enumerate() {
        for (j, &k) in kernel.iter().enumerate() {
            out[i + j] = out[i + j] + s * k;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cplx(v: &[(f64, f64)]) -> Vec<Complex<f64>> {
        v.iter().map(|&(r, i)| Complex::new(r, i)).collect()
    }

    #[test]
    fn small_known_convolution() {
        let a = cplx(&[(1.0, 0.0), (2.0, 0.0), (3.0, 0.0)]);
        let b = cplx(&[(0.0, 1.0), (1.0, 0.0)]);
        let conv = LinearConvolver::new(3, 2).convolve(&a, &b);
        let want = cplx(&[(0.0, 1.0), (1.0, 2.0), (2.0, 3.0), (3.0, 0.0)]);
        for (x, y) in conv.iter().zip(&want) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn fft_matches_direct(
            a in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..40),
            b in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..40),
        ) {
            let a = cplx(&a);
            let b = cplx(&b);
            let fast = LinearConvolver::new(a.len(), b.len()).convolve(&a, &b);
            let slow = convolve_direct(&a, &b);
            prop_assert_eq!(fast.len(), slow.len());
            for (x, y) in fast.iter().zip(&slow) {
                prop_assert!((x - y).norm() < 1e-12);
            }
        }
    }
}
