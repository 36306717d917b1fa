//! Iterative in-place radix-2 FFT.
//!
//! The plan is immutable after construction and may be shared between threads.
//! Transforms are unnormalised; callers apply the `1/√N` factor.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{FpuError, Result};
use crate::unimodular::snap_unit;

/// Sign of the exponent in `Σ x_j exp(sign · 2πi jk/N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Positive,
    Negative,
}

#[derive(Debug, Clone)]
pub struct Radix2Plan {
    len: usize,
    /// `exp(+2πi k/N)` for `k < N/2`.
    twiddles: Vec<Complex64>,
    bit_reverse: Vec<usize>,
}

impl Radix2Plan {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 || !len.is_power_of_two() {
            return Err(FpuError::InvalidParams(format!(
                "transform length {len} is not a power of two"
            )));
        }
        let bits = len.trailing_zeros();
        let bit_reverse = (0..len)
            .map(|i| {
                if bits == 0 {
                    0
                } else {
                    i.reverse_bits() >> (usize::BITS - bits)
                }
            })
            .collect();
        let twiddles = (0..len / 2).map(|k| twiddle(k, len)).collect();
        Ok(Self {
            len,
            twiddles,
            bit_reverse,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Positive exponents run decimation in time; negative exponents run its
    /// exact adjoint (decimation in frequency with conjugate twiddles, stages
    /// reversed), so a forward/backward round trip only accumulates the
    /// `|w|² − 1` defect of each twiddle rather than its full rounding error.
    pub fn process(&self, data: &mut [Complex64], direction: Direction) {
        assert_eq!(data.len(), self.len, "buffer length does not match plan");
        match direction {
            Direction::Positive => {
                self.permute(data);
                self.decimate_in_time(data);
            }
            Direction::Negative => {
                self.decimate_in_frequency(data);
                self.permute(data);
            }
        }
    }

    fn permute(&self, data: &mut [Complex64]) {
        for i in 0..self.len {
            let j = self.bit_reverse[i];
            if j > i {
                data.swap(i, j);
            }
        }
    }

    fn decimate_in_time(&self, data: &mut [Complex64]) {
        let n = self.len;
        let mut half = 1;
        while half < n {
            let stride = n / (2 * half);
            for start in (0..n).step_by(2 * half) {
                for k in 0..half {
                    let w = self.twiddles[k * stride];
                    let a = data[start + k];
                    let b = data[start + k + half] * w;
                    data[start + k] = a + b;
                    data[start + k + half] = a - b;
                }
            }
            half *= 2;
        }
    }

    fn decimate_in_frequency(&self, data: &mut [Complex64]) {
        let n = self.len;
        let mut half = n / 2;
        while half >= 1 {
            let stride = n / (2 * half);
            for start in (0..n).step_by(2 * half) {
                for k in 0..half {
                    let w = self.twiddles[k * stride].conj();
                    let a = data[start + k];
                    let b = data[start + k + half];
                    data[start + k] = a + b;
                    data[start + k + half] = (a - b) * w;
                }
            }
            half /= 2;
        }
    }
}

/// `exp(2πi k/n)` for `k < n/2`, folded into the first octant so the table
/// is exactly symmetric and hits `1` and `i` without rounding.
fn twiddle(k: usize, n: usize) -> Complex64 {
    // Sine and cosine of 2π m/(4n), an angle of at most π/4.
    let octant = |m: usize| {
        let (s, c) = (2.0 * PI * m as f64 / (4 * n) as f64).sin_cos();
        (c, s)
    };
    let (re, im) = match 8 * k {
        e if e <= n => octant(4 * k),
        e if e <= 2 * n => {
            let (c, s) = octant(n - 4 * k);
            (s, c)
        }
        e if e <= 3 * n => {
            let (c, s) = octant(4 * k - n);
            (-s, c)
        }
        _ => {
            let (c, s) = octant(2 * n - 4 * k);
            (-c, s)
        }
    };
    let (re, im) = snap_unit(re, im);
    Complex64::new(re, im)
}
