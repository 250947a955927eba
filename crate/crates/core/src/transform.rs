//! Sine and cosine series on the interior nodes of a uniform radial grid.
//!
//! With `N = n + 1` and nodes `r_j = j * r_max / N`, a radial function
//! `v = r u` vanishing at both ends is expanded as
//! `v(r_j) = sum_k b_k sin(k pi j / N)`, `k = 1..n`. Both transforms are
//! computed through one complex FFT of length `2N` on the odd or even
//! extension of the data.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Scratch space for [`SineTransform::dst_in_place`].
pub struct Workspace {
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

pub struct SineTransform {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for SineTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SineTransform").field("n", &self.n).finish()
    }
}

impl SineTransform {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(2 * (n + 1));
        Self { n, fft }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Unnormalized DST-I: `out_k = sum_j x_j sin(pi j k / N)`.
    pub fn dst(&self, x: &[Complex64], out: &mut [Complex64]) {
        let n = self.n;
        assert_eq!(x.len(), n);
        assert_eq!(out.len(), n);
        let big = 2 * (n + 1);
        let mut buf = vec![Complex64::new(0.0, 0.0); big];
        for j in 0..n {
            buf[j + 1] = x[j];
            buf[big - 1 - j] = -x[j];
        }
        self.fft.process(&mut buf);
        // Y_k = -2i * sum_j x_j sin(pi j k / N)
        for k in 0..n {
            let y = buf[k + 1];
            out[k] = Complex64::new(-y.im * 0.5, y.re * 0.5);
        }
    }

    pub fn workspace(&self) -> Workspace {
        Workspace {
            buf: vec![Complex64::new(0.0, 0.0); 2 * (self.n + 1)],
            scratch: vec![Complex64::new(0.0, 0.0); self.fft.get_inplace_scratch_len()],
        }
    }

    /// In-place unnormalized DST-I with caller-owned buffers.
    pub fn dst_in_place(&self, x: &mut [Complex64], ws: &mut Workspace) {
        let n = self.n;
        assert_eq!(x.len(), n);
        let big = 2 * (n + 1);
        let buf = &mut ws.buf;
        buf[0] = Complex64::new(0.0, 0.0);
        buf[n + 1] = Complex64::new(0.0, 0.0);
        for j in 0..n {
            buf[j + 1] = x[j];
            buf[big - 1 - j] = -x[j];
        }
        self.fft.process_with_scratch(buf, &mut ws.scratch);
        for k in 0..n {
            let y = buf[k + 1];
            x[k] = Complex64::new(-y.im * 0.5, y.re * 0.5);
        }
    }

    /// Sine coefficients `b` with `x_j = sum_k b_k sin(pi j k / N)`.
    pub fn analyze(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.n];
        self.dst(x, &mut out);
        let s = 2.0 / (self.n + 1) as f64;
        for v in out.iter_mut() {
            *v *= s;
        }
        out
    }

    /// Inverse of [`analyze`](Self::analyze).
    pub fn synthesize(&self, b: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.n];
        self.dst(b, &mut out);
        out
    }

    /// Cosine synthesis `out_j = sum_k c_k cos(pi j k / N)` for `j = 0..=N`.
    pub fn cosine_synthesize(&self, c: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        assert_eq!(c.len(), n);
        let big = 2 * (n + 1);
        let mut buf = vec![Complex64::new(0.0, 0.0); big];
        for k in 0..n {
            buf[k + 1] = c[k];
            buf[big - 1 - k] = c[k];
        }
        self.fft.process(&mut buf);
        buf.truncate(n + 2);
        for v in buf.iter_mut() {
            *v *= 0.5;
        }
        buf
    }
}
