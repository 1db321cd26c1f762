//! Uniform-grid interpolation kernels: natural cubic splines in `v` and
//! trigonometric (FFT) shifts and derivatives in the periodic `q` direction.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Natural cubic spline through `values` at nodes `x0 + i h`.
pub struct UniformSpline<'a> {
    x0: f64,
    h: f64,
    values: &'a [Complex64],
    second: Vec<Complex64>,
}

impl<'a> UniformSpline<'a> {
    pub fn new(x0: f64, h: f64, values: &'a [Complex64]) -> Self {
        let n = values.len();
        let mut second = vec![Complex64::new(0.0, 0.0); n];
        if n >= 3 {
            // Thomas algorithm for M_{i-1} + 4 M_i + M_{i+1} = 6 Δ²y_i / h², M_0 = M_{n-1} = 0
            let k = 6.0 / (h * h);
            let mut diag = vec![4.0; n - 2];
            let mut rhs: Vec<Complex64> = (1..n - 1)
                .map(|i| (values[i + 1] - values[i] * 2.0 + values[i - 1]) * k)
                .collect();
            for i in 1..n - 2 {
                let w = 1.0 / diag[i - 1];
                diag[i] -= w;
                let prev = rhs[i - 1];
                rhs[i] -= prev * w;
            }
            second[n - 2] = rhs[n - 3] / diag[n - 3];
            for i in (1..n - 2).rev() {
                second[i] = (rhs[i - 1] - second[i + 1]) / diag[i - 1];
            }
        }
        Self { x0, h, values, second }
    }

    /// Spline value at `x`; zero outside the node range.
    pub fn eval(&self, x: f64) -> Complex64 {
        let n = self.values.len();
        let t = (x - self.x0) / self.h;
        let last = (n - 1) as f64;
        if !(0.0..=last).contains(&t) {
            return Complex64::new(0.0, 0.0);
        }
        let i = (t.floor() as usize).min(n - 2);
        let s = t - i as f64;
        let r = 1.0 - s;
        let h2 = self.h * self.h / 6.0;
        self.values[i] * r
            + self.values[i + 1] * s
            + (self.second[i] * (r * r * r - r) + self.second[i + 1] * (s * s * s - s)) * h2
    }
}

/// Planned forward/inverse FFTs of one size.
#[derive(Clone)]
pub struct Periodic {
    n: usize,
    period: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Periodic {
    pub fn new(n: usize, period: f64) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            period,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    fn frequency(&self, k: usize) -> f64 {
        if k <= self.n / 2 {
            k as f64
        } else {
            k as f64 - self.n as f64
        }
    }

    fn apply(&self, line: &mut [Complex64], multiplier: impl Fn(f64, bool) -> Complex64) {
        self.forward.process(line);
        let nyquist = self.n / 2;
        let scale = 1.0 / self.n as f64;
        for (k, c) in line.iter_mut().enumerate() {
            let is_nyquist = self.n.is_multiple_of(2) && k == nyquist;
            *c *= multiplier(self.frequency(k), is_nyquist) * scale;
        }
        self.inverse.process(line);
    }

    /// Replaces `g(q)` by `g(q + shift)` using the trigonometric interpolant.
    pub fn shift(&self, line: &mut [Complex64], shift: f64) {
        let w = TAU * shift / self.period;
        self.apply(line, |freq, nyquist| {
            if nyquist {
                Complex64::new((freq * w).cos(), 0.0)
            } else {
                Complex64::from_polar(1.0, freq * w)
            }
        });
    }

    /// Spectral derivative `d/dq`.
    pub fn derivative(&self, line: &mut [Complex64]) {
        let w = TAU / self.period;
        self.apply(line, |freq, nyquist| {
            if nyquist {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, freq * w)
            }
        });
    }
}

/// Fourth-order centered first derivative on a uniform grid, second order in
/// the two outermost nodes at each end.
pub fn finite_difference(values: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = values.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    if n < 3 {
        return out;
    }
    out[0] = (values[0] * -3.0 + values[1] * 4.0 - values[2]) / (2.0 * h);
    out[n - 1] = (values[n - 1] * 3.0 - values[n - 2] * 4.0 + values[n - 3]) / (2.0 * h);
    for i in 1..n - 1 {
        out[i] = if i >= 2 && i + 2 < n {
            (values[i - 2] - values[i - 1] * 8.0 + values[i + 1] * 8.0 - values[i + 2]) / (12.0 * h)
        } else {
            (values[i + 1] - values[i - 1]) / (2.0 * h)
        };
    }
    out
}
