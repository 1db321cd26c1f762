//! Discretized `L²(N)` on the window `Π [0, L_j) × [-V, V]^m`.
//!
//! Storage is row-major over the axes `(q_1, …, q_m, v_1, …, v_m)`, last
//! axis fastest. `q` nodes are `j L/n_q` with weight `L/n_q`; `v` nodes are
//! `-V + i h`, `h = 2V/(n_v - 1)`, with trapezoid weights. Values outside
//! the window are taken to be zero.

use std::io::{BufRead, Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::analytic::AnalyticFunction;
use super::interp::{finite_difference, Periodic, UniformSpline};
use crate::affine::AffineElement;
use crate::error::{Error, Result};
use crate::phasespace::TorusConfig;

/// Values below this fraction of the maximum count as outside the support.
pub const SUPPORT_THRESHOLD: f64 = 1e-12;
/// Largest admissible relative value on the outermost `v` nodes.
pub const EDGE_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    config: TorusConfig,
    n_q: usize,
    v_window: f64,
    n_v: usize,
}

impl GridSpec {
    pub fn new(config: TorusConfig, n_q: usize, v_window: f64, n_v: usize) -> Result<Self> {
        if n_q < 8 || !n_q.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("n_q = {n_q} must be a power of two ≥ 8")));
        }
        if n_v < 16 {
            return Err(Error::InvalidGrid(format!("n_v = {n_v} must be at least 16")));
        }
        if !(v_window > 0.0 && v_window.is_finite()) {
            return Err(Error::InvalidGrid(format!("v window {v_window} must be positive")));
        }
        Ok(Self { config, n_q, v_window, n_v })
    }

    /// `n_q = 64`, `V = 8`, `n_v = 1025` over `config`.
    pub fn default_for(config: TorusConfig) -> Self {
        Self {
            config,
            n_q: 64,
            v_window: 8.0,
            n_v: 1025,
        }
    }

    pub fn with_n_v(&self, n_v: usize) -> Result<Self> {
        Self::new(self.config.clone(), self.n_q, self.v_window, n_v)
    }

    pub fn config(&self) -> &TorusConfig {
        &self.config
    }

    pub fn m(&self) -> usize {
        self.config.m()
    }

    pub fn n_q(&self) -> usize {
        self.n_q
    }

    pub fn n_v(&self) -> usize {
        self.n_v
    }

    pub fn v_window(&self) -> f64 {
        self.v_window
    }

    pub fn h(&self) -> f64 {
        2.0 * self.v_window / (self.n_v - 1) as f64
    }

    pub fn q_node(&self, j: usize, idx: usize) -> f64 {
        self.config.periods()[j] * idx as f64 / self.n_q as f64
    }

    pub fn v_node(&self, idx: usize) -> f64 {
        -self.v_window + self.h() * idx as f64
    }

    pub fn shape(&self) -> Vec<usize> {
        let m = self.m();
        let mut shape = vec![self.n_q; m];
        shape.extend(std::iter::repeat_n(self.n_v, m));
        shape
    }

    pub fn len(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn strides(&self) -> Vec<usize> {
        let shape = self.shape();
        let mut strides = vec![1; shape.len()];
        for k in (0..shape.len() - 1).rev() {
            strides[k] = strides[k + 1] * shape[k + 1];
        }
        strides
    }

    fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let shape = self.shape();
        let mut idx = vec![0; shape.len()];
        for k in (0..shape.len()).rev() {
            idx[k] = flat % shape[k];
            flat /= shape[k];
        }
        idx
    }

    /// Node coordinates `(q, v)` of a flat index.
    pub fn coordinates(&self, flat: usize) -> (Vec<f64>, Vec<f64>) {
        let m = self.m();
        let idx = self.multi_index(flat);
        let q = (0..m).map(|j| self.q_node(j, idx[j])).collect();
        let v = (0..m).map(|j| self.v_node(idx[m + j])).collect();
        (q, v)
    }

    /// Visits every node in storage order as `f(flat, multi_index, q, v)`.
    pub(crate) fn for_each_node(&self, mut f: impl FnMut(usize, &[usize], &[f64], &[f64])) {
        let m = self.m();
        let shape = self.shape();
        let mut idx = vec![0usize; 2 * m];
        let mut q: Vec<f64> = (0..m).map(|j| self.q_node(j, 0)).collect();
        let mut v = vec![self.v_node(0); m];
        for flat in 0..self.len() {
            f(flat, &idx, &q, &v);
            for k in (0..2 * m).rev() {
                idx[k] += 1;
                if idx[k] == shape[k] {
                    idx[k] = 0;
                }
                if k < m {
                    q[k] = self.q_node(k, idx[k]);
                } else {
                    v[k - m] = self.v_node(idx[k]);
                }
                if idx[k] != 0 {
                    break;
                }
            }
        }
    }

    fn v_weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.n_v - 1 {
            0.5 * self.h()
        } else {
            self.h()
        }
    }

    /// Quadrature weights in storage order.
    pub fn weights(&self) -> Vec<f64> {
        let m = self.m();
        let q_weight: f64 = self.config.periods().iter().map(|l| l / self.n_q as f64).product();
        let mut out = Vec::with_capacity(self.len());
        self.for_each_node(|_, idx, _, _| {
            out.push((0..m).map(|j| self.v_weight(idx[m + j])).product::<f64>() * q_weight);
        });
        out
    }

    /// `Π L_j · (2V)^m`.
    pub fn total_volume(&self) -> f64 {
        self.config.volume() * (2.0 * self.v_window).powi(self.m() as i32)
    }

    /// Calls `f(multi_index_of_line_start, line)` for every line along `axis`.
    fn for_each_line(&self, values: &mut [Complex64], axis: usize, mut f: impl FnMut(&[usize], &mut [Complex64])) {
        let shape = self.shape();
        let stride = self.strides()[axis];
        let len = shape[axis];
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        for base in 0..values.len() {
            if !(base / stride).is_multiple_of(len) {
                continue;
            }
            let idx = self.multi_index(base);
            for (i, b) in buf.iter_mut().enumerate() {
                *b = values[base + i * stride];
            }
            f(&idx, &mut buf);
            for (i, b) in buf.iter().enumerate() {
                values[base + i * stride] = *b;
            }
        }
    }
}

/// Neumaier summation in iteration order.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for x in values {
        let t = sum + x;
        carry += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
        sum = t;
    }
    sum + carry
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    spec: GridSpec,
    values: Vec<Complex64>,
    support_radius: f64,
}

impl GridFunction {
    /// Samples `f(q, v)` at every node.
    pub fn sample(spec: &GridSpec, f: impl Fn(&[f64], &[f64]) -> Complex64) -> Result<Self> {
        let mut values = Vec::with_capacity(spec.len());
        spec.for_each_node(|_, _, q, v| values.push(f(q, v)));
        Self::from_values(spec.clone(), values)
    }

    pub fn from_analytic(spec: &GridSpec, f: &AnalyticFunction) -> Result<Self> {
        if spec.m() != 1 || spec.config().periods()[0] != f.period() {
            return Err(Error::BackendMismatch(
                "analytic functions live on the circle with matching period".into(),
            ));
        }
        Self::sample(spec, |q, v| f.eval(q[0], v[0]))
    }

    /// Wraps raw node values; the support radius is measured from the data.
    /// Edge decay is not required here; operations that read outside the
    /// window call [`GridFunction::ensure_decayed`].
    pub fn from_values(spec: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                spec.len(),
                values.len()
            )));
        }
        if let Some(z) = values.iter().find(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite(format!("grid value {z}")));
        }
        let peak = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let m = spec.m();
        let mut radius: f64 = 0.0;
        spec.for_each_node(|flat, _, _, v| {
            let a = values[flat].norm();
            if a > SUPPORT_THRESHOLD * peak && a != 0.0 {
                radius = v[..m].iter().fold(radius, |r, x| r.max(x.abs()));
            }
        });
        Ok(Self {
            spec,
            values,
            support_radius: radius,
        })
    }

    pub fn zero(spec: &GridSpec) -> Self {
        Self {
            spec: spec.clone(),
            values: vec![Complex64::new(0.0, 0.0); spec.len()],
            support_radius: 0.0,
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Radius of the `v`-box outside which the function is negligible.
    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    /// `V / support_radius`: dilations `v ↦ b v` with `b ≥ 1/margin` keep
    /// the pulled-back function inside the window.
    pub fn margin_factor(&self) -> f64 {
        if self.support_radius == 0.0 {
            f64::INFINITY
        } else {
            self.spec.v_window / self.support_radius
        }
    }

    fn check_spec(&self, other: &Self) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::BackendMismatch("grid specs differ".into()));
        }
        Ok(())
    }

    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_spec(other)?;
        let w = self.spec.weights();
        let re = compensated_sum(self.values.iter().zip(&other.values).zip(&w).map(|((x, y), w)| (x * y.conj()).re * w));
        let im = compensated_sum(self.values.iter().zip(&other.values).zip(&w).map(|((x, y), w)| (x * y.conj()).im * w));
        let acc = Complex64::new(re, im);
        if !(acc.re.is_finite() && acc.im.is_finite()) {
            return Err(Error::NonFinite("grid inner product".into()));
        }
        Ok(acc)
    }

    pub fn norm_sq(&self) -> Result<f64> {
        let w = self.spec.weights();
        let acc = compensated_sum(self.values.iter().zip(&w).map(|(x, w)| x.norm_sqr() * w));
        if !acc.is_finite() {
            return Err(Error::NonFinite("grid norm".into()));
        }
        Ok(acc)
    }

    pub fn norm(&self) -> Result<f64> {
        self.norm_sq().map(f64::sqrt)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            spec: self.spec.clone(),
            values: self.values.iter().map(|z| z * c).collect(),
            support_radius: if c == Complex64::new(0.0, 0.0) { 0.0 } else { self.support_radius },
        }
    }

    /// `self + c · other`.
    pub fn add_scaled(&self, c: Complex64, other: &Self) -> Result<Self> {
        self.check_spec(other)?;
        Ok(Self {
            spec: self.spec.clone(),
            values: self.values.iter().zip(&other.values).map(|(x, y)| x + y * c).collect(),
            support_radius: self.support_radius.max(other.support_radius),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_scaled(Complex64::new(-1.0, 0.0), other)
    }

    /// Multiplies pointwise by `g(q, v)`.
    pub fn multiply(&self, g: impl Fn(&[f64], &[f64]) -> Complex64) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        self.spec.for_each_node(|flat, _, q, v| values.push(self.values[flat] * g(q, v)));
        Self {
            spec: self.spec.clone(),
            values,
            support_radius: self.support_radius,
        }
    }

    /// `f ∘ A_σ`: cubic spline in each `v_j`, then a trigonometric shift by
    /// `a v_j` in `q_j`.
    pub fn pullback(&self, sigma: &AffineElement) -> Result<Self> {
        if *sigma == AffineElement::identity() {
            return Ok(self.clone());
        }
        self.ensure_decayed()?;
        let (a, b) = (sigma.a(), sigma.b());
        let window = self.spec.v_window;
        let radius = self.support_radius / b;
        if radius > window * (1.0 + 1e-12) {
            return Err(Error::SupportMargin {
                radius: self.support_radius,
                b,
                window,
            });
        }
        let m = self.spec.m();
        let h = self.spec.h();
        let mut values = self.values.clone();
        for j in 0..m {
            if b != 1.0 {
                let targets: Vec<f64> = (0..self.spec.n_v).map(|i| b * self.spec.v_node(i)).collect();
                self.spec.for_each_line(&mut values, m + j, |_, line| {
                    let spline = UniformSpline::new(-window, h, line);
                    let out: Vec<Complex64> = targets.iter().map(|&x| spline.eval(x)).collect();
                    line.copy_from_slice(&out);
                });
            }
            if a != 0.0 {
                let periodic = Periodic::new(self.spec.n_q, self.spec.config().periods()[j]);
                self.spec.for_each_line(&mut values, j, |idx, line| {
                    let v = self.spec.v_node(idx[m + j]);
                    periodic.shift(line, a * v);
                });
            }
        }
        Ok(Self {
            spec: self.spec.clone(),
            values,
            support_radius: radius.min(window),
        })
    }

    /// `∂f/∂q_j`, spectral.
    pub fn d_q(&self, j: usize) -> Self {
        let mut values = self.values.clone();
        let periodic = Periodic::new(self.spec.n_q, self.spec.config().periods()[j]);
        self.spec.for_each_line(&mut values, j, |_, line| periodic.derivative(line));
        Self {
            spec: self.spec.clone(),
            values,
            support_radius: self.support_radius,
        }
    }

    /// `∂f/∂v_j`, fourth-order finite differences.
    pub fn d_v(&self, j: usize) -> Self {
        let mut values = self.values.clone();
        let h = self.spec.h();
        self.spec.for_each_line(&mut values, self.spec.m() + j, |_, line| {
            let d = finite_difference(line, h);
            line.copy_from_slice(&d);
        });
        Self {
            spec: self.spec.clone(),
            values,
            support_radius: self.support_radius,
        }
    }

    /// Fails unless [`GridFunction::edge_fraction`] is below [`EDGE_THRESHOLD`].
    pub fn ensure_decayed(&self) -> Result<()> {
        let edge = self.edge_fraction();
        if edge > EDGE_THRESHOLD {
            return Err(Error::EdgeNotDecayed(edge));
        }
        Ok(())
    }

    /// Largest value on the two outermost `v` layers, relative to the peak.
    pub fn edge_fraction(&self) -> f64 {
        let peak = self.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let m = self.spec.m();
        let n_v = self.spec.n_v;
        let mut worst: f64 = 0.0;
        self.spec.for_each_node(|flat, idx, _, _| {
            if (0..m).any(|j| idx[m + j] < 2 || idx[m + j] + 2 >= n_v) {
                worst = worst.max(self.values[flat].norm() / peak);
            }
        });
        worst
    }

    /// CSV dump: header `q1,…,qm,v1,…,vm,re,im`, one row per node in
    /// storage order, shortest round-trip float formatting.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let m = self.spec.m();
        let mut header: Vec<String> = (1..=m).map(|j| format!("q{j}")).collect();
        header.extend((1..=m).map(|j| format!("v{j}")));
        header.extend(["re".to_string(), "im".to_string()]);
        writeln!(out, "{}", header.join(","))?;
        for (flat, z) in self.values.iter().enumerate() {
            let (q, v) = self.spec.coordinates(flat);
            let cols: Vec<String> = q.iter().chain(&v).chain([&z.re, &z.im]).map(|x| x.to_string()).collect();
            writeln!(out, "{}", cols.join(","))?;
        }
        Ok(())
    }

    /// Reads the values column of a CSV dump written for `spec`.
    pub fn read_csv<R: BufRead>(spec: &GridSpec, input: R) -> Result<Self> {
        let mut values = Vec::with_capacity(spec.len());
        for (n, line) in input.lines().enumerate().skip(1) {
            let line = line?;
            let cols: Vec<&str> = line.split(',').collect();
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Io(format!("line {}: {e}", n + 1)))
            };
            if cols.len() != 2 * spec.m() + 2 {
                return Err(Error::Io(format!("line {}: expected {} columns", n + 1, 2 * spec.m() + 2)));
            }
            values.push(Complex64::new(parse(cols[cols.len() - 2])?, parse(cols[cols.len() - 1])?));
        }
        Self::from_values(spec.clone(), values)
    }

    /// Binary dump, little endian: magic `PQGF`, `u32` version 1, `u32 m`,
    /// `u32 n_q`, `u32 n_v`, `f64 V`, `m × f64` periods, then `(re, im)`
    /// pairs of `f64` in storage order.
    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(b"PQGF")?;
        for x in [1u32, self.spec.m() as u32, self.spec.n_q as u32, self.spec.n_v as u32] {
            out.write_all(&x.to_le_bytes())?;
        }
        out.write_all(&self.spec.v_window.to_le_bytes())?;
        for p in self.spec.config().periods() {
            out.write_all(&p.to_le_bytes())?;
        }
        for z in &self.values {
            out.write_all(&z.re.to_le_bytes())?;
            out.write_all(&z.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut input: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if &magic != b"PQGF" {
            return Err(Error::Io("not a grid function dump".into()));
        }
        let mut u32s = [0u32; 4];
        for x in &mut u32s {
            let mut b = [0u8; 4];
            input.read_exact(&mut b)?;
            *x = u32::from_le_bytes(b);
        }
        let [version, m, n_q, n_v] = u32s;
        if version != 1 {
            return Err(Error::Io(format!("unsupported dump version {version}")));
        }
        let mut read_f64 = || -> Result<f64> {
            let mut b = [0u8; 8];
            input.read_exact(&mut b)?;
            Ok(f64::from_le_bytes(b))
        };
        let window = read_f64()?;
        let periods = (0..m).map(|_| read_f64()).collect::<Result<Vec<_>>>()?;
        let spec = GridSpec::new(TorusConfig::new(periods)?, n_q as usize, window, n_v as usize)?;
        let values = (0..spec.len())
            .map(|_| Ok(Complex64::new(read_f64()?, read_f64()?)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_values(spec, values)
    }
}
