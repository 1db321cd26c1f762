//! Closed-form functions `e^{2πikq/L} Σ c_t v^p e^{-γv²} e^{iλv} 1_{[r₁,r₂]}(v)`
//! on the circle model (`m = 1`).
//!
//! The family is closed under `f ↦ f ∘ A_σ`: the shear `q ↦ q + a v`
//! contributes `e^{2πika v/L}` which is absorbed into `λ`, and the dilation
//! `v ↦ b v` rescales `γ`, `λ` and the indicator. Inner products are exact
//! (Gaussian moments through Hermite polynomials, error functions, or
//! adaptive Gauss–Kronrod on bounded pieces).

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::affine::AffineElement;
use crate::error::{Error, Result};
use crate::quadrature;

/// One `v`-profile term `coeff · v^p · e^{-γv²} · e^{iλv} · 1_{[r₁,r₂]}(v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: Complex64,
    pub power: u32,
    pub gauss_rate: f64,
    pub osc_rate: f64,
    pub indicator: Option<(f64, f64)>,
}

impl Term {
    pub fn gaussian(coeff: Complex64, power: u32, gauss_rate: f64, osc_rate: f64) -> Self {
        Self {
            coeff,
            power,
            gauss_rate,
            osc_rate,
            indicator: None,
        }
    }

    pub fn indicator(coeff: Complex64, lo: f64, hi: f64) -> Self {
        Self {
            coeff,
            power: 0,
            gauss_rate: 0.0,
            osc_rate: 0.0,
            indicator: Some((lo, hi)),
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = self.coeff.re.is_finite()
            && self.coeff.im.is_finite()
            && self.gauss_rate.is_finite()
            && self.osc_rate.is_finite();
        if !finite {
            return Err(Error::InvalidFunction(format!("non-finite term {self:?}")));
        }
        if self.gauss_rate < 0.0 {
            return Err(Error::InvalidFunction(format!("negative gauss rate {}", self.gauss_rate)));
        }
        match self.indicator {
            Some((lo, hi)) if !(lo.is_finite() && hi.is_finite() && lo <= hi) => Err(
                Error::InvalidFunction(format!("indicator [{lo}, {hi}] is not a bounded interval")),
            ),
            None if self.gauss_rate == 0.0 => Err(Error::InvalidFunction(
                "term without Gaussian decay needs an indicator".into(),
            )),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, v: f64) -> Complex64 {
        if let Some((lo, hi)) = self.indicator {
            if v < lo || v > hi {
                return Complex64::new(0.0, 0.0);
            }
        }
        let radial = v.powi(self.power as i32) * (-self.gauss_rate * v * v).exp();
        self.coeff * Complex64::from_polar(radial, self.osc_rate * v)
    }

}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticFunction {
    period: f64,
    k: i64,
    terms: Vec<Term>,
}

impl AnalyticFunction {
    pub fn new(period: f64, k: i64, terms: Vec<Term>) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidFunction(format!("period {period} is not positive")));
        }
        terms.iter().try_for_each(Term::validate)?;
        Ok(Self { period, k, terms })
    }

    pub fn zero(period: f64) -> Self {
        Self {
            period,
            k: 0,
            terms: Vec::new(),
        }
    }

    /// `e^{2πikq/L} e^{-γv²}`.
    pub fn gaussian_mode(period: f64, k: i64, gauss_rate: f64) -> Result<Self> {
        Self::new(period, k, vec![Term::gaussian(Complex64::new(1.0, 0.0), 0, gauss_rate, 0.0)])
    }

    /// `e^{2πikq/L} 1_{[lo,hi]}(v)`.
    pub fn indicator(period: f64, k: i64, lo: f64, hi: f64) -> Result<Self> {
        Self::new(period, k, vec![Term::indicator(Complex64::new(1.0, 0.0), lo, hi)])
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn k(&self) -> i64 {
        self.k
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coeff == Complex64::new(0.0, 0.0))
    }

    pub fn has_indicator(&self) -> bool {
        self.terms.iter().any(|t| t.indicator.is_some())
    }

    fn wavenumber(&self) -> f64 {
        TAU * self.k as f64 / self.period
    }

    pub fn eval_profile(&self, v: f64) -> Complex64 {
        self.terms.iter().map(|t| t.eval(v)).sum()
    }

    pub fn eval(&self, q: f64, v: f64) -> Complex64 {
        Complex64::from_polar(1.0, self.wavenumber() * q) * self.eval_profile(v)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        out.terms.iter_mut().for_each(|t| t.coeff *= c);
        out
    }

    /// `self + c · other`.
    pub fn add_scaled(&self, c: Complex64, other: &Self) -> Result<Self> {
        self.check_period(other)?;
        let k = match (self.is_zero(), other.is_zero()) {
            (true, _) => other.k,
            (_, true) => self.k,
            _ if self.k == other.k => self.k,
            _ => {
                return Err(Error::BackendMismatch(format!(
                    "cannot add Fourier modes {} and {} in one analytic function",
                    self.k, other.k
                )))
            }
        };
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().map(|t| Term {
            coeff: t.coeff * c,
            ..*t
        }));
        Ok(Self {
            period: self.period,
            k,
            terms,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_scaled(Complex64::new(-1.0, 0.0), other)
    }

    fn check_period(&self, other: &Self) -> Result<()> {
        if self.period != other.period {
            return Err(Error::BackendMismatch(format!(
                "periods differ: {} vs {}",
                self.period, other.period
            )));
        }
        Ok(())
    }

    /// Exact `f ∘ A_σ`: `φ(v) ↦ e^{2πika v/L} φ(b v)`.
    pub fn pullback(&self, sigma: &AffineElement) -> Self {
        let (a, b) = (sigma.a(), sigma.b());
        let shear = self.wavenumber() * a;
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                coeff: t.coeff * b.powi(t.power as i32),
                power: t.power,
                gauss_rate: t.gauss_rate * b * b,
                osc_rate: t.osc_rate * b + shear,
                indicator: t.indicator.map(|(lo, hi)| (lo / b, hi / b)),
            })
            .collect();
        Self {
            period: self.period,
            k: self.k,
            terms,
        }
    }

    /// Splits indicator terms at every indicator endpoint of the function and
    /// merges terms of the same shape, so that the Gram expansion of the norm
    /// has no cancelling pairs over coincident pieces.
    ///
    /// Endpoints and rates that agree to [`SHAPE_RESOLUTION`] (relative) are
    /// identified: they describe the same function up to parameter rounding,
    /// and keeping them apart would leave slivers whose `L²` mass scales like
    /// the square root of the rounding error.
    pub fn canonical(&self) -> Self {
        let mut cuts: Vec<f64> = self
            .terms
            .iter()
            .filter_map(|t| t.indicator)
            .flat_map(|(lo, hi)| [lo, hi])
            .collect();
        cuts.sort_by(f64::total_cmp);
        let mut reps: Vec<f64> = Vec::with_capacity(cuts.len());
        for c in cuts {
            match reps.last() {
                Some(&r) if close(r, c, 1.0) => {}
                _ => reps.push(c),
            }
        }
        let snap = |x: f64| {
            reps.iter()
                .copied()
                .find(|&r| close(r, x, 1.0))
                .unwrap_or(x)
        };

        let mut pieces: Vec<Term> = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            match t.indicator {
                None => pieces.push(*t),
                Some((lo, hi)) => {
                    let (lo, hi) = (snap(lo), snap(hi));
                    let mut left = lo;
                    for &c in reps.iter().filter(|&&c| c > lo && c < hi) {
                        pieces.push(Term { indicator: Some((left, c)), ..*t });
                        left = c;
                    }
                    pieces.push(Term { indicator: Some((left, hi)), ..*t });
                }
            }
        }

        let mut merged: Vec<Term> = Vec::with_capacity(pieces.len());
        for p in pieces {
            if matches!(p.indicator, Some((lo, hi)) if lo >= hi) {
                continue;
            }
            match merged.iter_mut().find(|m| same_shape(m, &p)) {
                Some(m) => m.coeff += p.coeff,
                None => merged.push(p),
            }
        }
        merged.retain(|t| t.coeff != Complex64::new(0.0, 0.0));
        Self {
            period: self.period,
            k: self.k,
            terms: merged,
        }
    }

    /// `⟨f, g⟩ = ∫ f ḡ dq dv`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_period(other)?;
        if self.is_zero() || other.is_zero() || self.k != other.k {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for s in &self.terms {
            for t in &other.terms {
                acc += pair_integral(s, t);
            }
        }
        finite(acc * self.period)
    }

    pub fn norm_sq(&self) -> Result<f64> {
        let c = self.canonical();
        let n = c.terms.len();
        let mut acc = 0.0;
        for i in 0..n {
            acc += pair_integral(&c.terms[i], &c.terms[i]).re;
            for j in (i + 1)..n {
                acc += 2.0 * pair_integral(&c.terms[i], &c.terms[j]).re;
            }
        }
        let value = acc.max(0.0) * self.period;
        if !value.is_finite() {
            return Err(Error::NonFinite("analytic norm".into()));
        }
        Ok(value)
    }

    pub fn norm(&self) -> Result<f64> {
        self.norm_sq().map(f64::sqrt)
    }

    /// `𝒳f = v ∂f/∂q`.
    pub fn geodesic_derivative(&self) -> Self {
        let factor = Complex64::new(0.0, self.wavenumber());
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                coeff: t.coeff * factor,
                power: t.power + 1,
                ..*t
            })
            .collect();
        Self {
            period: self.period,
            k: self.k,
            terms,
        }
    }

    /// `𝒴f = v ∂f/∂v`; unavailable when an indicator jump is present.
    pub fn euler_derivative(&self) -> Result<Self> {
        if self.has_indicator() {
            return Err(Error::DerivativeUnavailable(
                "v-derivative of an indicator term is not square integrable".into(),
            ));
        }
        let mut terms = Vec::with_capacity(3 * self.terms.len());
        for t in &self.terms {
            if t.power > 0 {
                terms.push(Term {
                    coeff: t.coeff * t.power as f64,
                    ..*t
                });
            }
            if t.osc_rate != 0.0 {
                terms.push(Term {
                    coeff: t.coeff * Complex64::new(0.0, t.osc_rate),
                    power: t.power + 1,
                    ..*t
                });
            }
            if t.gauss_rate != 0.0 {
                terms.push(Term {
                    coeff: t.coeff * (-2.0 * t.gauss_rate),
                    power: t.power + 2,
                    ..*t
                });
            }
        }
        Ok(Self {
            period: self.period,
            k: self.k,
            terms,
        })
    }
}

/// Relative resolution below which term parameters are considered equal.
pub const SHAPE_RESOLUTION: f64 = 1e-12;

fn close(x: f64, y: f64, floor: f64) -> bool {
    (x - y).abs() <= SHAPE_RESOLUTION * x.abs().max(y.abs()).max(floor)
}

fn same_shape(s: &Term, t: &Term) -> bool {
    s.power == t.power
        && close(s.gauss_rate, t.gauss_rate, 0.0)
        && close(s.osc_rate, t.osc_rate, s.gauss_rate.max(t.gauss_rate).sqrt().max(1.0))
        && s.indicator == t.indicator
}

fn finite(z: Complex64) -> Result<Complex64> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::NonFinite("analytic inner product".into()))
    }
}

fn intersect(a: Option<(f64, f64)>, b: Option<(f64, f64)>) -> Option<Option<(f64, f64)>> {
    match (a, b) {
        (None, None) => Some(None),
        (Some(i), None) | (None, Some(i)) => Some(Some(i)),
        (Some((a0, a1)), Some((b0, b1))) => {
            let (lo, hi) = (a0.max(b0), a1.min(b1));
            (lo < hi).then_some(Some((lo, hi)))
        }
    }
}

/// `∫ s(v) conj(t(v)) dv`.
pub(crate) fn pair_integral(s: &Term, t: &Term) -> Complex64 {
    let Some(support) = intersect(s.indicator, t.indicator) else {
        return Complex64::new(0.0, 0.0);
    };
    let moment = profile_integral(
        s.power + t.power,
        s.gauss_rate + t.gauss_rate,
        s.osc_rate - t.osc_rate,
        support,
    );
    s.coeff * t.coeff.conj() * moment
}

/// Physicists' Hermite polynomial `H_n(x)`.
fn hermite(n: u32, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * x);
    if n == 0 {
        return prev;
    }
    for j in 1..n {
        let next = 2.0 * x * cur - 2.0 * j as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `∫_I v^p e^{-γv²} e^{iλv} dv` over `I = support` (whole line if `None`).
pub fn profile_integral(p: u32, gamma: f64, lambda: f64, support: Option<(f64, f64)>) -> Complex64 {
    let Some((lo, hi)) = support else {
        // (-i d/dλ)^p of sqrt(π/γ) e^{-λ²/4γ}
        let r = gamma.sqrt();
        let x = lambda / (2.0 * r);
        let base = (PI / gamma).sqrt() * (-x * x).exp() * hermite(p, x) / (2.0 * r).powi(p as i32);
        return Complex64::i().powu(p) * base;
    };
    if lo >= hi {
        return Complex64::new(0.0, 0.0);
    }
    if gamma == 0.0 {
        if lambda == 0.0 {
            let n = p as i32 + 1;
            return Complex64::new((hi.powi(n) - lo.powi(n)) / n as f64, 0.0);
        }
        if p == 0 {
            // (e^{iλhi} - e^{iλlo}) / (iλ), written without cancellation
            let half = 0.5 * lambda * (hi - lo);
            let sinc = if half == 0.0 { 1.0 } else { half.sin() / half };
            return Complex64::from_polar((hi - lo) * sinc, 0.5 * lambda * (hi + lo));
        }
    } else if p == 0 && lambda == 0.0 {
        return Complex64::new(quadrature::gaussian_interval(gamma, lo, hi), 0.0);
    }
    let envelope = (hi - lo) * lo.abs().max(hi.abs()).max(1.0).powi(p as i32);
    let est = quadrature::integrate(
        |v| Complex64::from_polar(v.powi(p as i32) * (-gamma * v * v).exp(), lambda * v),
        lo,
        hi,
        quadrature::DEFAULT_REL_TOL * 1e-3,
        1e-16 * envelope,
    );
    est.value
}
