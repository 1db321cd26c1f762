//! The representation `ρ(σ) f = χ(σ)^{m/2} f ∘ A_σ` of `A₊` on `L²(N)` and
//! probes for its three properties: unitarity, joint continuity, and the
//! failure of differentiability in the group variable.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use crate::affine::AffineElement;
use crate::error::{Error, Result};
use crate::l2space::L2Function;

pub fn apply_rho(sigma: &AffineElement, f: &L2Function) -> Result<L2Function> {
    let weight = sigma.chi().powf(f.m() as f64 / 2.0);
    Ok(f.pullback(sigma)?.scale(weight))
}

/// `|‖ρ(σ)f‖ − ‖f‖|`.
pub fn unitarity_defect(sigma: &AffineElement, f: &L2Function) -> Result<f64> {
    Ok((apply_rho(sigma, f)?.norm()? - f.norm()?).abs())
}

/// `‖ρ(σσ')f − ρ(σ)ρ(σ')f‖`.
pub fn homomorphism_defect(sigma: &AffineElement, other: &AffineElement, f: &L2Function) -> Result<f64> {
    let joint = apply_rho(&(*sigma * *other), f)?;
    let stepwise = apply_rho(sigma, &apply_rho(other, f)?)?;
    joint.distance(&stepwise)
}

/// A curve `u ↦ σ(u)` in `A₊`.
#[derive(Clone)]
pub enum CurveInGroup {
    /// `u ↦ α(u)`.
    Alpha,
    /// `u ↦ β(u)`.
    Beta,
    /// Straight segment in `(a, b)` coordinates, `u ∈ [0, 1]`.
    Segment { from: AffineElement, to: AffineElement },
    Custom(Arc<dyn Fn(f64) -> Result<AffineElement> + Send + Sync>),
}

impl fmt::Debug for CurveInGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveInGroup::Alpha => write!(f, "Alpha"),
            CurveInGroup::Beta => write!(f, "Beta"),
            CurveInGroup::Segment { from, to } => write!(f, "Segment({from:?} -> {to:?})"),
            CurveInGroup::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl CurveInGroup {
    pub fn at(&self, u: f64) -> Result<AffineElement> {
        match self {
            CurveInGroup::Alpha => Ok(AffineElement::alpha(u)),
            CurveInGroup::Beta => Ok(AffineElement::beta(u)),
            CurveInGroup::Segment { from, to } => AffineElement::new(
                from.a() + u * (to.a() - from.a()),
                from.b() + u * (to.b() - from.b()),
            ),
            CurveInGroup::Custom(curve) => curve(u),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sidedness {
    /// `‖ρ(c(u))f − ρ(c(0))f‖ / |u|`.
    #[default]
    OneSided,
    /// `‖ρ(c(u))f − ρ(c(−u))f‖ / (2|u|)`.
    TwoSided,
}

/// Difference quotient of `σ ↦ ρ(σ)f` along `curve` at parameter `u`.
pub fn difference_quotient(curve: &CurveInGroup, f: &L2Function, u: f64, sidedness: Sidedness) -> Result<f64> {
    if u == 0.0 || !u.is_finite() {
        return Err(Error::InvalidArgument(format!("difference quotient needs u ≠ 0, got {u}")));
    }
    let forward = apply_rho(&curve.at(u)?, f)?;
    let (base, span) = match sidedness {
        Sidedness::OneSided => (apply_rho(&curve.at(0.0)?, f)?, u.abs()),
        Sidedness::TwoSided => (apply_rho(&curve.at(-u)?, f)?, 2.0 * u.abs()),
    };
    Ok(forward.distance(&base)? / span)
}

/// Samples `σ'` on the coordinate circle of radius `r` about `σ₀` in the
/// `(a, b)` chart and reports `max ‖ρ(σ')f − ρ(σ₀)f‖` for each radius.
pub fn continuity_probe(
    sigma0: &AffineElement,
    f: &L2Function,
    radii: &[f64],
    samples: usize,
) -> Result<Vec<(f64, f64)>> {
    if radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::InvalidArgument("radii must be positive".into()));
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("radii must be strictly decreasing".into()));
    }
    if radii.first().is_some_and(|r| *r >= sigma0.b()) {
        return Err(Error::InvalidArgument(format!(
            "radius {} leaves A₊ around b = {}",
            radii[0],
            sigma0.b()
        )));
    }
    let base = apply_rho(sigma0, f)?;
    radii
        .iter()
        .map(|&r| {
            let mut worst: f64 = 0.0;
            for k in 0..samples.max(1) {
                let theta = TAU * k as f64 / samples.max(1) as f64;
                let sigma = AffineElement::new(sigma0.a() + r * theta.cos(), sigma0.b() + r * theta.sin())?;
                worst = worst.max(apply_rho(&sigma, f)?.distance(&base)?);
            }
            Ok((r, worst))
        })
        .collect()
}

/// Direction of a one-parameter subgroup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subgroup {
    Alpha,
    Beta,
}

impl Subgroup {
    pub fn curve(self) -> CurveInGroup {
        match self {
            Subgroup::Alpha => CurveInGroup::Alpha,
            Subgroup::Beta => CurveInGroup::Beta,
        }
    }
}

/// Derivative of `u ↦ ρ(c(u)) f` at `u = 0` in closed form: `𝒳f` along α and
/// `(m/2) f + 𝒴f` along β. Only the analytic backend carries it.
pub fn generator(direction: Subgroup, f: &L2Function) -> Result<L2Function> {
    let g = f.as_analytic().ok_or_else(|| {
        Error::DerivativeUnavailable("closed-form derivatives need the analytic backend".into())
    })?;
    match direction {
        Subgroup::Alpha => Ok(g.geodesic_derivative().into()),
        Subgroup::Beta => {
            let euler = g.euler_derivative()?;
            Ok(g.scale(0.5.into()).add_scaled(1.0.into(), &euler)?.into())
        }
    }
}

/// `‖(ρ(c(u))f − f)/u − D f‖` with `D f` from [`generator`].
pub fn derivative_residual(direction: Subgroup, f: &L2Function, u: f64) -> Result<f64> {
    if u == 0.0 {
        return Err(Error::InvalidArgument("derivative residual needs u ≠ 0".into()));
    }
    let derivative = generator(direction, f)?;
    let moved = apply_rho(&direction.curve().at(u)?, f)?;
    let quotient = moved.sub(f)?.scale(1.0 / u);
    quotient.distance(&derivative)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Closed forms for the indicator oracle `f = 1_{[0,1]}(v)` on the circle of
/// period `L`, written with `expm1` so they stay accurate for tiny `u`.
pub mod oracle {
    /// `‖ρ(β(u))f − f‖² = L[(e^{u/2} − 1)² e^{−u} + 1 − e^{−u}]` for `u > 0`.
    pub fn indicator_beta_distance_sq(u: f64, period: f64) -> f64 {
        period * ((0.5 * u).exp_m1().powi(2) * (-u).exp() - (-u).exp_m1())
    }

    /// One-sided difference quotient along β for `u > 0`.
    pub fn indicator_beta_quotient(u: f64, period: f64) -> f64 {
        indicator_beta_distance_sq(u, period).sqrt() / u
    }

    /// `‖ρ(β(−ln(1+u)))f − f‖` for `u > 0`, i.e. the transition map read
    /// along `s = i(1 + u)`: `L[((1+u)^{−1/2} − 1)² + u/(1+u)]`.
    pub fn indicator_transition_distance_sq(u: f64, period: f64) -> f64 {
        let shrink = (-0.5 * u.ln_1p()).exp_m1();
        period * (shrink * shrink + u / (1.0 + u))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::l2space::{random_test_function, AnalyticFunction, Backend, Roughness};
    use approx::assert_relative_eq;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn gaussian() -> L2Function {
        AnalyticFunction::gaussian_mode(TAU, 1, 0.5).unwrap().into()
    }

    fn indicator() -> L2Function {
        AnalyticFunction::indicator(TAU, 0, 0.0, 1.0).unwrap().into()
    }

    #[test]
    fn identity_acts_trivially() {
        let f = gaussian();
        assert_eq!(apply_rho(&AffineElement::identity(), &f).unwrap(), f);
    }

    #[test]
    fn beta_action_on_gaussian() {
        let u = 0.4;
        let g = apply_rho(&AffineElement::beta(u), &gaussian()).unwrap();
        let g = g.as_analytic().unwrap();
        for v in [-1.0, 0.2, 1.5] {
            let expected = Complex64::from_polar((0.5 * u).exp() * (-0.5 * (u.exp() * v).powi(2)).exp(), 0.3);
            assert!((g.eval(0.3, v) - expected).norm() < 1e-14);
        }
        assert!(unitarity_defect(&AffineElement::beta(u), &gaussian()).unwrap() < 1e-14);
    }

    #[test]
    fn unitary_on_gaussian_mode() {
        let sigma = AffineElement::new(0.7, 1.9).unwrap();
        let n = apply_rho(&sigma, &gaussian()).unwrap().norm().unwrap();
        assert_relative_eq!(n, (TAU * PI.sqrt()).sqrt(), max_relative = 1e-14);
        let zero: L2Function = AnalyticFunction::zero(TAU).into();
        assert_eq!(unitarity_defect(&sigma, &zero).unwrap(), 0.0);
    }

    #[test]
    fn homomorphism_on_random_functions() {
        let backend = Backend::Analytic { period: TAU };
        for seed in 0..20 {
            let f = random_test_function(seed, Roughness::Rough, &backend);
            let s = AffineElement::new(0.3 * seed as f64 - 2.0, 0.5 + 0.2 * seed as f64).unwrap();
            let t = AffineElement::new(1.1, 0.3 + 0.1 * seed as f64).unwrap();
            let d = homomorphism_defect(&s, &t, &f).unwrap();
            assert!(d <= 1e-9 * f.norm().unwrap(), "seed {seed}: {d}");
        }
    }

    #[test]
    fn indicator_quotient_matches_closed_form() {
        for u in [1e-2, 1e-4, 1e-6] {
            let q = difference_quotient(&CurveInGroup::Beta, &indicator(), u, Sidedness::OneSided).unwrap();
            let exact = oracle::indicator_beta_quotient(u, TAU);
            assert_relative_eq!(q, exact, max_relative = 1e-10);
            let scaled = q * u.sqrt() / TAU.sqrt();
            assert!((0.95..=1.05).contains(&scaled));
        }
    }

    #[test]
    fn closed_form_at_small_u_matches_expansion() {
        // (e^{u/2}-1)^2 e^{-u} + 1 - e^{-u} = u - u²/4 + O(u³)
        let u = 1e-3;
        let series = TAU * (u - u * u / 4.0);
        assert_relative_eq!(oracle::indicator_beta_distance_sq(u, TAU), series, max_relative = 1e-6);
    }

    #[test]
    fn two_sided_quotient_on_smooth() {
        let f = gaussian();
        let limit = generator(Subgroup::Beta, &f).unwrap().norm().unwrap();
        let q = difference_quotient(&CurveInGroup::Beta, &f, 1e-4, Sidedness::TwoSided).unwrap();
        assert_relative_eq!(q, limit, max_relative = 1e-6);
    }

    #[test]
    fn generators_of_gaussian_mode() {
        let f = gaussian();
        let x = generator(Subgroup::Alpha, &f).unwrap();
        let y = generator(Subgroup::Beta, &f).unwrap();
        let (xa, ya, fa) = (x.as_analytic().unwrap(), y.as_analytic().unwrap(), f.as_analytic().unwrap());
        for v in [-2.0, -0.3, 0.8] {
            assert!((xa.eval(1.0, v) - Complex64::new(0.0, v) * fa.eval(1.0, v)).norm() < 1e-14);
            assert!((ya.eval(1.0, v) - fa.eval(1.0, v) * (0.5 - v * v)).norm() < 1e-14);
        }
        assert!(matches!(generator(Subgroup::Beta, &indicator()), Err(Error::DerivativeUnavailable(_))));
    }

    #[test]
    fn derivative_residual_is_first_order() {
        for dir in [Subgroup::Alpha, Subgroup::Beta] {
            let r: Vec<f64> = [1e-2, 5e-3, 2.5e-3]
                .iter()
                .map(|&u| derivative_residual(dir, &gaussian(), u).unwrap())
                .collect();
            for w in r.windows(2) {
                let ratio = w[0] / w[1];
                assert!((1.6..=2.4).contains(&ratio), "{dir:?}: {r:?}");
            }
        }
    }

    #[test]
    fn continuity_probe_rates() {
        let radii = [0.1, 0.01, 0.001];
        let zero: L2Function = AnalyticFunction::zero(TAU).into();
        let z = continuity_probe(&AffineElement::identity(), &zero, &radii, 8).unwrap();
        assert!(z.iter().all(|(_, d)| *d == 0.0));
        let smooth = continuity_probe(&AffineElement::identity(), &gaussian(), &radii, 16).unwrap();
        let rough = continuity_probe(&AffineElement::identity(), &indicator(), &radii, 16).unwrap();
        let slope_smooth = loglog_slope(&smooth).unwrap();
        let slope_rough = loglog_slope(&rough).unwrap();
        assert!((slope_smooth - 1.0).abs() < 0.05, "{slope_smooth}");
        assert!((slope_rough - 0.5).abs() < 0.05, "{slope_rough}");
        assert!(continuity_probe(&AffineElement::identity(), &zero, &[0.1, 0.2], 4).is_err());
        assert!(continuity_probe(&AffineElement::identity(), &zero, &[1.5], 4).is_err());
    }

    #[test]
    fn curves() {
        let seg = CurveInGroup::Segment {
            from: AffineElement::identity(),
            to: AffineElement::new(2.0, 3.0).unwrap(),
        };
        assert_eq!(seg.at(0.5).unwrap(), AffineElement::new(1.0, 2.0).unwrap());
        let custom = CurveInGroup::Custom(Arc::new(|u| AffineElement::new(u, 1.0 + u * u)));
        assert_eq!(custom.at(2.0).unwrap(), AffineElement::new(2.0, 5.0).unwrap());
        assert!(difference_quotient(&CurveInGroup::Alpha, &gaussian(), 0.0, Sidedness::OneSided).is_err());
    }

    #[test]
    fn slope_fit() {
        let pts: Vec<(f64, f64)> = [1e-2, 1e-4, 1e-6].iter().map(|&u: &f64| (u, 3.0 * u.powf(-0.5))).collect();
        assert_relative_eq!(loglog_slope(&pts).unwrap(), -0.5, max_relative = 1e-12);
        assert!(loglog_slope(&[(1.0, 1.0)]).is_none());
    }
}
