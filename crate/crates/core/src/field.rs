//! The Hilbert field `p: H → S` over the upper half plane. The fiber over `s`
//! holds `ψ_s = f_s ϑ ⊗ θ_s` with norm `∫ |f_s|² h_{κ_s}(θ_s, θ_s) ℰ`.
//!
//! Two charts identify the field with `S × L²(N)`:
//!
//! * `A(s, f) = f / √h_{κ_s}(θ_s, θ_s) · ϑ ⊗ θ_s`
//! * `B(ψ_s) = (s, (Im s)^{−m/4} h(Θ, Θ)^{1/4} f_s ∘ A_{σ_s}^{−1})`
//!
//! Both are fiberwise unitary and `B ∘ A = ρ(σ_s^{−1})` on each fiber.

use crate::affine::{AffineElement, UpperHalfPlanePoint};
use crate::error::{Error, Result};
use crate::halfform::halfform_weight;
use crate::l2space::L2Function;
use crate::rho_rep::apply_rho;

/// A vector in the fiber over `s`, stored through its coefficient `f_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldElement {
    s: UpperHalfPlanePoint,
    coefficient: L2Function,
}

impl FieldElement {
    pub fn new(s: UpperHalfPlanePoint, coefficient: L2Function) -> Self {
        Self { s, coefficient }
    }

    pub fn s(&self) -> UpperHalfPlanePoint {
        self.s
    }

    pub fn coefficient(&self) -> &L2Function {
        &self.coefficient
    }

    pub fn m(&self) -> usize {
        self.coefficient.m()
    }
}

/// `h(Θ, Θ)^{1/4}` for the standard structure, `2^{m/4}`.
fn standard_weight_root(m: usize) -> f64 {
    halfform_weight(UpperHalfPlanePoint::i(), m).value.sqrt()
}

/// `(2 Im s)^{m/4} ‖f_s‖`.
pub fn fiber_norm(psi: &FieldElement) -> Result<f64> {
    let weight = halfform_weight(psi.s, psi.m()).value;
    Ok(weight.sqrt() * psi.coefficient.norm()?)
}

/// Both sides of the change-of-variables identity for the squared fiber norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormIdentity {
    /// `∫ |f_s|² h_{κ_s}(θ_s, θ_s) ℰ`.
    pub direct: f64,
    /// `(Im s)^{−m/2} ∫ (|f_s|² ∘ A_{σ_s}^{−1}) √h(Θ, Θ) ℰ`.
    pub transported: f64,
}

impl NormIdentity {
    pub fn relative_residual(&self) -> f64 {
        let scale = self.direct.abs().max(self.transported.abs());
        if scale == 0.0 {
            0.0
        } else {
            (self.direct - self.transported).abs() / scale
        }
    }
}

pub fn norm_identity(psi: &FieldElement) -> Result<NormIdentity> {
    let m = psi.m() as f64;
    let direct = fiber_norm(psi)?.powi(2);
    let moved = psi.coefficient.pullback(&AffineElement::sigma_s(psi.s).invert())?;
    let root_h = standard_weight_root(psi.m()).powi(2);
    let transported = psi.s.im().powf(-m / 2.0) * root_h * moved.norm()?.powi(2);
    Ok(NormIdentity { direct, transported })
}

/// Chart `A`: `f ↦ f / (2 Im s)^{m/4}` in the fiber over `s`.
pub fn triv_a(s: UpperHalfPlanePoint, f: &L2Function) -> FieldElement {
    let weight = halfform_weight(s, f.m()).value;
    FieldElement::new(s, f.scale(1.0 / weight.sqrt()))
}

pub fn triv_a_inverse(psi: &FieldElement) -> (UpperHalfPlanePoint, L2Function) {
    let weight = halfform_weight(psi.s, psi.m()).value;
    (psi.s, psi.coefficient.scale(weight.sqrt()))
}

/// Chart `B`: `f_s ↦ (Im s)^{−m/4} 2^{m/4} f_s ∘ A_{σ_s}^{−1}`.
pub fn triv_b(psi: &FieldElement) -> Result<(UpperHalfPlanePoint, L2Function)> {
    let m = psi.m() as f64;
    let factor = psi.s.im().powf(-m / 4.0) * standard_weight_root(psi.m());
    let moved = psi.coefficient.pullback(&AffineElement::sigma_s(psi.s).invert())?;
    Ok((psi.s, moved.scale(factor)))
}

pub fn triv_b_inverse(s: UpperHalfPlanePoint, g: &L2Function) -> Result<FieldElement> {
    let m = g.m() as f64;
    let factor = s.im().powf(m / 4.0) / standard_weight_root(g.m());
    Ok(FieldElement::new(s, g.pullback(&AffineElement::sigma_s(s))?.scale(factor)))
}

/// `B ∘ A` on the fiber over `s`, which is `ρ(σ_s^{−1})`.
pub fn transition(s: UpperHalfPlanePoint, f: &L2Function) -> Result<L2Function> {
    apply_rho(&AffineElement::sigma_s(s).invert(), f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Chart {
    A,
    B,
}

/// A section given by a fixed function in one chart, sampled at finitely
/// many base points.
#[derive(Debug, Clone, PartialEq)]
pub struct TrivializedSection {
    pub chart: Chart,
    pub base: L2Function,
    pub samples: Vec<UpperHalfPlanePoint>,
}

impl TrivializedSection {
    pub fn at(&self, s: UpperHalfPlanePoint) -> Result<FieldElement> {
        match self.chart {
            Chart::A => Ok(triv_a(s, &self.base)),
            Chart::B => triv_b_inverse(s, &self.base),
        }
    }

    pub fn evaluate(&self) -> Result<Vec<FieldElement>> {
        self.samples.iter().map(|&s| self.at(s)).collect()
    }

    /// The same section read in the other chart, at every sample.
    pub fn read_in(&self, chart: Chart) -> Result<Vec<L2Function>> {
        self.evaluate()?
            .iter()
            .map(|psi| match chart {
                Chart::A => Ok(triv_a_inverse(psi).1),
                Chart::B => Ok(triv_b(psi)?.1),
            })
            .collect()
    }
}

/// Direction of motion in `S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Re,
    Im,
}

impl Direction {
    fn step(self, s: UpperHalfPlanePoint, u: f64) -> Result<UpperHalfPlanePoint> {
        match self {
            Direction::Re => UpperHalfPlanePoint::new(s.re() + u, s.im()),
            Direction::Im => UpperHalfPlanePoint::new(s.re(), s.im() + u),
        }
    }
}

/// `‖B(A(s₀ + u·dir, f)) − B(A(s₀, f))‖ / |u|` for each `u`: the difference
/// quotient of a section that is constant in chart `A`, read in chart `B`.
pub fn section_smoothness_probe(
    f: &L2Function,
    s0: UpperHalfPlanePoint,
    direction: Direction,
    u_values: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let base = transition(s0, f)?;
    u_values
        .iter()
        .map(|&u| {
            if u == 0.0 || !u.is_finite() {
                return Err(Error::InvalidArgument(format!("probe step must be nonzero, got {u}")));
            }
            let moved = transition(direction.step(s0, u)?, f)?;
            Ok((u, moved.distance(&base)? / u.abs()))
        })
        .collect()
}

/// Limit of [`section_smoothness_probe`] as `u → 0` for an analytic smooth
/// `f`: `‖𝒳f‖` along `Re`, and `‖(a/b) 𝒳f − (1/b)((m/2) f + 𝒴f)‖` along `Im`
/// at `s₀ = a + ib`.
pub fn smoothness_limit(f: &L2Function, s0: UpperHalfPlanePoint, direction: Direction) -> Result<f64> {
    let g = f.as_analytic().ok_or_else(|| {
        Error::DerivativeUnavailable("closed-form derivatives need the analytic backend".into())
    })?;
    let x = g.geodesic_derivative();
    match direction {
        Direction::Re => x.norm(),
        Direction::Im => {
            let (a, b) = (s0.re(), s0.im());
            let beta = g.scale((0.5).into()).add_scaled(1.0.into(), &g.euler_derivative()?)?;
            x.scale((a / b).into()).add_scaled((-1.0 / b).into(), &beta)?.norm()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::l2space::{random_test_function, AnalyticFunction, Backend, GridSpec, Roughness};
    use crate::phasespace::TorusConfig;
    use crate::rho_rep::oracle;
    use approx::assert_relative_eq;
    use num_complex::Complex64;
    use std::f64::consts::{PI, TAU};

    fn s(re: f64, im: f64) -> UpperHalfPlanePoint {
        UpperHalfPlanePoint::new(re, im).unwrap()
    }

    fn gaussian() -> L2Function {
        AnalyticFunction::gaussian_mode(TAU, 1, 0.5).unwrap().into()
    }

    #[test]
    fn fiber_norm_examples() {
        let psi = FieldElement::new(UpperHalfPlanePoint::i(), gaussian());
        let expected = 2f64.sqrt().sqrt() * (TAU * PI.sqrt()).sqrt();
        assert_relative_eq!(fiber_norm(&psi).unwrap(), expected, max_relative = 1e-14);
        let zero = FieldElement::new(s(1.0, 3.0), AnalyticFunction::zero(TAU).into());
        assert_eq!(fiber_norm(&zero).unwrap(), 0.0);
        assert_eq!(norm_identity(&zero).unwrap().relative_residual(), 0.0);
    }

    #[test]
    fn chart_a_examples() {
        let f = gaussian();
        let psi = triv_a(UpperHalfPlanePoint::i(), &f);
        assert!(psi.coefficient().distance(&f.scale(2f64.powf(-0.25))).unwrap() < 1e-15);
        let g: L2Function = AnalyticFunction::gaussian_mode(TAU, 0, 1.0).unwrap().into();
        // weight for m = 2 at s = 4i is 8, coefficient divided by √8
        assert_relative_eq!(halfform_weight(s(0.0, 4.0), 2).value, 8.0);
        assert_relative_eq!(fiber_norm(&triv_a(s(-2.0, 0.3), &g)).unwrap(), g.norm().unwrap(), max_relative = 1e-15);
    }

    #[test]
    fn chart_b_examples() {
        let f = gaussian();
        let (_, g) = triv_b(&FieldElement::new(UpperHalfPlanePoint::i(), f.clone())).unwrap();
        assert_eq!(g, f.scale(2f64.powf(0.25)));
        let (_, g) = triv_b(&FieldElement::new(s(0.0, 2.0), f)).unwrap();
        let g = g.as_analytic().unwrap();
        for (q, v) in [(0.1f64, -1.0f64), (2.0, 0.5), (4.0, 3.0)] {
            let expected = Complex64::from_polar((-v * v / 8.0).exp(), q);
            assert!((g.eval(q, v) - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn transition_is_b_after_a() {
        let backend = Backend::Analytic { period: TAU };
        for seed in 0..30 {
            let f = random_test_function(seed, Roughness::Rough, &backend);
            let sp = s(seed as f64 / 3.0 - 5.0, 0.1 + seed as f64 / 3.0);
            let direct = transition(sp, &f).unwrap();
            let (_, composed) = triv_b(&triv_a(sp, &f)).unwrap();
            assert!(direct.distance(&composed).unwrap() <= 1e-12 * f.norm().unwrap());
            assert_relative_eq!(direct.norm().unwrap(), f.norm().unwrap(), max_relative = 1e-9);
            let psi = triv_a(sp, &f);
            assert!(norm_identity(&psi).unwrap().relative_residual() <= 1e-9);
            let (_, b) = triv_b(&psi).unwrap();
            assert_relative_eq!(b.norm().unwrap(), fiber_norm(&psi).unwrap(), max_relative = 1e-9);
        }
        assert_eq!(transition(UpperHalfPlanePoint::i(), &gaussian()).unwrap(), gaussian());
    }

    #[test]
    fn chart_round_trips() {
        let f = gaussian();
        let sp = s(0.7, 2.5);
        let psi = triv_b_inverse(sp, &f).unwrap();
        let (_, back) = triv_b(&psi).unwrap();
        assert!(back.distance(&f).unwrap() < 1e-12);
        let (_, back) = triv_a_inverse(&triv_a(sp, &f));
        assert!(back.distance(&f).unwrap() < 1e-14);
        let section = TrivializedSection { chart: Chart::B, base: f.clone(), samples: vec![sp, s(0.0, 1.0)] };
        for g in section.read_in(Chart::B).unwrap() {
            assert!(g.distance(&f).unwrap() < 1e-12);
        }
        assert_eq!(section.evaluate().unwrap().len(), 2);
    }

    #[test]
    fn grid_charts() {
        let spec = GridSpec::new(TorusConfig::circle(), 32, 8.0, 513).unwrap();
        let backend = Backend::Grid(spec);
        for seed in 0..5 {
            let f = random_test_function(seed, Roughness::Smooth, &backend);
            let sp = s(0.5 * seed as f64 - 1.0, 0.5 + 0.35 * seed as f64);
            let psi = triv_a(sp, &f);
            assert_relative_eq!(fiber_norm(&psi).unwrap(), f.norm().unwrap(), max_relative = 1e-13);
            let (_, b) = triv_b(&psi).unwrap();
            assert_relative_eq!(b.norm().unwrap(), f.norm().unwrap(), max_relative = 1e-6);
            assert!(norm_identity(&psi).unwrap().relative_residual() < 1e-6);
        }
    }

    #[test]
    fn smooth_sections_converge() {
        let f = gaussian();
        let us = [1e-3, 5e-4, 2.5e-4, 1.25e-4];
        for (s0, dir) in [(UpperHalfPlanePoint::i(), Direction::Im), (UpperHalfPlanePoint::i(), Direction::Re), (s(0.8, 1.7), Direction::Im)] {
            let limit = smoothness_limit(&f, s0, dir).unwrap();
            let probe = section_smoothness_probe(&f, s0, dir, &us).unwrap();
            for (u, q) in probe {
                assert!((q - limit).abs() < 2.0 * u * limit, "{dir:?} at {u}: {q} vs {limit}");
            }
        }
        // at s₀ = i the Im limit is the β generator
        let beta = crate::rho_rep::generator(crate::rho_rep::Subgroup::Beta, &f).unwrap().norm().unwrap();
        assert_relative_eq!(smoothness_limit(&f, UpperHalfPlanePoint::i(), Direction::Im).unwrap(), beta);
    }

    #[test]
    fn indicator_section_diverges() {
        let f: L2Function = AnalyticFunction::indicator(TAU, 0, 0.0, 1.0).unwrap().into();
        for u in [1e-2, 1e-4, 1e-6] {
            let q = section_smoothness_probe(&f, UpperHalfPlanePoint::i(), Direction::Im, &[u]).unwrap()[0].1;
            let exact = oracle::indicator_transition_distance_sq(u, TAU).sqrt() / u;
            assert_relative_eq!(q, exact, max_relative = 1e-9);
            assert!((0.95..=1.05).contains(&(q * u.sqrt() / TAU.sqrt())));
        }
        assert!(smoothness_limit(&f, UpperHalfPlanePoint::i(), Direction::Im).is_err());
    }
}
