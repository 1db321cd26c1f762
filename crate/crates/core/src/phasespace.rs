//! Flat torus model of the geodesic phase space.
//!
//! A point is a geodesic `x(t) = q + v t` on `M = Π R/L_j Z`, stored as
//! `(q, v)` with `q_j ∈ [0, L_j)`. The zero-velocity locus is `M` itself.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::affine::{AffineElement, UpperHalfPlanePoint};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusConfig {
    periods: Vec<f64>,
}

impl TorusConfig {
    pub fn new(periods: Vec<f64>) -> Result<Self> {
        if periods.is_empty() {
            return Err(Error::InvalidTorus("m must be at least 1".into()));
        }
        if let Some(p) = periods.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
            return Err(Error::InvalidTorus(format!("period {p} is not positive")));
        }
        Ok(Self { periods })
    }

    /// The circle `R/2πZ`.
    pub fn circle() -> Self {
        Self { periods: vec![TAU] }
    }

    /// `m` copies of `R/2πZ`.
    pub fn standard(m: usize) -> Result<Self> {
        Self::new(vec![TAU; m])
    }

    pub fn m(&self) -> usize {
        self.periods.len()
    }

    pub fn periods(&self) -> &[f64] {
        &self.periods
    }

    pub fn volume(&self) -> f64 {
        self.periods.iter().product()
    }

    pub fn point(&self, q: Vec<f64>, v: Vec<f64>) -> Result<PhasePoint> {
        if q.len() != self.m() || v.len() != self.m() {
            return Err(Error::InvalidArgument(format!(
                "phase point needs {} coordinates, got q: {}, v: {}",
                self.m(),
                q.len(),
                v.len()
            )));
        }
        let q = q
            .iter()
            .zip(&self.periods)
            .map(|(&q, &l)| reduce(q, l))
            .collect();
        Ok(PhasePoint { q, v })
    }

    /// `A_σ x = x ∘ σ`, i.e. `(q + a v mod L, b v)`.
    pub fn act(&self, sigma: &AffineElement, x: &PhasePoint) -> PhasePoint {
        let q = x
            .q
            .iter()
            .zip(&x.v)
            .zip(&self.periods)
            .map(|((&q, &v), &l)| reduce(q + sigma.a() * v, l))
            .collect();
        let v = x.v.iter().map(|v| sigma.b() * v).collect();
        PhasePoint { q, v }
    }

    /// Cauchy–Riemann residual of `(a, b) ↦ z_i(act((a, b), x))` at `σ`,
    /// measured by central differences of step `h` in `a` and `b`.
    pub fn cr_residual(&self, x: &PhasePoint, sigma: &AffineElement, h: f64) -> f64 {
        let z = |a: f64, b: f64| {
            let y = self.act(&AffineElement::new(a, b).expect("b stays positive"), x);
            adapted_coordinate_unchecked(Complex64::i(), &y)
        };
        let (a, b) = (sigma.a(), sigma.b());
        let (za_p, za_m) = (z(a + h, b), z(a - h, b));
        let (zb_p, zb_m) = (z(a, b + h), z(a, b - h));
        let mut worst: f64 = 0.0;
        for j in 0..self.m() {
            let l = self.periods[j];
            let da = Complex64::new(wrap(za_p[j].re - za_m[j].re, l), za_p[j].im - za_m[j].im) / (2.0 * h);
            let db = Complex64::new(wrap(zb_p[j].re - zb_m[j].re, l), zb_p[j].im - zb_m[j].im) / (2.0 * h);
            // holomorphic in w = a + ib  <=>  ∂_b F = i ∂_a F
            worst = worst.max((db - Complex64::i() * da).norm());
        }
        worst
    }
}

impl Default for TorusConfig {
    fn default() -> Self {
        Self::circle()
    }
}

fn reduce(q: f64, period: f64) -> f64 {
    let r = q - period * (q / period).floor();
    if r >= period || r < 0.0 {
        0.0
    } else {
        r
    }
}

/// Representative of `d` modulo `period` in `(-period/2, period/2]`.
fn wrap(d: f64, period: f64) -> f64 {
    d - period * (d / period).round()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    q: Vec<f64>,
    v: Vec<f64>,
}

impl PhasePoint {
    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn m(&self) -> usize {
        self.q.len()
    }

    /// Distance on the torus between two points of `config` (max norm).
    pub fn distance(&self, other: &PhasePoint, config: &TorusConfig) -> f64 {
        let dq = self
            .q
            .iter()
            .zip(&other.q)
            .zip(config.periods())
            .map(|((a, b), &l)| wrap(a - b, l).abs());
        let dv = self.v.iter().zip(&other.v).map(|(a, b)| (a - b).abs());
        dq.chain(dv).fold(0.0, f64::max)
    }
}

/// A tangent vector in `(dq, dv)` components.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub dq: Vec<f64>,
    pub dv: Vec<f64>,
}

impl TangentVector {
    pub fn is_zero(&self) -> bool {
        self.dq.iter().chain(&self.dv).all(|c| *c == 0.0)
    }
}

/// The `J(s)`-holomorphic coordinates `z_{s,j} = q_j + s v_j`.
pub fn adapted_coordinate(s: UpperHalfPlanePoint, x: &PhasePoint) -> Vec<Complex64> {
    adapted_coordinate_unchecked(s.to_complex(), x)
}

fn adapted_coordinate_unchecked(s: Complex64, x: &PhasePoint) -> Vec<Complex64> {
    x.q.iter().zip(&x.v).map(|(&q, &v)| s * v + q).collect()
}

/// Geodesic-flow field `𝒳` and Euler field `𝒴` at `x`.
pub fn flow_fields(x: &PhasePoint) -> (TangentVector, TangentVector) {
    let zero = vec![0.0; x.m()];
    let geodesic = TangentVector {
        dq: x.v.clone(),
        dv: zero.clone(),
    };
    let euler = TangentVector {
        dq: zero,
        dv: x.v.clone(),
    };
    (geodesic, euler)
}

/// Result of pulling `ω` and the Liouville form back along `A_σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingCheck {
    /// Max entry of `J^T Ω J − χ(σ) Ω`.
    pub omega_residual: f64,
    /// `det J`, to be compared with `χ(σ)^m`.
    pub liouville_factor: f64,
}

/// Jacobian of `act(σ, ·)` in the coordinate order `(q_1, v_1, …, q_m, v_m)`.
pub fn action_jacobian(sigma: &AffineElement, m: usize) -> DMatrix<f64> {
    let mut jac = DMatrix::zeros(2 * m, 2 * m);
    for j in 0..m {
        jac[(2 * j, 2 * j)] = 1.0;
        jac[(2 * j, 2 * j + 1)] = sigma.a();
        jac[(2 * j + 1, 2 * j + 1)] = sigma.b();
    }
    jac
}

/// Bilinear form of `ω = Σ dv_j ∧ dq_j` in the coordinate order of
/// [`action_jacobian`].
pub fn symplectic_matrix(m: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * m, 2 * m);
    for j in 0..m {
        omega[(2 * j, 2 * j + 1)] = -1.0;
        omega[(2 * j + 1, 2 * j)] = 1.0;
    }
    omega
}

pub fn pullback_scaling_check(sigma: &AffineElement, m: usize) -> ScalingCheck {
    let jac = action_jacobian(sigma, m);
    let omega = symplectic_matrix(m);
    let n = 2 * m;
    // plain products and sums, no fused multiply-add, so exact cancellation survives
    let mut omega_residual: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut pulled = 0.0;
            for k in 0..n {
                for l in 0..n {
                    pulled += jac[(k, i)] * omega[(k, l)] * jac[(l, j)];
                }
            }
            omega_residual = omega_residual.max((pulled - sigma.chi() * omega[(i, j)]).abs());
        }
    }
    ScalingCheck {
        omega_residual,
        liouville_factor: jac.determinant(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn circle_point(q: f64, v: f64) -> PhasePoint {
        TorusConfig::circle().point(vec![q], vec![v]).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(TorusConfig::new(vec![]).is_err());
        assert!(TorusConfig::new(vec![1.0, 0.0]).is_err());
        assert_eq!(TorusConfig::default().periods(), &[TAU]);
    }

    #[test]
    fn reduction_stays_in_range() {
        for q in [-1e-17, -TAU, TAU, 3.0 * TAU + 0.1, -0.5] {
            let r = reduce(q, TAU);
            assert!((0.0..TAU).contains(&r), "{q} -> {r}");
        }
    }

    #[test]
    fn act_examples() {
        let cfg = TorusConfig::circle();
        let x = circle_point(1.0, 0.5);
        assert_eq!(cfg.act(&AffineElement::identity(), &x), x);
        let y = cfg.act(&AffineElement::alpha(2.0), &x);
        assert_eq!(y, circle_point(2.0, 0.5));
        let y = cfg.act(&AffineElement::beta(0.7), &x);
        assert_eq!(y.q(), &[1.0]);
        assert_eq!(y.v(), &[0.5 * 0.7f64.exp()]);
    }

    #[test]
    fn adapted_coordinate_examples() {
        let x = circle_point(1.25, -0.5);
        let z = adapted_coordinate(UpperHalfPlanePoint::i(), &x);
        assert_eq!(z, vec![Complex64::new(1.25, -0.5)]);

        let s = UpperHalfPlanePoint::new(0.75, 2.0).unwrap();
        let z = adapted_coordinate(s, &x);
        assert_eq!(z, vec![Complex64::new(1.25 + 0.75 * -0.5, 2.0 * -0.5)]);

        let rest = circle_point(3.0, 0.0);
        assert_eq!(adapted_coordinate(s, &rest), vec![Complex64::new(3.0, 0.0)]);
    }

    #[test]
    fn flow_fields_vanish_on_zero_section() {
        let (x, y) = flow_fields(&circle_point(2.0, 0.0));
        assert!(x.is_zero() && y.is_zero());
    }

    #[test]
    fn flow_fields_are_orbit_derivatives() {
        let cfg = TorusConfig::new(vec![TAU, 3.0]).unwrap();
        let x = cfg.point(vec![0.3, 1.1], vec![0.8, -1.7]).unwrap();
        let (gx, gy) = flow_fields(&x);
        for h in [1e-2, 5e-3] {
            let ap = cfg.act(&AffineElement::alpha(h), &x);
            let am = cfg.act(&AffineElement::alpha(-h), &x);
            let bp = cfg.act(&AffineElement::beta(h), &x);
            let bm = cfg.act(&AffineElement::beta(-h), &x);
            for j in 0..2 {
                let l = cfg.periods()[j];
                let dq_a = wrap(ap.q()[j] - am.q()[j], l) / (2.0 * h);
                let dv_a = (ap.v()[j] - am.v()[j]) / (2.0 * h);
                assert!((dq_a - gx.dq[j]).abs() < 1e-10 && (dv_a - gx.dv[j]).abs() < 1e-10);
                let dq_b = wrap(bp.q()[j] - bm.q()[j], l) / (2.0 * h);
                let dv_b = (bp.v()[j] - bm.v()[j]) / (2.0 * h);
                // central difference of v e^u has error v h²/6
                assert!(dq_b.abs() < 1e-12);
                assert!((dv_b - gy.dv[j]).abs() <= x.v()[j].abs() * h * h / 5.0);
            }
        }
    }

    #[test]
    fn scaling_examples() {
        let c = pullback_scaling_check(&AffineElement::identity(), 1);
        assert_eq!((c.omega_residual, c.liouville_factor), (0.0, 1.0));
        let u = 0.6;
        let c = pullback_scaling_check(&AffineElement::beta(u), 3);
        assert_eq!(c.omega_residual, 0.0);
        assert!((c.liouville_factor - (3.0 * u).exp()).abs() < 1e-13 * (3.0 * u).exp());
        let c = pullback_scaling_check(&AffineElement::new(5.0, 3.0).unwrap(), 2);
        assert_eq!(c.omega_residual, 0.0);
        assert!((c.liouville_factor - 9.0).abs() < 1e-12);
    }

    #[test]
    fn adaptedness_of_sigma_s() {
        let cfg = TorusConfig::circle();
        let x = circle_point(0.4, 1.3);
        let s = UpperHalfPlanePoint::new(-0.8, 1.7).unwrap();
        let moved = cfg.act(&AffineElement::sigma_s(s), &x);
        let lhs = adapted_coordinate(UpperHalfPlanePoint::i(), &moved)[0];
        let rhs = adapted_coordinate(s, &x)[0];
        assert!((wrap(lhs.re - rhs.re, TAU)).abs() < 1e-14 && (lhs.im - rhs.im).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn right_action_law(
            a1 in -5.0f64..5.0, b1 in 0.1f64..10.0,
            a2 in -5.0f64..5.0, b2 in 0.1f64..10.0,
            q in 0.0f64..TAU, v in -3.0f64..3.0,
        ) {
            let cfg = TorusConfig::circle();
            let (s1, s2) = (AffineElement::new(a1, b1).unwrap(), AffineElement::new(a2, b2).unwrap());
            let x = circle_point(q, v);
            let lhs = cfg.act(&(s1 * s2), &x);
            let rhs = cfg.act(&s2, &cfg.act(&s1, &x));
            prop_assert!(lhs.distance(&rhs, &cfg) < 1e-11);
        }

        #[test]
        fn orbit_map_is_holomorphic(
            a in -5.0f64..5.0, b in 0.5f64..5.0,
            q in 0.0f64..TAU, v in -3.0f64..3.0,
        ) {
            prop_assume!(v.abs() > 1e-3);
            let cfg = TorusConfig::circle();
            let r = cfg.cr_residual(&circle_point(q, v), &AffineElement::new(a, b).unwrap(), 1e-3);
            prop_assert!(r < 1e-9, "CR residual {}", r);
        }

        #[test]
        fn adapted_coordinate_intertwines(
            re in -5.0f64..5.0, im in 0.1f64..10.0,
            q in 0.0f64..TAU, v in -3.0f64..3.0,
        ) {
            let cfg = TorusConfig::circle();
            let s = UpperHalfPlanePoint::new(re, im).unwrap();
            let x = circle_point(q, v);
            let lhs = adapted_coordinate(UpperHalfPlanePoint::i(), &cfg.act(&AffineElement::sigma_s(s), &x))[0];
            let rhs = adapted_coordinate(s, &x)[0];
            prop_assert!(wrap(lhs.re - rhs.re, TAU).abs() < 1e-12);
            prop_assert!((lhs.im - rhs.im).abs() < 1e-12);
        }

        #[test]
        fn jacobian_scales_liouville(a in -5.0f64..5.0, b in 0.1f64..10.0, m in 1usize..=3) {
            let c = pullback_scaling_check(&AffineElement::new(a, b).unwrap(), m);
            prop_assert_eq!(c.omega_residual, 0.0);
            let expected = b.powi(m as i32);
            prop_assert!((c.liouville_factor - expected).abs() <= 1e-12 * expected);
        }
    }
}
