//! The affine group `A₊` of orientation-preserving reparametrizations
//! `t ↦ a + b t`, its one-parameter subgroups and the upper half plane chart.
//!
//! Products are composed as maps: `(σσ')(t) = σ(σ'(t))`. With the right
//! action `A_σ x = x ∘ σ` on geodesics this gives `A_{σσ'} = A_{σ'} ∘ A_σ`,
//! which is what makes `f ↦ χ(σ)^{m/2} f ∘ A_σ` a homomorphism.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An element `t ↦ a + b t` of `A₊` (so `b > 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineElement {
    a: f64,
    b: f64,
}

impl AffineElement {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) || !a.is_finite() {
            return Err(Error::NonPositiveDilation(b));
        }
        Ok(Self { a, b })
    }

    pub const fn identity() -> Self {
        Self { a: 0.0, b: 1.0 }
    }

    /// Translation subgroup `α(u) = { t ↦ u + t }`.
    pub fn alpha(u: f64) -> Self {
        Self { a: u, b: 1.0 }
    }

    /// Dilation subgroup `β(u) = { t ↦ e^u t }`.
    pub fn beta(u: f64) -> Self {
        Self { a: 0.0, b: u.exp() }
    }

    /// The unique `σ_s` with `σ_s(i) = s`.
    pub fn sigma_s(s: UpperHalfPlanePoint) -> Self {
        Self { a: s.re(), b: s.im() }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `σ ∘ σ'`, i.e. `t ↦ σ(σ'(t))`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            a: self.a + self.b * other.a,
            b: self.b * other.b,
        }
    }

    pub fn invert(&self) -> Self {
        Self {
            a: -self.a / self.b,
            b: 1.0 / self.b,
        }
    }

    /// The character `χ(σ) = b`.
    pub fn chi(&self) -> f64 {
        self.b
    }

    pub fn apply(&self, t: f64) -> f64 {
        self.a + self.b * t
    }

    pub fn apply_complex(&self, z: Complex64) -> Complex64 {
        z * self.b + self.a
    }
}

impl Default for AffineElement {
    fn default() -> Self {
        Self::identity()
    }
}

impl std::ops::Mul for AffineElement {
    type Output = AffineElement;

    fn mul(self, rhs: Self) -> Self {
        self.compose(&rhs)
    }
}

/// A point `s` of the upper half plane `S = { Im s > 0 }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpperHalfPlanePoint {
    re: f64,
    im: f64,
}

impl UpperHalfPlanePoint {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        if !(im > 0.0 && im.is_finite()) || !re.is_finite() {
            return Err(Error::NotInUpperHalfPlane(im));
        }
        Ok(Self { re, im })
    }

    pub const fn i() -> Self {
        Self { re: 0.0, im: 1.0 }
    }

    pub fn re(&self) -> f64 {
        self.re
    }

    pub fn im(&self) -> f64 {
        self.im
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

impl TryFrom<Complex64> for UpperHalfPlanePoint {
    type Error = Error;

    fn try_from(z: Complex64) -> Result<Self> {
        Self::new(z.re, z.im)
    }
}
