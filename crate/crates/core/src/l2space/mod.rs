//! `L²(N, ℰ)` with two interchangeable backends.
//!
//! [`AnalyticFunction`] is an exact closed-form family on the circle model and
//! serves as the oracle; [`GridFunction`] handles arbitrary sampled data on
//! any torus dimension. [`L2Function`] dispatches between them and refuses to
//! mix backends.

pub mod analytic;
pub mod grid;
pub mod interp;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub use analytic::{AnalyticFunction, Term};
pub use grid::{GridFunction, GridSpec};

use crate::affine::AffineElement;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum L2Function {
    Analytic(AnalyticFunction),
    Grid(GridFunction),
}

/// Where test functions are built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "backend")]
pub enum Backend {
    Analytic { period: f64 },
    Grid(GridSpec),
}

impl Backend {
    /// Torus dimension of the backend.
    pub fn m(&self) -> usize {
        match self {
            Backend::Analytic { .. } => 1,
            Backend::Grid(spec) => spec.m(),
        }
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self, Backend::Analytic { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Roughness {
    Smooth,
    Rough,
}

fn mismatch() -> Error {
    Error::BackendMismatch("analytic and grid functions cannot be combined".into())
}

impl L2Function {
    /// Torus dimension.
    pub fn m(&self) -> usize {
        match self {
            L2Function::Analytic(_) => 1,
            L2Function::Grid(g) => g.spec().m(),
        }
    }

    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        match (self, other) {
            (L2Function::Analytic(f), L2Function::Analytic(g)) => f.inner(g),
            (L2Function::Grid(f), L2Function::Grid(g)) => f.inner(g),
            _ => Err(mismatch()),
        }
    }

    pub fn norm(&self) -> Result<f64> {
        match self {
            L2Function::Analytic(f) => f.norm(),
            L2Function::Grid(f) => f.norm(),
        }
    }

    /// `f ∘ A_σ`.
    pub fn pullback(&self, sigma: &AffineElement) -> Result<Self> {
        match self {
            L2Function::Analytic(f) => Ok(L2Function::Analytic(f.pullback(sigma))),
            L2Function::Grid(f) => f.pullback(sigma).map(L2Function::Grid),
        }
    }

    pub fn scale(&self, c: impl Into<Complex64>) -> Self {
        let c = c.into();
        match self {
            L2Function::Analytic(f) => L2Function::Analytic(f.scale(c)),
            L2Function::Grid(f) => L2Function::Grid(f.scale(c)),
        }
    }

    /// `self + c · other`.
    pub fn add_scaled(&self, c: impl Into<Complex64>, other: &Self) -> Result<Self> {
        let c = c.into();
        match (self, other) {
            (L2Function::Analytic(f), L2Function::Analytic(g)) => f.add_scaled(c, g).map(L2Function::Analytic),
            (L2Function::Grid(f), L2Function::Grid(g)) => f.add_scaled(c, g).map(L2Function::Grid),
            _ => Err(mismatch()),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_scaled(-1.0, other)
    }

    /// `‖self − other‖`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.sub(other)?.norm()
    }

    pub fn as_analytic(&self) -> Option<&AnalyticFunction> {
        match self {
            L2Function::Analytic(f) => Some(f),
            L2Function::Grid(_) => None,
        }
    }

    pub fn as_grid(&self) -> Option<&GridFunction> {
        match self {
            L2Function::Grid(f) => Some(f),
            L2Function::Analytic(_) => None,
        }
    }

    pub fn is_smooth(&self) -> bool {
        match self {
            L2Function::Analytic(f) => !f.has_indicator(),
            // sampled data carries no jump information
            L2Function::Grid(_) => true,
        }
    }
}

impl From<AnalyticFunction> for L2Function {
    fn from(f: AnalyticFunction) -> Self {
        L2Function::Analytic(f)
    }
}

impl From<GridFunction> for L2Function {
    fn from(f: GridFunction) -> Self {
        L2Function::Grid(f)
    }
}

fn normal_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Random profile on one circle factor. `gauss` bounds the Gaussian rates,
/// `k_max` the Fourier index.
fn random_profile(
    rng: &mut ChaCha8Rng,
    period: f64,
    kind: Roughness,
    gauss: (f64, f64),
    k_max: i64,
    max_power: u32,
) -> AnalyticFunction {
    let k = rng.random_range(-k_max..=k_max);
    let n_smooth = rng.random_range(1..=3);
    let mut terms: Vec<Term> = (0..n_smooth)
        .map(|_| {
            Term::gaussian(
                normal_complex(rng),
                rng.random_range(0..=max_power),
                rng.random_range(gauss.0..gauss.1),
                rng.random_range(-2.0..2.0),
            )
        })
        .collect();
    if kind == Roughness::Rough {
        for _ in 0..rng.random_range(1..=2) {
            let lo = rng.random_range(-3.0..1.5);
            let hi = lo + rng.random_range(0.5..1.5);
            let gauss_rate = if rng.random_bool(0.5) { 0.0 } else { rng.random_range(gauss.0..gauss.1) };
            terms.push(Term {
                coeff: normal_complex(rng),
                power: rng.random_range(0..=2),
                gauss_rate,
                osc_rate: rng.random_range(-2.0..2.0),
                indicator: Some((lo, hi)),
            });
        }
    }
    AnalyticFunction::new(period, k, terms).expect("random terms are valid")
}

/// Deterministic random test function.
///
/// `Smooth` functions are finite sums of `v^p e^{-γv²} e^{iλv}` in one Fourier
/// mode; `Rough` ones add at least one indicator term, so they are square
/// integrable but not differentiable along the Euler field. On a grid the
/// function is a product of such profiles, with Gaussian rates large enough
/// that pullbacks with `b ∈ [1/2, 2]` stay inside the default window.
pub fn random_test_function(seed: u64, kind: Roughness, backend: &Backend) -> L2Function {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match backend {
        Backend::Analytic { period } => {
            random_profile(&mut rng, *period, kind, (0.3, 2.0), 3, 3).into()
        }
        Backend::Grid(spec) => {
            let k_max = (spec.n_q() as i64 / 4).min(3);
            let factors: Vec<AnalyticFunction> = spec
                .config()
                .periods()
                .iter()
                .map(|&l| random_profile(&mut rng, l, kind, (2.5, 4.0), k_max, 2))
                .collect();
            GridFunction::sample(spec, |q, v| {
                factors.iter().enumerate().map(|(j, f)| f.eval(q[j], v[j])).product()
            })
            .expect("random profiles are finite")
            .into()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phasespace::TorusConfig;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    fn analytic() -> Backend {
        Backend::Analytic { period: TAU }
    }

    #[test]
    fn random_functions_are_deterministic() {
        let f = random_test_function(0, Roughness::Smooth, &analytic());
        assert_eq!(f, random_test_function(0, Roughness::Smooth, &analytic()));
        assert!(f.norm().unwrap() > 0.0);
        let r = random_test_function(1, Roughness::Rough, &analytic());
        assert!(r.as_analytic().unwrap().has_indicator());
        assert!(!r.is_smooth());
    }

    #[test]
    fn grid_random_functions_respect_margin() {
        let spec = GridSpec::default_for(TorusConfig::circle());
        for seed in 0..5 {
            let f = random_test_function(seed, Roughness::Smooth, &Backend::Grid(spec.clone()));
            let g = f.as_grid().unwrap();
            assert!(g.margin_factor() >= 2.0, "seed {seed}: margin {}", g.margin_factor());
        }
    }

    #[test]
    fn backend_mismatch_is_an_error() {
        let spec = GridSpec::new(TorusConfig::circle(), 8, 8.0, 65).unwrap();
        let a = random_test_function(3, Roughness::Smooth, &analytic());
        let g = random_test_function(3, Roughness::Smooth, &Backend::Grid(spec));
        assert!(matches!(a.inner(&g), Err(Error::BackendMismatch(_))));
        assert!(a.sub(&g).is_err());
    }

    proptest! {
        #[test]
        fn cauchy_schwarz(s1 in 0u64..1000, s2 in 0u64..1000, rough in any::<bool>()) {
            let kind = if rough { Roughness::Rough } else { Roughness::Smooth };
            let f = random_test_function(s1, kind, &analytic());
            let mut g = random_test_function(s2, Roughness::Smooth, &analytic());
            // force a common Fourier mode so the bound is not vacuous
            if let (L2Function::Analytic(fa), L2Function::Analytic(ga)) = (&f, &g) {
                g = AnalyticFunction::new(TAU, fa.k(), ga.terms().to_vec()).unwrap().into();
            }
            let lhs = f.inner(&g).unwrap().norm();
            let rhs = f.norm().unwrap() * g.norm().unwrap();
            prop_assert!(lhs <= rhs * (1.0 + 1e-10));
        }

        #[test]
        fn analytic_pullback_composes(seed in 0u64..1000, a1 in -3.0f64..3.0, b1 in 0.2f64..5.0, a2 in -3.0f64..3.0, b2 in 0.2f64..5.0) {
            let f = random_test_function(seed, Roughness::Rough, &analytic());
            let s = AffineElement::new(a1, b1).unwrap();
            let t = AffineElement::new(a2, b2).unwrap();
            let lhs = f.pullback(&s).unwrap().pullback(&t).unwrap();
            let rhs = f.pullback(&(t * s)).unwrap();
            let scale = f.norm().unwrap() * (b1 * b2).powf(-0.5);
            prop_assert!(lhs.distance(&rhs).unwrap() <= 1e-9 * scale);
        }
    }
}
