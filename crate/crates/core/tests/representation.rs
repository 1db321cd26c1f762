use std::f64::consts::TAU;

use num_complex::Complex64;
use prequant_core::l2space::{random_test_function, Backend, Roughness};
use prequant_core::rho_rep::{apply_rho, homomorphism_defect, loglog_slope, unitarity_defect};
use prequant_core::{AffineElement, GridFunction, GridSpec, L2Function, TorusConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_sigma(rng: &mut ChaCha8Rng) -> AffineElement {
    let a = rng.random_range(-5.0..=5.0);
    let b = 10f64.powf(rng.random_range(-1.0..=1.0));
    AffineElement::new(a, b).unwrap()
}

#[test]
fn analytic_unitarity_and_homomorphism() {
    let backend = Backend::Analytic { period: TAU };
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..100 {
        let kind = if case % 2 == 0 { Roughness::Smooth } else { Roughness::Rough };
        let f = random_test_function(1000 + case, kind, &backend);
        let norm = f.norm().unwrap();
        let (s, t) = (random_sigma(&mut rng), random_sigma(&mut rng));
        assert!(unitarity_defect(&s, &f).unwrap() <= 1e-9 * norm, "case {case}");
        assert!(homomorphism_defect(&s, &t, &f).unwrap() <= 1e-9 * norm, "case {case}");
    }
}

fn gauss_fourier(n_v: usize) -> L2Function {
    let spec = GridSpec::new(TorusConfig::circle(), 32, 8.0, n_v).unwrap();
    GridFunction::sample(&spec, |q, v| Complex64::from_polar((-0.5 * v[0] * v[0]).exp(), q[0]))
        .unwrap()
        .into()
}

#[test]
fn grid_unitarity_converges() {
    let sigma = AffineElement::new(0.7, 1.3).unwrap();
    let defects: Vec<(f64, f64)> = [65, 129, 257]
        .iter()
        .map(|&n| {
            let f = gauss_fourier(n);
            (16.0 / (n - 1) as f64, unitarity_defect(&sigma, &f).unwrap() / f.norm().unwrap())
        })
        .collect();
    let order = loglog_slope(&defects).unwrap();
    assert!(order >= 3.0, "{defects:?} order {order}");
}

#[test]
fn grid_and_analytic_agree() {
    let spec = GridSpec::new(TorusConfig::circle(), 32, 8.0, 1025).unwrap();
    let analytic = random_test_function(3, Roughness::Smooth, &Backend::Analytic { period: TAU });
    let grid: L2Function = GridFunction::from_analytic(&spec, analytic.as_analytic().unwrap()).unwrap().into();
    let sigma = AffineElement::new(-0.4, 1.5).unwrap();
    let exact = apply_rho(&sigma, &analytic).unwrap();
    let sampled: L2Function =
        GridFunction::from_analytic(&spec, exact.as_analytic().unwrap()).unwrap().into();
    let moved = apply_rho(&sigma, &grid).unwrap();
    assert!(moved.distance(&sampled).unwrap() < 1e-6 * grid.norm().unwrap());
}
