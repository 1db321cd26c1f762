use std::f64::consts::TAU;

use prequant_core::field::{
    fiber_norm, norm_identity, section_smoothness_probe, smoothness_limit, transition, triv_a, triv_b, Direction,
};
use prequant_core::l2space::{random_test_function, Backend, Roughness};
use prequant_core::rho_rep::loglog_slope;
use prequant_core::{AnalyticFunction, GridSpec, L2Function, TorusConfig, UpperHalfPlanePoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn check_charts(backend: &Backend, im_range: (f64, f64), cases: u64, tol: f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for case in 0..cases {
        let kind = if backend.is_analytic() && case % 2 == 1 { Roughness::Rough } else { Roughness::Smooth };
        let f = random_test_function(500 + case, kind, backend);
        let im = im_range.0 * (im_range.1 / im_range.0).powf(rng.random::<f64>());
        let s = UpperHalfPlanePoint::new(rng.random_range(-2.0..2.0), im).unwrap();
        let norm = f.norm().unwrap();
        let psi = triv_a(s, &f);
        assert!((fiber_norm(&psi).unwrap() - norm).abs() <= 1e-14 * norm);
        let (_, g) = triv_b(&psi).unwrap();
        assert!((g.norm().unwrap() - norm).abs() <= tol * norm, "case {case}");
        assert!(g.distance(&transition(s, &f).unwrap()).unwrap() <= 1e-12 * norm);
        let id = norm_identity(&psi).unwrap().relative_residual();
        assert!(id <= tol, "case {case}: {id} s={s:?}");
    }
}

#[test]
fn analytic_charts() {
    check_charts(&Backend::Analytic { period: TAU }, (0.1, 10.0), 100, 1e-9);
}

#[test]
fn grid_charts() {
    let spec = GridSpec::new(TorusConfig::circle(), 32, 8.0, 1025).unwrap();
    check_charts(&Backend::Grid(spec), (0.5, 2.0), 20, 1e-6);
}

#[test]
fn smoothness_contrast() {
    let smooth = random_test_function(4, Roughness::Smooth, &Backend::Analytic { period: TAU });
    let s0 = UpperHalfPlanePoint::new(0.3, 1.2).unwrap();
    let us = [1e-3, 5e-4, 2.5e-4, 1.25e-4];
    let probe = section_smoothness_probe(&smooth, s0, Direction::Im, &us).unwrap();
    let limit = smoothness_limit(&smooth, s0, Direction::Im).unwrap();
    assert!((probe.last().unwrap().1 - limit).abs() < 1e-3 * limit);

    let rough: L2Function = AnalyticFunction::indicator(TAU, 0, 0.0, 1.0).unwrap().into();
    let probe =
        section_smoothness_probe(&rough, UpperHalfPlanePoint::i(), Direction::Im, &[1e-2, 1e-4, 1e-6]).unwrap();
    let slope = loglog_slope(&probe).unwrap();
    assert!((-0.55..=-0.45).contains(&slope), "{slope}");
    // continuity survives: the differences themselves still vanish
    assert!(probe.iter().all(|(u, q)| u * q < 3.0 * (TAU * u).sqrt()));
}
