use prequant_core::halfform::{closed_form_density, halfform_weight, prop32_residual, wedge_density};
use prequant_core::phasespace::pullback_scaling_check;
use prequant_core::prequantum::ConnectionPotential;
use prequant_core::{AffineElement, UpperHalfPlanePoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn scaling_laws() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let sigma = AffineElement::new(rng.random_range(-5.0..5.0), rng.random_range(0.1..10.0)).unwrap();
        for m in 1..=3 {
            let check = pullback_scaling_check(&sigma, m);
            assert_eq!(check.omega_residual, 0.0);
            let expected = sigma.chi().powi(m as i32);
            assert!((check.liouville_factor - expected).abs() <= 1e-12 * expected);
        }
    }
}

#[test]
fn half_form_densities() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let s = UpperHalfPlanePoint::new(rng.random_range(-5.0..5.0), rng.random_range(0.1..10.0)).unwrap();
        for m in 1..=3 {
            let density = wedge_density(s, m).unwrap();
            assert!(density > 0.0);
            assert!(prop32_residual(s, m).unwrap() <= 1e-12 * closed_form_density(s, m));
            let w = halfform_weight(s, m).value;
            assert!((w * w - density).abs() <= 1e-12 * density);
        }
    }
}

#[test]
fn symbolic_curvature() {
    for m in 1..=3 {
        let a = ConnectionPotential::standard(m);
        assert!(a.potential_defect().is_zero());
        assert_eq!(a.symbolic_curvature_residual(), 0);
    }
}
