//! Experiment plans. Each plan is a list of independent jobs; a job returns
//! the rows of one sweep cell, including any rows derived from them, so the
//! report order depends only on the configuration.

mod field;
mod geometry;
mod group;
mod probes;

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use prequant_core::l2space::Backend;
use prequant_core::{AffineElement, AnalyticFunction, GridFunction, L2Function, UpperHalfPlanePoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{BackendKind, ExperimentConfig, ExperimentId};
use crate::report::Row;
use crate::ConfigError;

pub type Job = Box<dyn Fn() -> Vec<Row> + Send + Sync>;

pub fn plan(config: &ExperimentConfig) -> Result<Vec<Job>, ConfigError> {
    let cfg = Arc::new(config.clone());
    match config.experiment {
        ExperimentId::VerifyUnitarity => group::unitarity(cfg),
        ExperimentId::VerifyHomomorphism => group::homomorphism(cfg),
        ExperimentId::VerifyProp32 => geometry::prop32(cfg),
        ExperimentId::VerifyCurvature => geometry::curvature(cfg),
        ExperimentId::ProbeDerivative => probes::derivative(cfg),
        ExperimentId::ProbeNondiff => probes::nondiff(cfg),
        ExperimentId::TransitionSmoothness => field::smoothness(cfg),
        ExperimentId::NormIdentity => field::norm_identity(cfg),
    }
}

/// Independent stream per case, so rows do not depend on scheduling.
fn case_rng(seed: u64, case: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(case);
    rng
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        return lo;
    }
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// `a ∈ [−5, 5]`, `b` log-uniform in `b_range`.
fn random_sigma(rng: &mut ChaCha8Rng, b_range: (f64, f64)) -> AffineElement {
    let a = rng.random_range(-5.0..=5.0);
    AffineElement::new(a, log_uniform(rng, b_range.0, b_range.1)).expect("b > 0")
}

fn random_s(rng: &mut ChaCha8Rng, im_range: [f64; 2]) -> UpperHalfPlanePoint {
    let re = rng.random_range(-5.0..=5.0);
    UpperHalfPlanePoint::new(re, log_uniform(rng, im_range[0], im_range[1])).expect("im > 0")
}

/// Default tolerance by backend unless overridden.
fn tol(set: Option<f64>, cfg: &ExperimentConfig, analytic: f64, grid: f64) -> f64 {
    set.unwrap_or(match cfg.backend {
        BackendKind::Analytic => analytic,
        BackendKind::Grid => grid,
    })
}

/// Runs `body`, turning a library error into an error row built from `row`.
fn attempt(row: Row, body: impl FnOnce(Row) -> prequant_core::Result<Row>) -> Row {
    body(row.clone()).unwrap_or_else(|e| row.failed(e))
}

/// `Π_j e^{2πi q_j / L_j} e^{−v_j²/2}` in the configured backend.
fn gauss_fourier(backend: &Backend) -> prequant_core::Result<L2Function> {
    match backend {
        Backend::Analytic { period } => Ok(gauss_fourier_analytic(*period).into()),
        Backend::Grid(spec) => {
            let periods = spec.config().periods().to_vec();
            Ok(GridFunction::sample(spec, |q, v| {
                q.iter()
                    .zip(v)
                    .zip(&periods)
                    .map(|((q, v), l)| Complex64::from_polar((-0.5 * v * v).exp(), TAU * q / l))
                    .product()
            })?
            .into())
        }
    }
}

fn gauss_fourier_analytic(period: f64) -> AnalyticFunction {
    AnalyticFunction::gaussian_mode(period, 1, 0.5).expect("valid Gaussian mode")
}

/// `1_{[0,1]}(v)` on the circle.
fn unit_indicator(backend: &Backend) -> prequant_core::Result<L2Function> {
    match backend {
        Backend::Analytic { period } => Ok(AnalyticFunction::indicator(*period, 0, 0.0, 1.0)?.into()),
        Backend::Grid(spec) => Ok(GridFunction::sample(spec, |_, v| {
            Complex64::new(if (0.0..=1.0).contains(&v[0]) { 1.0 } else { 0.0 }, 0.0)
        })?
        .into()),
    }
}

fn spacing(v_window: f64, n_v: usize) -> f64 {
    2.0 * v_window / (n_v - 1) as f64
}

/// `(u, value)` pairs from rows carrying a `u` parameter.
fn u_pairs(rows: &[Row]) -> Vec<(f64, f64)> {
    rows.iter()
        .filter_map(|r| Some((r.params.get("u")?.parse().ok()?, r.measured?)))
        .collect()
}
