use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use prequant_core::l2space::Term;
use prequant_core::l2space::{random_test_function, Roughness};
use prequant_core::rho_rep::{
    continuity_probe, derivative_residual, difference_quotient, generator, loglog_slope, oracle, CurveInGroup,
    Sidedness, Subgroup,
};
use prequant_core::{AffineElement, AnalyticFunction, L2Function};
use rand::Rng;

use super::{attempt, case_rng, gauss_fourier, gauss_fourier_analytic, tol, u_pairs, unit_indicator, Job};
use crate::config::{BackendKind, ExperimentConfig};
use crate::report::{Criterion, Row};
use crate::ConfigError;

const ID_D: &str = "probe-derivative";
const ID_N: &str = "probe-nondiff";

/// Smallest step the grid backend resolves for rough functions.
pub const GRID_MIN_U: f64 = 0.05;

fn subgroup_name(d: Subgroup) -> &'static str {
    match d {
        Subgroup::Alpha => "alpha",
        Subgroup::Beta => "beta",
    }
}

/// `𝒳f` and `(1/2)f + 𝒴f` written out by hand for `e^{2πiq/L} e^{−v²/2}`.
fn explicit_generator(period: f64, direction: Subgroup) -> AnalyticFunction {
    let terms = match direction {
        Subgroup::Alpha => vec![Term::gaussian(Complex64::new(0.0, TAU / period), 1, 0.5, 0.0)],
        Subgroup::Beta => vec![
            Term::gaussian(Complex64::new(0.5, 0.0), 0, 0.5, 0.0),
            Term::gaussian(Complex64::new(-1.0, 0.0), 2, 0.5, 0.0),
        ],
    };
    AnalyticFunction::new(period, 1, terms).expect("valid terms")
}

pub fn derivative(cfg: Arc<ExperimentConfig>) -> Result<Vec<Job>, ConfigError> {
    cfg.require_analytic()?;
    let backend = cfg.backend()?;
    let period = cfg.torus_config()?.periods()[0];
    let us = cfg.u_values.clone().unwrap_or_else(|| vec![1e-2, 5e-3, 2.5e-3]);
    let band = cfg.tolerances.ratio_band.unwrap_or([1.6, 2.4]);
    let formula_tol = cfg.tolerances.formula.unwrap_or(1e-12);
    let samples = cfg.samples.unwrap_or(0) as u64;
    let seed = if samples > 0 { Some(cfg.require_seed()?) } else { None };

    let mut functions: Vec<(String, L2Function)> = vec![("gauss-fourier".into(), gauss_fourier_analytic(period).into())];
    for case in 0..samples {
        let mut rng = case_rng(seed.expect("checked"), case);
        functions.push((format!("random-{case}"), random_test_function(rng.random(), Roughness::Smooth, &backend)));
    }
    let mut jobs: Vec<Job> = Vec::new();
    for (name, f) in functions {
        for direction in [Subgroup::Alpha, Subgroup::Beta] {
            let (name, f, us) = (name.clone(), f.clone(), us.clone());
            jobs.push(Box::new(move || {
                let base = Row::new(ID_D).param("function", &name).param("direction", subgroup_name(direction));
                let mut rows = Vec::new();
                if name == "gauss-fourier" {
                    rows.push(attempt(base.clone().param("check", "generator"), |row| {
                        let closed = generator(direction, &f)?;
                        let explicit: L2Function = explicit_generator(period, direction).into();
                        let err = closed.distance(&explicit)? / explicit.norm()?;
                        Ok(row.value(err, Some(0.0)).judge(Criterion::AbsTol { tol: formula_tol }))
                    }));
                }
                let limit = generator(direction, &f).and_then(|g| g.norm());
                let mut residuals = Vec::new();
                for &u in &us {
                    let row = attempt(base.clone().param("check", "residual").param("u", u), |row| {
                        Ok(row.value(derivative_residual(direction, &f, u)?, None))
                    });
                    residuals.push(row.clone());
                    rows.push(row);
                    rows.push(attempt(base.clone().param("check", "quotient").param("u", u), |row| {
                        let q = difference_quotient(&direction.curve(), &f, u, Sidedness::OneSided)?;
                        Ok(row.value(q, Some(limit.clone()?)))
                    }));
                }
                let points = u_pairs(&residuals);
                for w in points.windows(2) {
                    let ratio = w[0].1 / w[1].1;
                    rows.push(
                        base.clone()
                            .param("check", "halving-ratio")
                            .param("u", w[0].0)
                            .param("u_next", w[1].0)
                            .value(ratio, None)
                            .judge(Criterion::within(band)),
                    );
                }
                rows
            }));
        }
    }
    Ok(jobs)
}

pub fn nondiff(cfg: Arc<ExperimentConfig>) -> Result<Vec<Job>, ConfigError> {
    let backend = cfg.backend()?;
    if backend.m() != 1 {
        return Err(ConfigError::Invalid("probe-nondiff runs on the circle (one period)".into()));
    }
    let period = cfg.torus_config()?.periods()[0];
    let grid = cfg.backend == BackendKind::Grid;
    let us = cfg
        .u_values
        .clone()
        .unwrap_or_else(|| if grid { vec![0.2, 0.1, 0.05] } else { vec![1e-2, 1e-4, 1e-6] });
    if grid {
        if let Some(u) = us.iter().find(|u| **u < GRID_MIN_U) {
            return Err(ConfigError::Invalid(format!(
                "the grid backend cannot resolve rough steps below u = {GRID_MIN_U}, got {u}"
            )));
        }
    }
    let radii = cfg
        .radii
        .clone()
        .unwrap_or_else(|| if grid { vec![0.2, 0.1, 0.05] } else { vec![1e-1, 1e-2, 1e-3] });
    let circle_samples = cfg.circle_samples.unwrap_or(16);
    let quotient_tol = tol(cfg.tolerances.quotient, &cfg, 1e-10, 5e-2);
    let scaled_band = cfg.tolerances.scaled_band.unwrap_or([0.95, 1.05]);
    let slope_band = cfg.tolerances.slope_band.unwrap_or([-0.55, -0.45]);
    let smooth_band = cfg.tolerances.smooth_continuity_band.unwrap_or([0.9, 1.1]);
    let rough_band = cfg.tolerances.rough_continuity_band.unwrap_or([0.45, 0.55]);

    let mut jobs: Vec<Job> = Vec::new();
    {
        let backend = backend.clone();
        jobs.push(Box::new(move || {
            let base = Row::new(ID_N).param("function", "indicator").param("direction", "beta");
            let f = match unit_indicator(&backend) {
                Ok(f) => f,
                Err(e) => return vec![base.failed(e)],
            };
            let mut rows = Vec::new();
            let mut quotients = Vec::new();
            for &u in &us {
                let row = attempt(base.clone().param("check", "quotient").param("u", u), |row| {
                    let q = difference_quotient(&CurveInGroup::Beta, &f, u, Sidedness::OneSided)?;
                    let exact = oracle::indicator_beta_quotient(u, period);
                    Ok(row.value(q, Some(exact)).judge(Criterion::RelTol { tol: quotient_tol }))
                });
                if let Some(q) = row.measured {
                    quotients.push((u, q));
                    rows.push(row);
                    rows.push(
                        base.clone()
                            .param("check", "scaled")
                            .param("u", u)
                            .value(q * (u / period).sqrt(), None)
                            .judge(Criterion::within(scaled_band)),
                    );
                } else {
                    rows.push(row);
                }
            }
            if us.len() >= 2 {
                let row = base.clone().param("check", "slope");
                rows.push(match loglog_slope(&quotients) {
                    Some(p) if quotients.len() == us.len() => row.value(p, None).judge(Criterion::within(slope_band)),
                    _ => row.failed("quotients at every step are needed for a slope"),
                });
            }
            rows
        }));
    }
    for (name, band) in [("gauss-fourier", smooth_band), ("indicator", rough_band)] {
        let (backend, radii) = (backend.clone(), radii.clone());
        jobs.push(Box::new(move || {
            let base = Row::new(ID_N).param("function", name).param("sigma0", "identity");
            let f = if name == "indicator" { unit_indicator(&backend) } else { gauss_fourier(&backend) };
            let probe = f.and_then(|f| continuity_probe(&AffineElement::identity(), &f, &radii, circle_samples));
            let probe = match probe {
                Ok(p) => p,
                Err(e) => return vec![base.param("check", "continuity").failed(e)],
            };
            let mut rows: Vec<Row> = probe
                .iter()
                .map(|&(r, d)| base.clone().param("check", "continuity").param("radius", r).value(d, None))
                .collect();
            if probe.len() >= 2 {
                let decreasing = probe.windows(2).all(|w| w[1].1 < w[0].1);
                let exponent = loglog_slope(&probe);
                let row = base.clone().param("check", "continuity-exponent");
                rows.push(match exponent {
                    Some(p) if decreasing => row.value(p, None).judge(Criterion::within(band)),
                    Some(p) => row.value(p, None).failed("deviations do not decrease with the radius"),
                    None => row.failed("deviations vanish; no exponent"),
                });
            }
            rows
        }));
    }
    Ok(jobs)
}
