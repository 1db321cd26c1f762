use std::sync::Arc;

use prequant_core::l2space::{random_test_function, Backend, Roughness};
use prequant_core::phasespace::pullback_scaling_check;
use prequant_core::rho_rep::{apply_rho, homomorphism_defect, loglog_slope};
use prequant_core::AffineElement;
use rand::Rng;

use super::{attempt, case_rng, gauss_fourier, random_sigma, spacing, tol, Job};
use crate::config::{BackendKind, ExperimentConfig, Sigma};
use crate::report::{Criterion, Row};
use crate::ConfigError;

const ID_U: &str = "verify-unitarity";
const ID_H: &str = "verify-homomorphism";

fn kind_for(case: u64, backend: &Backend) -> Roughness {
    if backend.is_analytic() && case % 2 == 1 {
        Roughness::Rough
    } else {
        Roughness::Smooth
    }
}

/// Random `σ` range per backend: the grid keeps dilations mild so the
/// transported support stays inside the window.
fn b_range(cfg: &ExperimentConfig, composite: bool) -> (f64, f64) {
    match (cfg.backend, composite) {
        (BackendKind::Analytic, _) => (0.1, 10.0),
        (BackendKind::Grid, false) => (0.5, 2.0),
        (BackendKind::Grid, true) => (0.7, 1.4),
    }
}

pub fn unitarity(cfg: Arc<ExperimentConfig>) -> Result<Vec<Job>, ConfigError> {
    let backend = cfg.backend()?;
    let default_samples = if backend.is_analytic() { 100 } else { 0 };
    let samples = cfg.samples.unwrap_or(default_samples) as u64;
    let mut jobs: Vec<Job> = Vec::new();
    if samples > 0 {
        let seed = cfg.require_seed()?;
        let dims = cfg.dims.clone().unwrap_or_else(|| vec![1, 2, 3]);
        let unitarity_tol = tol(cfg.tolerances.unitarity, &cfg, 1e-9, 1e-6);
        let liouville_tol = cfg.tolerances.liouville.unwrap_or(1e-12);
        for case in 0..samples {
            let (cfg, backend, dims) = (cfg.clone(), backend.clone(), dims.clone());
            jobs.push(Box::new(move || {
                let mut rng = case_rng(seed, case);
                let sigma = random_sigma(&mut rng, b_range(&cfg, false));
                let kind = kind_for(case, &backend);
                let f = random_test_function(rng.random(), kind, &backend);
                let base = Row::new(ID_U)
                    .param("case", case)
                    .param("a", sigma.a())
                    .param("b", sigma.b());
                let mut rows = vec![attempt(base.clone().param("check", "norm").param("kind", roughness(kind)), |row| {
                    let ratio = apply_rho(&sigma, &f)?.norm()? / f.norm()?;
                    Ok(row.value(ratio, Some(1.0)).judge(Criterion::AbsTol { tol: unitarity_tol }))
                })];
                for &m in &dims {
                    let check = pullback_scaling_check(&sigma, m);
                    rows.push(
                        base.clone()
                            .param("check", "omega")
                            .param("m", m)
                            .value(check.omega_residual, Some(0.0))
                            .judge(Criterion::AbsTol { tol: 0.0 }),
                    );
                    rows.push(
                        base.clone()
                            .param("check", "liouville")
                            .param("m", m)
                            .value(check.liouville_factor, Some(sigma.chi().powi(m as i32)))
                            .judge(Criterion::RelTol { tol: liouville_tol }),
                    );
                }
                rows
            }));
        }
    }
    if cfg.backend == BackendKind::Grid {
        let spec = cfg.grid_spec()?;
        let resolutions = cfg.resolutions.clone().unwrap_or_else(|| vec![65, 129, 257]);
        let sigmas = cfg.sigmas.clone().unwrap_or_else(|| vec![Sigma { a: 0.7, b: 1.3 }]);
        let min_order = cfg.tolerances.min_order.unwrap_or(3.0);
        for s in sigmas {
            let (spec, resolutions) = (spec.clone(), resolutions.clone());
            jobs.push(Box::new(move || {
                let sigma = AffineElement::new(s.a, s.b).expect("validated");
                let series = format!("unitarity-defect:a={};b={}", s.a, s.b);
                let mut rows = Vec::new();
                let mut points = Vec::new();
                for &n_v in &resolutions {
                    let h = spacing(spec.v_window(), n_v);
                    let base = Row::new(ID_U)
                        .param("check", "grid-defect")
                        .param("a", s.a)
                        .param("b", s.b)
                        .param("n_v", n_v);
                    let row = attempt(base, |row| {
                        let f = gauss_fourier(&Backend::Grid(spec.with_n_v(n_v)?))?;
                        let ratio = apply_rho(&sigma, &f)?.norm()? / f.norm()?;
                        Ok(row.value(ratio, Some(1.0)).series(&series, h))
                    });
                    if let Some(r) = row.residual {
                        points.push((h, r));
                    }
                    rows.push(row);
                }
                if resolutions.len() >= 2 {
                    let order = Row::new(ID_U).param("check", "grid-order").param("a", s.a).param("b", s.b);
                    rows.push(match loglog_slope(&points) {
                        Some(p) if points.len() == resolutions.len() => {
                            order.value(p, None).judge(Criterion::AtLeast { min: min_order })
                        }
                        _ => order.failed("defects at every resolution are needed for an order estimate"),
                    });
                }
                rows
            }));
        }
    }
    Ok(jobs)
}

pub fn homomorphism(cfg: Arc<ExperimentConfig>) -> Result<Vec<Job>, ConfigError> {
    let backend = cfg.backend()?;
    let samples = cfg.samples.unwrap_or(100) as u64;
    if samples == 0 {
        return Ok(Vec::new());
    }
    let seed = cfg.require_seed()?;
    let tolerance = tol(cfg.tolerances.homomorphism, &cfg, 1e-9, 1e-6);
    Ok((0..samples)
        .map(|case| {
            let (cfg, backend) = (cfg.clone(), backend.clone());
            Box::new(move || {
                let mut rng = case_rng(seed, case);
                let s = random_sigma(&mut rng, b_range(&cfg, true));
                let t = random_sigma(&mut rng, b_range(&cfg, true));
                let kind = kind_for(case, &backend);
                let f = random_test_function(rng.random(), kind, &backend);
                let row = Row::new(ID_H)
                    .param("case", case)
                    .param("a1", s.a())
                    .param("b1", s.b())
                    .param("a2", t.a())
                    .param("b2", t.b())
                    .param("kind", roughness(kind));
                vec![attempt(row, |row| {
                    let defect = homomorphism_defect(&s, &t, &f)? / f.norm()?;
                    Ok(row.value(defect, Some(0.0)).judge(Criterion::AbsTol { tol: tolerance }))
                })]
            }) as Job
        })
        .collect())
}

fn roughness(kind: Roughness) -> &'static str {
    match kind {
        Roughness::Smooth => "smooth",
        Roughness::Rough => "rough",
    }
}
