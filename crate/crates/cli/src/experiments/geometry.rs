use std::sync::Arc;

use prequant_core::halfform::wedge_density;
use prequant_core::l2space::Backend;
use prequant_core::prequantum::{curvature_residual, ConnectionPotential};
use prequant_core::rho_rep::loglog_slope;
use prequant_core::{GridSpec, UpperHalfPlanePoint};

use super::{attempt, case_rng, gauss_fourier, random_s, spacing, Job};
use crate::config::ExperimentConfig;
use crate::report::{Criterion, Row};
use crate::ConfigError;

const ID_P: &str = "verify-prop32";
const ID_C: &str = "verify-curvature";

pub fn prop32(cfg: Arc<ExperimentConfig>) -> Result<Vec<Job>, ConfigError> {
    let dims = cfg.dims.clone().unwrap_or_else(|| vec![1, 2, 3]);
    if let Some(m) = dims.iter().find(|m| **m > prequant_core::halfform::MAX_BRUTE_FORCE_DIM) {
        return Err(ConfigError::Invalid(format!("the brute-force wedge evaluation covers m ≤ 3, got {m}")));
    }
    let im_range = cfg.im_range.unwrap_or([0.1, 10.0]);
    let tolerance = cfg.tolerances.prop32.unwrap_or(1e-12);
    let mut points: Vec<(Option<u64>, UpperHalfPlanePoint)> = Vec::new();
    for s in cfg.s_values.iter().flatten() {
        points.push((None, UpperHalfPlanePoint::new(s.re, s.im).expect("validated")));
    }
    let samples = cfg.samples.unwrap_or(100) as u64;
    if samples > 0 && !dims.is_empty() {
        let seed = cfg.require_seed()?;
        for case in 0..samples {
            points.push((Some(case), random_s(&mut case_rng(seed, case), im_range)));
        }
    }
    let mut jobs: Vec<Job> = Vec::new();
    for (index, (case, s)) in points.into_iter().enumerate() {
        let ms: Vec<usize> = match case {
            // random cases cycle through the dimensions, fixed points take all of them
            Some(c) => vec![dims[c as usize % dims.len()]],
            None => dims.clone(),
        };
        jobs.push(Box::new(move || {
            ms.iter()
                .map(|&m| {
                    let row = Row::new(ID_P)
                        .param("point", index)
                        .param("re", s.re())
                        .param("im", s.im())
                        .param("m", m);
                    attempt(row, |row| {
                        let density = wedge_density(s, m)?;
                        let expected = s.im().powi(m as i32) * wedge_density(UpperHalfPlanePoint::i(), m)?;
                        let on_axis = wedge_density(UpperHalfPlanePoint::new(0.0, s.im())?, m)?;
                        let row = row.value(density, Some(expected)).judge(Criterion::RelTol { tol: tolerance });
                        if (density - on_axis).abs() > tolerance * expected {
                            return Ok(row.failed(format!("density depends on Re s: {density} vs {on_axis}")));
                        }
                        Ok(row)
                    })
                })
                .collect()
        }));
    }
    Ok(jobs)
}

pub fn curvature(cfg: Arc<ExperimentConfig>) -> Result<Vec<Job>, ConfigError> {
    let dims = cfg.dims.clone().unwrap_or_else(|| vec![1, 2, 3]);
    let spec = cfg.grid_spec()?;
    let resolutions = cfg.resolutions.clone().unwrap_or_else(|| vec![129, 257, 513]);
    let tolerance = cfg.tolerances.curvature.unwrap_or(1e-6);
    let min_order = cfg.tolerances.min_order.unwrap_or(3.0);
    let mut jobs: Vec<Job> = Vec::new();
    jobs.push(Box::new(move || {
        let mut rows = Vec::new();
        for &m in &dims {
            let a = ConnectionPotential::standard(m);
            rows.push(
                Row::new(ID_C)
                    .param("check", "potential")
                    .param("m", m)
                    .value(a.potential_defect().max_coefficient() as f64, Some(0.0))
                    .judge(Criterion::AbsTol { tol: 0.0 }),
            );
            rows.push(
                Row::new(ID_C)
                    .param("check", "symbolic")
                    .param("m", m)
                    .value(a.symbolic_curvature_residual() as f64, Some(0.0))
                    .judge(Criterion::AbsTol { tol: 0.0 }),
            );
        }
        rows
    }));
    let grid_row = |spec: &GridSpec, check: &str| {
        Row::new(ID_C)
            .param("check", check)
            .param("m", spec.m())
            .param("n_q", spec.n_q())
            .param("n_v", spec.n_v())
            .param("v_window", spec.v_window())
    };
    let residual = |spec: &GridSpec| -> prequant_core::Result<f64> {
        let f = gauss_fourier(&Backend::Grid(spec.clone()))?;
        curvature_residual(&ConnectionPotential::standard(spec.m()), f.as_grid().expect("grid oracle"))
    };
    {
        let spec = spec.clone();
        jobs.push(Box::new(move || {
            vec![attempt(grid_row(&spec, "grid"), |row| {
                Ok(row.value(residual(&spec)?, Some(0.0)).judge(Criterion::AbsTol { tol: tolerance }))
            })]
        }));
    }
    if !resolutions.is_empty() {
        jobs.push(Box::new(move || {
            let mut rows = Vec::new();
            let mut points = Vec::new();
            for &n_v in &resolutions {
                let h = spacing(spec.v_window(), n_v);
                let row = match spec.with_n_v(n_v) {
                    Ok(refined) => attempt(grid_row(&refined, "grid-refinement"), |row| {
                        let r = residual(&refined)?;
                        points.push((h, r));
                        Ok(row.value(r, Some(0.0)).series("curvature-residual", h))
                    }),
                    Err(e) => grid_row(&spec, "grid-refinement").param("n_v", n_v).failed(e),
                };
                rows.push(row);
            }
            if resolutions.len() >= 2 {
                let order = Row::new(ID_C).param("check", "grid-order");
                rows.push(match loglog_slope(&points) {
                    Some(p) if points.len() == resolutions.len() => {
                        order.value(p, None).judge(Criterion::AtLeast { min: min_order })
                    }
                    _ => order.failed("residuals at every resolution are needed for an order estimate"),
                });
            }
            rows
        }));
    }
    Ok(jobs)
}
