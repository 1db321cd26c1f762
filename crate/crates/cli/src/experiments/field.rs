use std::sync::Arc;

use prequant_core::field::{
    fiber_norm, norm_identity as transported_identity, section_smoothness_probe, smoothness_limit, transition,
    triv_a, triv_b, Direction, FieldElement,
};
use prequant_core::l2space::{random_test_function, Backend, Roughness};
use prequant_core::rho_rep::{loglog_slope, oracle};
use prequant_core::{L2Function, UpperHalfPlanePoint};
use rand::Rng;

use super::{attempt, case_rng, gauss_fourier, random_s, spacing, tol, u_pairs, unit_indicator, Job};
use crate::config::{BackendKind, ExperimentConfig, SPoint};
use crate::report::{Criterion, Row};
use crate::ConfigError;

const ID_T: &str = "transition-smoothness";
const ID_N: &str = "norm-identity";

fn direction_name(d: Direction) -> &'static str {
    match d {
        Direction::Re => "re",
        Direction::Im => "im",
    }
}

pub fn smoothness(cfg: Arc<ExperimentConfig>) -> Result<Vec<Job>, ConfigError> {
    cfg.require_analytic()?;
    let backend = cfg.backend()?;
    let period = cfg.torus_config()?.periods()[0];
    let s_values: Vec<UpperHalfPlanePoint> = cfg
        .s_values
        .clone()
        .unwrap_or_else(|| vec![SPoint { re: 0.0, im: 1.0 }, SPoint { re: 0.5, im: 1.5 }])
        .iter()
        .map(|s| UpperHalfPlanePoint::new(s.re, s.im).expect("validated"))
        .collect();
    let us = cfg.u_values.clone().unwrap_or_else(|| vec![1.6e-3, 8e-4, 4e-4, 2e-4, 1e-4]);
    let rough_us = cfg.rough_u_values.clone().unwrap_or_else(|| vec![1e-2, 1e-4, 1e-6]);
    let cauchy = cfg.tolerances.cauchy.unwrap_or(1e-3);
    let cauchy_u = cfg.tolerances.cauchy_u.unwrap_or(1e-4);
    let quotient_tol = cfg.tolerances.quotient.unwrap_or(1e-10);
    let scaled_band = cfg.tolerances.scaled_band.unwrap_or([0.95, 1.05]);
    let slope_band = cfg.tolerances.slope_band.unwrap_or([-0.55, -0.45]);
    let samples = cfg.samples.unwrap_or(0) as u64;
    let seed = if samples > 0 { Some(cfg.require_seed()?) } else { None };

    let mut smooth: Vec<(String, L2Function)> = vec![("gauss-fourier".into(), gauss_fourier(&backend).expect("analytic"))];
    let mut rough: Vec<(String, L2Function)> = vec![("indicator".into(), unit_indicator(&backend).expect("analytic"))];
    for case in 0..samples {
        let mut rng = case_rng(seed.expect("checked"), case);
        smooth.push((format!("random-smooth-{case}"), random_test_function(rng.random(), Roughness::Smooth, &backend)));
        rough.push((format!("random-rough-{case}"), random_test_function(rng.random(), Roughness::Rough, &backend)));
    }

    let mut jobs: Vec<Job> = Vec::new();
    for (name, f) in smooth {
        for &s0 in &s_values {
            for direction in [Direction::Re, Direction::Im] {
                let (name, f, us) = (name.clone(), f.clone(), us.clone());
                jobs.push(Box::new(move || {
                    let base = Row::new(ID_T)
                        .param("function", &name)
                        .param("kind", "smooth")
                        .param("s0_re", s0.re())
                        .param("s0_im", s0.im())
                        .param("direction", direction_name(direction));
                    let limit = smoothness_limit(&f, s0, direction);
                    let probe = section_smoothness_probe(&f, s0, direction, &us).and_then(|p| Ok((p, limit?)));
                    let (probe, limit) = match probe {
                        Ok(p) => p,
                        Err(e) => return vec![base.param("check", "quotient").failed(e)],
                    };
                    let mut rows: Vec<Row> = probe
                        .iter()
                        .map(|&(u, q)| base.clone().param("check", "quotient").param("u", u).value(q, Some(limit)))
                        .collect();
                    for w in probe.windows(2) {
                        let row = base
                            .clone()
                            .param("check", "cauchy")
                            .param("u", w[0].0)
                            .param("u_next", w[1].0)
                            .value((w[0].1 - w[1].1).abs(), None);
                        rows.push(if w[1].0 <= cauchy_u * (1.0 + 1e-9) {
                            row.judge(Criterion::AtMost { max: cauchy })
                        } else {
                            row
                        });
                    }
                    rows
                }));
            }
        }
    }
    for (name, f) in rough {
        let rough_us = rough_us.clone();
        jobs.push(Box::new(move || {
            let base = Row::new(ID_T)
                .param("function", &name)
                .param("kind", "rough")
                .param("s0_re", 0)
                .param("s0_im", 1)
                .param("direction", "im");
            let probe = match section_smoothness_probe(&f, UpperHalfPlanePoint::i(), Direction::Im, &rough_us) {
                Ok(p) => p,
                Err(e) => return vec![base.param("check", "quotient").failed(e)],
            };
            let mut rows = Vec::new();
            for &(u, q) in &probe {
                let row = base.clone().param("check", "quotient").param("u", u);
                if name == "indicator" {
                    let exact = oracle::indicator_transition_distance_sq(u, period).sqrt() / u;
                    rows.push(row.value(q, Some(exact)).judge(Criterion::RelTol { tol: quotient_tol }));
                    rows.push(
                        base.clone()
                            .param("check", "scaled")
                            .param("u", u)
                            .value(q * (u / period).sqrt(), None)
                            .judge(Criterion::within(scaled_band)),
                    );
                } else {
                    rows.push(row.value(q, None));
                }
            }
            if probe.len() >= 2 {
                let slope = loglog_slope(&u_pairs(&rows.iter().filter(|r| r.params["check"] == "quotient").cloned().collect::<Vec<_>>()));
                let row = base.clone().param("check", "slope");
                rows.push(match slope {
                    Some(p) => row.value(p, None).judge(Criterion::within(slope_band)),
                    None => row.failed("no slope"),
                });
            }
            rows
        }));
    }
    Ok(jobs)
}

pub fn norm_identity(cfg: Arc<ExperimentConfig>) -> Result<Vec<Job>, ConfigError> {
    let backend = cfg.backend()?;
    let grid = cfg.backend == BackendKind::Grid;
    let samples = cfg.samples.unwrap_or(100) as u64;
    let im_range = cfg.im_range.unwrap_or(if grid { [0.5, 2.0] } else { [0.1, 10.0] });
    let triv_a_tol = cfg.tolerances.triv_a.unwrap_or(1e-14);
    let triv_b_tol = tol(cfg.tolerances.triv_b, &cfg, 1e-9, 1e-6);
    let composition_tol = cfg.tolerances.composition.unwrap_or(1e-12);
    let identity_tol = tol(cfg.tolerances.norm_identity, &cfg, 1e-9, 1e-6);
    let mut jobs: Vec<Job> = Vec::new();
    if samples > 0 {
        let seed = cfg.require_seed()?;
        for case in 0..samples {
            let backend = backend.clone();
            jobs.push(Box::new(move || {
                let mut rng = case_rng(seed, case);
                let s = random_s(&mut rng, im_range);
                let kind = if !grid && case % 2 == 1 { Roughness::Rough } else { Roughness::Smooth };
                let f = random_test_function(rng.random(), kind, &backend);
                let base = Row::new(ID_N).param("case", case).param("re", s.re()).param("im", s.im());
                chart_rows(&base, s, &f, [triv_a_tol, triv_b_tol, composition_tol, identity_tol])
            }));
        }
    }
    if grid {
        let spec = cfg.grid_spec()?;
        let resolutions = cfg.resolutions.clone().unwrap_or_else(|| vec![257, 513, 1025]);
        let min_order = cfg.tolerances.min_order.unwrap_or(3.0);
        let s_values = cfg.s_values.clone().unwrap_or_else(|| vec![SPoint { re: 0.3, im: 0.6 }]);
        for sp in s_values {
            let (spec, resolutions) = (spec.clone(), resolutions.clone());
            jobs.push(Box::new(move || {
                let s = UpperHalfPlanePoint::new(sp.re, sp.im).expect("validated");
                let series = format!("chart-b-defect:re={};im={}", sp.re, sp.im);
                let mut rows = Vec::new();
                let mut points = Vec::new();
                for &n_v in &resolutions {
                    let h = spacing(spec.v_window(), n_v);
                    let base = Row::new(ID_N).param("check", "grid-defect").param("re", sp.re).param("im", sp.im).param("n_v", n_v);
                    let row = attempt(base, |row| {
                        let f = gauss_fourier(&Backend::Grid(spec.with_n_v(n_v)?))?;
                        let psi = FieldElement::new(s, f);
                        let ratio = triv_b(&psi)?.1.norm()? / fiber_norm(&psi)?;
                        Ok(row.value(ratio, Some(1.0)).series(&series, h))
                    });
                    if let Some(r) = row.residual {
                        points.push((h, r));
                    }
                    rows.push(row);
                }
                if resolutions.len() >= 2 {
                    let order = Row::new(ID_N).param("check", "grid-order").param("re", sp.re).param("im", sp.im);
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

/// Unitarity of both charts, `B ∘ A = ρ(σ_s^{−1})`, and the transported
/// norm identity, for one `(s, f)`.
fn chart_rows(base: &Row, s: UpperHalfPlanePoint, f: &L2Function, tols: [f64; 4]) -> Vec<Row> {
    let [triv_a_tol, triv_b_tol, composition_tol, identity_tol] = tols;
    let norm = f.norm();
    vec![
        attempt(base.clone().param("check", "triv-a"), |row| {
            let ratio = fiber_norm(&triv_a(s, f))? / norm.clone()?;
            Ok(row.value(ratio, Some(1.0)).judge(Criterion::AbsTol { tol: triv_a_tol }))
        }),
        attempt(base.clone().param("check", "triv-b"), |row| {
            let psi = FieldElement::new(s, f.clone());
            let ratio = triv_b(&psi)?.1.norm()? / fiber_norm(&psi)?;
            Ok(row.value(ratio, Some(1.0)).judge(Criterion::AbsTol { tol: triv_b_tol }))
        }),
        attempt(base.clone().param("check", "transition-unitarity"), |row| {
            let ratio = transition(s, f)?.norm()? / norm.clone()?;
            Ok(row.value(ratio, Some(1.0)).judge(Criterion::AbsTol { tol: triv_b_tol }))
        }),
        attempt(base.clone().param("check", "composition"), |row| {
            let composed = triv_b(&triv_a(s, f))?.1;
            let err = transition(s, f)?.distance(&composed)? / norm.clone()?;
            Ok(row.value(err, Some(0.0)).judge(Criterion::AbsTol { tol: composition_tol }))
        }),
        attempt(base.clone().param("check", "identity"), |row| {
            let id = transported_identity(&FieldElement::new(s, f.clone()))?;
            let ratio = if id.direct == 0.0 { 1.0 } else { id.transported / id.direct };
            Ok(row.value(ratio, Some(1.0)).judge(Criterion::AbsTol { tol: identity_tol }))
        }),
    ]
}
