//! Aggregates over the rows of one run.

use serde::{Deserialize, Serialize};

use crate::report::{Row, Verdict};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub pass: usize,
    pub fail: usize,
    pub info: usize,
    pub error: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualStats {
    pub min: f64,
    pub max: f64,
    pub median: f64,
}

/// Observed orders `ln(e_i / e_{i+1}) / ln(h_i / h_{i+1})` along one series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceOrder {
    pub series: String,
    pub spacings: Vec<f64>,
    pub errors: Vec<f64>,
    pub pairwise: Vec<f64>,
    /// Least-squares slope of `ln e` against `ln h`.
    pub fitted: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub passed: bool,
    pub rows: usize,
    pub counts: Counts,
    pub residuals: Option<ResidualStats>,
    pub convergence: Vec<ConvergenceOrder>,
    /// Indices of failed or errored rows.
    pub failures: Vec<usize>,
}

pub fn summarize(rows: &[Row]) -> Summary {
    let mut counts = Counts::default();
    let mut failures = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        match row.verdict {
            Verdict::Pass => counts.pass += 1,
            Verdict::Fail => counts.fail += 1,
            Verdict::Info => counts.info += 1,
            Verdict::Error => counts.error += 1,
        }
        if row.verdict.is_failure() {
            failures.push(i);
        }
    }
    let mut residuals: Vec<f64> = rows.iter().filter_map(|r| r.residual).filter(|r| r.is_finite()).collect();
    residuals.sort_by(f64::total_cmp);
    let stats = (!residuals.is_empty()).then(|| {
        let n = residuals.len();
        let median = if n % 2 == 1 {
            residuals[n / 2]
        } else {
            0.5 * (residuals[n / 2 - 1] + residuals[n / 2])
        };
        ResidualStats { min: residuals[0], max: residuals[n - 1], median }
    });
    Summary {
        passed: failures.is_empty(),
        rows: rows.len(),
        counts,
        residuals: stats,
        convergence: convergence_orders(rows),
        failures,
    }
}

fn convergence_orders(rows: &[Row]) -> Vec<ConvergenceOrder> {
    let mut out: Vec<ConvergenceOrder> = Vec::new();
    for row in rows {
        let (Some(series), Some(h)) = (&row.series, row.spacing) else { continue };
        let Some(e) = row.residual.or(row.measured) else { continue };
        match out.iter_mut().find(|c| &c.series == series) {
            Some(c) => {
                c.spacings.push(h);
                c.errors.push(e);
            }
            None => out.push(ConvergenceOrder {
                series: series.clone(),
                spacings: vec![h],
                errors: vec![e],
                pairwise: Vec::new(),
                fitted: None,
            }),
        }
    }
    for c in &mut out {
        c.pairwise = c
            .spacings
            .windows(2)
            .zip(c.errors.windows(2))
            .map(|(h, e)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
            .collect();
        let points: Vec<(f64, f64)> = c.spacings.iter().copied().zip(c.errors.iter().copied()).collect();
        c.fitted = prequant_core::rho_rep::loglog_slope(&points);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Criterion;
    use approx::assert_relative_eq;

    #[test]
    fn residual_statistics() {
        let rows: Vec<Row> = [1e-13, 2e-13]
            .iter()
            .map(|&r| Row::new("x").value(r, Some(0.0)).judge(Criterion::AbsTol { tol: 1e-12 }))
            .collect();
        let s = summarize(&rows);
        assert!(s.passed);
        let stats = s.residuals.unwrap();
        assert_eq!(stats.max, 2e-13);
        assert_eq!(stats.min, 1e-13);
    }

    #[test]
    fn doubling_order() {
        let rows = vec![
            Row::new("x").value(8e-6, Some(0.0)).series("defect", 0.2),
            Row::new("x").value(1e-6, Some(0.0)).series("defect", 0.1),
        ];
        let s = summarize(&rows);
        assert_relative_eq!(s.convergence[0].pairwise[0], 3.0, max_relative = 1e-12);
        assert_relative_eq!(s.convergence[0].fitted.unwrap(), 3.0, max_relative = 1e-12);
    }

    #[test]
    fn mixed_verdicts_fail_overall() {
        let rows = vec![
            Row::new("x").value(1.0, None).judge(Criterion::AtMost { max: 2.0 }),
            Row::new("x").value(3.0, None).judge(Criterion::AtMost { max: 2.0 }),
            Row::new("x").failed("margin"),
            Row::new("x").value(0.5, None),
        ];
        let s = summarize(&rows);
        assert!(!s.passed);
        assert_eq!(s.failures, vec![1, 2]);
        assert_eq!(s.counts, Counts { pass: 1, fail: 1, info: 1, error: 1 });
    }

    #[test]
    fn empty_run_passes() {
        let s = summarize(&[]);
        assert!(s.passed && s.rows == 0 && s.residuals.is_none());
    }
}
