//! Report rows, verdicts, and the CSV/JSON writers.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::summary::Summary;

/// CSV column order.
pub const CSV_COLUMNS: [&str; 6] = ["experiment", "params", "measured", "oracle", "residual", "verdict"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Data row without its own criterion; feeds a derived row.
    Info,
    /// The probe itself failed, e.g. on a support-margin violation.
    Error,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Info => "info",
            Verdict::Error => "error",
        }
    }

    pub fn is_failure(self) -> bool {
        matches!(self, Verdict::Fail | Verdict::Error)
    }
}

/// How a row's verdict is decided.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Criterion {
    /// `residual ≤ tol`.
    AbsTol { tol: f64 },
    /// `residual ≤ tol · |oracle|`.
    RelTol { tol: f64 },
    /// `lo ≤ measured ≤ hi`.
    Within { lo: f64, hi: f64 },
    /// `measured ≥ min`.
    AtLeast { min: f64 },
    /// `measured ≤ max`.
    AtMost { max: f64 },
}

impl Criterion {
    pub fn within(band: [f64; 2]) -> Self {
        Criterion::Within { lo: band[0], hi: band[1] }
    }

    fn holds(&self, measured: f64, oracle: Option<f64>, residual: Option<f64>) -> bool {
        match *self {
            Criterion::AbsTol { tol } => residual.is_some_and(|r| r <= tol),
            Criterion::RelTol { tol } => {
                residual.zip(oracle).is_some_and(|(r, o)| r <= tol * o.abs())
            }
            Criterion::Within { lo, hi } => (lo..=hi).contains(&measured),
            Criterion::AtLeast { min } => measured >= min,
            Criterion::AtMost { max } => measured <= max,
        }
    }
}

/// One line of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub experiment: String,
    pub params: BTreeMap<String, String>,
    pub measured: Option<f64>,
    pub oracle: Option<f64>,
    pub residual: Option<f64>,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criterion: Option<Criterion>,
    /// Convergence series this row belongs to, keyed with `spacing`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Row {
    pub fn new(experiment: &str) -> Self {
        Self {
            experiment: experiment.to_string(),
            params: BTreeMap::new(),
            measured: None,
            oracle: None,
            residual: None,
            verdict: Verdict::Info,
            criterion: None,
            series: None,
            spacing: None,
            error: None,
        }
    }

    pub fn param(mut self, key: &str, value: impl Display) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    /// Sets `measured` and, when given, `oracle` and `residual = |measured − oracle|`.
    pub fn value(mut self, measured: f64, oracle: Option<f64>) -> Self {
        self.measured = Some(measured);
        self.oracle = oracle;
        self.residual = oracle.map(|o| (measured - o).abs());
        self
    }

    pub fn series(mut self, name: &str, spacing: f64) -> Self {
        self.series = Some(name.to_string());
        self.spacing = Some(spacing);
        self
    }

    /// Applies `criterion` and fixes the verdict.
    pub fn judge(mut self, criterion: Criterion) -> Self {
        self.criterion = Some(criterion);
        self.verdict = match self.measured {
            Some(m) if m.is_finite() && criterion.holds(m, self.oracle, self.residual) => Verdict::Pass,
            _ => Verdict::Fail,
        };
        self
    }

    pub fn failed(mut self, error: impl Display) -> Self {
        self.verdict = Verdict::Error;
        self.error = Some(error.to_string());
        self
    }

    /// `key=value;…` with keys in lexicographic order.
    pub fn canonical_params(&self) -> String {
        self.params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
    }
}

/// Shortest round-trip scientific notation; empty when absent.
pub fn format_number(x: Option<f64>) -> String {
    x.map(|v| format!("{v:e}")).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: String,
    pub config: ExperimentConfig,
    pub rows: Vec<Row>,
    pub summary: Summary,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.summary.passed
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        writer.write_record(CSV_COLUMNS)?;
        for row in &self.rows {
            writer.write_record([
                row.experiment.clone(),
                row.canonical_params(),
                format_number(row.measured),
                format_number(row.oracle),
                format_number(row.residual),
                row.verdict.as_str().to_string(),
            ])?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn criteria() {
        let row = Row::new("x").value(1.0 + 1e-10, Some(1.0));
        assert_eq!(row.clone().judge(Criterion::AbsTol { tol: 1e-9 }).verdict, Verdict::Pass);
        assert_eq!(row.clone().judge(Criterion::RelTol { tol: 1e-11 }).verdict, Verdict::Fail);
        assert_eq!(row.clone().judge(Criterion::Within { lo: 0.5, hi: 1.5 }).verdict, Verdict::Pass);
        assert_eq!(row.clone().judge(Criterion::AtLeast { min: 3.0 }).verdict, Verdict::Fail);
        assert_eq!(row.judge(Criterion::AtMost { max: 3.0 }).verdict, Verdict::Pass);
        let nan = Row::new("x").value(f64::NAN, None).judge(Criterion::AtMost { max: 1.0 });
        assert_eq!(nan.verdict, Verdict::Fail);
        assert_eq!(Row::new("x").failed("boom").verdict, Verdict::Error);
    }

    #[test]
    fn canonical_params_sort_keys() {
        let row = Row::new("x").param("u", 0.01).param("direction", "beta").param("case", 3);
        assert_eq!(row.canonical_params(), "case=3;direction=beta;u=0.01");
    }

    #[test]
    fn numbers() {
        assert_eq!(format_number(Some(1e-13)), "1e-13");
        assert_eq!(format_number(Some(0.1 + 0.2)), "3.0000000000000004e-1");
        assert_eq!(format_number(None), "");
    }
}
