//! The experiment configuration document.
//!
//! A run is described by one JSON object. Every field except `experiment`
//! has a default; unknown fields are rejected. The JSON Schema is generated
//! from these types and checked into `config.schema.json`.

use std::f64::consts::TAU;
use std::path::Path;

use prequant_core::l2space::Backend;
use prequant_core::{GridSpec, TorusConfig};
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    VerifyUnitarity,
    VerifyHomomorphism,
    VerifyProp32,
    VerifyCurvature,
    ProbeDerivative,
    ProbeNondiff,
    TransitionSmoothness,
    NormIdentity,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 8] = [
        ExperimentId::VerifyUnitarity,
        ExperimentId::VerifyHomomorphism,
        ExperimentId::VerifyProp32,
        ExperimentId::VerifyCurvature,
        ExperimentId::ProbeDerivative,
        ExperimentId::ProbeNondiff,
        ExperimentId::TransitionSmoothness,
        ExperimentId::NormIdentity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentId::VerifyUnitarity => "verify-unitarity",
            ExperimentId::VerifyHomomorphism => "verify-homomorphism",
            ExperimentId::VerifyProp32 => "verify-prop32",
            ExperimentId::VerifyCurvature => "verify-curvature",
            ExperimentId::ProbeDerivative => "probe-derivative",
            ExperimentId::ProbeNondiff => "probe-nondiff",
            ExperimentId::TransitionSmoothness => "transition-smoothness",
            ExperimentId::NormIdentity => "norm-identity",
        }
    }
}

impl std::fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    #[default]
    Analytic,
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct TorusSection {
    /// Periods `L_j` of the torus; the length is the dimension `m`.
    pub periods: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Nodes per `q` axis, a power of two ≥ 8.
    #[serde(default = "default_n_q")]
    pub n_q: usize,
    /// Half-width `V` of the `v` window `[−V, V]`.
    #[serde(default = "default_v_window")]
    pub v_window: f64,
    /// Nodes per `v` axis, ≥ 16.
    #[serde(default = "default_n_v")]
    pub n_v: usize,
}

fn default_n_q() -> usize {
    64
}

fn default_v_window() -> f64 {
    8.0
}

fn default_n_v() -> usize {
    1025
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            n_q: default_n_q(),
            v_window: default_v_window(),
            n_v: default_n_v(),
        }
    }
}

/// A point `re + i·im` of the upper half plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SPoint {
    pub re: f64,
    pub im: f64,
}

/// An affine map `t ↦ a + b t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Sigma {
    pub a: f64,
    pub b: f64,
}

/// Overrides for pass/fail thresholds. Unset entries take the defaults
/// listed in the CLI chapter of the guide; several differ per backend.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relative norm defect of `ρ(σ)`.
    pub unitarity: Option<f64>,
    /// Relative defect of `ρ(σσ') = ρ(σ)ρ(σ')`.
    pub homomorphism: Option<f64>,
    /// Relative error of `det J = χ(σ)^m`.
    pub liouville: Option<f64>,
    /// Relative residual of the half-form density identity.
    pub prop32: Option<f64>,
    /// Curvature residual at the configured grid.
    pub curvature: Option<f64>,
    /// Minimum convergence order under resolution doubling.
    pub min_order: Option<f64>,
    /// Accepted band for the residual ratio when `u` is halved.
    pub ratio_band: Option<[f64; 2]>,
    /// Relative error of the closed-form generators against explicit formulas.
    pub formula: Option<f64>,
    /// Relative error of a difference quotient against its closed form.
    pub quotient: Option<f64>,
    /// Accepted band for `quotient(u)·√(u/L)`.
    pub scaled_band: Option<[f64; 2]>,
    /// Accepted band for the fitted log-log slope of rough quotients.
    pub slope_band: Option<[f64; 2]>,
    /// Accepted band for the continuity exponent of smooth functions.
    pub smooth_continuity_band: Option<[f64; 2]>,
    /// Accepted band for the continuity exponent of rough functions.
    pub rough_continuity_band: Option<[f64; 2]>,
    /// Bound on successive quotient differences for smooth sections.
    pub cauchy: Option<f64>,
    /// The Cauchy bound applies to pairs whose smaller `u` is at most this.
    pub cauchy_u: Option<f64>,
    /// Relative error of `fiber_norm(A(s, f)) = ‖f‖`.
    pub triv_a: Option<f64>,
    /// Relative unitarity defect of chart `B` and of the transition map.
    pub triv_b: Option<f64>,
    /// Relative distance between the transition map and `B ∘ A`.
    pub composition: Option<f64>,
    /// Relative residual of the transported fiber-norm identity.
    pub norm_identity: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Directory for `<experiment>.csv` and `<experiment>.json`; `--out-dir`
    /// takes precedence.
    pub dir: Option<String>,
    /// File stem replacing the experiment id.
    pub stem: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    #[serde(default)]
    pub backend: BackendKind,
    /// Defaults to the circle of period `2π`.
    pub torus: Option<TorusSection>,
    /// Grid resolution for the grid backend.
    pub grid: Option<GridSection>,
    /// Required by every randomized sweep.
    pub seed: Option<u64>,
    /// Number of random cases.
    pub samples: Option<usize>,
    /// Step sizes for difference quotients.
    pub u_values: Option<Vec<f64>>,
    /// Step sizes for rough functions where they differ from `u_values`.
    pub rough_u_values: Option<Vec<f64>>,
    /// Base points in the upper half plane.
    pub s_values: Option<Vec<SPoint>>,
    /// Group elements for fixed-element studies.
    pub sigmas: Option<Vec<Sigma>>,
    /// Circle radii for the continuity probe, decreasing.
    pub radii: Option<Vec<f64>>,
    /// Points sampled on each continuity circle.
    pub circle_samples: Option<usize>,
    /// `v` node counts for convergence studies.
    pub resolutions: Option<Vec<usize>>,
    /// Dimensions `m` for the symbolic checks.
    pub dims: Option<Vec<usize>>,
    /// Range `[lo, hi]` for random `Im s`, sampled log-uniformly.
    pub im_range: Option<[f64; 2]>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputSection,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: Self = serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Parse(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Parameter checks shared by all experiments.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let torus = self.torus_config()?;
        if self.backend == BackendKind::Analytic && torus.m() != 1 {
            return Err(ConfigError::Invalid("the analytic backend lives on the circle (one period)".into()));
        }
        if self.backend == BackendKind::Grid {
            self.grid_spec()?;
        }
        for (name, list) in [("u_values", &self.u_values), ("rough_u_values", &self.rough_u_values)] {
            if let Some(us) = list {
                if us.iter().any(|u| !(u.is_finite() && *u > 0.0)) {
                    return Err(ConfigError::Invalid(format!("{name} must be positive and finite")));
                }
            }
        }
        if let Some(ss) = &self.s_values {
            if ss.iter().any(|s| !(s.im > 0.0 && s.re.is_finite() && s.im.is_finite())) {
                return Err(ConfigError::Invalid("s_values need finite re and im > 0".into()));
            }
        }
        if let Some(sigmas) = &self.sigmas {
            if sigmas.iter().any(|s| !(s.b > 0.0 && s.a.is_finite() && s.b.is_finite())) {
                return Err(ConfigError::Invalid("sigmas need finite a and b > 0".into()));
            }
        }
        if let Some(radii) = &self.radii {
            if radii.iter().any(|r| !(*r > 0.0)) || radii.windows(2).any(|w| w[1] >= w[0]) {
                return Err(ConfigError::Invalid("radii must be positive and strictly decreasing".into()));
            }
        }
        if let Some([lo, hi]) = self.im_range {
            if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
                return Err(ConfigError::Invalid("im_range must satisfy 0 < lo ≤ hi".into()));
            }
        }
        if let Some(dims) = &self.dims {
            if dims.contains(&0) {
                return Err(ConfigError::Invalid("dims must be positive".into()));
            }
        }
        if let Some(res) = &self.resolutions {
            if res.iter().any(|n| *n < 16) {
                return Err(ConfigError::Invalid("resolutions must be at least 16 nodes".into()));
            }
        }
        Ok(())
    }

    pub fn torus_config(&self) -> Result<TorusConfig, ConfigError> {
        match &self.torus {
            None => Ok(TorusConfig::new(vec![TAU]).expect("2π is a valid period")),
            Some(t) => TorusConfig::new(t.periods.clone()).map_err(|e| ConfigError::Invalid(e.to_string())),
        }
    }

    pub fn grid_section(&self) -> GridSection {
        self.grid.clone().unwrap_or_default()
    }

    pub fn grid_spec(&self) -> Result<GridSpec, ConfigError> {
        let g = self.grid_section();
        GridSpec::new(self.torus_config()?, g.n_q, g.v_window, g.n_v).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn backend(&self) -> Result<Backend, ConfigError> {
        match self.backend {
            BackendKind::Analytic => Ok(Backend::Analytic { period: self.torus_config()?.periods()[0] }),
            BackendKind::Grid => Ok(Backend::Grid(self.grid_spec()?)),
        }
    }

    pub fn require_seed(&self) -> Result<u64, ConfigError> {
        self.seed
            .ok_or_else(|| ConfigError::Invalid(format!("{} draws random cases and needs a seed", self.experiment)))
    }

    pub fn require_analytic(&self) -> Result<(), ConfigError> {
        if self.backend != BackendKind::Analytic {
            return Err(ConfigError::Invalid(format!("{} runs on the analytic backend only", self.experiment)));
        }
        Ok(())
    }
}

/// The JSON Schema of [`ExperimentConfig`], pretty-printed.
pub fn schema_json() -> String {
    let schema = schemars::schema_for!(ExperimentConfig);
    serde_json::to_string_pretty(&schema).expect("schemas serialize") + "\n"
}
