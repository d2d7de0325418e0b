//! JSON sweep configuration.
//!
//! Physical inputs are dimensionless in units where `Ω0/2π = 1`: gate times in
//! cycles `Ω0t_g/2π`, dephasing rates in `Γ/(Ω0/2π)`.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tripod_core::controls::{ControlParams, Flavor};
use tripod_core::dynamics::NoiseModel;
use tripod_core::metrics::DEFAULT_UNCERTAINTY_NODES;
use tripod_core::qmath::IntegratorConfig;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    GateTimeError,
    NoiseMap,
    Contour,
    PulseExport,
    OracleCompare,
}

impl SweepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepKind::GateTimeError => "gate_time_error",
            SweepKind::NoiseMap => "noise_map",
            SweepKind::Contour => "contour",
            SweepKind::PulseExport => "pulse_export",
            SweepKind::OracleCompare => "oracle_compare",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    #[default]
    Log,
    Linear,
}

/// Either an explicit list of `values` or `count` points from `min` to `max`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default)]
    pub scale: Scale,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub count: Option<usize>,
    pub values: Option<Vec<f64>>,
}

impl GridSpec {
    pub fn range(scale: Scale, min: f64, max: f64, count: usize) -> Self {
        Self { scale, min: Some(min), max: Some(max), count: Some(count), values: None }
    }

    pub fn values(values: Vec<f64>) -> Self {
        Self { values: Some(values), ..Self::default() }
    }

    /// Grid points, validated: `count ≥ 2`, `0 < min < max` for log scale.
    pub fn points(&self, field: &str) -> Result<Vec<f64>, CliError> {
        let bad = |msg: String| Err(CliError::Config(format!("{field}: {msg}")));
        if let Some(v) = &self.values {
            if self.min.is_some() || self.max.is_some() || self.count.is_some() {
                return bad("give either `values` or `min`/`max`/`count`, not both".into());
            }
            if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
                return bad("`values` must be a non-empty list of finite numbers".into());
            }
            return Ok(v.clone());
        }
        let (Some(min), Some(max), Some(count)) = (self.min, self.max, self.count) else {
            return bad("needs `min`, `max` and `count` (or `values`)".into());
        };
        if count < 2 {
            return bad(format!("count must be >= 2 (got {count})"));
        }
        if !(min < max) || !min.is_finite() || !max.is_finite() {
            return bad(format!("needs min < max (got {min}, {max})"));
        }
        let last = (count - 1) as f64;
        Ok(match self.scale {
            Scale::Linear => (0..count).map(|i| min + (max - min) * i as f64 / last).collect(),
            Scale::Log => {
                if min <= 0.0 {
                    return bad(format!("log grid needs min > 0 (got {min})"));
                }
                let (a, b) = (min.ln(), max.ln());
                (0..count)
                    .map(|i| match i {
                        0 => min,
                        i if i == count - 1 => max,
                        i => (a + (b - a) * i as f64 / last).exp(),
                    })
                    .collect()
            }
        })
    }
}

/// Static control parameters shared by every point of a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaseParams {
    pub omega0: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma0: f64,
    pub amp_scale: f64,
}

impl Default for BaseParams {
    fn default() -> Self {
        Self { omega0: 2.0 * PI, alpha: PI / 4.0, beta: 0.0, gamma0: PI, amp_scale: 1.0 }
    }
}

/// Dephasing rates in units of `Ω0/2π` and the amplitude half-width `k`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSpec {
    pub gamma_0: f64,
    pub gamma_1: f64,
    pub gamma_a: f64,
    pub gamma_e: f64,
    pub k: f64,
}

impl NoiseSpec {
    pub fn ground_and_excited(gamma_gs: f64, gamma_e: f64, k: f64) -> Self {
        Self { gamma_0: gamma_gs, gamma_1: gamma_gs, gamma_a: gamma_gs, gamma_e, k }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContourSettings {
    /// Log-grid points used to bracket the minimum.
    pub bracket_points: usize,
    /// Relative `t_g` tolerance of the golden-section refinement.
    pub rel_tol: f64,
}

impl Default for ContourSettings {
    fn default() -> Self {
        Self { bracket_points: 60, rel_tol: 1e-3 }
    }
}

fn default_flavors() -> Vec<Flavor> {
    vec![Flavor::Adiabatic, Flavor::Satd]
}

fn default_nodes() -> usize {
    DEFAULT_UNCERTAINTY_NODES
}

fn default_samples() -> usize {
    101
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub kind: SweepKind,
    /// Gate times in cycles.
    #[serde(default)]
    pub tg_grid: Option<GridSpec>,
    /// Ground-level dephasing rates (contour only).
    #[serde(default)]
    pub gamma_gs_grid: Option<GridSpec>,
    /// Excited-level dephasing rates (contour only).
    #[serde(default)]
    pub gamma_e_grid: Option<GridSpec>,
    #[serde(default)]
    pub params: BaseParams,
    #[serde(default = "default_flavors")]
    pub flavors: Vec<Flavor>,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default = "default_nodes")]
    pub uncertainty_nodes: usize,
    /// Samples per pulse for `pulse_export`.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub contour: ContourSettings,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub jobs: Option<usize>,
}

impl SweepSpec {
    pub fn new(kind: SweepKind) -> Self {
        Self {
            kind,
            tg_grid: None,
            gamma_gs_grid: None,
            gamma_e_grid: None,
            params: BaseParams::default(),
            flavors: default_flavors(),
            noise: NoiseSpec::default(),
            integrator: IntegratorConfig::default(),
            uncertainty_nodes: default_nodes(),
            samples: default_samples(),
            contour: ContourSettings::default(),
            out: None,
            jobs: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let spec: Self = serde_json::from_str(text).map_err(|e| CliError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Parse { line, column, message } => CliError::Config(format!(
                "{}:{line}:{column}: {message}",
                path.display()
            )),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let cfg = |e: tripod_core::Error| CliError::Config(e.to_string());
        self.integrator.validate().map_err(cfg)?;
        self.noise_model().validate().map_err(cfg)?;
        self.control_params(Flavor::Adiabatic, 1.0).validate().map_err(cfg)?;
        if self.flavors.is_empty() {
            return Err(CliError::Config("flavors: at least one flavor is required".into()));
        }
        if self.flavors.contains(&Flavor::GenericDressed) {
            return Err(CliError::Config(
                "flavors: generic_dressed has no finite lab-frame envelopes; use adiabatic or satd".into(),
            ));
        }
        if self.uncertainty_nodes == 0 {
            return Err(CliError::Config("uncertainty_nodes must be >= 1".into()));
        }
        let tg = self.tg_points()?;
        if tg.iter().any(|t| *t <= 0.0) {
            return Err(CliError::Config("tg_grid: gate times must be > 0".into()));
        }
        match self.kind {
            SweepKind::PulseExport if self.samples < 2 => {
                Err(CliError::Config("samples must be >= 2".into()))
            }
            SweepKind::Contour => {
                for (name, grid) in [("gamma_gs_grid", &self.gamma_gs_grid), ("gamma_e_grid", &self.gamma_e_grid)] {
                    let pts = grid
                        .as_ref()
                        .ok_or_else(|| CliError::Config(format!("{name} is required for contour")))?
                        .points(name)?;
                    if pts.iter().any(|g| *g < 0.0) {
                        return Err(CliError::Config(format!("{name}: rates must be >= 0")));
                    }
                }
                if self.contour.bracket_points < 3 || !(self.contour.rel_tol > 0.0) {
                    return Err(CliError::Config(
                        "contour: bracket_points must be >= 3 and rel_tol > 0".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn tg_points(&self) -> Result<Vec<f64>, CliError> {
        self.tg_grid
            .as_ref()
            .ok_or_else(|| CliError::Config("tg_grid is required".into()))?
            .points("tg_grid")
    }

    /// Time unit `2π/Ω0`, converting cycles to simulation time.
    pub fn cycle(&self) -> f64 {
        2.0 * PI / self.params.omega0
    }

    /// Rate unit `Ω0/2π`.
    pub fn rate_unit(&self) -> f64 {
        self.params.omega0 / (2.0 * PI)
    }

    pub fn control_params(&self, flavor: Flavor, tg_cycles: f64) -> ControlParams {
        let b = &self.params;
        ControlParams::new(b.omega0, b.alpha, b.beta, b.gamma0, tg_cycles * self.cycle(), flavor)
            .with_amp_scale(b.amp_scale)
    }

    pub fn noise_model(&self) -> NoiseModel {
        self.noise_model_from(&self.noise)
    }

    pub fn noise_model_from(&self, n: &NoiseSpec) -> NoiseModel {
        let u = self.rate_unit();
        NoiseModel { gamma_phi: [n.gamma_0 * u, n.gamma_1 * u, n.gamma_a * u, n.gamma_e * u], k: n.k }
    }

    /// Applies the `--tol` override.
    pub fn with_tolerance(mut self, rel_tol: f64) -> Self {
        self.integrator.rel_tol = rel_tol;
        self.integrator.abs_tol = self.integrator.abs_tol.min(1e-2 * rel_tol);
        self
    }
}
