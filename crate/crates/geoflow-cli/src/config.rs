//! Experiment configuration: JSON schema, validation, CLI overrides.
//!
//! Configs are strict: unknown keys are rejected rather than ignored, so
//! a typoed tolerance name fails loudly instead of silently running with
//! the default.

use std::fs;
use std::path::{Path, PathBuf};

use geoflow_core::diagnostics::MonitorOptions;
use geoflow_core::geometry::MIN_GRID_N;
use geoflow_core::ContactAngles;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// One experiment: angles, grid, horizon, initial data, output location.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub psi_plus: f64,
    pub psi_minus: f64,
    pub grid_n: usize,
    pub t_end: f64,
    /// Every `snapshot_stride`-th diagnostics record also gets a full
    /// state snapshot on disk (the final record always does).
    #[serde(default = "default_snapshot_stride")]
    pub snapshot_stride: usize,
    pub initial: InitialSpec,
    /// Fraction of the parabolic stability bound used by the stepper.
    #[serde(default = "default_safety_factor")]
    pub safety_factor: f64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// When set, the perturbation gets a seeded random phase; runs stay
    /// deterministic for a fixed config either way.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_snapshot_stride() -> usize {
    25
}

fn default_safety_factor() -> f64 {
    0.8
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("geoflow_out")
}

/// Initial data selector. Parsed permissively (all parameters optional)
/// and then validated per kind, so error messages can name the missing
/// or extraneous parameter.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

/// A validated initial-data choice.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialKind {
    /// The traveling wave itself (unit length).
    Wave,
    /// Wave profile modulated by a cosine mode, then closed up.
    PerturbedWave { epsilon: f64, mode: u32 },
    /// Unit-length circular arc; needs equal contact angles.
    Arc,
    /// State read from a JSON file.
    CustomFile { path: PathBuf },
}

impl InitialSpec {
    pub fn wave() -> Self {
        Self {
            kind: "wave".into(),
            epsilon: None,
            mode: None,
            path: None,
        }
    }

    pub fn perturbed(epsilon: f64, mode: u32) -> Self {
        Self {
            kind: "perturbed_wave".into(),
            epsilon: Some(epsilon),
            mode: Some(mode),
            path: None,
        }
    }

    pub fn arc() -> Self {
        Self {
            kind: "arc".into(),
            epsilon: None,
            mode: None,
            path: None,
        }
    }

    pub fn custom(path: PathBuf) -> Self {
        Self {
            kind: "custom_file".into(),
            epsilon: None,
            mode: None,
            path: Some(path),
        }
    }

    pub fn validated(&self) -> Result<InitialKind, CliError> {
        let forbid = |name: &str, set: bool| -> Result<(), CliError> {
            if set {
                Err(CliError::Config(format!(
                    "initial kind `{}` does not take `{name}`",
                    self.kind
                )))
            } else {
                Ok(())
            }
        };
        match self.kind.as_str() {
            "wave" | "arc" => {
                forbid("epsilon", self.epsilon.is_some())?;
                forbid("mode", self.mode.is_some())?;
                forbid("path", self.path.is_some())?;
                Ok(if self.kind == "wave" {
                    InitialKind::Wave
                } else {
                    InitialKind::Arc
                })
            }
            "perturbed_wave" => {
                forbid("path", self.path.is_some())?;
                let epsilon = self.epsilon.ok_or_else(|| {
                    CliError::Config("initial kind `perturbed_wave` needs `epsilon`".into())
                })?;
                if !(epsilon.is_finite() && epsilon >= 0.0) {
                    return Err(CliError::Config(format!(
                        "perturbation epsilon must be finite and nonnegative, got {epsilon}"
                    )));
                }
                let mode = self.mode.ok_or_else(|| {
                    CliError::Config("initial kind `perturbed_wave` needs `mode`".into())
                })?;
                if mode == 0 {
                    return Err(CliError::Config(
                        "perturbation mode must be at least 1".into(),
                    ));
                }
                Ok(InitialKind::PerturbedWave { epsilon, mode })
            }
            "custom_file" => {
                forbid("epsilon", self.epsilon.is_some())?;
                forbid("mode", self.mode.is_some())?;
                let path = self.path.clone().ok_or_else(|| {
                    CliError::Config("initial kind `custom_file` needs `path`".into())
                })?;
                Ok(InitialKind::CustomFile { path })
            }
            other => Err(CliError::Config(format!(
                "unknown initial kind `{other}`; expected wave, perturbed_wave, arc, \
                 or custom_file"
            ))),
        }
    }
}

/// Check tolerances; every field is optional in the JSON and falls back
/// to the default.
#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative area drift treated as a violation.
    pub area_drift: f64,
    /// Allowed per-record energy increase.
    pub energy_uptick: f64,
    /// Allowed per-record relative decrease of the Lyapunov value.
    pub f_tilde_downtick: f64,
    /// Slack in the length lower bound sqrt(2 pi A(0)).
    pub isoperimetric: f64,
    /// Bound on the endpoint integral of a curvature snapshot.
    pub endpoint_residual: f64,
    /// Bound on the reconstructed right-end height of an angle snapshot;
    /// looser than `endpoint_residual` because the angle state
    /// accumulates quadrature drift in y while the curvature state is
    /// periodically re-closed.
    pub y_closure: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            area_drift: 1e-6,
            energy_uptick: 1e-8,
            f_tilde_downtick: 1e-7,
            isoperimetric: 1e-9,
            endpoint_residual: 1e-6,
            y_closure: 1e-4,
        }
    }
}

impl Tolerances {
    pub fn monitor_options(&self) -> MonitorOptions {
        MonitorOptions {
            area_tol: self.area_drift,
            energy_uptick_tol: self.energy_uptick,
            f_tilde_downtick_tol: self.f_tilde_downtick,
            isoperimetric_tol: self.isoperimetric,
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        let fields = [
            ("area_drift", self.area_drift),
            ("energy_uptick", self.energy_uptick),
            ("f_tilde_downtick", self.f_tilde_downtick),
            ("isoperimetric", self.isoperimetric),
            ("endpoint_residual", self.endpoint_residual),
            ("y_closure", self.y_closure),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(CliError::Config(format!(
                    "tolerance `{name}` must be positive and finite, got {value}"
                )));
            }
        }
        Ok(())
    }
}

impl ExperimentConfig {
    /// Reads and validates a config file.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: Self = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses a config from an already-loaded JSON value (sweep entries).
    pub fn from_value(value: serde_json::Value) -> Result<Self, CliError> {
        let cfg: Self =
            serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.contact_angles()?;
        if self.grid_n < MIN_GRID_N || self.grid_n % 2 != 0 {
            return Err(CliError::Config(format!(
                "grid_n must be an even integer >= {MIN_GRID_N}, got {}",
                self.grid_n
            )));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(CliError::Config(format!(
                "t_end must be positive and finite, got {}",
                self.t_end
            )));
        }
        if self.snapshot_stride == 0 {
            return Err(CliError::Config(
                "snapshot_stride must be at least 1".into(),
            ));
        }
        if !(self.safety_factor > 0.0 && self.safety_factor <= 1.0) {
            return Err(CliError::Config(format!(
                "safety_factor must be in (0, 1], got {}",
                self.safety_factor
            )));
        }
        self.tolerances.validate()?;
        self.initial.validated()?;
        Ok(())
    }

    pub fn contact_angles(&self) -> Result<ContactAngles, CliError> {
        ContactAngles::new(self.psi_plus, self.psi_minus).map_err(Into::into)
    }

    /// Applies command-line overrides, then re-validates.
    pub fn apply_overrides(
        &mut self,
        out: Option<PathBuf>,
        grid_n: Option<usize>,
        t_end: Option<f64>,
    ) -> Result<(), CliError> {
        if let Some(out) = out {
            self.output_dir = out;
        }
        if let Some(n) = grid_n {
            self.grid_n = n;
        }
        if let Some(t) = t_end {
            self.t_end = t;
        }
        self.validate()
    }
}
