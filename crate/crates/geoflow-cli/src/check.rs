//! The check subcommand: validate a snapshot file against the state
//! invariants the solvers are supposed to maintain. Malformed files are
//! input errors; a well-formed state that breaks an invariant is a
//! violation, reported check by check.
//!
//! Curvature snapshots carry `kappa`; angle snapshots carry `v`. The
//! two shapes share no fields beyond time and position, so the presence
//! of one array decides the interpretation.

use std::f64::consts::PI;
use std::path::Path;

use geoflow_core::angle_flow::{reconstruct_from_angle, AngleFlowState};
use geoflow_core::geometry::{
    endpoint_residual, length_of, reconstruct_curve, signed_area, MIN_GRID_N,
};
use geoflow_core::{ContactAngles, CurvatureProfile};
use serde_json::{json, Value};

use crate::config::Tolerances;
use crate::{io, CliError};

struct Checks {
    rows: Vec<Value>,
    failures: usize,
}

impl Checks {
    fn new() -> Self {
        Self {
            rows: Vec::new(),
            failures: 0,
        }
    }

    fn record(&mut self, name: &str, pass: bool, detail: String) {
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!("check {name} {verdict} - {detail}");
        if !pass {
            self.failures += 1;
        }
        self.rows
            .push(json!({"name": name, "pass": pass, "detail": detail}));
    }

    fn into_report(self, path: &Path, state: &str) -> Result<Value, CliError> {
        let report = json!({
            "file": path.display().to_string(),
            "state": state,
            "checks": self.rows,
            "failures": self.failures,
        });
        if self.failures > 0 {
            eprintln!("{}", serde_json::to_string_pretty(&report).expect("report"));
            return Err(CliError::Invariant(format!(
                "{}: {} invariant check(s) failed",
                path.display(),
                self.failures
            )));
        }
        Ok(report)
    }
}

/// Validates the snapshot at `path`, printing one line per check.
pub fn check_command(path: &Path, tol: &Tolerances) -> Result<Value, CliError> {
    let value = io::read_json(path)?;
    if value.get("kappa").is_some() {
        check_curvature_state(path, &value, tol)
    } else if value.get("v").is_some() {
        check_angle_state(path, &value, tol)
    } else {
        Err(CliError::Config(format!(
            "{}: snapshot has neither `kappa` nor `v`",
            path.display()
        )))
    }
}

fn check_curvature_state(path: &Path, value: &Value, tol: &Tolerances) -> Result<Value, CliError> {
    let t = io::scalar_field(value, "t", path)?;
    let x_left = io::scalar_field(value, "x_left", path)?;
    let psi_plus = io::scalar_field(value, "psi_plus", path)?;
    let psi_minus = io::scalar_field(value, "psi_minus", path)?;
    let kappa = io::f64_field(value, "kappa", path)?;
    if t < 0.0 {
        return Err(CliError::Config(format!("{}: t = {t} is negative", path.display())));
    }
    let angles = ContactAngles::new(psi_plus, psi_minus)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let n = kappa.len().saturating_sub(1);
    if kappa.len() < MIN_GRID_N + 1 || n % 2 != 0 {
        return Err(CliError::Config(format!(
            "{}: kappa has {} samples; need an odd count of at least {}",
            path.display(),
            kappa.len(),
            MIN_GRID_N + 1
        )));
    }

    let mut checks = Checks::new();
    let sup = kappa.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    checks.record(
        "concavity",
        sup < 0.0,
        format!("sup kappa {sup:.6e} (needs < 0)"),
    );
    if sup >= 0.0 {
        // Every further check needs a concave profile.
        return checks.into_report(path, "curvature");
    }
    let profile = CurvatureProfile::new(angles, kappa)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;

    let residual = endpoint_residual(&profile);
    checks.record(
        "endpoint_closure",
        residual.abs() <= tol.endpoint_residual,
        format!(
            "endpoint integral {residual:.3e} (tolerance {:.1e})",
            tol.endpoint_residual
        ),
    );

    let area = signed_area(&profile);
    checks.record("positive_area", area > 0.0, format!("area {area:.6e}"));

    let length = length_of(&profile);
    let floor = (2.0 * PI * area.max(0.0)).sqrt() - tol.isoperimetric;
    checks.record(
        "isoperimetric",
        length >= floor,
        format!("length {length:.6e} against floor {floor:.6e}"),
    );

    let curve = reconstruct_curve(&profile, x_left);
    let (pass, detail) = if angles.total_turning() <= PI {
        (
            curve.x_right() > x_left,
            format!("feet at {x_left:.6e} and {:.6e}", curve.x_right()),
        )
    } else {
        // Turning beyond pi folds the feet back over each other even
        // for embedded curves, so ordering is not an invariant there.
        (true, "not enforced (total turning exceeds pi)".into())
    };
    checks.record("feet_order", pass, detail);

    checks.into_report(path, "curvature")
}

fn check_angle_state(path: &Path, value: &Value, tol: &Tolerances) -> Result<Value, CliError> {
    let v = io::f64_field(value, "v", path)?;
    let tau = io::scalar_field(value, "tau", path)?;
    let t = io::scalar_field(value, "t", path)?;
    let eta = io::scalar_field(value, "eta", path)?;
    let x_left = io::scalar_field(value, "x_left", path)?;
    if tau < 0.0 || t < 0.0 {
        return Err(CliError::Config(format!(
            "{}: times (tau {tau}, t {t}) must be nonnegative",
            path.display()
        )));
    }
    let (Some(&first), Some(&last)) = (v.first(), v.last()) else {
        return Err(CliError::Config(format!("{}: `v` is empty", path.display())));
    };
    let angles = ContactAngles::new(-last, first)
        .map_err(|e| CliError::Config(format!("{}: end samples: {e}", path.display())))?;
    let m = v.len() - 1;
    if value.get("z").is_some() {
        let z = io::f64_field(value, "z", path)?;
        let uniform = z.len() == v.len()
            && z.iter()
                .enumerate()
                .all(|(i, &zi)| (zi - i as f64 / m as f64).abs() <= 1e-12);
        if !uniform {
            return Err(CliError::Config(format!(
                "{}: `z` is not the uniform unit grid of `v`",
                path.display()
            )));
        }
    }
    let state = AngleFlowState::new(angles, v, eta, x_left)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;

    let mut checks = Checks::new();
    let curve = reconstruct_from_angle(&state);
    let y_end = *curve.y.last().expect("reconstruction has points");
    checks.record(
        "closure",
        y_end.abs() <= tol.y_closure,
        format!(
            "right-end height {y_end:.3e} (tolerance {:.1e})",
            tol.y_closure
        ),
    );
    checks.record(
        "feet_order",
        curve.x_right() > x_left,
        format!("feet at {x_left:.6e} and {:.6e}", curve.x_right()),
    );

    checks.into_report(path, "angle")
}
