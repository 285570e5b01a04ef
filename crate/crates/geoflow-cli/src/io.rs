//! On-disk formats: diagnostics CSV and state snapshot JSON.
//!
//! JSON numbers are written by serde_json's shortest-round-trip float
//! encoding and the CSV uses 17-significant-digit scientific notation,
//! so every numeric field parses back to the exact f64 that was written.

use std::fs;
use std::path::Path;

use geoflow_core::angle_flow::AngleFlowState;
use geoflow_core::diagnostics::DiagnosticsRecord;
use geoflow_core::theta_flow::ThetaSnapshot;
use serde_json::{json, Value};

use crate::CliError;

pub const CSV_HEADER: &str = "t,length,area,energy,f1,f2,f_tilde,holder_gap,sup_kappa,\
                              inf_kappa,max_abs_kappa_theta,kappa_dist_to_wave,\
                              hausdorff_to_wave,shift_to_wave,simplicity_flag";

pub fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Config(format!("cannot serialize {}: {e}", path.display())))?;
    text.push('\n');
    fs::write(path, text)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

/// Extracts a required array of finite numbers.
pub fn f64_field(value: &Value, name: &str, path: &Path) -> Result<Vec<f64>, CliError> {
    let arr = value
        .get(name)
        .and_then(Value::as_array)
        .ok_or_else(|| CliError::Config(format!("{}: missing array `{name}`", path.display())))?;
    arr.iter()
        .enumerate()
        .map(|(i, v)| {
            v.as_f64().filter(|x| x.is_finite()).ok_or_else(|| {
                CliError::Config(format!(
                    "{}: `{name}`[{i}] is not a finite number",
                    path.display()
                ))
            })
        })
        .collect()
}

/// Extracts a required finite scalar.
pub fn scalar_field(value: &Value, name: &str, path: &Path) -> Result<f64, CliError> {
    value
        .get(name)
        .and_then(Value::as_f64)
        .filter(|x| x.is_finite())
        .ok_or_else(|| {
            CliError::Config(format!(
                "{}: missing finite number `{name}`",
                path.display()
            ))
        })
}

pub fn write_diagnostics_csv(path: &Path, records: &[DiagnosticsRecord]) -> Result<(), CliError> {
    let mut text = String::with_capacity(64 + records.len() * 16 * 25);
    text.push_str(CSV_HEADER);
    text.push('\n');
    for r in records {
        let fields = [
            r.t,
            r.length,
            r.area,
            r.energy,
            r.f1,
            r.f2,
            r.f_tilde,
            r.holder_gap,
            r.sup_kappa,
            r.inf_kappa,
            r.max_abs_kappa_theta,
            r.kappa_dist_to_wave,
            r.hausdorff_to_wave,
            r.shift_to_wave,
        ];
        for x in fields {
            text.push_str(&format!("{x:.16e},"));
        }
        text.push_str(if r.simplicity_flag { "1" } else { "0" });
        text.push('\n');
    }
    fs::write(path, text)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

/// Curvature-state snapshot: grid implied by the angle pair and the
/// sample count.
pub fn theta_snapshot_value(snap: &ThetaSnapshot) -> Value {
    let a = snap.profile.angles();
    json!({
        "t": snap.t,
        "x_left": snap.x_left,
        "psi_plus": a.psi_plus(),
        "psi_minus": a.psi_minus(),
        "kappa": snap.profile.kappa(),
    })
}

/// Angle-state snapshot on the unit z-grid; the contact angles are the
/// pinned end samples of v.
pub fn angle_snapshot_value(state: &AngleFlowState) -> Value {
    let m = state.m();
    let z: Vec<f64> = (0..=m).map(|i| state.z(i)).collect();
    json!({
        "tau": state.tau(),
        "t": state.t(),
        "eta": state.eta(),
        "x_left": state.x_left(),
        "z": z,
        "v": state.v(),
    })
}
