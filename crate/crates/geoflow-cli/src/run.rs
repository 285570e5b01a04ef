//! The wave and evolve subcommands.
//!
//! An evolve run builds the configured initial data, scales the
//! reference wave to enclose the same area (the flow conserves area, so
//! that is the wave the trajectory can converge to), drives the
//! curvature solver, and writes diagnostics CSV, state snapshots, and a
//! summary. Solver failures still persist everything recorded up to the
//! failure before the command exits nonzero.

use std::fs;
use std::path::Path;

use geoflow_core::diagnostics::{monitor, tail_log_fit, MonitorOutcome};
use geoflow_core::geometry::signed_area;
use geoflow_core::theta_flow::{evolve, ThetaFlowState, ThetaOptions, ThetaSnapshot};
use geoflow_core::traveling_wave::{build_wave, scale_to_area, wave_span, TravelingWave};
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::initial::generate_initial;
use crate::{io, CliError};

/// Diagnostics records per run. Snapshot times are spaced t_end / 200
/// apart, which keeps a 100-point tail for rate fitting on relaxation
/// horizons while the stepper's own dt stays much smaller.
pub const RECORDS_PER_RUN: usize = 200;

pub fn create_output_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))
}

/// Writes the traveling wave for the configured angles and grid.
pub fn wave_command(cfg: &ExperimentConfig) -> Result<Value, CliError> {
    let angles = cfg.contact_angles()?;
    let wave = build_wave(angles, cfg.grid_n)?;
    create_output_dir(&cfg.output_dir)?;
    let value = json!({
        "psi_plus": angles.psi_plus(),
        "psi_minus": angles.psi_minus(),
        "grid_n": cfg.grid_n,
        "c": wave.c(),
        "length": wave.length(),
        "area": wave.area(),
        "span": wave_span(&wave),
        "theta": wave.profile().theta_values(),
        "kappa": wave.profile().kappa(),
    });
    io::write_json(&cfg.output_dir.join("wave.json"), &value)?;
    Ok(value)
}

/// Runs the flow and writes diagnostics.csv, snapshot_*.json, and
/// summary.json into the output directory. Returns the summary.
pub fn evolve_command(cfg: &ExperimentConfig) -> Result<Value, CliError> {
    let profile = generate_initial(cfg)?;
    let area0 = signed_area(&profile);
    let wave = scale_to_area(&build_wave(profile.angles(), profile.n())?, area0)?;
    create_output_dir(&cfg.output_dir)?;

    let options = ThetaOptions {
        safety: cfg.safety_factor,
        ..ThetaOptions::default()
    };
    let initial = ThetaFlowState::new(profile, 0.0);
    let (snapshots, solver_error) =
        match evolve(initial, cfg.t_end, RECORDS_PER_RUN, &options, |_| ()) {
            Ok(snaps) => (snaps, None),
            Err(failure) => {
                let last = ThetaSnapshot {
                    t: failure.last_state.t,
                    profile: failure.last_state.profile.clone(),
                    x_left: failure.last_state.x_left,
                    dissipated: 0.0,
                    step_count: failure.last_state.step_count,
                };
                io::write_json(
                    &cfg.output_dir.join("last_state.json"),
                    &io::theta_snapshot_value(&last),
                )?;
                let mut snaps = failure.completed;
                if snaps.is_empty() {
                    // The solver refused before its first record, so the
                    // last valid state is the unstepped initial one.
                    snaps.push(last);
                }
                (snaps, Some(failure.error.to_string()))
            }
        };

    let outcome = monitor(&snapshots, &wave, &cfg.tolerances.monitor_options())
        .map_err(|e| CliError::Config(e.to_string()))?;
    io::write_diagnostics_csv(&cfg.output_dir.join("diagnostics.csv"), &outcome.records)?;

    let last = snapshots.len() - 1;
    for (idx, snap) in snapshots.iter().enumerate() {
        if idx % cfg.snapshot_stride == 0 || idx == last {
            let name = format!("snapshot_{idx:04}.json");
            io::write_json(&cfg.output_dir.join(name), &io::theta_snapshot_value(snap))?;
        }
    }

    let summary = summarize(cfg, &wave, &outcome, solver_error.as_deref());
    io::write_json(&cfg.output_dir.join("summary.json"), &summary)?;

    if let Some(msg) = solver_error {
        return Err(CliError::Solver(msg));
    }
    if let Some(first) = outcome.violations.first() {
        return Err(CliError::Invariant(format!(
            "{} violation(s); first: {first}",
            outcome.violations.len()
        )));
    }
    Ok(summary)
}

fn summarize(
    cfg: &ExperimentConfig,
    wave: &TravelingWave,
    outcome: &MonitorOutcome,
    solver_error: Option<&str>,
) -> Value {
    let records = &outcome.records;
    let first = records.first().expect("at least the initial record");
    let last = records.last().expect("at least the initial record");
    let times: Vec<f64> = records.iter().map(|r| r.t).collect();
    let dists: Vec<f64> = records.iter().map(|r| r.kappa_dist_to_wave).collect();
    let max_area_drift = records
        .iter()
        .map(|r| ((r.area - first.area) / first.area).abs())
        .fold(0.0f64, f64::max);
    let status = if solver_error.is_some() {
        "solver_error"
    } else if outcome.violations.is_empty() {
        "ok"
    } else {
        "invariant_violation"
    };
    json!({
        "status": status,
        "error": solver_error,
        "config": serde_json::to_value(cfg).expect("config serializes"),
        "wave": {
            "c": wave.c(),
            "length": wave.length(),
            "area": wave.area(),
            "span": wave_span(wave),
        },
        "records": records.len(),
        "final": {
            "t": last.t,
            "length": last.length,
            "area": last.area,
            "energy": last.energy,
            "f_tilde": last.f_tilde,
            "kappa_dist_to_wave": last.kappa_dist_to_wave,
            "hausdorff_to_wave": last.hausdorff_to_wave,
            "shift_to_wave": last.shift_to_wave,
            "simplicity_flag": last.simplicity_flag,
        },
        "max_relative_area_drift": max_area_drift,
        "max_energy_uptick": outcome.max_energy_uptick,
        "max_f_tilde_downtick": outcome.max_f_tilde_downtick,
        "min_holder_gap_raw": outcome.min_holder_gap_raw,
        "energy_identity_sup": outcome.energy_identity_sup,
        "sup_kappa": outcome.sup_kappa_global,
        "inf_kappa": outcome.inf_kappa_global,
        "max_abs_kappa_theta": outcome.max_abs_kappa_theta_global,
        "tail_fit": tail_log_fit(&times, &dists)
            .map_or(Value::Null, |(slope, r2)| json!({
                "log_slope": slope,
                "r_squared": r2,
            })),
        "violations": outcome.violations,
    })
}
