//! The compare subcommand: drive the curvature solver and the angle
//! solver from the same initial curve and report the sup-over-time
//! Hausdorff distance between their reconstructions, at the configured
//! grid and at double resolution. The two discretizations share no code
//! path, so a gap shrinking at second order under refinement is strong
//! evidence both converge to the same evolution.
//!
//! A custom initial file holding angle samples (`v`) instead of
//! curvature flips the roles: the angle solver always runs, and the
//! curvature solver joins only if the state is concave. Non-concave
//! input produces a partial report instead of an error.

use geoflow_core::angle_flow::{reconstruct_from_angle, run_to_t, AngleFlowState};
use geoflow_core::geometry::{hausdorff_distance, reconstruct_curve};
use geoflow_core::theta_flow::{evolve, ThetaFlowState, ThetaOptions, ThetaSnapshot};
use geoflow_core::ContactAngles;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, InitialKind};
use crate::initial::generate_initial;
use crate::run::create_output_dir;
use crate::{io, CliError};

/// Comparison times per run: enough to catch a transient divergence,
/// few enough that re-synchronizing the angle solver stays cheap.
pub const COMPARE_RECORDS: usize = 8;

struct GridGap {
    grid_n: usize,
    times: Vec<f64>,
    gaps: Vec<f64>,
    sup: f64,
}

impl GridGap {
    fn to_value(&self) -> Value {
        json!({
            "grid_n": self.grid_n,
            "times": self.times,
            "per_time_hausdorff": self.gaps,
            "sup_hausdorff": self.sup,
        })
    }
}

/// Runs the comparison and writes compare.json plus the angle solver's
/// final state per grid. Returns the report.
pub fn compare_command(cfg: &ExperimentConfig) -> Result<Value, CliError> {
    create_output_dir(&cfg.output_dir)?;
    let kind = cfg.initial.validated()?;
    if let InitialKind::CustomFile { path } = &kind {
        let value = io::read_json(path)?;
        if value.get("v").is_some() {
            return compare_from_angle_state(cfg, &value, path);
        }
    }

    // A custom curvature file fixes its own resolution, so doubling is
    // only available for generated initial data.
    let grid_list: Vec<usize> = if matches!(kind, InitialKind::CustomFile { .. }) {
        vec![cfg.grid_n]
    } else {
        vec![cfg.grid_n, 2 * cfg.grid_n]
    };

    let mut grids = Vec::new();
    for n in grid_list {
        let mut sub = cfg.clone();
        sub.grid_n = n;
        let profile = generate_initial(&sub)?;
        let angle0 = AngleFlowState::from_profile(&profile, 0.0)?;
        grids.push(gap_between_solvers(cfg, ThetaFlowState::new(profile, 0.0), angle0)?);
    }

    let ratio = match grids.as_slice() {
        [coarse, fine] if fine.sup > 0.0 => Some(coarse.sup / fine.sup),
        _ => None,
    };
    let report = json!({
        "t_end": cfg.t_end,
        "partial": false,
        "theta_refused": Value::Null,
        "grids": grids.iter().map(GridGap::to_value).collect::<Vec<_>>(),
        "refinement_ratio": ratio,
    });
    io::write_json(&cfg.output_dir.join("compare.json"), &report)?;
    Ok(report)
}

/// Advances both solvers through the shared record times and measures
/// the Hausdorff distance at each; also writes the angle solver's final
/// state for inspection.
fn gap_between_solvers(
    cfg: &ExperimentConfig,
    theta0: ThetaFlowState,
    mut angle: AngleFlowState,
) -> Result<GridGap, CliError> {
    let grid_n = theta0.profile.n();
    let options = ThetaOptions {
        safety: cfg.safety_factor,
        ..ThetaOptions::default()
    };
    let snapshots: Vec<ThetaSnapshot> =
        evolve(theta0, cfg.t_end, COMPARE_RECORDS, &options, |_| ())
            .map_err(|failure| CliError::Solver(failure.error.to_string()))?;

    let mut times = Vec::with_capacity(snapshots.len());
    let mut gaps = Vec::with_capacity(snapshots.len());
    for snap in &snapshots {
        angle = run_to_t(angle, snap.t)?;
        let theta_curve = reconstruct_curve(&snap.profile, snap.x_left);
        let angle_curve = reconstruct_from_angle(&angle);
        times.push(snap.t);
        gaps.push(hausdorff_distance(&theta_curve, &angle_curve));
    }
    let sup = gaps.iter().copied().fold(0.0f64, f64::max);

    let name = format!("angle_final_n{grid_n}.json");
    io::write_json(&cfg.output_dir.join(name), &io::angle_snapshot_value(&angle))?;
    Ok(GridGap {
        grid_n,
        times,
        gaps,
        sup,
    })
}

/// Comparison seeded by raw angle samples. The contact angles are read
/// off the pinned ends and must match the config; the file's resolution
/// is used as-is.
fn compare_from_angle_state(
    cfg: &ExperimentConfig,
    value: &Value,
    path: &std::path::Path,
) -> Result<Value, CliError> {
    let v = io::f64_field(value, "v", path)?;
    let (Some(&first), Some(&last)) = (v.first(), v.last()) else {
        return Err(CliError::Config(format!("{}: `v` is empty", path.display())));
    };
    let eta = if value.get("eta").is_some() {
        io::scalar_field(value, "eta", path)?
    } else {
        0.0
    };
    let x_left = if value.get("x_left").is_some() {
        io::scalar_field(value, "x_left", path)?
    } else {
        0.0
    };
    let angles = ContactAngles::new(-last, first)
        .map_err(|e| CliError::Config(format!("{}: end samples: {e}", path.display())))?;
    let matches_config = (angles.psi_plus() - cfg.psi_plus).abs() <= 1e-9
        && (angles.psi_minus() - cfg.psi_minus).abs() <= 1e-9;
    if !matches_config {
        return Err(CliError::Config(format!(
            "{}: pinned angles ({}, {}) disagree with the configured ({}, {})",
            path.display(),
            angles.psi_plus(),
            angles.psi_minus(),
            cfg.psi_plus,
            cfg.psi_minus
        )));
    }
    let state = AngleFlowState::new(angles, v, eta, x_left)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;

    let report = match state.to_profile() {
        Ok(profile) => {
            let gap =
                gap_between_solvers(cfg, ThetaFlowState::new(profile, state.x_left()), state)?;
            json!({
                "t_end": cfg.t_end,
                "partial": false,
                "theta_refused": Value::Null,
                "grids": [gap.to_value()],
                "refinement_ratio": Value::Null,
            })
        }
        Err(refusal) => {
            // The curvature solver cannot represent this state; run the
            // angle solver alone so the caller still gets an evolution.
            let end = run_to_t(state, cfg.t_end)?;
            let name = format!("angle_final_n{}.json", end.m());
            io::write_json(&cfg.output_dir.join(name), &io::angle_snapshot_value(&end))?;
            json!({
                "t_end": cfg.t_end,
                "partial": true,
                "theta_refused": refusal.to_string(),
                "grids": [],
                "refinement_ratio": Value::Null,
            })
        }
    };
    io::write_json(&cfg.output_dir.join("compare.json"), &report)?;
    Ok(report)
}
