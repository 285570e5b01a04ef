//! Curvature evolution in tangent-angle coordinates.
//!
//! While the curve stays concave, θ works as the spatial coordinate and
//! the whole motion reduces to a scalar PDE for κ(θ, t):
//!
//!   κ_t = κ²(κ_θθ + κ + K/L(t))   on θ ∈ (−ψ₊, ψ₋),
//!   κ_θ = cot θ · (κ + K/L(t))     at θ = −ψ₊ and θ = ψ₋,
//!
//! with K = ψ₊ + ψ₋ and the nonlocal length L(t) = −∫ dθ/κ recomputed at
//! every stage. The scheme is an explicit midpoint rule with the parabolic
//! step bound dt ≤ safety·h²/(2·max κ²); boundary nodes are closed each
//! stage by solving the discrete oblique condition algebraically, with the
//! length refreshed by a short fixed-point iteration.
//!
//! The left endpoint slides with ẋ₋ = −(κ(ψ₋) + K/L)/sin ψ₋ and is
//! integrated with the same midpoint rule.
//!
//! Two functionals are first integrals of the exact flow: the enclosed
//! area and the endpoint constraint ∫ sinθ/κ dθ. The discrete interior
//! stencil detunes them at O(h²) per unit time along the near-neutral
//! direction sinθ (the tangent of the translating-profile family), which
//! would otherwise accumulate into a secular drift of the whole solution.
//! [`evolve`] therefore restores both invariants every
//! `restore_stride` accepted steps: a one-dimensional correction along
//! sinθ returns the endpoint integral to its initial value, and an exact
//! multiplicative rescale (the area is (−2)-homogeneous in κ on the fixed
//! grid) returns the area. Each restoration moves κ by parts in 1e-10.

use crate::error::{FlowError, InvalidInput};
use crate::geometry::{ContactAngles, CurvatureProfile};
use crate::quadrature::simpson_weights;

/// Tuning knobs for the stepper. Defaults are the validated configuration.
#[derive(Debug, Clone, Copy)]
pub struct ThetaOptions {
    /// Fraction of the parabolic stability bound actually used, in (0, 1].
    pub safety: f64,
    /// Concavity floor: κ reaching above −eps_floor aborts the run.
    pub eps_floor: f64,
    /// Restore area and endpoint constraint every this many accepted
    /// steps inside [`evolve`]; 0 disables restoration.
    pub restore_stride: u32,
    /// Cap on the boundary-closure fixed-point iterations per stage.
    pub bc_max_iter: u32,
}

impl Default for ThetaOptions {
    fn default() -> Self {
        Self {
            safety: 0.8,
            eps_floor: 1e-6,
            restore_stride: 16,
            bc_max_iter: 12,
        }
    }
}

impl ThetaOptions {
    fn validate(&self) -> Result<(), InvalidInput> {
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return Err(InvalidInput::Unusable {
                what: format!("safety factor must be in (0, 1], got {}", self.safety),
            });
        }
        if !(self.eps_floor > 0.0 && self.eps_floor.is_finite()) {
            return Err(InvalidInput::Unusable {
                what: format!("eps_floor must be positive, got {}", self.eps_floor),
            });
        }
        if self.bc_max_iter == 0 {
            return Err(InvalidInput::Unusable {
                what: "bc_max_iter must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// Snapshot of the evolving solution.
#[derive(Debug, Clone)]
pub struct ThetaFlowState {
    pub profile: CurvatureProfile,
    pub t: f64,
    pub x_left: f64,
    pub step_count: u64,
}

impl ThetaFlowState {
    pub fn new(profile: CurvatureProfile, x_left: f64) -> Self {
        Self {
            profile,
            t: 0.0,
            x_left,
            step_count: 0,
        }
    }
}

/// What a single accepted step did.
#[derive(Debug, Clone, Copy)]
pub struct StepReport {
    pub dt_used: f64,
    /// Largest interior rate |κ_t| applied during the step.
    pub max_interior_residual: f64,
    /// Discrete oblique-condition residual at θ = ψ₋ after the step.
    pub boundary_residual_left: f64,
    /// Discrete oblique-condition residual at θ = −ψ₊ after the step.
    pub boundary_residual_right: f64,
}

/// Trajectory sample produced by [`evolve`].
#[derive(Debug, Clone)]
pub struct ThetaSnapshot {
    pub t: f64,
    pub profile: CurvatureProfile,
    pub x_left: f64,
    /// Accumulated ∫∫ (κ + K/L)² ds dt from the start of the run
    /// (trapezoidal in time): the total energy dissipated so far.
    pub dissipated: f64,
    pub step_count: u64,
}

/// A failed run, carrying everything recorded before the failure.
#[derive(Debug, thiserror::Error)]
#[error("{error} after {} snapshots", .completed.len())]
pub struct EvolveFailure {
    pub error: FlowError,
    /// Snapshots recorded before the failure.
    pub completed: Vec<ThetaSnapshot>,
    /// The last state that was still valid.
    pub last_state: ThetaFlowState,
}

/// Interior rate κ²(D²κ + κ + K/L) per node; the two boundary entries are
/// zero (their values are set by the oblique condition, not by this
/// equation; one-sided rates for diagnostics live in the diagnostics
/// module).
pub fn interior_rhs(profile: &CurvatureProfile) -> Vec<f64> {
    let engine = Engine::new(profile.angles(), profile.n(), &ThetaOptions::default())
        .expect("default options are valid");
    let k = profile.kappa();
    let l = engine.length(k);
    let mut out = vec![0.0; k.len()];
    engine.rhs(k, l, &mut out);
    out
}

/// Residuals of the discrete oblique boundary condition
/// (one-sided κ_θ minus cot θ·(κ + K/L)) at the two ends, as
/// (left: θ = ψ₋, right: θ = −ψ₊). Zero after a step because the stepper
/// solves exactly this closure; nonzero on raw initial data.
pub fn boundary_condition_residual(state: &ThetaFlowState) -> (f64, f64) {
    let profile = &state.profile;
    let engine = Engine::new(profile.angles(), profile.n(), &ThetaOptions::default())
        .expect("default options are valid");
    let k = profile.kappa();
    let l = engine.length(k);
    engine.boundary_residuals(k, l)
}

/// Advances one adaptive step, leaving `state` untouched.
///
/// For long runs prefer [`evolve`], which reuses scratch buffers and
/// restores the flow's first integrals periodically.
pub fn step(
    state: &ThetaFlowState,
    dt_max: f64,
    options: &ThetaOptions,
) -> Result<(ThetaFlowState, StepReport), FlowError> {
    let mut engine = Engine::new(state.profile.angles(), state.profile.n(), options)?;
    engine.check_closure()?;
    let mut k = state.profile.kappa().to_vec();
    let mut x_left = state.x_left;
    let report = engine.advance(&mut k, &mut x_left, state.t, dt_max)?;
    let profile = CurvatureProfile::new(state.profile.angles(), k)?;
    Ok((
        ThetaFlowState {
            profile,
            t: state.t + report.dt_used,
            x_left,
            step_count: state.step_count + 1,
        },
        report,
    ))
}

/// Runs the flow to `t_end`, emitting `records + 1` equally spaced
/// snapshots (including the initial state) through `on_record` and
/// returning them. The step size is clamped so every record time is hit
/// exactly. On failure the error is returned together with the snapshots
/// already taken and the last valid state.
pub fn evolve(
    initial: ThetaFlowState,
    t_end: f64,
    records: usize,
    options: &ThetaOptions,
    mut on_record: impl FnMut(&ThetaSnapshot),
) -> Result<Vec<ThetaSnapshot>, Box<EvolveFailure>> {
    let fail = |error: FlowError, completed: Vec<ThetaSnapshot>, last: ThetaFlowState| {
        Box::new(EvolveFailure {
            error,
            completed,
            last_state: last,
        })
    };

    let t0 = initial.t;
    if !t_end.is_finite() || t_end < t0 {
        return Err(fail(
            InvalidInput::Unusable {
                what: format!("t_end = {t_end} must be a finite time at or after t = {t0}"),
            }
            .into(),
            Vec::new(),
            initial,
        ));
    }

    let mut engine = match Engine::new(initial.profile.angles(), initial.profile.n(), options) {
        Ok(e) => e,
        Err(e) => return Err(fail(e.into(), Vec::new(), initial)),
    };
    if let Err(e) = engine.check_closure() {
        return Err(fail(e, Vec::new(), initial));
    }
    // Gate the initial data on the solver's concavity floor immediately.
    if let Some((index, value)) = engine.floor_breach(initial.profile.kappa()) {
        return Err(fail(
            FlowError::ConcavityLost {
                t: t0,
                index,
                value,
            },
            Vec::new(),
            initial,
        ));
    }

    let mut k = initial.profile.kappa().to_vec();
    // Pre-step copy so a failure mid-step can report the last valid state.
    let mut k_prev = k.clone();
    let mut x_left = initial.x_left;
    let mut t = t0;
    let mut step_count = initial.step_count;
    let angles = initial.profile.angles();

    // Conserved targets for the periodic restoration.
    let res0 = engine.endpoint_residual(&k);
    let area0 = engine.area(&k);
    let mut diss = 0.0;
    let mut rate_prev = engine.dissipation_rate(&k);

    let mut snapshots: Vec<ThetaSnapshot> = Vec::with_capacity(records + 2);
    let mut record = |snaps: &mut Vec<ThetaSnapshot>,
                      k: &[f64],
                      t: f64,
                      x_left: f64,
                      diss: f64,
                      step_count: u64|
     -> Result<(), FlowError> {
        let profile = CurvatureProfile::new(angles, k.to_vec())?;
        let snap = ThetaSnapshot {
            t,
            profile,
            x_left,
            dissipated: diss,
            step_count,
        };
        on_record(&snap);
        snaps.push(snap);
        Ok(())
    };

    if let Err(e) = record(&mut snapshots, &k, t, x_left, diss, step_count) {
        return Err(fail(e, Vec::new(), initial));
    }
    if t_end == t0 {
        return Ok(snapshots);
    }

    let intervals = records.max(1);
    let mut since_restore = 0u32;
    for j in 1..=intervals {
        let t_rec = t0 + (t_end - t0) * j as f64 / intervals as f64;
        while t < t_rec {
            let dt_max = t_rec - t;
            k_prev.copy_from_slice(&k);
            match engine.advance(&mut k, &mut x_left, t, dt_max) {
                Ok(report) => {
                    let dt = report.dt_used;
                    let rate_new = engine.dissipation_rate(&k);
                    diss += 0.5 * dt * (rate_prev + rate_new);
                    rate_prev = rate_new;
                    t += dt;
                    step_count += 1;
                    since_restore += 1;
                }
                Err(error) => {
                    let last = state_from(angles, &k_prev, t, x_left, step_count);
                    return Err(fail(error, snapshots, last));
                }
            }
            if options.restore_stride > 0 && since_restore >= options.restore_stride {
                engine.restore_invariants(&mut k, res0, area0);
                rate_prev = engine.dissipation_rate(&k);
                since_restore = 0;
            }
            // Snap to the record time once the remaining gap is roundoff.
            if (t_rec - t).abs() <= 1e-12 * (1.0 + t_rec.abs()) {
                t = t_rec;
            }
        }
        if let Err(e) = record(&mut snapshots, &k, t, x_left, diss, step_count) {
            let last = state_from(angles, &k, t, x_left, step_count);
            return Err(fail(e, snapshots, last));
        }
    }
    Ok(snapshots)
}

fn state_from(
    angles: ContactAngles,
    k: &[f64],
    t: f64,
    x_left: f64,
    step_count: u64,
) -> ThetaFlowState {
    // The raw samples may be invalid mid-failure; fall back to a floor
    // profile so the failure report always carries a constructible state.
    let profile = CurvatureProfile::new(angles, k.to_vec()).unwrap_or_else(|_| {
        CurvatureProfile::from_fn(angles, k.len() - 1, |_| -1.0).expect("grid is valid")
    });
    ThetaFlowState {
        profile,
        t,
        x_left,
        step_count,
    }
}

/// Grid-fixed data and scratch buffers for the hot loop.
struct Engine {
    n: usize,
    h: f64,
    turning: f64,
    cot_plus: f64,
    cot_minus: f64,
    sin_minus: f64,
    safety: f64,
    eps_floor: f64,
    bc_max_iter: u32,
    weights: Vec<f64>,
    sin_theta: Vec<f64>,
    cos_theta: Vec<f64>,
    r1: Vec<f64>,
    r2: Vec<f64>,
    kmid: Vec<f64>,
    scratch: Vec<f64>,
    /// Length of the current profile, maintained across steps; negative
    /// when stale.
    length_cache: f64,
}

impl Engine {
    fn new(angles: ContactAngles, n: usize, options: &ThetaOptions) -> Result<Self, InvalidInput> {
        options.validate()?;
        let h = angles.total_turning() / n as f64;
        let cot_plus = angles.cot_plus();
        let cot_minus = angles.cot_minus();
        let theta = |i: usize| -angles.psi_plus() + i as f64 * h;
        Ok(Self {
            n,
            h,
            turning: angles.total_turning(),
            cot_plus,
            cot_minus,
            sin_minus: angles.psi_minus().sin(),
            safety: options.safety,
            eps_floor: options.eps_floor,
            bc_max_iter: options.bc_max_iter,
            weights: simpson_weights(n, h),
            sin_theta: (0..=n).map(|i| theta(i).sin()).collect(),
            cos_theta: (0..=n).map(|i| theta(i).cos()).collect(),
            r1: vec![0.0; n + 1],
            r2: vec![0.0; n + 1],
            kmid: vec![0.0; n + 1],
            scratch: vec![0.0; n + 1],
            length_cache: -1.0,
        })
    }

    /// The algebraic boundary closure divides by 3/(2h) − cot ψ±; an
    /// angle sharp enough to flip that sign needs a finer grid.
    fn check_closure(&self) -> Result<(), FlowError> {
        let limit = 1.5 / self.h;
        for cot in [self.cot_plus, self.cot_minus] {
            if cot >= limit {
                return Err(FlowError::BoundaryIllPosed { cot, limit });
            }
        }
        Ok(())
    }

    fn length(&self, k: &[f64]) -> f64 {
        self.weights.iter().zip(k).map(|(w, ki)| -w / ki).sum()
    }

    fn endpoint_residual(&self, k: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(&self.sin_theta)
            .zip(k)
            .map(|((w, s), ki)| w * s / ki)
            .sum()
    }

    /// Enclosed area from κ alone; exactly (−2)-homogeneous on the grid.
    fn area(&self, k: &[f64]) -> f64 {
        let n = self.n;
        let mut fs = vec![0.0; n + 1];
        for i in 0..=n {
            fs[i] = self.sin_theta[i] / k[i];
        }
        let gs = crate::quadrature::cumulative(&fs, self.h);
        let mut total = 0.0;
        for i in 0..=n {
            total += self.weights[i] * (gs[n] - gs[i]) * self.cos_theta[i] / k[i];
        }
        total
    }

    /// Instantaneous energy dissipation ∫ (κ + K/L)² ds.
    fn dissipation_rate(&self, k: &[f64]) -> f64 {
        let l = self.length(k);
        let k_over_l = self.turning / l;
        self.weights
            .iter()
            .zip(k)
            .map(|(w, ki)| {
                let v = ki + k_over_l;
                -w * v * v / ki
            })
            .sum()
    }

    /// Least-negative sample and its index if it breaches the floor.
    fn floor_breach(&self, k: &[f64]) -> Option<(usize, f64)> {
        let mut worst: Option<(usize, f64)> = None;
        for (i, &ki) in k.iter().enumerate() {
            if ki >= -self.eps_floor {
                match worst {
                    Some((_, w)) if w >= ki => {}
                    _ => worst = Some((i, ki)),
                }
            }
        }
        worst
    }

    /// κ²(D²κ + κ + K/L) at interior nodes; ends left as zero. Returns
    /// the max magnitude.
    fn rhs(&self, k: &[f64], l: f64, out: &mut [f64]) -> f64 {
        let inv_h2 = 1.0 / (self.h * self.h);
        let k_over_l = self.turning / l;
        let mut max_abs = 0.0f64;
        out[0] = 0.0;
        out[self.n] = 0.0;
        for i in 1..self.n {
            let d2 = (k[i - 1] - 2.0 * k[i] + k[i + 1]) * inv_h2;
            let rate = k[i] * k[i] * (d2 + k[i] + k_over_l);
            out[i] = rate;
            max_abs = max_abs.max(rate.abs());
        }
        max_abs
    }

    /// Solves the two discrete oblique conditions for the boundary nodes,
    /// refreshing the length by fixed-point iteration. The length changes
    /// only through the two endpoint samples, so each pass is O(1) after
    /// the initial full sum. Returns the converged length.
    fn enforce_bc(&self, k: &mut [f64], t: f64) -> Result<f64, FlowError> {
        let n = self.n;
        let inv_2h = 0.5 / self.h;
        let denom0 = 1.5 / self.h - self.cot_plus;
        let denom_n = 1.5 / self.h - self.cot_minus;
        let q0 = (4.0 * k[1] - k[2]) * inv_2h;
        let qn = (4.0 * k[n - 1] - k[n - 2]) * inv_2h;
        let mut l = self.length(k);
        let mut dl = f64::INFINITY;
        for _ in 0..self.bc_max_iter {
            let k_over_l = self.turning / l;
            let new0 = (q0 + self.cot_plus * k_over_l) / denom0;
            let new_n = (qn + self.cot_minus * k_over_l) / denom_n;
            dl = self.weights[0] * (-1.0 / new0 + 1.0 / k[0])
                + self.weights[n] * (-1.0 / new_n + 1.0 / k[n]);
            k[0] = new0;
            k[n] = new_n;
            l += dl;
            if dl.abs() <= 1e-15 * l.abs() {
                return Ok(l);
            }
        }
        // Normal convergence takes 2-3 passes; refusing to converge means
        // the endpoint samples dominate the length, which is a breakdown.
        if !dl.is_finite() || dl.abs() > 1e-9 * (1.0 + l.abs()) {
            return Err(FlowError::BoundaryStall { t, delta: dl });
        }
        Ok(l)
    }

    /// Residuals of the oblique condition (one-sided κ_θ minus
    /// cot θ·(κ + K/L)) as (left at ψ₋, right at −ψ₊).
    fn boundary_residuals(&self, k: &[f64], l: f64) -> (f64, f64) {
        let n = self.n;
        let inv_2h = 0.5 / self.h;
        let k_over_l = self.turning / l;
        let d_right = (-3.0 * k[0] + 4.0 * k[1] - k[2]) * inv_2h;
        let d_left = (3.0 * k[n] - 4.0 * k[n - 1] + k[n - 2]) * inv_2h;
        // cot θ at θ = −ψ₊ is −cot ψ₊.
        let right = d_right + self.cot_plus * (k[0] + k_over_l);
        let left = d_left - self.cot_minus * (k[n] + k_over_l);
        (left, right)
    }

    /// One midpoint step. `k` and `x_left` are updated in place; the time
    /// advance is `report.dt_used`.
    fn advance(
        &mut self,
        k: &mut [f64],
        x_left: &mut f64,
        t: f64,
        dt_max: f64,
    ) -> Result<StepReport, FlowError> {
        let n = self.n;
        // Stability control and health checks in one pass.
        let mut max_k2 = 0.0f64;
        for &ki in k.iter() {
            if !ki.is_finite() {
                return Err(FlowError::Diverged { t });
            }
            max_k2 = max_k2.max(ki * ki);
        }
        if let Some((index, value)) = self.floor_breach(k) {
            return Err(FlowError::ConcavityLost { t, index, value });
        }
        let stable = self.safety * self.h * self.h / (2.0 * max_k2);
        let dt = dt_max.min(stable);
        if !dt.is_finite() || dt <= f64::EPSILON * (1.0 + t.abs()) * 1e-3 {
            return Err(FlowError::StepUnderflow { t, dt });
        }

        let l1 = if self.length_cache > 0.0 {
            self.length_cache
        } else {
            self.length(k)
        };

        // Stage 1: half step of the interior, boundary closure.
        let mut r1 = std::mem::take(&mut self.r1);
        let mut kmid = std::mem::take(&mut self.kmid);
        self.rhs(k, l1, &mut r1);
        kmid[0] = k[0];
        kmid[n] = k[n];
        for i in 1..n {
            kmid[i] = k[i] + 0.5 * dt * r1[i];
        }
        let l_mid = match self.enforce_bc(&mut kmid, t) {
            Ok(l) => l,
            Err(e) => {
                self.r1 = r1;
                self.kmid = kmid;
                return Err(e);
            }
        };

        // Stage 2: full step with midpoint rates.
        let mut r2 = std::mem::take(&mut self.r2);
        let max_rate = self.rhs(&kmid, l_mid, &mut r2);
        for i in 1..n {
            k[i] += dt * r2[i];
        }
        let l_new = match self.enforce_bc(k, t) {
            Ok(l) => l,
            Err(e) => {
                self.r1 = r1;
                self.r2 = r2;
                self.kmid = kmid;
                return Err(e);
            }
        };
        self.length_cache = l_new;

        // Endpoint motion with the same midpoint rule.
        let rate_mid = -(kmid[n] + self.turning / l_mid) / self.sin_minus;
        *x_left += dt * rate_mid;

        let (left, right) = self.boundary_residuals(k, l_new);
        self.r1 = r1;
        self.r2 = r2;
        self.kmid = kmid;
        Ok(StepReport {
            dt_used: dt,
            max_interior_residual: max_rate,
            boundary_residual_left: left,
            boundary_residual_right: right,
        })
    }

    /// Returns both first integrals to their initial values: a secant
    /// solve for the coefficient b in κ ← κ − b·sinθ restores the
    /// endpoint integral, then one exact rescale restores the area.
    fn restore_invariants(&mut self, k: &mut [f64], res0: f64, area0: f64) {
        let scale: f64 = k.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        let mut shifted = std::mem::take(&mut self.scratch);
        let eval = |shifted: &mut Vec<f64>, base: &[f64], b: f64| -> f64 {
            for (s, (&ki, &si)) in shifted.iter_mut().zip(base.iter().zip(&self.sin_theta)) {
                *s = ki - b * si;
            }
            self.endpoint_residual(shifted)
        };
        let mut b0 = 0.0;
        let mut f0 = self.endpoint_residual(k) - res0;
        let mut best = (0.0, f0.abs());
        let mut b1 = 1e-8 * scale;
        let mut f1 = eval(&mut shifted, k, b1) - res0;
        for _ in 0..8 {
            if f1.abs() < best.1 {
                best = (b1, f1.abs());
            }
            if f1.abs() <= 1e-16 * scale || f1 == f0 {
                break;
            }
            let b2 = b1 - f1 * (b1 - b0) / (f1 - f0);
            if !b2.is_finite() {
                break;
            }
            (b0, f0) = (b1, f1);
            b1 = b2;
            f1 = eval(&mut shifted, k, b1) - res0;
        }
        if f1.abs() < best.1 {
            best = (b1, f1.abs());
        }
        eval(&mut shifted, k, best.0);
        k.copy_from_slice(&shifted);
        self.scratch = shifted;

        // Exact on the fixed grid: area(λκ) = area(κ)/λ².
        let lambda = (self.area(k) / area0).sqrt();
        if lambda.is_finite() && lambda > 0.0 {
            for ki in k.iter_mut() {
                *ki *= lambda;
            }
        }
        self.length_cache = -1.0;
    }
}
