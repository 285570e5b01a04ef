//! Tangent-angle evolution on the fixed unit interval.
//!
//! The curve is stored as its tangent angle v sampled on the uniform grid
//! z ∈ [0, 1], where z is arclength from the left endpoint divided by the
//! total length, together with the log-length η = log L. In the rescaled
//! time τ with dt = e^{2η} dτ the motion becomes a semilinear heat
//! equation
//!
//!   v_τ = v_zz + (P(z) + Q z) v_z,    η' = Q,
//!
//! with Dirichlet pins v(0) = ψ₋ and v(1) = −ψ₊. Nothing here assumes
//! concavity, so this solver doubles as an independent cross-check of the
//! curvature-based one wherever both apply. Curvature, when defined, is
//! κ = v_z e^{−η}.
//!
//! Space is discretized by second-order central differences with 3-point
//! one-sided boundary slopes, quadrature by the composite Simpson rules,
//! and time by the explicit midpoint scheme under the diffusion stability
//! clamp dτ ≤ `SAFETY`·h²/2.

use crate::error::{FlowError, InvalidInput};
use crate::geometry::{ContactAngles, CurvatureProfile, PlanarCurve, MIN_GRID_N};
use crate::quadrature::cumulative;

/// Fraction of the explicit diffusion limit h²/2 a step may use.
const SAFETY: f64 = 0.4;

/// Relative tolerance for landing on requested times.
const LANDING_TOL: f64 = 1e-12;

/// Tangent-angle description of the evolving curve.
///
/// `v` holds the angle at the m+1 uniform nodes z = i/m, left endpoint
/// first; the Dirichlet pins v[0] = ψ₋ and v[m] = −ψ₊ hold exactly.
/// `eta` is the log-length, `tau` the rescaled clock, `t` the physical
/// clock recovered from it, and `x_left` the left contact point.
#[derive(Debug, Clone)]
pub struct AngleFlowState {
    angles: ContactAngles,
    v: Vec<f64>,
    eta: f64,
    tau: f64,
    t: f64,
    x_left: f64,
}

impl AngleFlowState {
    /// Wraps raw samples at τ = t = 0, validating grid size and
    /// finiteness. End samples must match the pins within 1e-9 and are
    /// snapped to them exactly.
    pub fn new(
        angles: ContactAngles,
        mut v: Vec<f64>,
        eta: f64,
        x_left: f64,
    ) -> Result<Self, InvalidInput> {
        let m = v.len().saturating_sub(1);
        if v.len() < MIN_GRID_N + 1 || v.len() % 2 == 0 {
            return Err(InvalidInput::BadGridSize {
                n: m,
                min: MIN_GRID_N,
            });
        }
        for &vi in &v {
            if !vi.is_finite() {
                return Err(InvalidInput::NotFinite {
                    name: "v",
                    value: vi,
                });
            }
        }
        for (name, value) in [("eta", eta), ("x_left", x_left)] {
            if !value.is_finite() {
                return Err(InvalidInput::NotFinite { name, value });
            }
        }
        if (v[0] - angles.psi_minus()).abs() > 1e-9 || (v[m] + angles.psi_plus()).abs() > 1e-9 {
            return Err(InvalidInput::Unusable {
                what: format!(
                    "angle samples must run from {} to {}, got {} to {}",
                    angles.psi_minus(),
                    -angles.psi_plus(),
                    v[0],
                    v[m]
                ),
            });
        }
        v[0] = angles.psi_minus();
        v[m] = -angles.psi_plus();
        Ok(Self {
            angles,
            v,
            eta,
            tau: 0.0,
            t: 0.0,
            x_left,
        })
    }

    /// Converts a curvature profile to angle samples on the uniform
    /// z-grid of the same resolution, with η the log of the discrete
    /// length.
    ///
    /// The angle as a function of arclength fraction is resampled by
    /// piecewise cubics whose nodal slopes dv/dz = κL are exact, so the
    /// error is set by the quadrature of the node positions.
    pub fn from_profile(profile: &CurvatureProfile, x_left: f64) -> Result<Self, InvalidInput> {
        let n = profile.n();
        let k = profile.kappa();
        let ds: Vec<f64> = k.iter().map(|&ki| -1.0 / ki).collect();
        let g = cumulative(&ds, profile.h());
        let l = g[n];
        if !(l.is_finite() && l > 0.0) {
            return Err(InvalidInput::Unusable {
                what: format!("discrete length {l} is unusable"),
            });
        }
        // z-node j (left to right) is θ-node n − j.
        let mut z_nodes = Vec::with_capacity(n + 1);
        let mut v_nodes = Vec::with_capacity(n + 1);
        let mut slopes = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let i = n - j;
            z_nodes.push((l - g[i]) / l);
            v_nodes.push(profile.theta(i));
            slopes.push(k[i] * l);
        }
        if z_nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(InvalidInput::Unusable {
                what: "arclength nodes are not strictly increasing".into(),
            });
        }
        let m = n;
        let h = 1.0 / m as f64;
        let v = (0..=m)
            .map(|j| hermite_at(&z_nodes, &v_nodes, &slopes, j as f64 * h).0)
            .collect();
        Self::new(profile.angles(), v, l.ln(), x_left)
    }

    /// Converts back to a curvature profile on the matching uniform
    /// θ-grid; requires strictly decreasing angles (a concave curve).
    ///
    /// Each θ-node is located by inverting the piecewise cubic of v(z)
    /// built on second-order nodal slopes, and κ = v_z e^{−η} is read off
    /// the cubic's derivative there.
    pub fn to_profile(&self) -> Result<CurvatureProfile, InvalidInput> {
        let m = self.m();
        if self.v.windows(2).any(|w| w[1] >= w[0]) {
            return Err(InvalidInput::Unusable {
                what: "tangent angle must be strictly decreasing to recover curvature".into(),
            });
        }
        let h = self.h();
        let slopes = nodal_derivative(&self.v, h);
        let scale = (-self.eta).exp();
        let a = self.angles;
        let h_theta = a.total_turning() / m as f64;
        let mut kappa = Vec::with_capacity(m + 1);
        for i in 0..=m {
            let theta = -a.psi_plus() + i as f64 * h_theta;
            // First index with v ≤ θ bounds the cell on the right.
            let idx = self.v.partition_point(|&vj| vj > theta);
            let j = idx.clamp(1, m) - 1;
            let (v0, v1) = (self.v[j], self.v[j + 1]);
            let mut u = ((v0 - theta) / (v0 - v1)).clamp(0.0, 1.0);
            for _ in 0..4 {
                let (val, dv) = hermite_local(v0, v1, slopes[j], slopes[j + 1], h, u);
                if dv < 0.0 {
                    u = (u - (val - theta) / (dv * h)).clamp(0.0, 1.0);
                }
            }
            let (_, dv) = hermite_local(v0, v1, slopes[j], slopes[j + 1], h, u);
            kappa.push(dv * scale);
        }
        CurvatureProfile::new(a, kappa)
    }

    pub fn angles(&self) -> ContactAngles {
        self.angles
    }

    /// Angle samples, left endpoint first.
    pub fn v(&self) -> &[f64] {
        &self.v
    }

    /// Number of grid panels m (one less than the sample count).
    pub fn m(&self) -> usize {
        self.v.len() - 1
    }

    /// Grid spacing in z.
    pub fn h(&self) -> f64 {
        1.0 / self.m() as f64
    }

    pub fn z(&self, i: usize) -> f64 {
        i as f64 / self.m() as f64
    }

    /// Log of the curve length.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Rescaled clock.
    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Physical clock.
    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn x_left(&self) -> f64 {
        self.x_left
    }
}

/// Advection data entering the angle equation at one instant.
#[derive(Debug, Clone)]
pub struct CoefficientSlice {
    /// P at each grid node.
    pub p_values: Vec<f64>,
    /// The z-independent part Q, which is also the log-length rate η'.
    pub q_value: f64,
}

/// Computes P and Q from the current angles.
///
/// With K = ψ₊ + ψ₋, one-sided boundary slopes, and cumulative Simpson
/// for the running integral,
///
///   P(z) = K (v − ψ₋) − cot ψ₋ (v_z(0) + K) + ∫₀^z v_z² dz̃,
///   Q    = cot ψ₊ (v_z(1) + K) + cot ψ₋ (v_z(0) + K) + K² − ∫₀¹ v_z² dz̃.
///
/// Q e^{−η} is the physical length rate, so η' = Q closes the system.
pub fn coefficients(state: &AngleFlowState) -> CoefficientSlice {
    let v = &state.v;
    let m = state.m();
    let h = state.h();
    let a = state.angles;
    let ktot = a.total_turning();
    let d = nodal_derivative(v, h);
    let squares: Vec<f64> = d.iter().map(|&q| q * q).collect();
    let cum = cumulative(&squares, h);
    let left_flux = a.cot_minus() * (d[0] + ktot);
    let p_values = v
        .iter()
        .zip(&cum)
        .map(|(&vi, &ci)| ktot * (vi - a.psi_minus()) - left_flux + ci)
        .collect();
    let q_value = a.cot_plus() * (d[m] + ktot) + left_flux + ktot * ktot - cum[m];
    CoefficientSlice { p_values, q_value }
}

/// One explicit midpoint step of the angle system.
///
/// The step is clamped to the diffusion stability limit. The physical
/// clock advances by dt = e^{2η} dτ and the left contact point by
/// dx = −e^{η} (v_z(0) + K)/sin ψ₋ dτ, both taken at the midpoint stage.
/// Dirichlet pins are untouched by construction. Non-finite samples after
/// the step surface as a divergence error reporting the physical time.
pub fn step_v(state: &AngleFlowState, dtau_max: f64) -> Result<AngleFlowState, FlowError> {
    let m = state.m();
    let h = state.h();
    let stable = SAFETY * h * h / 2.0;
    let dtau = dtau_max.min(stable);
    if !dtau.is_finite() || dtau <= f64::EPSILON * (1.0 + state.tau.abs()) * 1e-3 {
        return Err(FlowError::StepUnderflow {
            t: state.t,
            dt: dtau,
        });
    }
    let a = state.angles;
    let ktot = a.total_turning();

    // Stage 1: half step from the current slope field.
    let c1 = coefficients(state);
    let r1 = angle_rates(&state.v, &c1, h);
    let mut mid = state.clone();
    for i in 1..m {
        mid.v[i] = state.v[i] + 0.5 * dtau * r1[i - 1];
    }
    mid.eta = state.eta + 0.5 * dtau * c1.q_value;

    // Stage 2: full step with midpoint rates; the clocks and the contact
    // point integrate midpoint values too.
    let c2 = coefficients(&mid);
    let r2 = angle_rates(&mid.v, &c2, h);
    let mut next = state.clone();
    for i in 1..m {
        next.v[i] = state.v[i] + dtau * r2[i - 1];
    }
    next.eta = state.eta + dtau * c2.q_value;
    let vz0_mid = (-3.0 * mid.v[0] + 4.0 * mid.v[1] - mid.v[2]) * (0.5 / h);
    let exp_mid = mid.eta.exp();
    next.tau = state.tau + dtau;
    next.t = state.t + dtau * exp_mid * exp_mid;
    next.x_left = state.x_left - dtau * exp_mid * (vz0_mid + ktot) / a.psi_minus().sin();

    let healthy = next.eta.is_finite()
        && next.t.is_finite()
        && next.x_left.is_finite()
        && next.v.iter().all(|q| q.is_finite());
    if healthy {
        Ok(next)
    } else {
        Err(FlowError::Diverged { t: state.t })
    }
}

/// Advances the state until the rescaled clock reaches `tau_end`, snapped
/// exactly at relative tolerance 1e-12.
pub fn run_to_tau(mut state: AngleFlowState, tau_end: f64) -> Result<AngleFlowState, FlowError> {
    if !tau_end.is_finite() || tau_end < state.tau {
        return Err(InvalidInput::Unusable {
            what: format!(
                "tau_end = {tau_end} must be a finite time at or after tau = {}",
                state.tau
            ),
        }
        .into());
    }
    let tol = LANDING_TOL * (1.0 + tau_end.abs());
    while tau_end - state.tau > tol {
        state = step_v(&state, tau_end - state.tau)?;
    }
    state.tau = tau_end;
    Ok(state)
}

/// Advances the state until the physical clock reaches `t_end`, snapped
/// exactly at relative tolerance 1e-12.
///
/// Because η drifts inside a step, a landing step aimed with the current
/// length can overshoot; such a step is rejected and re-aimed with the
/// achieved rate, which converges in a retry or two.
pub fn run_to_t(mut state: AngleFlowState, t_end: f64) -> Result<AngleFlowState, FlowError> {
    if !t_end.is_finite() || t_end < state.t {
        return Err(InvalidInput::Unusable {
            what: format!(
                "t_end = {t_end} must be a finite time at or after t = {}",
                state.t
            ),
        }
        .into());
    }
    let tol = LANDING_TOL * (1.0 + t_end.abs());
    while t_end - state.t > tol {
        let gap = t_end - state.t;
        let mut aim = gap * (-2.0 * state.eta).exp();
        let mut tried = step_v(&state, aim)?;
        for _ in 0..8 {
            if tried.t <= t_end + tol {
                break;
            }
            aim *= gap / (tried.t - state.t);
            tried = step_v(&state, aim)?;
        }
        state = tried;
    }
    state.t = t_end;
    Ok(state)
}

/// Rebuilds the planar polyline from the angle samples: positions are the
/// cumulative quadrature of e^η (cos v, sin v) in z from the left contact
/// point, and the sampled angles transfer as the nodal tangents.
pub fn reconstruct_from_angle(state: &AngleFlowState) -> PlanarCurve {
    let h = state.h();
    let scale = state.eta.exp();
    let cos_v: Vec<f64> = state.v.iter().map(|q| q.cos()).collect();
    let sin_v: Vec<f64> = state.v.iter().map(|q| q.sin()).collect();
    let cx = cumulative(&cos_v, h);
    let cy = cumulative(&sin_v, h);
    PlanarCurve {
        angles: state.angles,
        x_left: state.x_left,
        theta: state.v.clone(),
        x: cx.iter().map(|&q| state.x_left + scale * q).collect(),
        y: cy.iter().map(|&q| scale * q).collect(),
    }
}

/// Tangential speed α of the arclength-fraction parameterization at
/// parameter p ∈ [−1, 1] (−1 is the left endpoint).
///
/// α integrates dα/dp = (L κ V + L')/2 with V = κ + K/L from the left
/// boundary value; converting the first term to the tangent-angle
/// variable gives
///
///   α(p) = −cot ψ₋ (κ(−1) + K/L) + ∫_{ψ₋}^{θ(p)} (κ + K/L) dθ
///          + (L'/2)(p + 1),
///
/// where θ(p) is located through the arclength fraction. At p = ±1 this
/// reduces to ±cot ψ± (κ(±1) + K/L); the reduction at p = −1 is exact
/// because the integration range is empty.
pub fn tangential_speed(profile: &CurvatureProfile, l: f64, dl_dt: f64, p: f64) -> f64 {
    assert!((-1.0..=1.0).contains(&p), "p must lie in [-1, 1]");
    assert!(l.is_finite() && l > 0.0, "length must be positive");
    let n = profile.n();
    let k = profile.kappa();
    let a = profile.angles();
    let k_over_l = a.total_turning() / l;
    let h = profile.h();

    // Arclength from the left endpoint against θ, flipped into ascending
    // order; slopes dθ/ds = κ are exact.
    let ds: Vec<f64> = k.iter().map(|&ki| -1.0 / ki).collect();
    let g = cumulative(&ds, h);
    let total = g[n];
    let mut s_nodes = Vec::with_capacity(n + 1);
    let mut theta_nodes = Vec::with_capacity(n + 1);
    let mut slopes = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let i = n - j;
        s_nodes.push(total - g[i]);
        theta_nodes.push(profile.theta(i));
        slopes.push(k[i]);
    }
    let target = 0.5 * (p + 1.0) * total;
    let (theta_p, _) = hermite_at(&s_nodes, &theta_nodes, &slopes, target);

    // Running integral of V against θ, read off at θ(p); its nodal
    // slopes are the integrand values themselves.
    let integrand: Vec<f64> = k.iter().map(|&ki| ki + k_over_l).collect();
    let running = cumulative(&integrand, h);
    let theta_grid = profile.theta_values();
    let (at_p, _) = hermite_at(&theta_grid, &running, &integrand, theta_p);

    -a.cot_minus() * (k[n] + k_over_l) + (at_p - running[n]) + 0.5 * dl_dt * (p + 1.0)
}

/// Nodal derivative on a uniform grid: central differences inside,
/// 3-point one-sided at the ends, all second order.
fn nodal_derivative(v: &[f64], h: f64) -> Vec<f64> {
    let m = v.len() - 1;
    let inv_2h = 0.5 / h;
    let mut d = Vec::with_capacity(m + 1);
    d.push((-3.0 * v[0] + 4.0 * v[1] - v[2]) * inv_2h);
    for i in 1..m {
        d.push((v[i + 1] - v[i - 1]) * inv_2h);
    }
    d.push((3.0 * v[m] - 4.0 * v[m - 1] + v[m - 2]) * inv_2h);
    d
}

/// Interior rates v_zz + (P + Q z) v_z by central differences; entry
/// i − 1 belongs to node i.
fn angle_rates(v: &[f64], coeffs: &CoefficientSlice, h: f64) -> Vec<f64> {
    let m = v.len() - 1;
    let inv_h2 = 1.0 / (h * h);
    let inv_2h = 0.5 / h;
    (1..m)
        .map(|i| {
            let d2 = (v[i + 1] - 2.0 * v[i] + v[i - 1]) * inv_h2;
            let d1 = (v[i + 1] - v[i - 1]) * inv_2h;
            let b = coeffs.p_values[i] + coeffs.q_value * (i as f64 * h);
            d2 + b * d1
        })
        .collect()
}

/// Cubic with prescribed endpoint values and slopes on a cell of width
/// `dx`, evaluated at local coordinate u ∈ [0, 1]; returns the value and
/// the derivative with respect to the outer variable.
fn hermite_local(v0: f64, v1: f64, d0: f64, d1: f64, dx: f64, u: f64) -> (f64, f64) {
    let u2 = u * u;
    let u3 = u2 * u;
    let val = (2.0 * u3 - 3.0 * u2 + 1.0) * v0
        + (u3 - 2.0 * u2 + u) * dx * d0
        + (-2.0 * u3 + 3.0 * u2) * v1
        + (u3 - u2) * dx * d1;
    let deriv = (6.0 * u2 - 6.0 * u) * (v0 - v1) / dx
        + (3.0 * u2 - 4.0 * u + 1.0) * d0
        + (3.0 * u2 - 2.0 * u) * d1;
    (val, deriv)
}

/// Piecewise cubic with prescribed nodal values and slopes over strictly
/// increasing nodes, evaluated at `x`; returns (value, derivative).
/// Queries at a node reproduce its data exactly.
fn hermite_at(xs: &[f64], ys: &[f64], ds: &[f64], x: f64) -> (f64, f64) {
    let last = xs.len() - 1;
    let j = xs.partition_point(|&xj| xj <= x).clamp(1, last) - 1;
    let dx = xs[j + 1] - xs[j];
    let u = (x - xs[j]) / dx;
    hermite_local(ys[j], ys[j + 1], ds[j], ds[j + 1], dx, u)
}
