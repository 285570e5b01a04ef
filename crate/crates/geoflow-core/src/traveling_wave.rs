//! Profiles that translate rigidly along the x-axis.
//!
//! A curve moving with speed c in the x-direction without changing shape
//! must have curvature κ(θ) = −c sinθ − K/L. At the unit-length
//! normalization the speed is pinned by the endpoint constraint: c is the
//! unique root of
//!
//!   g(c) = ∫ sinθ / (c sinθ + K) dθ  over θ ∈ [−ψ₊, ψ₋],
//!
//! which is strictly decreasing in c on the admissible bracket where the
//! denominator stays positive for every θ (endpoints −K/s_max and
//! K/(−s_min) with [s_min, s_max] the range of sinθ). Solving
//! g on the same grid the profile is sampled on makes the discrete length
//! exactly 1 and the discrete residual exactly 0:
//! Σwᵢ = K and Σwᵢ(c sinθᵢ + K)/(c sinθᵢ + K) = c·g(c) + K·L forces L = 1
//! whenever g(c) = 0.

use crate::error::InvalidInput;
use crate::geometry::{
    endpoint_residual, length_of, reconstruct_curve, signed_area, ContactAngles,
    CurvatureProfile, PlanarCurve,
};
use crate::quadrature::simpson_weights;

/// Grid used when a wave speed is requested without a target grid; fine
/// enough that the quadrature error sits below the root tolerance.
const REFERENCE_N: usize = 8192;

/// Bracket shrink factor keeping the denominator c sinθ + K positive.
const BRACKET_MARGIN: f64 = 1.0 - 1e-6;

/// Below this speed the translation term is numerically zero and the
/// span formula switches to its analytic c → 0 limit.
const SPAN_ZERO_SPEED: f64 = 1e-9;

/// A rigidly translating solution: curvature profile, speed, and the
/// derived length and area. Construct via [`build_wave`] and rescale via
/// [`scale_to_area`]; the constructors enforce concavity, the endpoint
/// constraint, and the length normalization.
#[derive(Debug, Clone)]
pub struct TravelingWave {
    angles: ContactAngles,
    c: f64,
    length: f64,
    area: f64,
    profile: CurvatureProfile,
}

impl TravelingWave {
    pub fn angles(&self) -> ContactAngles {
        self.angles
    }

    /// Translation speed along the x-axis (positive: moves right).
    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn profile(&self) -> &CurvatureProfile {
        &self.profile
    }
}

/// Range of sinθ over θ ∈ [−ψ₊, ψ₋]. When an angle exceeds π/2 the
/// interval contains the corresponding extremum of sine, so the range end
/// saturates at ∓1; the admissible speed bracket keeping c sinθ + K > 0
/// for every θ is (−K/s_max, K/(−s_min)).
fn sine_range(angles: ContactAngles) -> (f64, f64) {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let s_min = if angles.psi_plus() >= half_pi {
        -1.0
    } else {
        -angles.psi_plus().sin()
    };
    let s_max = if angles.psi_minus() >= half_pi {
        1.0
    } else {
        angles.psi_minus().sin()
    };
    (s_min, s_max)
}

/// g(c) and the grid data needed to evaluate it repeatedly.
struct SpeedEquation {
    weights: Vec<f64>,
    sin_theta: Vec<f64>,
    turning: f64,
}

impl SpeedEquation {
    fn new(angles: ContactAngles, n: usize) -> Self {
        let turning = angles.total_turning();
        let h = turning / n as f64;
        let sin_theta = (0..=n)
            .map(|i| (-angles.psi_plus() + i as f64 * h).sin())
            .collect();
        Self {
            weights: simpson_weights(n, h),
            sin_theta,
            turning,
        }
    }

    fn g(&self, c: f64) -> f64 {
        self.weights
            .iter()
            .zip(&self.sin_theta)
            .map(|(w, s)| w * s / (c * s + self.turning))
            .sum()
    }
}

/// Root of g on the given grid: bisection to localize, secant to polish,
/// always safeguarded by the sign-change bracket.
fn speed_on_grid(angles: ContactAngles, n: usize) -> Result<f64, InvalidInput> {
    let eq = SpeedEquation::new(angles, n);
    let k = angles.total_turning();
    let (s_min, s_max) = sine_range(angles);
    let mut lo = -k / s_max * BRACKET_MARGIN;
    let mut hi = k / -s_min * BRACKET_MARGIN;
    let mut g_lo = eq.g(lo);
    let mut g_hi = eq.g(hi);
    if !(g_lo > 0.0 && g_hi < 0.0) {
        return Err(InvalidInput::Unusable {
            what: format!(
                "wave speed bracket lost its sign change: g({lo:.6e}) = {g_lo:.3e}, \
                 g({hi:.6e}) = {g_hi:.3e}"
            ),
        });
    }
    // Bisection localizes the root; plain secant from the bracket ends
    // then converges superlinearly on the smooth monotone g. Bisection
    // alone would stop at bracket width 1e-14 anyway, so the secant
    // failing back to it costs nothing but iterations.
    while hi - lo > 1e-6 * (1.0 + lo.abs().max(hi.abs())) {
        let mid = 0.5 * (lo + hi);
        let g_mid = eq.g(mid);
        if g_mid > 0.0 {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
            g_hi = g_mid;
        }
    }
    let (mut c0, mut f0) = (lo, g_lo);
    let (mut c1, mut f1) = (hi, g_hi);
    for _ in 0..60 {
        let denom = f1 - f0;
        if denom == 0.0 {
            break;
        }
        let c2 = c1 - f1 * (c1 - c0) / denom;
        if !c2.is_finite() || c2 < lo - 1e-6 || c2 > hi + 1e-6 {
            break;
        }
        (c0, f0) = (c1, f1);
        (c1, f1) = (c2, eq.g(c2));
        if (c1 - c0).abs() <= 1e-15 * (1.0 + c1.abs()) {
            break;
        }
    }
    // Keep the better of the secant result and the bisection bracket.
    let (c, residual) = if f1.abs() <= g_lo.abs().min(g_hi.abs()) {
        (c1, f1)
    } else if g_lo.abs() < g_hi.abs() {
        (lo, g_lo)
    } else {
        (hi, g_hi)
    };
    if residual.abs() > 1e-12 {
        return Err(InvalidInput::Unusable {
            what: format!("wave speed root left residual {residual:.3e}"),
        });
    }
    Ok(c)
}

/// Wave speed at unit length for the given contact angles, on a reference
/// grid fine enough that the value is grid-independent to ~1e-12.
///
/// Zero for symmetric angles; sign matches sign(ψ₋ − ψ₊).
pub fn solve_wave_speed(angles: ContactAngles) -> Result<f64, InvalidInput> {
    speed_on_grid(angles, REFERENCE_N)
}

/// Builds the unit-length wave on an n-panel grid.
///
/// The speed is the root of the discrete g on the same grid, which makes
/// `length_of` exactly 1 and `endpoint_residual` exactly 0 on that grid
/// (up to roundoff); both are re-verified to 1e-10 before returning.
pub fn build_wave(angles: ContactAngles, n: usize) -> Result<TravelingWave, InvalidInput> {
    let c = speed_on_grid(angles, n)?;
    let k = angles.total_turning();
    let profile = CurvatureProfile::from_fn(angles, n, |theta| -c * theta.sin() - k)?;
    let length = length_of(&profile);
    let residual = endpoint_residual(&profile);
    let area = signed_area(&profile);
    if (length - 1.0).abs() > 1e-10 || residual.abs() > 1e-10 {
        return Err(InvalidInput::Unusable {
            what: format!(
                "wave self-check failed: length {length:.12}, endpoint residual {residual:.3e}"
            ),
        });
    }
    if area <= 0.0 {
        return Err(InvalidInput::Unusable {
            what: format!("wave area is not positive: {area:.6e}"),
        });
    }
    Ok(TravelingWave {
        angles,
        c,
        length: 1.0,
        area,
        profile,
    })
}

/// Rescales a wave to enclose `target_area`.
///
/// With λ = √(target/area): κ divides by λ, length and span multiply by
/// λ, the speed divides by λ. All ratios are exact on the fixed grid; the
/// stored area is recomputed from the scaled profile.
pub fn scale_to_area(wave: &TravelingWave, target_area: f64) -> Result<TravelingWave, InvalidInput> {
    if !target_area.is_finite() || target_area <= 0.0 {
        return Err(InvalidInput::Unusable {
            what: format!("target area must be positive and finite, got {target_area}"),
        });
    }
    let lambda = (target_area / wave.area).sqrt();
    let profile = wave.profile.scaled(lambda);
    Ok(TravelingWave {
        angles: wave.angles,
        c: wave.c / lambda,
        length: wave.length * lambda,
        area: signed_area(&profile),
        profile,
    })
}

/// Horizontal extent x_right − x_left of the wave.
///
/// Closed form (1/c)·log((c sinψ₋ + K_L)/(−c sinψ₊ + K_L)) with
/// K_L = K/length; the c → 0 limit (sinψ₋ + sinψ₊)/K_L is used for
/// |c| < 1e-9 where the log quotient would cancel catastrophically.
pub fn wave_span(wave: &TravelingWave) -> f64 {
    let k_l = wave.angles.total_turning() / wave.length;
    let sp = wave.angles.psi_plus().sin();
    let sm = wave.angles.psi_minus().sin();
    if wave.c.abs() < SPAN_ZERO_SPEED {
        (sm + sp) / k_l
    } else {
        ((wave.c * sm + k_l) / (-wave.c * sp + k_l)).ln() / wave.c
    }
}

/// Curve position at time t: the t = 0 curve rigidly shifted by c·t.
pub fn wave_at(wave: &TravelingWave, t: f64, x_left0: f64) -> PlanarCurve {
    reconstruct_curve(&wave.profile, x_left0 + wave.c * t)
}
