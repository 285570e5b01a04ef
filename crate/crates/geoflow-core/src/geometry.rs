//! Curves parameterized by tangent angle and their static functionals.
//!
//! A concave curve with endpoints on the x-axis is stored through its
//! curvature as a function of the tangent angle θ ∈ [−ψ₊, ψ₋]. The angle
//! decreases monotonically along the curve (κ < 0), so θ doubles as a
//! coordinate: θ = ψ₋ at the left endpoint, θ = −ψ₊ at the right one.
//! Everything else — points, length, area, the endpoint constraint — is
//! derived from κ(θ) by quadrature.

use crate::error::InvalidInput;
use crate::quadrature::{cumulative, integrate};

/// Smallest grid supported by the solvers: coarser grids cannot resolve
/// the one-sided boundary stencils.
pub const MIN_GRID_N: usize = 16;

/// Contact angles at the two endpoints, both in the open interval (0, π).
///
/// `psi_plus` is the angle at the right endpoint, `psi_minus` at the left.
/// Their sum `K = psi_plus + psi_minus` is the total turning of the tangent
/// along the curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactAngles {
    psi_plus: f64,
    psi_minus: f64,
}

impl ContactAngles {
    pub fn new(psi_plus: f64, psi_minus: f64) -> Result<Self, InvalidInput> {
        for (name, value) in [("psi_plus", psi_plus), ("psi_minus", psi_minus)] {
            if !value.is_finite() {
                return Err(InvalidInput::NotFinite { name, value });
            }
            if value <= 0.0 || value >= std::f64::consts::PI {
                return Err(InvalidInput::AngleOutOfRange { name, value });
            }
        }
        Ok(Self {
            psi_plus,
            psi_minus,
        })
    }

    pub fn psi_plus(&self) -> f64 {
        self.psi_plus
    }

    pub fn psi_minus(&self) -> f64 {
        self.psi_minus
    }

    /// Total turning K = ψ₊ + ψ₋ of the tangent angle, in (0, 2π).
    pub fn total_turning(&self) -> f64 {
        self.psi_plus + self.psi_minus
    }

    pub fn cot_plus(&self) -> f64 {
        self.psi_plus.cos() / self.psi_plus.sin()
    }

    pub fn cot_minus(&self) -> f64 {
        self.psi_minus.cos() / self.psi_minus.sin()
    }
}

/// Curvature sampled on the uniform tangent-angle grid.
///
/// Node `i` sits at θᵢ = −ψ₊ + i·h with h = K/n, so node 0 is the right
/// endpoint and node n the left one. All samples are strictly negative.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureProfile {
    angles: ContactAngles,
    kappa: Vec<f64>,
}

impl CurvatureProfile {
    pub fn new(angles: ContactAngles, kappa: Vec<f64>) -> Result<Self, InvalidInput> {
        let len = kappa.len();
        if len < MIN_GRID_N + 1 || len % 2 == 0 {
            return Err(InvalidInput::BadGridSize {
                n: len.saturating_sub(1),
                min: MIN_GRID_N,
            });
        }
        for (index, &value) in kappa.iter().enumerate() {
            if !value.is_finite() {
                return Err(InvalidInput::NotFinite {
                    name: "kappa",
                    value,
                });
            }
            if value >= 0.0 {
                return Err(InvalidInput::NotConcave {
                    index,
                    value,
                    floor: 0.0,
                });
            }
        }
        Ok(Self { angles, kappa })
    }

    /// Builds a profile by sampling `f(θ)` on the n+1 grid nodes.
    pub fn from_fn(
        angles: ContactAngles,
        n: usize,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self, InvalidInput> {
        if n < MIN_GRID_N || n % 2 != 0 {
            return Err(InvalidInput::BadGridSize { n, min: MIN_GRID_N });
        }
        let h = angles.total_turning() / n as f64;
        let kappa = (0..=n).map(|i| f(-angles.psi_plus() + i as f64 * h)).collect();
        Self::new(angles, kappa)
    }

    pub fn angles(&self) -> ContactAngles {
        self.angles
    }

    /// Number of panels n (one less than the sample count).
    pub fn n(&self) -> usize {
        self.kappa.len() - 1
    }

    /// Grid spacing h = K/n.
    pub fn h(&self) -> f64 {
        self.angles.total_turning() / self.n() as f64
    }

    pub fn theta(&self, i: usize) -> f64 {
        -self.angles.psi_plus() + i as f64 * self.h()
    }

    pub fn theta_values(&self) -> Vec<f64> {
        (0..=self.n()).map(|i| self.theta(i)).collect()
    }

    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }

    pub fn into_kappa(self) -> Vec<f64> {
        self.kappa
    }

    /// Rescales all lengths by `lambda > 0` (curvature divides by it).
    pub fn scaled(&self, lambda: f64) -> Self {
        assert!(lambda > 0.0 && lambda.is_finite());
        Self {
            angles: self.angles,
            kappa: self.kappa.iter().map(|k| k / lambda).collect(),
        }
    }
}

/// Polyline samples of the curve, ordered from the left endpoint (θ = ψ₋)
/// to the right endpoint (θ = −ψ₊). `theta[k]` is the tangent angle at
/// point k and decreases along the curve.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarCurve {
    pub angles: ContactAngles,
    pub x_left: f64,
    pub theta: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl PlanarCurve {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x_right(&self) -> f64 {
        *self.x.last().expect("curve has points")
    }

    pub fn translated(&self, dx: f64) -> Self {
        Self {
            angles: self.angles,
            x_left: self.x_left + dx,
            theta: self.theta.clone(),
            x: self.x.iter().map(|x| x + dx).collect(),
            y: self.y.clone(),
        }
    }

    /// Diagonal of the bounding box; an upper bound on the diameter.
    pub fn bbox_diagonal(&self) -> f64 {
        let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
        for (&x, &y) in self.x.iter().zip(&self.y) {
            xmin = xmin.min(x);
            xmax = xmax.max(x);
            ymin = ymin.min(y);
            ymax = ymax.max(y);
        }
        ((xmax - xmin).powi(2) + (ymax - ymin).powi(2)).sqrt()
    }
}

/// Outcome of aligning two curves by a horizontal translation.
///
/// `shift` is the translation applied to the second curve that minimizes
/// the symmetric Hausdorff distance; `distance` is that minimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignmentResult {
    pub distance: f64,
    pub shift: f64,
}

/// Integrates the curvature profile into curve points.
///
/// x(θ) = x_left − ∫_θ^{ψ₋} cos θ̃/κ dθ̃ and y(θ) = −∫_θ^{ψ₋} sin θ̃/κ dθ̃,
/// so the left endpoint lands exactly at (x_left, 0) and the height of the
/// right endpoint equals minus the endpoint-constraint residual.
pub fn reconstruct_curve(profile: &CurvatureProfile, x_left: f64) -> PlanarCurve {
    let n = profile.n();
    let h = profile.h();
    let kappa = profile.kappa();
    let mut fc = vec![0.0; n + 1];
    let mut fs = vec![0.0; n + 1];
    for i in 0..=n {
        let theta = profile.theta(i);
        fc[i] = theta.cos() / kappa[i];
        fs[i] = theta.sin() / kappa[i];
    }
    let gc = cumulative(&fc, h);
    let gs = cumulative(&fs, h);
    let mut theta_pts = vec![0.0; n + 1];
    let mut x = vec![0.0; n + 1];
    let mut y = vec![0.0; n + 1];
    for k in 0..=n {
        let i = n - k;
        theta_pts[k] = profile.theta(i);
        x[k] = x_left - (gc[n] - gc[i]);
        y[k] = -(gs[n] - gs[i]);
    }
    PlanarCurve {
        angles: profile.angles(),
        x_left,
        theta: theta_pts,
        x,
        y,
    }
}

/// Total length L = −∫ dθ/κ.
pub fn length_of(profile: &CurvatureProfile) -> f64 {
    let f: Vec<f64> = profile.kappa().iter().map(|k| -1.0 / k).collect();
    integrate(&f, profile.h())
}

/// Enclosed area between the curve and the x-axis, computed from κ alone.
///
/// With y(θ) = −∫_θ^{ψ₋} sin θ̃/κ dθ̃ and dx = cos θ/κ dθ the area
/// ∫ y dx becomes a double integral in θ; the inner cumulative integral is
/// precomputed once so the whole evaluation is O(n). The expression is
/// bilinear in 1/κ, so scaling κ by 1/λ scales the result by exactly λ²
/// on the same grid.
pub fn signed_area(profile: &CurvatureProfile) -> f64 {
    let n = profile.n();
    let h = profile.h();
    let kappa = profile.kappa();
    let mut fs = vec![0.0; n + 1];
    for i in 0..=n {
        fs[i] = profile.theta(i).sin() / kappa[i];
    }
    let gs = cumulative(&fs, h);
    let mut outer = vec![0.0; n + 1];
    for i in 0..=n {
        outer[i] = (gs[n] - gs[i]) * profile.theta(i).cos() / kappa[i];
    }
    integrate(&outer, h)
}

/// Area of a polyline curve via ½∮⟨X, N⟩ ds with N the left-hand normal
/// of the traversal direction. The closing segment along the x-axis
/// contributes nothing (X is parallel to it), so only curve segments are
/// summed. Positive for left-to-right traversal above the axis; flips
/// sign when the traversal order is reversed.
pub fn curve_area(curve: &PlanarCurve) -> Result<f64, InvalidInput> {
    if curve.len() < 3 {
        return Err(InvalidInput::Unusable {
            what: format!("curve area needs at least 3 points, got {}", curve.len()),
        });
    }
    let mut twice = 0.0;
    for k in 0..curve.len() - 1 {
        let mx = 0.5 * (curve.x[k] + curve.x[k + 1]);
        let my = 0.5 * (curve.y[k] + curve.y[k + 1]);
        let dx = curve.x[k + 1] - curve.x[k];
        let dy = curve.y[k + 1] - curve.y[k];
        twice += my * dx - mx * dy;
    }
    Ok(0.5 * twice)
}

/// Endpoint constraint residual ∫ sinθ/κ dθ.
///
/// Zero exactly when both endpoints sit on the x-axis; equals minus the
/// height of the right endpoint after reconstruction.
pub fn endpoint_residual(profile: &CurvatureProfile) -> f64 {
    let f: Vec<f64> = profile
        .kappa()
        .iter()
        .enumerate()
        .map(|(i, k)| profile.theta(i).sin() / k)
        .collect();
    integrate(&f, profile.h())
}

/// Plain symmetric Hausdorff distance between two polylines.
pub fn hausdorff_distance(a: &PlanarCurve, b: &PlanarCurve) -> f64 {
    let seg_a = SegmentSet::new(a);
    let seg_b = SegmentSet::new(b);
    symmetric_hausdorff(a, &seg_a, b, &seg_b, 0.0)
}

/// Minimizes the symmetric Hausdorff distance over horizontal translations
/// of `b`, by golden-section search on a bracket wide enough to cover any
/// useful alignment (left-endpoint offset padded by both diameters).
///
/// The target is unimodal for near-congruent curves; the bracket endpoints
/// and the unshifted candidate guard against a search that wanders.
pub fn hausdorff_mod_translation(a: &PlanarCurve, b: &PlanarCurve) -> AlignmentResult {
    assert!(a.len() >= 2 && b.len() >= 2, "need non-degenerate curves");
    let seg_a = SegmentSet::new(a);
    let seg_b = SegmentSet::new(b);
    let eval = |shift: f64| symmetric_hausdorff(a, &seg_a, b, &seg_b, shift);

    let center = a.x_left - b.x_left;
    let pad = a.bbox_diagonal() + b.bbox_diagonal() + 1.0;
    let (mut lo, mut hi) = (center - pad, center + pad);

    // Golden-section search, absolute bracket tolerance 1e-8.
    let inv_phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let mut m1 = hi - inv_phi * (hi - lo);
    let mut m2 = lo + inv_phi * (hi - lo);
    let mut f1 = eval(m1);
    let mut f2 = eval(m2);
    while hi - lo > 1e-8 {
        if f1 <= f2 {
            hi = m2;
            m2 = m1;
            f2 = f1;
            m1 = hi - inv_phi * (hi - lo);
            f1 = eval(m1);
        } else {
            lo = m1;
            m1 = m2;
            f1 = f2;
            m2 = lo + inv_phi * (hi - lo);
            f2 = eval(m2);
        }
    }
    let (mut shift, mut distance) = if f1 <= f2 { (m1, f1) } else { (m2, f2) };
    // The endpoint-aligned shift is the exact answer for pure translates;
    // keep it when the search stopped a hair away from it.
    let f_center = eval(center);
    if f_center <= distance {
        shift = center;
        distance = f_center;
    }
    AlignmentResult { distance, shift }
}

/// Segments of a polyline ordered by their smaller x-coordinate, with a
/// running maximum of the larger one. Lets point queries prune by
/// horizontal separation alone, which keeps every query exact while
/// touching only a handful of segments for curves that nearly coincide.
struct SegmentSet {
    ax: Vec<f64>,
    ay: Vec<f64>,
    bx: Vec<f64>,
    by: Vec<f64>,
    lo: Vec<f64>,
    prefix_max_hi: Vec<f64>,
}

impl SegmentSet {
    fn new(curve: &PlanarCurve) -> Self {
        let m = curve.len() - 1;
        let mut order: Vec<usize> = (0..m).collect();
        let lo_of = |k: usize| curve.x[k].min(curve.x[k + 1]);
        order.sort_by(|&p, &q| lo_of(p).partial_cmp(&lo_of(q)).expect("finite x"));
        let mut set = Self {
            ax: Vec::with_capacity(m),
            ay: Vec::with_capacity(m),
            bx: Vec::with_capacity(m),
            by: Vec::with_capacity(m),
            lo: Vec::with_capacity(m),
            prefix_max_hi: Vec::with_capacity(m),
        };
        let mut running = f64::NEG_INFINITY;
        for &k in &order {
            set.ax.push(curve.x[k]);
            set.ay.push(curve.y[k]);
            set.bx.push(curve.x[k + 1]);
            set.by.push(curve.y[k + 1]);
            set.lo.push(lo_of(k));
            running = running.max(curve.x[k].max(curve.x[k + 1]));
            set.prefix_max_hi.push(running);
        }
        set
    }

    /// Distance from `(px, py)` to the set translated by `(shift, 0)`.
    fn distance_to_point(&self, px: f64, py: f64, shift: f64) -> f64 {
        let qx = px - shift;
        let m = self.lo.len();
        let start = self.lo.partition_point(|&lo| lo <= qx);
        let mut best = f64::INFINITY;
        // Rightward: lo is sorted, so once lo - qx exceeds best, all
        // remaining segments are at least that far away horizontally.
        for k in start..m {
            let gap = self.lo[k] - qx;
            if gap * gap >= best {
                break;
            }
            best = best.min(self.segment_dist2(k, qx, py));
        }
        // Leftward: prune with the running max of segment right edges.
        for k in (0..start).rev() {
            let gap = qx - self.prefix_max_hi[k];
            if gap > 0.0 && gap * gap >= best {
                break;
            }
            best = best.min(self.segment_dist2(k, qx, py));
        }
        best.sqrt()
    }

    fn segment_dist2(&self, k: usize, qx: f64, qy: f64) -> f64 {
        let dx = self.bx[k] - self.ax[k];
        let dy = self.by[k] - self.ay[k];
        let wx = qx - self.ax[k];
        let wy = qy - self.ay[k];
        let len2 = dx * dx + dy * dy;
        let t = if len2 > 0.0 {
            ((wx * dx + wy * dy) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let ex = wx - t * dx;
        let ey = wy - t * dy;
        ex * ex + ey * ey
    }
}

fn one_sided_sup(points: &PlanarCurve, segs: &SegmentSet, shift_of_segs: f64) -> f64 {
    let mut sup = 0.0f64;
    for (&px, &py) in points.x.iter().zip(&points.y) {
        sup = sup.max(segs.distance_to_point(px, py, shift_of_segs));
    }
    sup
}

fn symmetric_hausdorff(
    a: &PlanarCurve,
    seg_a: &SegmentSet,
    b: &PlanarCurve,
    seg_b: &SegmentSet,
    shift_b: f64,
) -> f64 {
    // Points of a vs segments of shifted b, then points of shifted b vs
    // segments of a. Shifting b by s is the same as shifting a by -s.
    let forward = one_sided_sup(a, seg_b, shift_b);
    let backward = one_sided_sup(b, seg_a, -shift_b);
    forward.max(backward)
}
