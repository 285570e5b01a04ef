//! Evolution of concave planar curves with endpoints sliding on the x-axis.
//!
//! A curve meets the axis at prescribed contact angles and moves with
//! normal velocity κ + K/L, which preserves the enclosed area while
//! dissipating length-based energy. The crate provides:
//!
//! - [`geometry`]: tangent-angle curve representation and static
//!   functionals (length, area, endpoint constraint, Hausdorff metric).
//! - [`quadrature`]: the composite Simpson rules everything is built on.
//! - [`traveling_wave`]: the one-parameter family of profiles that
//!   translate rigidly, and the speed equation solver.
//! - [`theta_flow`]: the curvature evolution in tangent-angle coordinates,
//!   valid while the curve stays concave.
//! - [`angle_flow`]: the tangent-angle evolution on a fixed unit domain,
//!   valid without concavity and used as an independent cross-check.
//! - [`diagnostics`]: energy, Lyapunov functional, Hölder gap,
//!   stationarity residuals, support function, and trajectory monitoring.

pub mod angle_flow;
pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod quadrature;
pub mod theta_flow;
pub mod traveling_wave;

pub use error::{FlowError, InvalidInput};
pub use geometry::{AlignmentResult, ContactAngles, CurvatureProfile, PlanarCurve};
