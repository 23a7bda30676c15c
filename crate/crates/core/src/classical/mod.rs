//! The classical kicked top: the stroboscopic map, its fixed point, the
//! control maps and the closed-form critical quantities. Everything here is a
//! pure function.

mod control;
mod critical;
mod fixed_point;
mod map;

pub use control::{
    control_step_radial, control_step_spherical, ControlKind, ControlParams, ControlRegion, OutsidePolicy,
};
pub use critical::{
    critical_probability, critical_probability_from, lyapunov_linearized, moment_threshold, moment_threshold_from,
};
pub use fixed_point::{
    find_fixed_point, fixed_point_series, lambda_plus_series, stability_eigenvalues, transcendental_residual,
    FixedPointData, TRIVIAL_FIXED_POINTS,
};
pub use map::{kicked_top_step, tangent_basis, KickParams, PhasePoint};

/// Kick strength at which the nontrivial fixed point loses stability, `√2·π`.
pub const K_CRITICAL: f64 = std::f64::consts::SQRT_2 * std::f64::consts::PI;
