use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::map::PhasePoint;
use crate::error::{Error, Result};

/// Region of phase space where the control map may be applied.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControlRegion {
    /// The `x > 0` hemisphere.
    #[default]
    PositiveX,
    FullSphere,
}

impl ControlRegion {
    pub fn contains(&self, p: &PhasePoint) -> bool {
        match self {
            ControlRegion::PositiveX => p.x > 0.0,
            ControlRegion::FullSphere => true,
        }
    }
}

/// Which contraction is used.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControlKind {
    /// Linear contraction of `(θ, φ)` toward `(θ0, φ0)`.
    #[default]
    Spherical,
    /// `(a r + (1-a) r0)` projected back onto the sphere.
    Radial,
}

/// What a control draw does when the point lies outside the control region.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutsidePolicy {
    #[default]
    Identity,
    Chaotic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlParams {
    /// Contraction factor; `a = 1` is no control and `a = 0` a full reset.
    pub a: f64,
    pub target: PhasePoint,
    pub region: ControlRegion,
    pub kind: ControlKind,
    pub outside: OutsidePolicy,
}

impl ControlParams {
    pub fn new(a: f64, target: PhasePoint, region: ControlRegion) -> Result<Self> {
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::invalid("a", format!("must lie in [0, 1], got {a}")));
        }
        if ((target.norm_sqr()) - 1.0).abs() > 1e-10 {
            return Err(Error::invalid("target", "must be a unit vector"));
        }
        if !region.contains(&target) {
            return Err(Error::invalid("target", "must lie inside the control region"));
        }
        Ok(ControlParams {
            a,
            target,
            region,
            kind: ControlKind::default(),
            outside: OutsidePolicy::default(),
        })
    }

    pub fn with_kind(mut self, kind: ControlKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn with_outside(mut self, outside: OutsidePolicy) -> Self {
        self.outside = outside;
        self
    }

    /// Applies the configured contraction, ignoring the region.
    pub fn contract(&self, p: PhasePoint) -> PhasePoint {
        match self.kind {
            ControlKind::Spherical => control_step_spherical(p, self),
            ControlKind::Radial => control_step_radial(p, self),
        }
    }
}

fn wrap_angle(d: f64) -> f64 {
    let mut w = d % (2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    } else if w <= -PI {
        w += 2.0 * PI;
    }
    w
}

/// Contracts polar and azimuthal angles linearly toward the target. The
/// azimuth moves along the shorter arc.
pub fn control_step_spherical(p: PhasePoint, ctrl: &ControlParams) -> PhasePoint {
    if ctrl.a == 1.0 {
        return p;
    }
    if ctrl.a == 0.0 {
        return ctrl.target;
    }
    let (theta, phi) = p.angles();
    let (theta0, phi0) = ctrl.target.angles();
    let a = ctrl.a;
    let theta_new = a * theta + (1.0 - a) * theta0;
    let phi_new = phi0 + a * wrap_angle(phi - phi0);
    PhasePoint::from_angles(theta_new, phi_new)
}

/// `(a r + (1-a) r0) / |a r + (1-a) r0|`.
pub fn control_step_radial(p: PhasePoint, ctrl: &ControlParams) -> PhasePoint {
    if ctrl.a == 1.0 {
        return p;
    }
    if ctrl.a == 0.0 {
        return ctrl.target;
    }
    let v = p * ctrl.a + ctrl.target * (1.0 - ctrl.a);
    // Antipodal input with a = 1/2 has no defined image; stay put.
    v.try_normalized().unwrap_or(p)
}
