use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point on the unit sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl PhasePoint {
    pub const NORTH: PhasePoint = PhasePoint::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        PhasePoint { x, y, z }
    }

    /// `(sin θ cos φ, sin θ sin φ, cos θ)`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        PhasePoint::new(st * cp, st * sp, ct)
    }

    /// Polar angle in `[0, π]` and azimuth in `(-π, π]`.
    pub fn angles(&self) -> (f64, f64) {
        (self.z.clamp(-1.0, 1.0).acos(), self.y.atan2(self.x))
    }

    pub fn dot(&self, o: &PhasePoint) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(&self, o: &PhasePoint) -> PhasePoint {
        PhasePoint::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm_sqr(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(&self) -> PhasePoint {
        *self * (1.0 / self.norm())
    }

    pub fn distance(&self, o: &PhasePoint) -> f64 {
        (*self - *o).norm()
    }

    /// Projects onto the sphere, rejecting the origin and non-finite input.
    pub fn try_normalized(&self) -> Result<PhasePoint> {
        let n = self.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::invalid("point", format!("cannot normalize {self:?}")));
        }
        Ok(*self * (1.0 / n))
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl Add for PhasePoint {
    type Output = PhasePoint;
    fn add(self, o: PhasePoint) -> PhasePoint {
        PhasePoint::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for PhasePoint {
    type Output = PhasePoint;
    fn sub(self, o: PhasePoint) -> PhasePoint {
        PhasePoint::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for PhasePoint {
    type Output = PhasePoint;
    fn mul(self, s: f64) -> PhasePoint {
        PhasePoint::new(self.x * s, self.y * s, self.z * s)
    }
}

/// Kick strength `k`; the precession angle per period is fixed to `π/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KickParams {
    pub k: f64,
}

impl KickParams {
    pub fn new(k: f64) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::invalid("k", format!("kick strength must be positive, got {k}")));
        }
        Ok(KickParams { k })
    }
}

/// One period of the classical kicked top: a quarter turn about `y` followed
/// by a twist about `z` whose angle is `k` times the new `z`.
#[inline]
pub fn kicked_top_step(p: PhasePoint, kick: KickParams) -> PhasePoint {
    debug_assert!(
        (p.norm_sqr() - 1.0).abs() < 1e-8,
        "kicked_top_step needs a unit vector, got |p|² = {}",
        p.norm_sqr()
    );
    let (s, c) = (kick.k * p.x).sin_cos();
    PhasePoint::new(p.z * c + p.y * s, -p.z * s + p.y * c, -p.x)
}

/// Orthonormal tangent basis `(e1, e2)` at `r`, built by Gram–Schmidt from the
/// coordinate axis least aligned with `r`. `e1 × e2 = r`.
pub fn tangent_basis(r: &PhasePoint) -> (PhasePoint, PhasePoint) {
    let a = [r.x.abs(), r.y.abs(), r.z.abs()];
    let axis = if a[0] <= a[1] && a[0] <= a[2] {
        PhasePoint::new(1.0, 0.0, 0.0)
    } else if a[1] <= a[2] {
        PhasePoint::new(0.0, 1.0, 0.0)
    } else {
        PhasePoint::new(0.0, 0.0, 1.0)
    };
    let e1 = (axis - *r * axis.dot(r)).normalized();
    let e2 = r.cross(&e1);
    (e1, e2)
}
