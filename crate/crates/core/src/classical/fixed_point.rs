use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::map::PhasePoint;
use crate::error::{Error, Result};

/// Fixed points on the `y` axis exist for every kick strength.
pub const TRIVIAL_FIXED_POINTS: [PhasePoint; 2] = [PhasePoint::new(0.0, 1.0, 0.0), PhasePoint::new(0.0, -1.0, 0.0)];

/// The nontrivial fixed point `r0 = (x0, x0·cot(k x0/2), -x0)` on the smallest
/// positive branch, with its linear stability data. The mirror `-x0` branch
/// is not tracked.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointData {
    pub k: f64,
    pub x0: f64,
    pub r0: PhasePoint,
    /// Stability scalar; the point is stable for `|h| < 1`.
    pub h: f64,
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
}

impl FixedPointData {
    pub fn is_stable(&self) -> bool {
        self.h.abs() < 1.0
    }

    /// `|λ₊|`, the local expansion factor. Exactly one in the stable regime.
    pub fn instability(&self) -> f64 {
        if self.is_stable() {
            1.0
        } else {
            self.lambda_plus.norm().max(self.lambda_minus.norm())
        }
    }

    /// Polar and azimuthal angles of `r0`.
    pub fn angles(&self) -> (f64, f64) {
        self.r0.angles()
    }
}

/// `x²(1 + sin²(k x/2)) - sin²(k x/2)`, which vanishes exactly on fixed points.
pub fn transcendental_residual(k: f64, x: f64) -> f64 {
    let s2 = (0.5 * k * x).sin().powi(2);
    x * x * (1.0 + s2) - s2
}

fn residual_derivative(k: f64, x: f64) -> f64 {
    let (s, c) = (0.5 * k * x).sin_cos();
    // d/dx sin²(kx/2) = k s c
    let ds2 = k * s * c;
    2.0 * x * (1.0 + s * s) + x * x * ds2 - ds2
}

/// Smallest `x0 > 0` solving the fixed-point condition, via a scan for the
/// first sign change on `(0, 2π/k]`, bisection, and a Newton polish.
pub fn find_fixed_point(k: f64) -> Result<FixedPointData> {
    if !(k.is_finite() && k > 2.0) {
        return Err(Error::NoFixedPoint { k });
    }
    let g = |x: f64| transcendental_residual(k, x);
    let upper = 2.0 * PI / k;
    const SCAN: usize = 4096;
    let step = upper / SCAN as f64;

    // g < 0 just above zero for k > 2; shrink until that holds.
    let mut lo = step;
    let mut guard = 0;
    while g(lo) >= 0.0 {
        lo *= 0.5;
        guard += 1;
        if guard > 200 {
            return Err(Error::NoFixedPoint { k });
        }
    }
    let mut hi = lo;
    loop {
        let next = (hi + step).min(upper);
        if g(next) > 0.0 {
            hi = next;
            break;
        }
        lo = next;
        hi = next;
        if next >= upper {
            return Err(Error::NoFixedPoint { k });
        }
    }

    while hi - lo > 1e-15 * hi.max(1e-300) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut x0 = 0.5 * (lo + hi);
    for _ in 0..3 {
        let d = residual_derivative(k, x0);
        if d == 0.0 {
            break;
        }
        let next = x0 - g(x0) / d;
        if !(next > 0.0 && next.is_finite()) || g(next).abs() > g(x0).abs() {
            break;
        }
        x0 = next;
    }

    let half = 0.5 * k * x0;
    let r0 = PhasePoint::new(x0, x0 / half.tan(), -x0);
    let (h, lambda_plus, lambda_minus) = stability_eigenvalues(k, x0);
    Ok(FixedPointData {
        k,
        x0,
        r0,
        h,
        lambda_plus,
        lambda_minus,
    })
}

/// `h = sin²(k x0/2) - (k x0/2)·cot(k x0/2)` and `λ± = -[h ± √(h² - 1)]`.
/// For `|h| < 1` the pair is complex with unit modulus.
pub fn stability_eigenvalues(k: f64, x0: f64) -> (f64, Complex64, Complex64) {
    let half = 0.5 * k * x0;
    let h = half.sin().powi(2) - half / half.tan();
    let root = Complex64::new(h * h - 1.0, 0.0).sqrt();
    let hc = Complex64::new(h, 0.0);
    (h, -(hc + root), -(hc - root))
}

/// Large-`k` expansion of `x0` through order `k⁻⁴`.
pub fn fixed_point_series(k: f64) -> f64 {
    2.0 * PI / k - 4.0 * PI / k.powi(2) + 8.0 * PI / k.powi(3) - 16.0 * PI * (1.0 + 2.0 * PI * PI / 3.0) / k.powi(4)
}

/// Large-`k` expansion of `λ₊` through order `k⁻¹`.
pub fn lambda_plus_series(k: f64) -> f64 {
    -k + (1.0 + 4.0 * PI * PI) / k
}
